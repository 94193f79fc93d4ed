"""Pulse-by-pulse Monte-Carlo simulation of the passive-measurement protocol.

Each pulse: Alice draws bit, basis and intensity; the photon number is
Poisson; linear loss thins it binomially; Bob's beam splitter sends each
surviving photon to the X line with probability ``q``. Within a line a photon
prepared in the matching basis reaches the detector of Alice's bit, flipped
with probability ``delta_mis``; a photon in the other basis picks either
detector at random. Every detector fires a dark count independently with
probability ``d``.

For single-photon Z-basis emissions that end as a Z-line-only click the
simulation also records the virtual phase-error outcome: a click caused by the
photon disagrees with Alice's virtual X outcome with probability
``delta_mis``; a dark-count-only click or a double click disagrees with
probability 1/2.

Random streams are Philox generators keyed by (seed, block index), so a trial
is reproducible and its blocks can be simulated in any order.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np
from scipy import stats

from .bounds import default_estimates, finite_key_bounds
from .channel import (
    ObservedCounts,
    conditional_click_prob,
    conditional_error_prob,
    cross_click_prob,
)
from .protocol import INTENSITIES, require_valid

__all__ = [
    "PulseRecord",
    "TrialCounts",
    "SoundnessReport",
    "AgreementReport",
    "simulate_pulse",
    "simulate_block",
    "run_trial",
    "validate_bounds",
    "validate_channel_model",
    "expected_flat",
    "violation_budget",
    "BLOCK_SIZE",
]

BLOCK_SIZE = 1 << 16

NO_CLICK, Z_CLICK, X_CLICK, CROSS_CLICK = 0, 1, 2, 3
OUTCOMES = ("no-click", "z-click", "x-click", "cross-click")
PHASE_NA = -1


@dataclass(frozen=True)
class PulseRecord:
    a: int
    alpha: str
    omega: str
    n: int
    m: int
    outcome: str
    bit: int | None
    phase_error_flag: bool | None


@dataclass(frozen=True)
class TrialCounts:
    observed: ObservedCounts
    n_ph1: int
    n_z1: int
    pulses: int


def block_rng(seed, block):
    entropy = list(seed) if isinstance(seed, (tuple, list)) else [seed]
    ss = np.random.SeedSequence(entropy=entropy, spawn_key=(block,))
    return np.random.Generator(np.random.Philox(ss))


def simulate_block(params, channel, rng, size):
    """Simulate ``size`` pulses; returns a dict of per-pulse arrays."""
    p_Z, q, d, delta = params.p_Z, params.q, params.d, params.delta_mis
    a = rng.integers(0, 2, size)
    alpha_z = rng.random(size) < p_Z
    omega = rng.choice(3, size=size, p=[params.p_S, params.p_D, params.p_V])
    mus = np.array([params.mu(w) for w in INTENSITIES])
    n = rng.poisson(mus[omega])
    m = rng.binomial(n, channel.eta)
    k_x = rng.binomial(m, q)
    k_z = m - k_x

    # photons reaching the detector that reports Alice's bit
    z_right = rng.binomial(k_z, np.where(alpha_z, 1.0 - delta, 0.5))
    x_right = rng.binomial(k_x, np.where(alpha_z, 0.5, 1.0 - delta))
    dark = rng.random((4, size)) < d
    z_r = (z_right > 0) | dark[0]
    z_w = (k_z - z_right > 0) | dark[1]
    x_r = (x_right > 0) | dark[2]
    x_w = (k_x - x_right > 0) | dark[3]
    z_click = z_r | z_w
    x_click = x_r | x_w

    outcome = np.full(size, NO_CLICK, dtype=np.int8)
    outcome[z_click & ~x_click] = Z_CLICK
    outcome[x_click & ~z_click] = X_CLICK
    outcome[z_click & x_click] = CROSS_CLICK

    coin = rng.integers(0, 2, size).astype(bool)
    z_err = np.where(z_r & z_w, coin, z_w)
    x_err = np.where(x_r & x_w, coin, x_w)
    err = np.where(outcome == Z_CLICK, z_err, np.where(outcome == X_CLICK, x_err, False))
    bit = np.where(err, 1 - a, a)

    # virtual X-basis comparison, single-photon Z emissions with Z-only clicks
    ph_coin = rng.integers(0, 2, size).astype(bool)
    misaligned = rng.random(size) < delta
    photon_on_z = k_z == 1
    partner_dark = np.where(z_right == 1, dark[1], dark[0])
    ph_err = np.where(photon_on_z & ~partner_dark, misaligned, ph_coin)
    tracked = alpha_z & (n == 1) & (outcome == Z_CLICK)
    phase = np.where(tracked, ph_err.astype(np.int8), PHASE_NA)

    return {
        "a": a, "alpha_z": alpha_z, "omega": omega, "n": n, "m": m,
        "outcome": outcome, "bit": bit, "error": err, "phase": phase,
    }


def simulate_pulse(params, channel, rng):
    """One pulse as a :class:`PulseRecord`."""
    s = simulate_block(params, channel, rng, 1)
    outcome = int(s["outcome"][0])
    phase = int(s["phase"][0])
    return PulseRecord(
        a=int(s["a"][0]),
        alpha="Z" if s["alpha_z"][0] else "X",
        omega=INTENSITIES[int(s["omega"][0])],
        n=int(s["n"][0]),
        m=int(s["m"][0]),
        outcome=OUTCOMES[outcome],
        bit=int(s["bit"][0]) if outcome in (Z_CLICK, X_CLICK) else None,
        phase_error_flag=None if phase == PHASE_NA else bool(phase),
    )


def _block_tallies(s):
    omega, outcome, alpha_z, err = s["omega"], s["outcome"], s["alpha_z"], s["error"]
    z_sift = alpha_z & (outcome == Z_CLICK)
    x_sift = ~alpha_z & (outcome == X_CLICK)
    cross = outcome == CROSS_CLICK
    t = np.zeros((5, 3), dtype=np.int64)
    for k in range(3):
        w = omega == k
        t[0, k] = np.count_nonzero(z_sift & w)
        t[1, k] = np.count_nonzero(x_sift & w)
        t[2, k] = np.count_nonzero(x_sift & w & err)
        t[3, k] = np.count_nonzero(cross & w)
        t[4, k] = np.count_nonzero(z_sift & w & err)
    n_ph1 = int(np.count_nonzero(s["phase"] == 1))
    n_z1 = int(np.count_nonzero(s["phase"] != PHASE_NA))
    return t, n_ph1, n_z1


def run_trial(params, channel, seed, pulses=None):
    """Simulate one protocol run and aggregate its public and virtual counts.

    Args:
        params: protocol configuration.
        channel: linear-loss channel.
        seed: integer or sequence of integers identifying the trial.
        pulses: pulse count; defaults to ``params.N``.
    """
    total = int(params.N if pulses is None else pulses)
    tallies = np.zeros((5, 3), dtype=np.int64)
    n_ph1 = n_z1 = 0
    for block, start in enumerate(range(0, total, BLOCK_SIZE)):
        size = min(BLOCK_SIZE, total - start)
        s = simulate_block(params, channel, block_rng(seed, block), size)
        t, ph, z1 = _block_tallies(s)
        tallies += t
        n_ph1 += ph
        n_z1 += z1
    as_map = lambda row: {w: int(tallies[row, k]) for k, w in enumerate(INTENSITIES)}
    n_sift = int(tallies[0].sum())
    sift_err = int(tallies[4].sum())
    observed = ObservedCounts(
        n_z=as_map(0),
        n_x=as_map(1),
        n_x_error=as_map(2),
        n_cross=as_map(3),
        n_sift=n_sift,
        e_bit=sift_err / n_sift if n_sift else 0.0,
        n_sift_error=sift_err,
    )
    return TrialCounts(observed=observed, n_ph1=n_ph1, n_z1=n_z1, pulses=total)


def _clopper_pearson(k, n, level=0.95):
    ci = stats.binomtest(k, n).proportion_ci(confidence_level=level, method="exact")
    return [float(ci.low), float(ci.high)]


@dataclass
class SoundnessReport:
    seed: int
    trials: int
    eps: float
    upper_violations: int
    lower_violations: int
    upper_budget: float
    lower_budget: float
    upper_ci: list
    lower_ci: list
    n_ph1: list
    n_ph1_upper: list
    n_z1: list
    n_z1_lower: list
    upper_scale: float = 1.0
    lower_scale: float = 1.0

    @property
    def passed(self):
        return (self.upper_violations <= self.upper_budget
                and self.lower_violations <= self.lower_budget)

    def to_dict(self):
        out = asdict(self)
        out["passed"] = self.passed
        return out


def violation_budget(failure_prob, trials, sigmas=3.0):
    """Allowed violation count: expected failures plus ``sigmas`` binomial sd."""
    return failure_prob * trials + sigmas * math.sqrt(failure_prob * (1 - failure_prob) * trials)


def validate_bounds(params, channel, sec, trials, seed, *, upper_scale=1.0, lower_scale=1.0):
    """Empirical failure frequency of both single-photon bounds.

    Every trial draws fresh integer counts; the bounds use the trial counts
    and expectation-valued estimates. ``upper_scale`` / ``lower_scale``
    multiply the bounds before comparison and exist for mutation checks.
    """
    require_valid(params)
    est = default_estimates(params, channel)
    ph, ph_u, z1, z1_l = [], [], [], []
    for t in range(trials):
        tc = run_trial(params, channel, (seed, t))
        b = finite_key_bounds(tc.observed, est, params, sec.eps)
        ph.append(tc.n_ph1)
        ph_u.append(b.n_ph1_upper * upper_scale)
        z1.append(tc.n_z1)
        z1_l.append(b.n_z1_lower * lower_scale)
    up = int(sum(x > u for x, u in zip(ph, ph_u)))
    lo = int(sum(x < l for x, l in zip(z1, z1_l)))
    return SoundnessReport(
        seed=seed,
        trials=trials,
        eps=sec.eps,
        upper_violations=up,
        lower_violations=lo,
        upper_budget=violation_budget(min(5 * sec.eps, 1.0), trials),
        lower_budget=violation_budget(min(4 * sec.eps, 1.0), trials),
        upper_ci=_clopper_pearson(up, trials),
        lower_ci=_clopper_pearson(lo, trials),
        n_ph1=ph,
        n_ph1_upper=ph_u,
        n_z1=z1,
        n_z1_lower=z1_l,
        upper_scale=upper_scale,
        lower_scale=lower_scale,
    )


@dataclass
class AgreementReport:
    seed: int
    pulses: int
    z_scores: dict
    observed: dict
    expected: dict
    threshold: float = 5.0

    @property
    def max_abs_z(self):
        return max((abs(z) for z in self.z_scores.values()), default=0.0)

    @property
    def passed(self):
        return self.max_abs_z <= self.threshold

    def to_dict(self):
        out = asdict(self)
        out["max_abs_z"] = self.max_abs_z
        out["passed"] = self.passed
        return out


def _z_score(obs, exp, pulses):
    # each count is a sum of per-pulse Bernoulli indicators
    p = exp / pulses
    var = pulses * p * (1.0 - p)
    if var <= 0:
        return 0.0 if obs == exp else math.inf
    return (obs - exp) / math.sqrt(var)


def _flatten(counts):
    flat = {}
    for name in ("n_z", "n_x", "n_x_error", "n_cross"):
        for w in INTENSITIES:
            flat[f"{name}[{w}]"] = float(getattr(counts, name)[w])
    flat["n_sift"] = float(counts.n_sift)
    flat["n_sift_error"] = float(counts.n_sift_error)
    return flat


def expected_flat(params, channel):
    """Closed-form expectations keyed like :class:`AgreementReport`, misalignment excluded."""
    # bypasses expected_counts so eta = 0, d = 0 (nothing sifted) stays legal
    N = params.N
    flat = {}
    for w in INTENSITIES:
        flat[f"n_z[{w}]"] = N * params.p_Z * params.p(w) * conditional_click_prob("Z", w, params, channel)
    for w in INTENSITIES:
        flat[f"n_x[{w}]"] = N * params.p_X * params.p(w) * conditional_click_prob("X", w, params, channel)
    for w in INTENSITIES:
        flat[f"n_x_error[{w}]"] = N * params.p_X * params.p(w) * conditional_error_prob("X", w, params, channel)
    for w in INTENSITIES:
        flat[f"n_cross[{w}]"] = N * params.p(w) * cross_click_prob(w, params, channel)
    flat["n_sift"] = sum(flat[f"n_z[{w}]"] for w in INTENSITIES)
    flat["n_sift_error"] = sum(
        N * params.p_Z * params.p(w) * conditional_error_prob("Z", w, params, channel)
        for w in INTENSITIES
    )
    return flat


def validate_channel_model(params, channel, pulses, seed, *, expectation=None):
    """z-score of every simulated count against its closed-form expectation.

    Only defined without misalignment, where the simulation and the
    closed forms describe the same model exactly.

    Args:
        expectation: optional replacement for the closed-form expectations,
            ``f(params, channel) -> dict`` keyed like the report; used for
            mutation checks.
    """
    if params.delta_mis != 0:
        raise ValueError("channel-model validation requires delta_mis = 0")
    require_valid(params)
    scaled = params.replace(N=pulses)
    expected = (expectation or expected_flat)(scaled, channel)
    tc = run_trial(params, channel, seed, pulses=pulses)
    observed = _flatten(tc.observed)
    z = {k: _z_score(observed[k], expected[k], pulses) for k in expected}
    return AgreementReport(seed=seed, pulses=pulses, z_scores=z, observed=observed, expected=expected)

