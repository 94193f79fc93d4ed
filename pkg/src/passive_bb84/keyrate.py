"""Secret key length and key rate.

The key length is

    l = N_Z1_L * (1 - h(N_ph1_U / N_Z1_L)) - xi - N_EC,     N_EC = f * N_sift * h(e_bit)

and the protocol is (eps_c + sqrt(2) sqrt(9 eps + 2^-xi))-secure.

Asymptotic mode is the limit N -> infinity of the same formula: counts are
expectations, every Kato deviation term and the xi overhead vanish, and the
rate is reported per pulse.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .bounds import default_estimates, finite_key_bounds
from .channel import expected_counts
from .protocol import require_valid

__all__ = [
    "SecurityParams",
    "KeyRateResult",
    "MODES",
    "BASELINES",
    "binary_entropy",
    "secrecy_epsilons",
    "error_correction_cost",
    "key_length",
    "key_rate",
]

MODES = ("finite", "asymptotic")
BASELINES = ("passive", "active-approx")

# Kato applications: 5 for the phase-error bound, 4 for the decoy bound.
PHASE_ERROR_APPLICATIONS = 9


@dataclass(frozen=True)
class SecurityParams:
    eps: float = 1e-20 / 144
    eps_c: float = 1e-10 / 2
    xi: float = 71.0

    def __post_init__(self):
        if not 0 < self.eps < 1:
            raise ValueError(f"eps must lie in (0, 1), got {self.eps}")
        if not 0 < self.eps_c < 1:
            raise ValueError(f"eps_c must lie in (0, 1), got {self.eps_c}")
        if not self.xi > 0:
            raise ValueError(f"xi must be positive, got {self.xi}")

    @property
    def eps_ph(self):
        return PHASE_ERROR_APPLICATIONS * self.eps

    @property
    def eps_s(self):
        return math.sqrt(2.0) * math.sqrt(self.eps_ph + 2.0 ** (-self.xi))

    @property
    def eps_sec(self):
        return self.eps_c + self.eps_s


@dataclass(frozen=True)
class KeyRateResult:
    n_z1_lower: float
    n_ph1_upper: float
    phase_error_ratio: float
    n_ec: float
    key_length: float
    rate: float
    mode: str
    baseline: str
    e_bit: float = float("nan")
    n_sift: float = float("nan")
    branch_flags: tuple = ()


def binary_entropy(x):
    """h(x), saturated at 1 for x > 1/2."""
    if x < 0:
        raise ValueError(f"binary entropy needs x >= 0, got {x}")
    if x > 0.5:
        return 1.0
    if x == 0:
        return 0.0
    return -x * math.log2(x) - (1.0 - x) * math.log2(1.0 - x)


def secrecy_epsilons(eps, eps_c, xi):
    return SecurityParams(eps=eps, eps_c=eps_c, xi=xi)


def error_correction_cost(n_sift, e_bit, f):
    return f * n_sift * binary_entropy(e_bit)


def key_length(n_z1_lower, n_ph1_upper, xi, n_ec):
    if n_z1_lower <= 0:
        return -xi - n_ec
    ratio = n_ph1_upper / n_z1_lower
    return n_z1_lower * (1.0 - binary_entropy(ratio)) - xi - n_ec


def key_rate(params, channel, sec=None, mode="finite", baseline="passive", est=None):
    """Key rate per emitted pulse from expectation-valued counts.

    Args:
        params: protocol configuration.
        channel: linear-loss channel.
        sec: security budget; defaults to the 1e-10 overall budget.
        mode: ``"finite"`` or ``"asymptotic"``.
        baseline: ``"passive"`` or ``"active-approx"``; the latter drops the
            cross-click term of the phase-error bound.
        est: optional override of the Kato estimates.

    Raises:
        DegenerateChannelError: when no sifted detections are expected.
    """
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}, got {mode!r}")
    if baseline not in BASELINES:
        raise ValueError(f"baseline must be one of {BASELINES}, got {baseline!r}")
    sec = sec or SecurityParams()
    require_valid(params)
    counts = expected_counts(params, channel)
    if est is None:
        est = default_estimates(params, channel, counts)
    asymptotic = mode == "asymptotic"
    bounds = finite_key_bounds(
        counts, est, params, sec.eps,
        include_cross=baseline == "passive",
        asymptotic=asymptotic,
    )
    n_ec = error_correction_cost(counts.n_sift, counts.e_bit, params.f)
    xi = 0.0 if asymptotic else sec.xi
    length = key_length(bounds.n_z1_lower, bounds.n_ph1_upper, xi, n_ec)
    ratio = bounds.n_ph1_upper / bounds.n_z1_lower if bounds.n_z1_lower > 0 else math.inf
    return KeyRateResult(
        n_z1_lower=bounds.n_z1_lower,
        n_ph1_upper=bounds.n_ph1_upper,
        phase_error_ratio=ratio,
        n_ec=n_ec,
        key_length=length,
        rate=max(length, 0.0) / params.N,
        mode=mode,
        baseline=baseline,
        e_bit=counts.e_bit,
        n_sift=counts.n_sift,
        branch_flags=bounds.branch_flags,
    )
