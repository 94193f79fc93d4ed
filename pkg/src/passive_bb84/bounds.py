"""Finite-key bounds on single-photon statistics.

Two quantities fix the privacy-amplification cost:

* an upper bound on the number of phase errors among Z-basis single-photon
  detections, assembled from X-basis error counts and cross-click counts of
  the decoy and vacuum intensities;
* a lower bound on the number of Z-basis single-photon detections from the
  usual three-intensity decoy estimate.

Every sum of conditional probabilities is tied to an observed count with
Kato's inequality, each application failing with probability ``eps``; the
phase-error bound uses five applications and the detection bound four.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields

from .channel import expected_counts
from .concentration import (
    DeviationInput,
    deviation_lower,
    deviation_upper,
    kato_lower_coeffs,
    kato_upper_coeffs,
)
from .protocol import single_photon_prob

__all__ = [
    "EstimateSet",
    "BoundsResult",
    "lemma_constants",
    "decoy_coefficients",
    "single_photon_z_yield",
    "single_photon_phase_error_prob",
    "default_estimates",
    "phase_error_upper",
    "single_photon_z_lower",
    "finite_key_bounds",
]

PH_SATURATED = "ph-saturated"
Z_FLOORED = "z-floored"


@dataclass(frozen=True)
class EstimateSet:
    """Pre-run estimates centring each Kato application.

    A poor estimate only loosens the bounds; it never invalidates them.
    """

    est_ph1: float
    est_z1: float
    est_x_error_D: float
    est_x_error_V: float
    est_cross_D: float
    est_cross_V: float
    est_z_S: float
    est_z_D: float
    est_z_V: float

    def clipped(self, N):
        return EstimateSet(**{f.name: min(max(getattr(self, f.name), 0.0), N) for f in fields(self)})


@dataclass(frozen=True)
class BoundsResult:
    n_ph1_upper: float
    n_z1_lower: float
    branch_flags: tuple = ()


def lemma_constants(params):
    """Weights (c1, c2) of X-basis errors and cross clicks in the phase-error bound."""
    q, p_Z, p_X, d = params.q, params.p_Z, params.p_X, params.d
    if q == 0 or p_X == 0:
        raise ZeroDivisionError("phase-error weights need q > 0 and p_X > 0")
    if q >= 0.5:
        raise ValueError(f"phase-error weights need q < 0.5, got q={q}")
    no_dark = (1.0 - d) ** 2
    c1 = (1.0 - q) * p_Z / (q * p_X)
    c2 = p_Z * (1.0 - q) * (1.0 - 2.0 * q) * no_dark / (1.0 - (q * q + (1.0 - q) ** 2) * no_dark)
    return c1, c2


def decoy_coefficients(params):
    """Weights (t_S, t_D, t_V) of the single-photon decoy lower bound.

    P(single-photon Z detection) >= sum_w t_w P(Z detection with intensity w).
    """
    mu_S, mu_D = params.mu_S, params.mu_D
    if mu_S == mu_D:
        raise ZeroDivisionError("decoy coefficients need mu_S != mu_D")
    if min(params.p_S, params.p_D, params.p_V) <= 0:
        raise ZeroDivisionError("decoy coefficients need p_S, p_D, p_V > 0")
    p1 = single_photon_prob(params)
    gap = mu_S - mu_D
    t_S = -p1 / params.p_S * mu_D * math.exp(mu_S) / (mu_S * gap)
    t_D = p1 / params.p_D * mu_S * math.exp(mu_D) / (mu_D * gap)
    t_V = -p1 / params.p_V * mu_S / (mu_D * gap)
    return t_S, t_D, t_V


def single_photon_z_yield(params, channel):
    """P(Z-line-only click | Alice emitted exactly one photon)."""
    eta, q, d = channel.eta, params.q, params.d
    x_silent = (1.0 - d) ** 2
    return x_silent * (eta * (1.0 - q) + (1.0 - eta) * d * (2.0 - d))


def single_photon_phase_error_prob(params, channel):
    """P(Z-line-only click with a phase error | one photon emitted, Z basis).

    A photon-triggered click disagrees with Alice's virtual X outcome only
    through misalignment, unless the partner detector also fires; dark-count
    clicks and double clicks are coin flips.
    """
    eta, q, d, delta = channel.eta, params.q, params.d, params.delta_mis
    x_silent = (1.0 - d) ** 2
    photon_click = eta * (1.0 - q) * ((1.0 - d) * delta + d / 2.0)
    dark_click = (1.0 - eta) * d * (2.0 - d) / 2.0
    return x_silent * (photon_click + dark_click)


def default_estimates(params, channel, counts=None):
    """Expectation-valued estimates for every Kato application.

    ``counts`` defaults to :func:`expected_counts`; pass it in when already
    computed.
    """
    if counts is None:
        counts = expected_counts(params, channel)
    pre = params.N * params.p_Z * single_photon_prob(params)
    est = EstimateSet(
        est_ph1=pre * single_photon_phase_error_prob(params, channel),
        est_z1=pre * single_photon_z_yield(params, channel),
        est_x_error_D=counts.n_x_error["D"],
        est_x_error_V=counts.n_x_error["V"],
        est_cross_D=counts.n_cross["D"],
        est_cross_V=counts.n_cross["V"],
        est_z_S=counts.n_z["S"],
        est_z_D=counts.n_z["D"],
        est_z_V=counts.n_z["V"],
    )
    return est.clipped(params.N)


def _dev(kind, M, M_est, N, eps, asymptotic):
    if asymptotic:
        return 0.0
    d = DeviationInput(M=min(M, N), M_est=M_est, N=N, eps=eps)
    return deviation_upper(d) if kind == "U" else deviation_lower(d)


def _phase_error_upper(counts, est, params, eps, include_cross, asymptotic):
    N = params.N
    if asymptotic:
        a_ph, b_ph = 0.0, 0.0
    else:
        k = kato_lower_coeffs(N, est.est_ph1, eps)
        a_ph, b_ph = k.a, k.b
        if a_ph >= math.sqrt(N) / 2.0:
            return float(N), PH_SATURATED

    c1, c2 = lemma_constants(params)
    e_D = math.exp(params.mu_D)

    def decoy_bracket(n_D, est_D, n_V, est_V):
        upper_D = n_D + _dev("U", n_D, est_D, N, eps, asymptotic)
        lower_V = n_V - _dev("L", n_V, est_V, N, eps, asymptotic)
        return e_D * upper_D / params.p_D - lower_V / params.p_V

    total = c1 * decoy_bracket(
        counts.n_x_error["D"], est.est_x_error_D, counts.n_x_error["V"], est.est_x_error_V
    )
    if include_cross:
        total += c2 * decoy_bracket(
            counts.n_cross["D"], est.est_cross_D, counts.n_cross["V"], est.est_cross_V
        )
    value = single_photon_prob(params) / params.mu_D * total
    value += (b_ph - a_ph) * math.sqrt(N)
    value /= 1.0 - 2.0 * a_ph / math.sqrt(N)
    return min(max(value, 0.0), float(N)), None


def _single_photon_z_lower(counts, est, params, eps, asymptotic):
    N = params.N
    if asymptotic:
        a_z, b_z = 0.0, 0.0
    else:
        k = kato_upper_coeffs(N, est.est_z1, eps)
        a_z, b_z = k.a, k.b
        if a_z <= -math.sqrt(N) / 2.0:
            return 0.0, Z_FLOORED

    t_S, t_D, t_V = decoy_coefficients(params)
    n = counts.n_z
    value = (
        t_S * (n["S"] + _dev("U", n["S"], est.est_z_S, N, eps, asymptotic))
        + t_D * (n["D"] - _dev("L", n["D"], est.est_z_D, N, eps, asymptotic))
        + t_V * (n["V"] + _dev("U", n["V"], est.est_z_V, N, eps, asymptotic))
        - (b_z - a_z) * math.sqrt(N)
    )
    value /= 1.0 + 2.0 * a_z / math.sqrt(N)
    return min(max(value, 0.0), float(N)), None


def phase_error_upper(counts, est, params, eps, *, include_cross=True, asymptotic=False):
    """Upper bound on single-photon phase errors, failing with probability 5 eps.

    Args:
        counts: observed (or expected) statistics.
        est: pre-run estimates centring the Kato coefficients.
        params: protocol configuration; ``params.N`` is the pulse count.
        eps: failure probability per Kato application.
        include_cross: drop the cross-click term when False, which gives the
            active-basis-choice approximation.
        asymptotic: set every finite-size correction to zero.

    Returns:
        The bound clamped to [0, N]; N itself when the Kato coefficient makes
        the finite bound vacuous.
    """
    return _phase_error_upper(counts, est, params, eps, include_cross, asymptotic)[0]


def single_photon_z_lower(counts, est, params, eps, *, asymptotic=False):
    """Lower bound on Z-basis single-photon detections, failing with probability 4 eps.

    Clamped to [0, N].
    """
    return _single_photon_z_lower(counts, est, params, eps, asymptotic)[0]


def finite_key_bounds(counts, est, params, eps, *, include_cross=True, asymptotic=False):
    ph, ph_flag = _phase_error_upper(counts, est, params, eps, include_cross, asymptotic)
    z, z_flag = _single_photon_z_lower(counts, est, params, eps, asymptotic)
    flags = tuple(f for f in (ph_flag, z_flag) if f)
    return BoundsResult(n_ph1_upper=ph, n_z1_lower=z, branch_flags=flags)
