"""Kato's martingale concentration inequality.

For Bernoulli random variables xi_1..xi_N adapted to a filtration, with
Lambda_N their sum, Kato's inequality bounds the gap between Lambda_N and the
sum of conditional probabilities by a deviation term

    [b N + a (2 Lambda_N - N)] / sqrt(N)

for any b >= |a|, failing with probability exp(-(2b^2 - 2a^2) / (1 +/- 4a/(3 sqrt N))^2).
Fixing that failure probability to ``eps``, the coefficients below are the ones
minimising the deviation term when Lambda_N is replaced by a pre-run estimate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

__all__ = [
    "KatoCoefficients",
    "DeviationInput",
    "kato_upper_coeffs",
    "kato_lower_coeffs",
    "deviation_upper",
    "deviation_lower",
]


@dataclass(frozen=True)
class KatoCoefficients:
    a: float
    b: float

    def __post_init__(self):
        if not self.b > 0 or self.b < abs(self.a):
            raise ValueError(f"invalid Kato coefficients: need b >= |a| and b > 0, got {self}")


@dataclass(frozen=True)
class DeviationInput:
    """Arguments of a deviation term.

    Attributes:
        M: realised count (the sum Lambda_N).
        M_est: estimate of M fixed before the run; only the coefficients use it.
        N: number of trials.
        eps: failure probability of this single application.
    """

    M: float
    M_est: float
    N: float
    eps: float

    def __post_init__(self):
        if self.N < 1:
            raise ValueError(f"N must be >= 1, got {self.N}")
        if not 0 <= self.M <= self.N:
            raise ValueError(f"M must lie in [0, N], got M={self.M}, N={self.N}")
        if not 0 <= self.M_est <= self.N:
            raise ValueError(f"M_est must lie in [0, N], got M_est={self.M_est}, N={self.N}")
        if not 0 < self.eps < 1:
            raise ValueError(f"eps must lie in (0, 1), got {self.eps}")


def _check_domain(N, C, eps):
    if not N >= 1:
        raise ValueError(f"N must be >= 1, got {N}")
    if not 0 <= C <= N:
        raise ValueError(f"C must lie in [0, N], got C={C}, N={N}")
    if not 0 < eps < 1:
        raise ValueError(f"eps must lie in (0, 1), got {eps}")


def _optimal_a(N, C, eps, sign):
    # sign=+1: upper-bound variant, sign=-1: lower-bound variant (a -> -a).
    ln_eps = math.log(eps)
    sqrt_n = math.sqrt(N)
    bracket = 9.0 * C * (N - C) - 2.0 * N * ln_eps
    radicand = -N * N * ln_eps * bracket
    assert radicand >= 0.0, radicand
    numerator = sign * (
        216.0 * sqrt_n * C * (N - C) * ln_eps - 48.0 * N * sqrt_n * ln_eps**2
    ) + 27.0 * math.sqrt(2.0) * (N - 2.0 * C) * math.sqrt(radicand)
    return numerator / (4.0 * (9.0 * N - 8.0 * ln_eps) * bracket)


def _b_of_a(a, N, eps, sign):
    return math.sqrt(a * a + 0.5 * (1.0 + sign * 4.0 * a / (3.0 * math.sqrt(N))) ** 2 * math.log(1.0 / eps))


def kato_upper_coeffs(N, C, eps):
    """Optimal (a, b) for upper-bounding a sum of conditional probabilities.

    Args:
        N: number of trials, N >= 1.
        C: value standing in for the realised count, 0 <= C <= N.
        eps: failure probability in (0, 1).

    Returns:
        KatoCoefficients minimising b N + a (2C - N) subject to the failure
        probability being exactly ``eps``.
    """
    _check_domain(N, C, eps)
    a = _optimal_a(N, C, eps, +1)
    return KatoCoefficients(a, _b_of_a(a, N, eps, +1))


def kato_lower_coeffs(N, C, eps):
    """Optimal (a, b) for lower-bounding a sum of conditional probabilities.

    Mirror of :func:`kato_upper_coeffs`; satisfies a_L(N, C) = -a_U(N, N - C).
    """
    _check_domain(N, C, eps)
    a = _optimal_a(N, C, eps, -1)
    return KatoCoefficients(a, _b_of_a(a, N, eps, -1))


def _deviation(d, coeffs):
    return (coeffs.b * d.N + coeffs.a * (2.0 * d.M - d.N)) / math.sqrt(d.N)


def deviation_upper(d):
    """Delta_U: sum of probabilities <= M + Delta_U except with probability eps."""
    return _deviation(d, kato_upper_coeffs(d.N, d.M_est, d.eps))


def deviation_lower(d):
    """Delta_L: sum of probabilities >= M - Delta_L except with probability eps."""
    return _deviation(d, kato_lower_coeffs(d.N, d.M_est, d.eps))
