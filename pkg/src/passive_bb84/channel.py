"""Expected protocol statistics under a linear-loss channel.

The beam splitter sends light to the X line with transmittance ``q``, so for
an intensity-mu pulse after loss ``eta`` the X line is empty with probability
exp(-mu eta q) and the Z line with probability exp(-mu eta (1 - q)).

Misalignment is not part of the click/error probabilities here. It enters
:func:`expected_counts` additively: ``delta_mis`` is added to the sifted-key
error rate and ``delta_mis * N_X,w`` to each X-basis error count.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .protocol import INTENSITIES, require_valid

__all__ = [
    "ObservedCounts",
    "DegenerateChannelError",
    "conditional_click_prob",
    "conditional_error_prob",
    "cross_click_prob",
    "line_probabilities",
    "expected_counts",
    "expected_sift_errors",
]


class DegenerateChannelError(ValueError):
    """No sifted detections are expected, so the bit error rate is undefined."""


@dataclass(frozen=True)
class ObservedCounts:
    """Public statistics of one protocol run, keyed by intensity label.

    Expectation-valued counts are reals; Monte-Carlo runs fill the same type
    with integers.
    """

    n_z: dict
    n_x: dict
    n_x_error: dict
    n_cross: dict
    n_sift: float
    e_bit: float
    n_sift_error: float = field(default=0.0)

    def to_dict(self):
        return {
            "n_z": dict(self.n_z),
            "n_x": dict(self.n_x),
            "n_x_error": dict(self.n_x_error),
            "n_cross": dict(self.n_cross),
            "n_sift": self.n_sift,
            "e_bit": self.e_bit,
            "n_sift_error": self.n_sift_error,
        }


def _line_vacuum(mu_eta, share):
    return math.exp(-mu_eta * share)


def _line_splits(basis, omega, params, channel):
    # (fraction to the line being measured, fraction to the other line)
    mu_eta = params.mu(omega) * channel.eta
    if basis == "Z":
        return mu_eta, 1.0 - params.q, params.q
    if basis == "X":
        return mu_eta, params.q, 1.0 - params.q
    raise ValueError(f"basis must be 'Z' or 'X', got {basis!r}")


def _no_dark_pair(d):
    # (1-d)^2 for the two detectors of one line
    return (1.0 - d) ** 2


def _some_dark_pair(d):
    # 1-(1-d)^2 without cancellation for tiny d
    return d * (2.0 - d)


def conditional_click_prob(basis, omega, params, channel):
    """Probability of a click on the ``basis`` line only, given intensity ``omega``.

    Independent of Alice's basis; the photon-number-only beam splitter does
    not see polarisation.
    """
    mu_eta, own, other = _line_splits(basis, omega, params, channel)
    d = params.d
    other_silent = _line_vacuum(mu_eta, other) * _no_dark_pair(d)
    # 1 - exp(-x)(1-d)^2 evaluated as -expm1(-x + 2 log1p(-d))
    own_clicks = -math.expm1(-mu_eta * own + 2.0 * math.log1p(-d))
    return other_silent * own_clicks


def conditional_error_prob(basis, omega, params, channel):
    """Probability of a single-line ``basis`` click carrying a bit error, matched bases.

    Only dark counts produce errors here: a dark count on the wrong detector
    with the line otherwise empty, or a double click resolved by a random bit.
    """
    mu_eta, own, other = _line_splits(basis, omega, params, channel)
    d = params.d
    other_silent = _line_vacuum(mu_eta, other) * _no_dark_pair(d)
    own_vacuum = _line_vacuum(mu_eta, own)
    term_a = own_vacuum * (d * (1.0 - d) + d * d / 2.0)
    term_b = -math.expm1(-mu_eta * own) * d / 2.0
    return other_silent * (term_a + term_b)


def cross_click_prob(omega, params, channel):
    """Probability that both lines register at least one click."""
    mu_eta = params.mu(omega) * channel.eta
    q = params.q
    some_dark = _some_dark_pair(params.d)
    z_photons = -math.expm1(-mu_eta * (1.0 - q))
    x_photons = -math.expm1(-mu_eta * q)
    z_empty = math.exp(-mu_eta * (1.0 - q))
    x_empty = math.exp(-mu_eta * q)
    return (
        z_photons * x_photons
        + z_photons * x_empty * some_dark
        + x_photons * z_empty * some_dark
        + math.exp(-mu_eta) * some_dark**2
    )


def line_probabilities(omega, params, channel):
    """Outcome distribution (no click, Z only, X only, cross) for one pulse."""
    mu_eta = params.mu(omega) * channel.eta
    none = math.exp(-mu_eta) * _no_dark_pair(params.d) ** 2
    return {
        "none": none,
        "Z": conditional_click_prob("Z", omega, params, channel),
        "X": conditional_click_prob("X", omega, params, channel),
        "cross": cross_click_prob(omega, params, channel),
    }


def expected_sift_errors(params, channel):
    """Expected sifted-key errors excluding misalignment."""
    N = params.N
    return sum(
        N * params.p(w) * params.p_Z * conditional_error_prob("Z", w, params, channel)
        for w in INTENSITIES
    )


def expected_counts(params, channel):
    """Expected value of every public statistic.

    Raises:
        DegenerateChannelError: if no sifted detections are expected.
    """
    require_valid(params)
    N = params.N
    n_z, n_x, n_x_error, n_cross = {}, {}, {}, {}
    for w in INTENSITIES:
        p_w = params.p(w)
        n_z[w] = N * params.p_Z * p_w * conditional_click_prob("Z", w, params, channel)
        n_x[w] = N * params.p_X * p_w * conditional_click_prob("X", w, params, channel)
        n_x_error[w] = (
            N * p_w * params.p_X * conditional_error_prob("X", w, params, channel)
            + params.delta_mis * n_x[w]
        )
        n_cross[w] = N * p_w * cross_click_prob(w, params, channel)
    n_sift = sum(n_z.values())
    if not n_sift > 0:
        raise DegenerateChannelError("no sifted detections expected; e_bit undefined")
    sift_errors = expected_sift_errors(params, channel)
    e_bit = sift_errors / n_sift + params.delta_mis
    return ObservedCounts(
        n_z=n_z,
        n_x=n_x,
        n_x_error=n_x_error,
        n_cross=n_cross,
        n_sift=n_sift,
        e_bit=e_bit,
        n_sift_error=sift_errors + params.delta_mis * n_sift,
    )
