"""Protocol configuration and source photon statistics.

Alice sends phase-randomised weak coherent pulses with three intensities:
signal ``S``, decoy ``D`` and vacuum ``V`` (mu_V = 0). Bob's beam splitter
routes each photon to the X line with probability ``q`` and to the Z line
otherwise; all four threshold detectors share the dark-count probability ``d``.

Detector efficiency is not a separate field. It is folded into the channel
transmission: ``eta = eta_fiber * eta_det``.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass

INTENSITIES = ("S", "D", "V")
BASES = ("Z", "X")

__all__ = [
    "INTENSITIES",
    "BASES",
    "ProtocolParams",
    "ChannelParams",
    "InvalidParamsError",
    "poisson_photon_prob",
    "single_photon_prob",
    "validate_params",
    "require_valid",
]

_PROB_TOL = 1e-12


class InvalidParamsError(ValueError):
    """Raised when a configuration violates the protocol assumptions."""

    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))


@dataclass(frozen=True)
class ProtocolParams:
    """Source, detector and post-processing configuration.

    Field names double as the keys of the JSON config document. Defaults are
    the key-rate simulation setup with d = 1e-9.
    """

    N: float = 1e10
    p_Z: float = 0.9
    p_X: float = 0.1
    p_S: float = 0.8
    p_D: float = 0.1
    p_V: float = 0.1
    mu_S: float = 0.5
    mu_D: float = 0.05
    mu_V: float = 0.0
    q: float = 0.1
    d: float = 1e-9
    f: float = 1.16
    delta_mis: float = 0.03

    def mu(self, omega):
        return {"S": self.mu_S, "D": self.mu_D, "V": self.mu_V}[omega]

    def p(self, omega):
        return {"S": self.p_S, "D": self.p_D, "V": self.p_V}[omega]

    def p_basis(self, basis):
        return {"Z": self.p_Z, "X": self.p_X}[basis]

    def replace(self, **changes):
        return dataclasses.replace(self, **changes)

    def with_basis_bias(self, p_Z):
        """Passive-optimum tie: X probability and BS transmittance both 1 - p_Z."""
        return self.replace(p_Z=p_Z, p_X=1.0 - p_Z, q=1.0 - p_Z)

    @classmethod
    def from_dict(cls, data):
        names = {f.name for f in dataclasses.fields(cls)}
        unknown = set(data) - names
        if unknown:
            raise InvalidParamsError([f"unknown protocol field {k!r}" for k in sorted(unknown)])
        return cls(**data)

    def to_dict(self):
        return dataclasses.asdict(self)


@dataclass(frozen=True)
class ChannelParams:
    """Linear-loss channel; ``eta`` includes the detection efficiency.

    ``eta = 0`` is accepted as the fully-lossy limit used in degenerate checks.
    """

    eta: float

    def __post_init__(self):
        if not 0 <= self.eta <= 1:
            raise ValueError(f"eta must lie in [0, 1], got {self.eta}")


def poisson_photon_prob(omega, n, params):
    """Probability that a pulse of intensity ``omega`` contains ``n`` photons."""
    if n < 0:
        raise ValueError(f"photon number must be >= 0, got {n}")
    mu = params.mu(omega)
    if mu == 0.0:
        return 1.0 if n == 0 else 0.0
    return math.exp(-mu + n * math.log(mu) - math.lgamma(n + 1))


def single_photon_prob(params):
    """p_int(1): probability that a pulse, intensity unspecified, holds one photon."""
    return sum(params.p(w) * params.mu(w) * math.exp(-params.mu(w)) for w in INTENSITIES)


def validate_params(params):
    """List every violated protocol assumption; an empty list means valid."""
    v = []
    probs = {
        "p_Z": params.p_Z, "p_X": params.p_X,
        "p_S": params.p_S, "p_D": params.p_D, "p_V": params.p_V,
    }
    for name, value in probs.items():
        if not 0 <= value <= 1:
            v.append(f"{name} must lie in [0,1], got {value}")
    if abs(params.p_Z + params.p_X - 1) > _PROB_TOL:
        v.append(f"p_Z + p_X must equal 1, got {params.p_Z + params.p_X}")
    if abs(params.p_S + params.p_D + params.p_V - 1) > _PROB_TOL:
        v.append(f"p_S + p_D + p_V must equal 1, got {params.p_S + params.p_D + params.p_V}")
    if params.mu_V != 0:
        v.append(f"mu_V must be 0 (vacuum decoy), got {params.mu_V}")
    if not 0 < params.mu_D:
        v.append(f"mu_D must satisfy 0<mu_D, got {params.mu_D}")
    if not params.mu_D < params.mu_S:
        v.append(f"mu_D must satisfy mu_D<mu_S, got mu_D={params.mu_D}, mu_S={params.mu_S}")
    if not 0 < params.q < 0.5:
        v.append(f"q must satisfy 0<q<0.5, got {params.q}")
    if not 0 <= params.d < 1:
        v.append(f"d must satisfy 0<=d<1, got {params.d}")
    if not params.f >= 1:
        v.append(f"f must satisfy f>=1, got {params.f}")
    if not 0 <= params.delta_mis < 0.5:
        v.append(f"delta_mis must satisfy 0<=delta_mis<0.5, got {params.delta_mis}")
    if not params.N >= 1:
        v.append(f"N must be a positive pulse count, got {params.N}")
    return v


def require_valid(params):
    violations = validate_params(params)
    if violations:
        raise InvalidParamsError(violations)
    return params
