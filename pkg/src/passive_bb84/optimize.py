"""Key-rate optimisation over (p_Z, mu_S) and transmission sweeps.

The beam splitter is tied to the basis bias (q = p_X = 1 - p_Z); intensity
probabilities and mu_D stay as configured. Search is a coarse grid followed
by coordinate-wise golden-section refinement around the best grid cell.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .channel import DegenerateChannelError
from .keyrate import KeyRateResult, SecurityParams, key_rate
from .protocol import ChannelParams, require_valid

__all__ = [
    "OptimizationSpec",
    "OptimizationResult",
    "SweepRow",
    "golden_section_max",
    "optimize",
    "sweep",
]

_INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class OptimizationSpec:
    pz_range: tuple = (0.55, 0.99)
    mu_s_range: tuple = (0.06, 1.0)
    grid_resolution: int = 21
    refine_iterations: int = 6
    tol: float = 1e-10

    def validate(self, mu_D):
        lo, hi = self.pz_range
        if not 0.5 < lo <= hi < 1:
            raise ValueError(f"pz_range must lie inside (0.5, 1), got {self.pz_range}")
        m_lo, m_hi = self.mu_s_range
        if not mu_D < m_lo <= m_hi:
            raise ValueError(f"mu_s_range must lie above mu_D={mu_D}, got {self.mu_s_range}")
        if self.grid_resolution < 1:
            raise ValueError("grid_resolution must be positive")
        if self.refine_iterations < 0:
            raise ValueError("refine_iterations must be non-negative")


@dataclass(frozen=True)
class OptimizationResult:
    params: object
    result: KeyRateResult
    feasible: bool


@dataclass(frozen=True)
class SweepRow:
    eta: float
    rate: float
    params: object
    result: KeyRateResult | None
    feasible: bool


def golden_section_max(f, lo, hi, tol=1e-10, max_iter=200):
    """Maximise a unimodal ``f`` on [lo, hi]; returns (x, f(x)) of the best point seen."""
    a, b = lo, hi
    c = b - _INV_PHI * (b - a)
    d = a + _INV_PHI * (b - a)
    fc, fd = f(c), f(d)
    best = max((fc, c), (fd, d))
    for _ in range(max_iter):
        if b - a <= tol * max(1.0, abs(a) + abs(b)):
            break
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - _INV_PHI * (b - a)
            fc = f(c)
            best = max(best, (fc, c))
        else:
            a, c, fc = c, d, fd
            d = a + _INV_PHI * (b - a)
            fd = f(d)
            best = max(best, (fd, d))
    return best[1], best[0]


def _candidate(base, p_Z, mu_S):
    return base.with_basis_bias(p_Z).replace(mu_S=mu_S)


def _evaluate(base, channel, sec, mode, baseline, p_Z, mu_S):
    try:
        return key_rate(_candidate(base, p_Z, mu_S), channel, sec, mode, baseline)
    except DegenerateChannelError:
        return None


def _rate(res):
    return -1.0 if res is None else res.rate


def _objective(res):
    # Below threshold the rate is flat at 0; the raw key length keeps a slope
    # so refinement can still move towards the feasible region.
    if res is None:
        return -math.inf
    if res.rate > 0:
        return res.rate
    return res.key_length / 1e30


def optimize(params, channel, sec=None, spec=None, mode="finite", baseline="passive"):
    """Maximise the key rate over p_Z (with q = 1 - p_Z) and mu_S.

    Returns:
        OptimizationResult with the best configuration found and its
        KeyRateResult. ``feasible`` is False when no candidate reaches a
        positive key length; the rate is then 0.
    """
    sec = sec or SecurityParams()
    spec = spec or OptimizationSpec()
    spec.validate(params.mu_D)

    def run(p_Z, mu_S):
        return _evaluate(params, channel, sec, mode, baseline, p_Z, mu_S)

    pz_grid = np.linspace(*spec.pz_range, spec.grid_resolution)
    mu_grid = np.linspace(*spec.mu_s_range, spec.grid_resolution)
    best = None
    best_ij = (0, 0)
    for i, p_Z in enumerate(pz_grid):
        for j, mu_S in enumerate(mu_grid):
            res = run(float(p_Z), float(mu_S))
            if best is None or _objective(res) > _objective(best[2]):
                best = (float(p_Z), float(mu_S), res)
                best_ij = (i, j)

    p_Z, mu_S, res = best
    i, j = best_ij
    pz_lo, pz_hi = pz_grid[max(i - 1, 0)], pz_grid[min(i + 1, len(pz_grid) - 1)]
    mu_lo, mu_hi = mu_grid[max(j - 1, 0)], mu_grid[min(j + 1, len(mu_grid) - 1)]
    for _ in range(spec.refine_iterations):
        if pz_hi > pz_lo:
            cand, _ = golden_section_max(lambda x: _objective(run(x, mu_S)), pz_lo, pz_hi, spec.tol)
            cand_res = run(cand, mu_S)
            if _objective(cand_res) > _objective(res):
                p_Z, res = cand, cand_res
        if mu_hi > mu_lo:
            cand, _ = golden_section_max(lambda x: _objective(run(p_Z, x)), mu_lo, mu_hi, spec.tol)
            cand_res = run(p_Z, cand)
            if _objective(cand_res) > _objective(res):
                mu_S, res = cand, cand_res

    best_params = _candidate(params, p_Z, mu_S)
    require_valid(best_params)
    if res is None:
        res = KeyRateResult(0.0, 0.0, math.inf, 0.0, -math.inf, 0.0, mode, baseline)
    return OptimizationResult(params=best_params, result=res, feasible=res.rate > 0)


def _sweep_point(args):
    params, sec, eta, mode, baseline, optimize_each, spec = args
    channel = ChannelParams(eta)
    if optimize_each:
        out = optimize(params, channel, sec, spec, mode, baseline)
        return SweepRow(eta, out.result.rate, out.params, out.result, out.feasible)
    try:
        res = key_rate(params, channel, sec, mode, baseline)
    except DegenerateChannelError:
        return SweepRow(eta, 0.0, params, None, False)
    return SweepRow(eta, res.rate, params, res, res.rate > 0)


def sweep(params, sec, eta_grid, mode="finite", baseline="passive", optimize_each=True,
          spec=None, workers=1):
    """Key rate along a transmission grid, one row per grid entry in grid order.

    Points are independent; ``workers > 1`` evaluates them in separate
    processes without changing the output.
    """
    for eta in eta_grid:
        if not 0 < eta <= 1:
            raise ValueError(f"eta grid entries must lie in (0, 1], got {eta}")
    jobs = [(params, sec, float(eta), mode, baseline, optimize_each, spec) for eta in eta_grid]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(_sweep_point, jobs))
    return [_sweep_point(job) for job in jobs]
