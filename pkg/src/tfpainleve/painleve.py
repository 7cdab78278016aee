"""Hastings-McLeod solution of 4 nu'' + y nu - nu^3 = 0.

The default solver is Newton relaxation of the central-difference
discretization with asymptotic Dirichlet data at both ends. A Heun shooting
solver from the left tail is kept as an independent cross-check.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

from .config import SolverConfig
from .errors import DomainError, NonPositive, PositivityViolation
from .numerics import (
    Grid,
    Profile,
    TridiagonalSystem,
    damped_newton,
    roundoff_floor,
    solve_tridiagonal,
    sup,
)

log = logging.getLogger(__name__)

NU_FLOOR = 0.1
TAIL_MINUS_WINDOW = -8.0
TAIL_PLUS_WINDOW = 15.0


def hm_tail_minus(y):
    """Leading y -> -inf asymptote pi^(-1/2) |y|^(-1/4) exp(-|y|^(3/2)/3)."""
    ya = np.asarray(y, dtype=float)
    if np.any(ya >= 0):
        raise DomainError("hm_tail_minus needs y < 0")
    a = np.abs(ya)
    out = a ** -0.25 * np.exp(-(a ** 1.5) / 3.0) / math.sqrt(math.pi)
    return float(out) if out.ndim == 0 else out


def hm_tail_minus_derivative(y):
    ya = np.asarray(y, dtype=float)
    if np.any(ya >= 0):
        raise DomainError("hm_tail_minus_derivative needs y < 0")
    a = np.abs(ya)
    # d/dy = -d/d|y|
    out = hm_tail_minus(ya) * (0.25 / a + 0.5 * a ** 0.5)
    return float(out) if np.ndim(out) == 0 else out


def hm_tail_plus(y):
    """Two-term y -> +inf expansion y^(1/2) - y^(-5/2)/2."""
    ya = np.asarray(y, dtype=float)
    if np.any(ya <= 0):
        raise DomainError("hm_tail_plus needs y > 0")
    out = ya ** 0.5 - 0.5 * ya ** -2.5
    return float(out) if out.ndim == 0 else out


def hm_tail_plus_derivative(y):
    ya = np.asarray(y, dtype=float)
    if np.any(ya <= 0):
        raise DomainError("hm_tail_plus_derivative needs y > 0")
    out = 0.5 * ya ** -0.5 + 1.25 * ya ** -3.5
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class HMProfile:
    profile: Profile
    residual_sup: float
    tail_match_minus: float
    tail_match_plus: float
    method: str = "relaxation"
    newton_iterations: int = 0
    roundoff_limited: bool = False
    amplitude: float = math.nan  # shooting only: tail multiplier

    @property
    def values(self) -> np.ndarray:
        return self.profile.values

    @property
    def grid(self) -> Grid:
        return self.profile.grid

    @property
    def is_monotone(self) -> bool:
        return bool(np.all(np.diff(self.values) >= 0))

    def at(self, y: float) -> float:
        return self.profile.at(y)


@dataclass(frozen=True)
class W0Profile:
    """W0 = 3 nu0^2 - y on the grid of a Hastings-McLeod profile."""

    profile: Profile
    w_min_observed: float

    @property
    def argmin(self) -> float:
        return float(self.profile.y[np.argmin(self.profile.values)])


def _p2_interior(y, v, h):
    # differences of neighbours first: keeps the numerator free of cancellation
    d2 = ((v[2:] - v[1:-1]) - (v[1:-1] - v[:-2])) / (h * h)
    return 4.0 * d2 + y[1:-1] * v[1:-1] - v[1:-1] ** 3


def hm_residual(p: Profile) -> float:
    """Sup over interior nodes of |4 D2 nu + y nu - nu^3|."""
    return sup(_p2_interior(p.y, p.values, p.grid.h))


def _tail_matches(y, v):
    left = y <= TAIL_MINUS_WINDOW
    right = y >= TAIL_PLUS_WINDOW
    tm = sup(v[left] / hm_tail_minus(y[left]) - 1.0) if left.any() else math.nan
    tp = sup(v[right] / hm_tail_plus(y[right]) - 1.0) if right.any() else math.nan
    return tm, tp


def _finish(grid, v, residual, method, **kw) -> HMProfile:
    if np.any(v <= 0):
        raise NonPositive(f"Hastings-McLeod iterate non-positive at {int(np.sum(v <= 0))} nodes")
    tm, tp = _tail_matches(grid.nodes, v)
    hm = HMProfile(Profile(grid, v), residual, tm, tp, method, **kw)
    if not hm.is_monotone:
        log.warning("Hastings-McLeod profile is not monotone on this grid")
    return hm


def _relaxation(grid: Grid, config: SolverConfig) -> HMProfile:
    y = grid.nodes
    h = grid.h
    n = grid.n
    left = hm_tail_minus(y[0])
    right = hm_tail_plus(y[-1])

    def residual(v):
        r = np.empty(n)
        r[0] = v[0] - left
        r[-1] = v[-1] - right
        r[1:-1] = _p2_interior(y, v, h)
        return r

    off = np.full(n - 1, 4.0 / h**2)
    lower = off.copy()
    upper = off.copy()
    lower[-1] = 0.0
    upper[0] = 0.0

    def step(v, r):
        diag = np.ones(n)
        diag[1:-1] = -8.0 / h**2 + y[1:-1] - 3.0 * v[1:-1] ** 2
        return solve_tridiagonal(TridiagonalSystem(lower, diag, upper, -r))

    guess = np.sqrt(np.maximum(y, NU_FLOOR))
    guess[0], guess[-1] = left, right
    res = damped_newton(
        residual,
        step,
        guess,
        tol=config.hm_tol,
        max_iter=config.newton_max,
        max_halvings=config.max_halvings,
        floor=roundoff_floor(h, float(np.max(guess))),
        admissible=lambda v: bool(np.all(v[1:] > 0)),
        norm=lambda r: sup(r[1:-1]),
        inadmissible_error=NonPositive,
    )
    if res.roundoff_limited and res.residual > config.hm_tol:
        log.warning("HM residual %.2e is roundoff-limited above hm_tol=%.1e", res.residual, config.hm_tol)
    return _finish(
        grid, res.x, hm_residual(Profile(grid, res.x)), "relaxation",
        newton_iterations=res.iterations, roundoff_limited=res.roundoff_limited,
    )


def _shoot(y_nodes, substeps, s):
    """Heun trajectory for amplitude s sampled at y_nodes.

    Returns (values, verdict) with verdict +1 (ran above the outer branch),
    -1 (crossed zero) or 0 (reached the last node unclassified).
    """
    y0 = float(y_nodes[0])
    nu = s * hm_tail_minus(y0)
    dnu = s * hm_tail_minus_derivative(y0)
    h = (float(y_nodes[1]) - y0) / substeps
    out = [nu]
    t = y0
    for k in range(1, len(y_nodes)):
        for _ in range(substeps):
            a1 = 0.25 * (nu * nu * nu - t * nu)
            pn = nu + h * dnu
            pd = dnu + h * a1
            t2 = t + h
            a2 = 0.25 * (pn * pn * pn - t2 * pn)
            nu, dnu = nu + 0.5 * h * (dnu + pd), dnu + 0.5 * h * (a1 + a2)
            t = t2
        if not math.isfinite(nu) or nu > math.sqrt(max(t, 0.0)) + 1.0:
            return out, 1
        if nu < 0.0:
            return out, -1
        out.append(nu)
    return out, 0


def _shooting(grid: Grid, config: SolverConfig) -> HMProfile:
    y = grid.nodes
    sub = config.shoot_substeps
    lo, hi = 0.5, 2.0
    traj_lo, _ = _shoot(y, sub, lo)
    traj_hi, _ = _shoot(y, sub, hi)
    best = None
    while hi - lo > 4 * np.finfo(float).eps:
        mid = 0.5 * (lo + hi)
        traj, verdict = _shoot(y, sub, mid)
        if verdict == 0:
            best = (mid, traj)
            break
        if verdict > 0:
            hi, traj_hi = mid, traj
        else:
            lo, traj_lo = mid, traj
    # trust nodes where the bracketing shots still agree
    m = min(len(traj_lo), len(traj_hi))
    a = np.array(traj_lo[:m])
    b = np.array(traj_hi[:m])
    split = np.nonzero(np.abs(a - b) > 1e-9 * np.maximum(1.0, b))[0]
    keep = int(split[0]) if split.size else m
    if best is not None:
        s, traj = best
        v = np.array(traj)
        keep = len(v)
    else:
        s = 0.5 * (lo + hi)
        v = 0.5 * (a[:keep] + b[:keep])
    if keep < 3:
        raise NonPositive("shooting bracket collapsed before three nodes")
    sub_grid = Grid(grid.y_min, float(y[keep - 1]), keep)
    v = v[:keep]
    return _finish(sub_grid, v, hm_residual(Profile(sub_grid, v)), "shooting", amplitude=s)


def solve_hastings_mcleod(
    grid: Grid | None = None,
    config: SolverConfig | None = None,
    method: str = "relaxation",
) -> HMProfile:
    """Hastings-McLeod profile nu0 on ``grid`` (default: ``config.hm_grid()``).

    ``method="shooting"`` returns the Heun shooting solution, truncated to
    the nodes where the final bisection bracket has not yet split.
    """
    config = config or SolverConfig()
    grid = grid or config.hm_grid()
    if method == "relaxation":
        return _relaxation(grid, config)
    if method == "shooting":
        return _shooting(grid, config)
    raise ValueError(f"unknown method {method!r}")


def compute_w0(hm: HMProfile) -> W0Profile:
    w = 3.0 * hm.values**2 - hm.profile.y
    w_min = float(np.min(w))
    if w_min <= 0:
        raise PositivityViolation(f"W0 minimum {w_min:.3e} is not positive")
    return W0Profile(Profile(hm.grid, w), w_min)
