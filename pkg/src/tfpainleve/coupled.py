"""Outer fixed-point iteration for the coupled (nu, chi) system.

    4(1 - e y) nu'' + y nu - nu^3 - 2 e nu' - e chi^2 nu = 0,
    (nu^2 chi)' = -eta nu^2,                                  e = eps^(2/3),

on [y_min, eps^(-2/3)]. Each outer step solves the nu-equation for a frozen
chi by damped Newton and then recomputes chi by cumulative quadrature.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .config import SolverConfig
from .errors import (
    GridMismatch,
    NonPositiveNu,
    NotConverged,
    PositivityLost,
    SolverError,
    WindowTooSmall,
)
from .numerics import (
    Grid,
    NewtonResult,
    Profile,
    TridiagonalSystem,
    damped_newton,
    roundoff_floor,
    solve_tridiagonal,
    sup,
    trapezoid_cumulative,
)
from .painleve import HMProfile, W0Profile, compute_w0, hm_tail_minus, solve_hastings_mcleod

log = logging.getLogger(__name__)

UNDERFLOW = 1e-250
ROUNDOFF_DELTA = 1e-13
DIVERGENCE_FACTOR = 10.0


@dataclass(frozen=True)
class ChiProfile:
    profile: Profile
    eta: float
    tail_seed: float

    @property
    def values(self) -> np.ndarray:
        return self.profile.values


@dataclass(frozen=True)
class TraceRecord:
    iteration: int
    delta: float  # sup |nu^n - nu^(n-1)|
    newton_iterations: int
    r1: float
    r2: float
    newton_roundoff_limited: bool = False


@dataclass
class CoupledState:
    eps: float
    eta: float
    nu: Profile
    chi: ChiProfile
    R: Profile
    nu0: HMProfile
    config: SolverConfig
    trace: list = field(default_factory=list)
    converged: bool = False
    roundoff_limited: bool = False
    failure: Optional[str] = None

    @property
    def iterations(self) -> int:
        return len(self.trace)

    @property
    def grid(self) -> Grid:
        return self.nu.grid


def _tail_ratio(y_min: float, mode: str, eps: float | None) -> float:
    if mode == "hm":
        return abs(y_min) ** -0.5
    if mode == "coupled":
        if eps is None:
            raise ValueError("coupled tail seed needs eps")
        return eps ** (1.0 / 3.0)
    raise ValueError(f"unknown tail_seed_mode {mode!r}")


def chi_from_nu(nu: Profile, eta: float, tail_seed_mode: str = "hm", eps: float | None = None) -> ChiProfile:
    """chi = -eta * (int_{-inf}^y nu^2) / nu^2 with an analytic tail seed.

    The integral up to y_min is replaced by nu(y_min)^2 times the tail ratio
    |y_min|^(-1/2) (mode "hm") or eps^(1/3) (mode "coupled"). Where nu^2
    underflows the quotient is replaced by the same plateau ratio.
    """
    v = nu.values
    if np.any(v < 0):
        raise NonPositiveNu(f"nu negative at {int(np.sum(v < 0))} nodes")
    ratio = _tail_ratio(nu.grid.y_min, tail_seed_mode, eps)
    sq = v * v
    seed = sq[0] * ratio
    if eta == 0:
        return ChiProfile(Profile(nu.grid, np.zeros_like(v)), 0.0, seed)
    cum = trapezoid_cumulative(Profile(nu.grid, sq), seed).values
    small = sq < UNDERFLOW
    q = np.where(small, ratio, cum / np.where(small, 1.0, sq))
    return ChiProfile(Profile(nu.grid, -eta * q), eta, seed)


def _right_robin_rows(y, v, chi2, e, h):
    """Residual and Jacobian entries of the degenerate closure at the last node.

    y nu - nu^3 - 2 e D^- nu - e chi^2 nu = 0 with the second-order one-sided
    difference D^- nu = (3 nu_N - 4 nu_{N-1} + nu_{N-2}) / (2h).
    """
    vn, v1, v2 = v[-1], v[-2], v[-3]
    r = y[-1] * vn - vn**3 - e * (3.0 * vn - 4.0 * v1 + v2) / h - e * chi2[-1] * vn
    d_n = y[-1] - 3.0 * vn**2 - 3.0 * e / h - e * chi2[-1]
    d_1 = 4.0 * e / h
    d_2 = -e / h
    return r, d_n, d_1, d_2


class _NuOperator:
    """Discrete nu-equation for frozen chi on a fixed grid."""

    def __init__(self, chi: ChiProfile, eps: float, config: SolverConfig):
        g = chi.profile.grid
        self.grid = g
        self.y = g.nodes
        self.h = g.h
        self.e = eps ** (2.0 / 3.0)
        self.a = 4.0 * (1.0 - self.e * self.y)
        self.chi2 = chi.values**2
        self.config = config
        self.left = 0.0 if config.left_bc == "zero" else hm_tail_minus(self.y[0])

    def interior(self, v) -> np.ndarray:
        h, e, y = self.h, self.e, self.y
        d2 = ((v[2:] - v[1:-1]) - (v[1:-1] - v[:-2])) / (h * h)
        d1 = (v[2:] - v[:-2]) / (2.0 * h)
        vi = v[1:-1]
        return self.a[1:-1] * d2 + y[1:-1] * vi - vi**3 - 2.0 * e * d1 - e * self.chi2[1:-1] * vi

    def residual(self, v) -> np.ndarray:
        r = np.empty_like(v)
        r[0] = v[0] - self.left
        r[1:-1] = self.interior(v)
        if self.config.right_bc == "degenerate_robin":
            r[-1] = _right_robin_rows(self.y, v, self.chi2, self.e, self.h)[0]
        else:
            r[-1] = v[-1] - self.right_dirichlet()
        return r

    def right_dirichlet(self) -> float:
        arg = self.y[-1] - self.e * self.chi2[-1]
        if arg <= 0:
            raise PositivityLost(f"algebraic right boundary has y - e chi^2 = {arg:.3e} <= 0")
        return math.sqrt(arg)

    def step(self, v, r) -> np.ndarray:
        h, e = self.h, self.e
        n = len(v)
        ai = self.a[1:-1] / (h * h)
        diag = np.ones(n)
        diag[1:-1] = -2.0 * ai + self.y[1:-1] - 3.0 * v[1:-1] ** 2 - e * self.chi2[1:-1]
        lower = np.zeros(n - 1)
        upper = np.zeros(n - 1)
        lower[:-1] = ai + e / h
        upper[1:] = ai - e / h
        rhs = -np.asarray(r, dtype=float)
        if self.config.right_bc == "degenerate_robin":
            _, d_n, d_1, d_2 = _right_robin_rows(self.y, v, self.chi2, e, h)
            # eliminate the nu_{N-2} entry with row N-1 to stay tridiagonal
            f = d_2 / lower[-2]
            diag[-1] = d_n - f * upper[-1]
            lower[-1] = d_1 - f * diag[-2]
            rhs[-1] -= f * rhs[-2]
        return solve_tridiagonal(TridiagonalSystem(lower, diag, upper, rhs))


def solve_nu_given_chi(
    chi: ChiProfile, eps: float, nu_init: Profile, config: SolverConfig | None = None
) -> tuple[Profile, NewtonResult]:
    """Damped Newton solve of the nu-equation for frozen chi."""
    config = config or SolverConfig()
    if nu_init.grid != chi.profile.grid:
        raise GridMismatch("nu_init and chi live on different grids")
    if np.any(nu_init.values[1:] <= 0):
        raise PositivityLost("initial guess is not positive")
    op = _NuOperator(chi, eps, config)
    guess = nu_init.values.copy()
    guess[0] = op.left
    res = damped_newton(
        op.residual,
        op.step,
        guess,
        tol=config.newton_tol,
        max_iter=config.newton_max,
        max_halvings=config.max_halvings,
        floor=roundoff_floor(op.h, float(np.max(guess))),
        admissible=lambda v: bool(np.all(v[1:] > 0)),
        inadmissible_error=PositivityLost,
    )
    return Profile(nu_init.grid, res.x), res


def _r1(nu: Profile, chi: ChiProfile, eps: float, config: SolverConfig) -> float:
    return sup(_NuOperator(chi, eps, config).interior(nu.values))


def _r2(nu: Profile, chi: ChiProfile) -> float:
    if chi.eta == 0:
        return 0.0
    sq = nu.values**2
    m = sq * chi.values
    h = nu.grid.h
    return sup((m[2:] - m[:-2]) / (2.0 * h) + chi.eta * sq[1:-1])


def iterate_coupled(
    eps: float,
    eta: float,
    config: SolverConfig | None = None,
    grid: Grid | None = None,
    hm: HMProfile | None = None,
) -> CoupledState:
    """Outer iteration nu^(n) = S(chi^(n-1)), chi^(n) = X(nu^(n)) from nu^0 = nu0.

    Stops on sup|nu^n - nu^(n-1)| < outer_tol; at the roundoff level (two
    consecutive non-decreases below 1e-13) the run also counts as converged,
    flagged roundoff_limited. Non-convergence (outer_max reached, growth by
    10x over the minimum update, or a failed inner solve) is reported in the
    returned state rather than raised.
    """
    if not 0 < eps <= 0.1:
        raise ValueError("eps must lie in (0, 0.1]")
    config = config or SolverConfig()
    grid = grid or config.coupled_grid(eps)
    if hm is None:
        hm = solve_hastings_mcleod(grid, config)
    elif hm.grid != grid:
        raise GridMismatch("Hastings-McLeod profile is on a different grid")
    nu0 = hm.profile
    nu = nu0
    chi = chi_from_nu(nu0, eta, "hm", eps)
    state = CoupledState(eps, eta, nu, chi, Profile(grid, np.zeros(grid.n)), hm, config)
    best = math.inf
    stalls = 0
    prev = math.inf
    for n in range(1, config.outer_max + 1):
        try:
            new, res = solve_nu_given_chi(chi, eps, nu, config)
            new_chi = chi_from_nu(new, eta, "coupled", eps)
        except SolverError as exc:
            state.failure = f"{type(exc).__name__}: {exc}"
            log.info("inner solve failed at outer iteration %d: %s", n, exc)
            break
        delta = sup(new.values - nu.values)
        nu, chi = new, new_chi
        state.trace.append(
            TraceRecord(n, delta, res.iterations, _r1(nu, chi, eps, config), _r2(nu, chi),
                        res.roundoff_limited)
        )
        state.nu, state.chi = nu, chi
        if delta < config.outer_tol:
            state.converged = True
            break
        if delta >= prev and delta < ROUNDOFF_DELTA:
            stalls += 1
            if stalls >= 2:
                state.converged = True
                state.roundoff_limited = True
                break
        else:
            stalls = 0
        if delta > DIVERGENCE_FACTOR * best:
            state.failure = f"diverging: update {delta:.2e} exceeds {DIVERGENCE_FACTOR:g}x the minimum {best:.2e}"
            break
        best = min(best, delta)
        prev = delta
    else:
        state.failure = f"no convergence in {config.outer_max} outer iterations"
    state.R = Profile(grid, nu.values - nu0.values)
    return state


# diagnostics -----------------------------------------------------------------


def conjecture_bound_ratio(state: CoupledState, q: float | None = None) -> float:
    """sup|R| over eps^(2q - 4/3) |log eps|^(1/2) (q <= 1) or eps^(2/3) (q > 1)."""
    if not state.converged:
        raise NotConverged("bound ratio needs a converged state")
    q = state.config.q if q is None else q
    if q is None:
        raise ValueError("q not given and not set in the config")
    eps = state.eps
    if q <= 1:
        scale = eps ** (2.0 * q - 4.0 / 3.0) * math.sqrt(abs(math.log(eps)))
    else:
        scale = eps ** (2.0 / 3.0)
    return sup(state.R.values) / scale


@dataclass(frozen=True)
class DecayFit:
    rate: float
    power: float
    window: tuple


def decay_fit(nu: Profile, eps: float | None = None, eta: float | None = None,
              window: tuple | None = None, exponent: float = 1.0) -> DecayFit:
    """Least-squares fit log nu = c - rate |y|^exponent + power log|y| on a
    left window (default [y_min, y_min + 5]).

    Nodes where nu is not positive (the Dirichlet boundary node) are left out.
    ``eps`` and ``eta`` are accepted for symmetry with the theory; the fit
    itself does not use them.
    """
    y = nu.y
    lo, hi = window if window is not None else (y[0], y[0] + 5.0)
    if hi > 0:
        raise WindowTooSmall("decay window must lie in y < 0")
    mask = (y >= lo - 1e-12) & (y <= hi + 1e-12) & (nu.values > 0)
    if int(mask.sum()) < 4:
        raise WindowTooSmall(f"only {int(mask.sum())} usable nodes in [{lo}, {hi}]")
    a = np.abs(y[mask])
    A = np.column_stack([np.ones_like(a), -(a**exponent), np.log(a)])
    coef, *_ = np.linalg.lstsq(A, np.log(nu.values[mask]), rcond=None)
    return DecayFit(float(coef[1]), float(coef[2]), (float(lo), float(hi)))


def _weight(y, eps, h):
    e = eps ** (2.0 / 3.0)
    yc = np.minimum(y, eps ** (-2.0 / 3.0) - 0.5 * h)
    return 1.0 - e * yc, (1.0 - e * yc) ** -0.5


def _trap(y, f) -> float:
    return float(np.sum(0.5 * np.diff(y) * (f[1:] + f[:-1])))


def weighted_norms(u: Profile, eps: float, w0: W0Profile) -> tuple[float, float]:
    """(||u||_{L2_eps}, ||u||_{H1_eps}) by trapezoid quadrature."""
    if u.grid != w0.profile.grid:
        raise GridMismatch("u and W0 live on different grids")
    y = u.y
    s, w = _weight(y, eps, u.grid.h)
    v = u.values
    du = np.gradient(v, u.grid.h, edge_order=1)
    l2 = _trap(y, w * v * v)
    h1 = _trap(y, w * (4.0 * s * du * du + w0.profile.values * v * v))
    return math.sqrt(max(l2, 0.0)), math.sqrt(max(h1, 0.0))


def log_weight_integral(eps: float, h: float = 0.01) -> float:
    """Trapezoid value of int_0^{eps^(-2/3)} (1 - eps^(2/3) y)^(-1/2) / (1 + y) dy
    with the same weight clamp as weighted_norms."""
    grid = Grid.from_spacing(0.0, eps ** (-2.0 / 3.0), h)
    y = grid.nodes
    _, w = _weight(y, eps, grid.h)
    return _trap(y, w / (1.0 + y))


def log_weight_integral_exact(eps: float) -> float:
    """Closed form of the same integral (substitute s^2 = 1 - eps^(2/3) y)."""
    r = math.sqrt(1.0 + eps ** (2.0 / 3.0))
    return math.log((r + 1.0) / (r - 1.0)) / r


def equation_residuals(state: CoupledState) -> tuple[float, float]:
    """(r1, r2): interior sup-residuals of the two discrete equations."""
    return _r1(state.nu, state.chi, state.eps, state.config), _r2(state.nu, state.chi)


@dataclass(frozen=True)
class AssumptionConstants:
    chi_plus: float
    chi_minus: float
    nu_plus: float
    nu_minus: float


def assumption_constants(state: CoupledState) -> AssumptionConstants:
    """Smallest constants for which the growth/plateau windows hold on the grid."""
    y = state.nu.y
    v2 = state.nu.values**2
    chi = np.abs(state.chi.values)
    eta = abs(state.eta)
    pos = (y > 0) & (y < y[-1])
    neg = y < 0
    if eta > 0:
        chi_plus = max(np.max(chi[pos] / (eta * (1 + y[pos]))), np.max(eta * y[pos] / chi[pos]))
        chi_minus = float(np.max(chi[neg]) / eta)
    else:
        chi_plus = chi_minus = math.nan
    nu_plus = max(np.max(v2[pos] / (1 + y[pos])), np.max(y[pos] / v2[pos]))
    ratio = chi_from_nu(state.nu, 1.0, "coupled", state.eps).values
    nu_minus = float(np.max(np.abs(ratio[neg])))
    return AssumptionConstants(float(chi_plus), chi_minus, float(nu_plus), nu_minus)


@dataclass(frozen=True)
class PhysicalProfile:
    x: np.ndarray
    phi: np.ndarray
    xi: np.ndarray
    theta: np.ndarray
    mu: float
    alpha: float


def reconstruct_physical(state: CoupledState) -> PhysicalProfile:
    """Map (nu, chi) back to (phi, xi, theta) on x in [-x_max, x_max].

    x = sqrt(1 - eps^(2/3) y), phi = eps^(1/3) nu, xi = eps^(2/3) chi and
    theta' = xi / eps with theta = 0 at the node closest to x = 0. The
    negative half follows from phi, xi even and theta odd.
    """
    if not state.converged:
        raise NotConverged("physical reconstruction needs a converged state")
    eps = state.eps
    e = eps ** (2.0 / 3.0)
    y = state.nu.y
    keep = y <= eps ** (-2.0 / 3.0)
    x = np.sqrt(np.maximum(1.0 - e * y[keep], 0.0))[::-1]
    phi = eps ** (1.0 / 3.0) * state.nu.values[keep][::-1]
    xi = e * state.chi.values[keep][::-1]
    theta = np.zeros_like(x)
    theta[1:] = np.cumsum(0.5 * np.diff(x) * (xi[1:] + xi[:-1])) / eps
    # do not duplicate x = 0 when it is a node
    m = len(x) - 1 if x[0] == 0.0 else len(x)

    def mirror(v, sign=1.0):
        return np.concatenate([sign * v[::-1][:m], v])

    return PhysicalProfile(
        mirror(x, -1.0), mirror(phi), mirror(xi), mirror(theta, -1.0),
        1.0 / eps, math.sqrt(eps) * state.eta,
    )
