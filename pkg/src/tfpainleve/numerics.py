"""Small numerical kernels: grids, Thomas solver, trapezoid sums, fixed-step
explicit integrators, bisection and a damped Newton driver.

Everything here is a pure function of its arguments.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import NewtonStall, NoBracket, NonFiniteState, PivotBreakdown

PIVOT_TOL = 1e-14


@dataclass(frozen=True)
class Grid:
    """Uniform grid of ``n`` nodes on ``[y_min, y_max]``."""

    y_min: float
    y_max: float
    n: int
    h: float = field(init=False)

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 3:
            raise ValueError(f"grid needs n >= 3 nodes, got {self.n}")
        if not self.y_max > self.y_min:
            raise ValueError("grid needs y_max > y_min")
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "h", (self.y_max - self.y_min) / (self.n - 1))

    @classmethod
    def from_spacing(cls, y_min: float, y_max: float, h: float) -> "Grid":
        """Grid whose spacing is ``h`` or, if ``h`` does not divide the
        interval, the largest spacing below ``h`` that does."""
        if h <= 0:
            raise ValueError("spacing must be positive")
        cells = (y_max - y_min) / h
        k = round(cells)
        if abs(cells - k) > 1e-9 * max(1.0, cells):
            k = math.ceil(cells)
        return cls(y_min, y_max, k + 1)

    @property
    def nodes(self) -> np.ndarray:
        y = self.y_min + np.arange(self.n) * self.h
        y[-1] = self.y_max
        return y

    def refined(self, factor: int = 2) -> "Grid":
        """Nested grid with the spacing divided by ``factor``."""
        return Grid(self.y_min, self.y_max, factor * (self.n - 1) + 1)


@dataclass(frozen=True)
class Profile:
    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.shape != (self.grid.n,):
            raise ValueError(f"profile has {v.size} values for {self.grid.n} nodes")
        object.__setattr__(self, "values", v)

    @property
    def y(self) -> np.ndarray:
        return self.grid.nodes

    def at(self, y: float) -> float:
        """Linear interpolation of the profile at ``y``."""
        return float(np.interp(y, self.grid.nodes, self.values))


@dataclass(frozen=True)
class TridiagonalSystem:
    lower: Sequence[float]
    diag: Sequence[float]
    upper: Sequence[float]
    rhs: Sequence[float]

    def __post_init__(self):
        n = len(self.diag)
        if len(self.lower) != n - 1 or len(self.upper) != n - 1 or len(self.rhs) != n:
            raise ValueError("inconsistent tridiagonal lengths")

    def matvec(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        out = np.asarray(self.diag, dtype=float) * x
        out[1:] += np.asarray(self.lower, dtype=float) * x[:-1]
        out[:-1] += np.asarray(self.upper, dtype=float) * x[1:]
        return out


def solve_tridiagonal(system: TridiagonalSystem, pivot_tol: float = PIVOT_TOL) -> np.ndarray:
    """Thomas algorithm without pivoting.

    Raises PivotBreakdown when a forward-elimination pivot drops below
    ``pivot_tol`` in magnitude.
    """
    a = [float(v) for v in system.lower]
    b = [float(v) for v in system.diag]
    c = [float(v) for v in system.upper]
    d = [float(v) for v in system.rhs]
    n = len(b)
    cp = [0.0] * n
    dp = [0.0] * n
    piv = b[0]
    if abs(piv) < pivot_tol:
        raise PivotBreakdown(f"pivot {piv:.3e} at row 0")
    cp[0] = c[0] / piv if n > 1 else 0.0
    dp[0] = d[0] / piv
    for i in range(1, n):
        piv = b[i] - a[i - 1] * cp[i - 1]
        if abs(piv) < pivot_tol:
            raise PivotBreakdown(f"pivot {piv:.3e} at row {i}")
        if i < n - 1:
            cp[i] = c[i] / piv
        dp[i] = (d[i] - a[i - 1] * dp[i - 1]) / piv
    x = [0.0] * n
    x[-1] = dp[-1]
    for i in range(n - 2, -1, -1):
        x[i] = dp[i] - cp[i] * x[i + 1]
    return np.array(x)


def trapezoid_cumulative(p: Profile, seed: float = 0.0) -> Profile:
    """Running composite trapezoid sum of ``p`` starting from ``seed``."""
    v = p.values
    out = np.empty_like(v)
    out[0] = seed
    out[1:] = seed + np.cumsum(0.5 * p.grid.h * (v[1:] + v[:-1]))
    return Profile(p.grid, out)


def trapezoid_cumulative_nodes(x, f, seed: float = 0.0) -> np.ndarray:
    """Running trapezoid sum on arbitrary (monotone) nodes."""
    x = np.asarray(x, dtype=float)
    f = np.asarray(f, dtype=float)
    out = np.empty_like(f)
    out[0] = seed
    out[1:] = seed + np.cumsum(0.5 * np.diff(x) * (f[1:] + f[:-1]))
    return out


def rk4_step(f, t, y, h):
    k1 = f(t, y)
    k2 = f(t + 0.5 * h, y + 0.5 * h * k1)
    k3 = f(t + 0.5 * h, y + 0.5 * h * k2)
    k4 = f(t + h, y + h * k3)
    return y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def heun_step(f, t, y, h):
    k1 = f(t, y)
    k2 = f(t + h, y + h * k1)
    return y + 0.5 * h * (k1 + k2)


def _integrate(step, f, t0, state0, t1, steps):
    if steps < 1:
        raise ValueError("steps must be >= 1")
    h = (t1 - t0) / steps
    y = np.atleast_1d(np.asarray(state0, dtype=float))
    ts = [t0]
    ys = [y]
    for k in range(steps):
        t = t0 + k * h
        y = np.asarray(step(f, t, y, h), dtype=float)
        if not np.all(np.isfinite(y)):
            raise NonFiniteState(
                f"non-finite state at t={t + h:.6g}", np.array(ts), np.array(ys)
            )
        ts.append(t0 + (k + 1) * h)
        ys.append(y)
    return np.array(ts), np.array(ys)


def rk4_integrate(f, t0, state0, t1, steps):
    """Classical fixed-step RK4. Returns ``(times, states)`` including both
    endpoints; states has shape ``(steps + 1, dim)``."""
    return _integrate(rk4_step, f, t0, state0, t1, steps)


def heun_integrate(f, t0, state0, t1, steps):
    """Fixed-step Heun (explicit trapezoid) method, same layout as rk4_integrate."""
    return _integrate(heun_step, f, t0, state0, t1, steps)


def bisect(f: Callable[[float], float], a: float, b: float, tol: float) -> float:
    """Midpoint bisection; the returned point lies in a bracket of width <= tol."""
    if tol <= 0:
        raise ValueError("tol must be positive")
    fa = f(a)
    fb = f(b)
    if fa * fb > 0:
        raise NoBracket(f"f({a})={fa:.3e} and f({b})={fb:.3e} have the same sign")
    if fa == 0:
        return a
    if fb == 0:
        return b
    while abs(b - a) > tol:
        m = 0.5 * (a + b)
        if m == a or m == b:
            break
        fm = f(m)
        if fm == 0:
            return m
        if fa * fm < 0:
            b, fb = m, fm
        else:
            a, fa = m, fm
    return 0.5 * (a + b)


def bisect_increasing(g, target, lo, hi, iterations: int = 60) -> np.ndarray:
    """Elementwise bisection for ``g(x) = target`` with ``g`` nondecreasing
    and ``g(lo) <= target <= g(hi)``."""
    lo = np.array(lo, dtype=float, copy=True)
    hi = np.array(hi, dtype=float, copy=True)
    for _ in range(iterations):
        mid = 0.5 * (lo + hi)
        above = g(mid) > target
        hi = np.where(above, mid, hi)
        lo = np.where(above, lo, mid)
    return 0.5 * (lo + hi)


@dataclass
class NewtonResult:
    x: np.ndarray
    residual: float
    iterations: int
    roundoff_limited: bool = False


def sup(v) -> float:
    return float(np.max(np.abs(v))) if np.size(v) else 0.0


def damped_newton(
    residual: Callable[[np.ndarray], np.ndarray],
    newton_step: Callable[[np.ndarray, np.ndarray], np.ndarray],
    x0,
    tol: float,
    max_iter: int = 100,
    max_halvings: int = 30,
    step_tol: float = 1e-13,
    floor: float = 0.0,
    admissible: Callable[[np.ndarray], bool] | None = None,
    norm: Callable[[np.ndarray], float] = sup,
    inadmissible_error: type[Exception] = NewtonStall,
) -> NewtonResult:
    """Newton iteration with step halving until the residual norm decreases.

    ``newton_step(x, r)`` returns the correction solving ``J(x) dx = -r``.
    Convergence is declared when ``norm(r) < tol``; when the residual sits at
    the roundoff level (the correction is below ``step_tol`` relative, or no
    halving decreases a residual already below ``floor``) the result is
    returned with ``roundoff_limited`` set.
    """
    x = np.array(x0, dtype=float, copy=True)
    r = residual(x)
    rn = norm(r)
    for it in range(max_iter):
        if rn < tol:
            return NewtonResult(x, rn, it)
        dx = newton_step(x, r)
        if sup(dx) <= step_tol * max(1.0, sup(x)):
            x = x + dx
            r = residual(x)
            return NewtonResult(x, norm(r), it + 1, True)
        lam = 1.0
        tried = False
        for _ in range(max_halvings + 1):
            trial = x + lam * dx
            if admissible is None or admissible(trial):
                tried = True
                rt = residual(trial)
                rtn = norm(rt)
                if rtn < rn:
                    break
            lam *= 0.5
        else:
            if not tried:
                raise inadmissible_error(f"every damped step leaves the admissible set (iteration {it})")
            if rn <= floor:
                return NewtonResult(x, rn, it, True)
            raise NewtonStall(f"residual stuck at {rn:.3e} after {it} iterations")
        x, r, rn = trial, rt, rtn
    if rn < tol:
        return NewtonResult(x, rn, max_iter)
    if rn <= floor:
        return NewtonResult(x, rn, max_iter, True)
    raise NewtonStall(f"no convergence in {max_iter} iterations (residual {rn:.3e})")


def roundoff_floor(h: float, scale: float, coef: float = 4.0) -> float:
    """Residual level below which a second-difference operator with leading
    coefficient ``coef`` cannot be resolved in double precision."""
    return 64.0 * np.finfo(float).eps * coef * max(1.0, scale) / h**2
