"""Thomas-Fermi limit of the PT-symmetric ground state.

Two routes to the same profile on x in [-1, 1]:

* the manifold route integrates the auxiliary function psi(zeta) along the
  unstable manifold of (zeta, psi) = (0, 1), then inverts the map
  Z -> Z + xi(Z)^2 node by node;
* the direct route integrates the closed first-order ODE for xi(x) with RK4
  from x = -1 and mirrors to x > 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable

import numpy as np

from .config import SolverConfig
from .errors import Breakdown, DomainError, NotConverged, OutOfRange, Singular
from .numerics import (
    Grid,
    Profile,
    bisect,
    bisect_increasing,
    rk4_step,
)

SINGULAR_TOL = 1e-12
# psi integration stops once 1 - zeta*psi drops below this
PSI_STOP_MARGIN = 0.01
# direct x-ODE breakdown threshold on 1 - x^2 - 3 xi^2
DIRECT_DENOM_TOL = 1e-8
SERIES_SEED = 1e-3


@dataclass(frozen=True)
class PsiTable:
    zeta_values: np.ndarray
    psi_values: np.ndarray
    terminated: bool
    zeta_end: float

    def psi(self, zeta):
        z = np.asarray(zeta, dtype=float)
        if np.any(z > self.zeta_end * (1 + 1e-15)) or np.any(z < 0):
            raise OutOfRange(f"zeta outside [0, {self.zeta_end}]")
        return np.interp(z, self.zeta_values, self.psi_values)


@dataclass(frozen=True)
class TFSolution:
    eta: float
    x_grid: Grid
    phi: Profile
    xi: Profile
    omega1: float
    breakdown: bool = False
    method: str = "manifold"

    @property
    def x(self) -> np.ndarray:
        return self.x_grid.nodes

    def identity_defect(self) -> float:
        """sup |phi^2 + xi^2 + x^2 - 1|."""
        x = self.x
        return float(np.max(np.abs(self.phi.values**2 + self.xi.values**2 + x**2 - 1.0)))


def psi_rhs(zeta: float, psi: float) -> float:
    """d psi / d zeta = (2(1 - psi) + zeta psi^2) / (zeta (1 - zeta psi))."""
    if zeta <= 0:
        raise DomainError("psi_rhs needs zeta > 0")
    gap = 1.0 - zeta * psi
    if abs(gap) < SINGULAR_TOL:
        raise Singular(f"zeta*psi = 1 at zeta={zeta}")
    return (2.0 * (1.0 - psi) + zeta * psi * psi) / (zeta * gap)


def psi_series(zeta):
    return 1.0 + zeta / 3.0 + zeta * zeta / 4.0


def integrate_psi(zeta_max: float = 2.0, h: float = 1e-4) -> PsiTable:
    """Tabulate psi on [0, zeta_end] starting from the series seed."""
    if zeta_max <= 0 or h <= 0:
        raise ValueError("zeta_max and h must be positive")
    seed = min(SERIES_SEED, zeta_max / 10.0)
    zs = [0.0, seed]
    ps = [1.0, psi_series(seed)]
    z, p = seed, ps[-1]
    terminated = False

    def f(t, v):
        gap = 1.0 - t * v
        return (2.0 * (1.0 - v) + t * v * v) / (t * gap) if abs(gap) >= SINGULAR_TOL else math.inf

    k = 0
    while z < zeta_max:
        step = min(h, zeta_max - z)
        pn = rk4_step(f, z, p, step)
        k += 1
        zn = seed + k * h if step == h else zeta_max
        if not math.isfinite(pn) or 1.0 - zn * pn < PSI_STOP_MARGIN:
            terminated = True
            break
        z, p = zn, pn
        zs.append(z)
        ps.append(p)
    return PsiTable(np.array(zs), np.array(ps), terminated, z)


@lru_cache(maxsize=8)
def default_psi_table(h: float = 1e-4) -> PsiTable:
    return integrate_psi(2.0, h)


def xi_of_Z(Z, eta: float, table: PsiTable):
    """xi(Z) = -eta Z psi(eta^2 Z) / 2."""
    Z = np.asarray(Z, dtype=float)
    if eta == 0:
        out = np.zeros_like(Z)
    else:
        out = -0.5 * eta * Z * table.psi(eta * eta * Z)
    return float(out) if out.ndim == 0 else out


def _check_grid(x_grid: Grid):
    if not (math.isclose(x_grid.y_min, -1.0) and math.isclose(x_grid.y_max, 1.0)):
        raise ValueError("Thomas-Fermi grids live on [-1, 1]")


def build_tf_solution(eta: float, x_grid: Grid, table: PsiTable | None = None) -> TFSolution:
    """Thomas-Fermi pair (phi, xi) by inverting alpha(Z) = Z + xi(Z)^2."""
    _check_grid(x_grid)
    table = table or default_psi_table()
    x = x_grid.nodes
    z = 1.0 - x * x
    if eta == 0:
        zero = np.zeros_like(x)
        return TFSolution(0.0, x_grid, Profile(x_grid, np.sqrt(z)), Profile(x_grid, zero), 1.0)
    z_cap = table.zeta_end / (eta * eta)

    def alpha(Z):
        return Z + xi_of_Z(Z, eta, table) ** 2

    if alpha(z_cap) < 1.0:
        raise Breakdown(
            f"psi table ends (zeta={table.zeta_end:.4f}) before alpha reaches 1 for eta={eta}", eta
        )
    Z_nodes = table.zeta_values / (eta * eta)
    if np.any(np.diff(alpha(Z_nodes)) <= 0):
        raise Breakdown(f"alpha loses monotonicity for eta={eta}", eta)
    # alpha(Z) >= Z, so the root lies in [0, z]
    Z = bisect_increasing(alpha, z, np.zeros_like(z), np.minimum(z, z_cap))
    xi = xi_of_Z(Z, eta, table)
    omega = np.maximum(z - xi * xi, 0.0)
    Z1 = bisect(lambda s: alpha(s) - 1.0, 0.0, min(1.0, z_cap), 1e-15)
    omega1 = 1.0 - xi_of_Z(Z1, eta, table) ** 2
    return TFSolution(eta, x_grid, Profile(x_grid, np.sqrt(omega)), Profile(x_grid, xi), omega1)


def direct_rhs(x: float, xi: float, eta: float) -> float:
    """d xi/dx after eliminating phi^2 = 1 - x^2 - xi^2."""
    denom = 1.0 - x * x - 3.0 * xi * xi
    if denom < DIRECT_DENOM_TOL:
        return math.nan
    return (2.0 * x * xi + 2.0 * eta * x * (1.0 - x * x - xi * xi)) / denom


def tf_direct_xi_ode(
    eta: float, x_grid: Grid, delta: float = 1e-4, substeps: int = 1
) -> TFSolution:
    """Thomas-Fermi pair from RK4 on the closed xi-equation.

    Starts at x = -1 + delta on the series branch xi = -(eta/2)(1 - x^2),
    steps node by node to x = 0 and mirrors evenly. The grid must have an
    odd node count so that x = 0 is a node.
    """
    _check_grid(x_grid)
    if x_grid.n % 2 == 0:
        raise ValueError("direct integration needs an odd node count (x = 0 on the grid)")
    x = x_grid.nodes
    mid = x_grid.n // 2
    half = np.zeros(mid + 1)
    t = -1.0 + delta
    s = -0.5 * eta * (1.0 - t * t)

    def f(tt, v):
        return direct_rhs(tt, v, eta)

    for k in range(1, mid + 1):
        target = 0.0 if k == mid else float(x[k])
        h = (target - t) / substeps
        for _ in range(substeps):
            s = rk4_step(f, t, s, h)
            t += h
        t = target
        if not math.isfinite(s):
            raise Breakdown(f"xi' diverges before x=0 (near x={t:.4f}) for eta={eta}", eta)
        half[k] = s
    xi = np.concatenate([half, half[-2::-1]])
    phi_sq = 1.0 - x * x - xi * xi
    phi = np.sqrt(np.maximum(phi_sq, 0.0))
    return TFSolution(
        eta, x_grid, Profile(x_grid, phi), Profile(x_grid, xi), float(phi_sq[mid]), method="direct"
    )


def tf_reaches_center(eta: float, config: SolverConfig | None = None, table: PsiTable | None = None) -> bool:
    """Classifier used for the breakdown search: does the manifold
    reconstruction reach x = 0?"""
    config = config or SolverConfig()
    table = table or default_psi_table(config.psi_h)
    try:
        build_tf_solution(eta, Grid(-1.0, 1.0, 3), table)
    except Breakdown:
        return False
    return True


def detect_eta0(config: SolverConfig | None = None, good: float = 0.5, bad: float = 1.2,
                width: float = 1e-3, classifier: Callable[[float], bool] | None = None) -> float:
    """Breakdown value of eta: bisection on the reach-x=0 classifier."""
    config = config or SolverConfig()
    if classifier is None:
        table = default_psi_table(config.psi_h)

        def classifier(e):
            return tf_reaches_center(e, config, table)

    if not classifier(good) or classifier(bad):
        raise ValueError(f"classifier does not separate eta={good} and eta={bad}")
    while bad - good > width:
        mid = 0.5 * (good + bad)
        if classifier(mid):
            good = mid
        else:
            bad = mid
    return 0.5 * (good + bad)


def direct_reaches_center(eta: float, n: int = 2001, delta: float = 1e-4) -> bool:
    try:
        tf_direct_xi_ode(eta, Grid(-1.0, 1.0, n), delta)
    except Breakdown:
        return False
    return True


# generalized potential -----------------------------------------------------

GP_HALF_WIDTH = 50.0
GP_TOL = 1e-10
GP_CELLS = 2000
GP_MAX_NODES = 2e7


def _moment_integral(W: Callable, upper: float, half_width: float, cells_per_unit: float) -> float:
    """Trapezoid value of int_{-L}^{upper} s W(s) ds with L = half_width."""
    lo = -half_width
    if upper <= lo:
        return 0.0
    n = max(8, int(math.ceil((upper - lo) * cells_per_unit)))
    s = np.linspace(lo, upper, n + 1)
    f = s * np.asarray(W(s), dtype=float)
    # spacing from the interval, not s[1] - s[0], which cancels near -L
    return float(np.sum(0.5 * (f[1:] + f[:-1])) * ((upper - lo) / n))


def moment_integral(W: Callable, upper: float, half_width: float = GP_HALF_WIDTH,
                    tol: float = GP_TOL, max_rounds: int = 30) -> float:
    """int_{-inf}^{upper} s W(s) ds by trapezoid on a truncated window.

    The node density is doubled until successive values agree to ``tol``,
    then the window is doubled until it no longer changes the value.
    """
    L = half_width
    density = GP_CELLS / (2.0 * L)
    prev = _moment_integral(W, upper, L, density)
    for _ in range(max_rounds):
        density *= 2.0
        cur = _moment_integral(W, upper, L, density)
        if abs(cur - prev) <= tol:
            break
        if (upper + L) * density > GP_MAX_NODES:
            raise NotConverged(f"moment integral not stable to {tol} at {GP_MAX_NODES} nodes")
        prev = cur
    else:
        raise NotConverged(f"moment integral not stable to {tol}")
    for _ in range(max_rounds):
        L *= 2.0
        wider = _moment_integral(W, upper, L, density)
        if abs(wider - cur) <= tol:
            return wider
        cur = wider
    raise NotConverged(f"moment integral window not stable to {tol}")


@dataclass(frozen=True)
class GeneralTF:
    phi_sq: float
    xi: float
    moment: float


def tf_general_potential(W: Callable, eps: float, eta: float, x: float) -> GeneralTF:
    """Thomas-Fermi pair for the localized gain-loss profile W.

    I(x) = int_{-inf}^{x/sqrt(eps)} s W(s) ds; phi^2 = 1 - x^2 - 4 eta^2 eps^2 I^2
    and xi = 2 eta eps I phi^2(0) / phi^2(x), with the leading phi^2 = 1 - x^2
    in the quotient.
    """
    if eps <= 0:
        raise DomainError("eps must be positive")
    if abs(x) >= 1:
        raise DomainError("x must lie in (-1, 1)")
    I0 = moment_integral(W, 0.0)
    if 1.0 - 4.0 * eta**2 * eps**2 * I0**2 <= 0:
        raise DomainError(f"phi_TF(0)^2 <= 0 for eta={eta}: beyond the existence interval")
    I = I0 if x == 0 else moment_integral(W, x / math.sqrt(eps))
    phi_sq = 1.0 - x * x - 4.0 * eta**2 * eps**2 * I * I
    xi = 2.0 * eta * eps * I / (1.0 - x * x)
    return GeneralTF(phi_sq, xi, I)


def general_eta0(W: Callable, eps: float) -> float:
    """eta_0 = 1 / (2 eps |int_{-inf}^0 s W(s) ds|)."""
    if eps <= 0:
        raise DomainError("eps must be positive")
    I0 = moment_integral(W, 0.0)
    if I0 == 0:
        return math.inf
    return 1.0 / (2.0 * eps * abs(I0))
