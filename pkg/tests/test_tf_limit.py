import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from tfpainleve.config import SolverConfig
from tfpainleve.errors import Breakdown, DomainError, OutOfRange, Singular
from tfpainleve.numerics import Grid
from tfpainleve.tf_limit import (
    build_tf_solution,
    default_psi_table,
    detect_eta0,
    direct_reaches_center,
    general_eta0,
    integrate_psi,
    moment_integral,
    psi_rhs,
    tf_direct_xi_ode,
    tf_general_potential,
    tf_reaches_center,
    xi_of_Z,
)

from oracles import direct_phi, psi_at, zeta0

GRID = Grid(-1.0, 1.0, 2001)
# regression value, fixed by the psi-table construction and cross-checked below
PHI0_AT_HALF = 0.96667885506563


@pytest.fixture(scope="module")
def table():
    return default_psi_table()


def test_psi_rhs_examples():
    assert psi_rhs(0.1, 1.0) == pytest.approx(0.1 / (0.1 * 0.9), rel=1e-15)
    with pytest.raises(Singular):
        psi_rhs(0.5, 2.0)
    with pytest.raises(DomainError):
        psi_rhs(0.0, 1.0)
    # slope along psi = 1 + zeta/3 tends to 1/3
    z = 1e-6
    assert psi_rhs(z, 1 + z / 3) == pytest.approx(1 / 3, abs=1e-5)


def test_psi_table_invariants(table):
    z, p = table.zeta_values, table.psi_values
    assert z[0] == 0.0 and p[0] == 1.0
    assert np.all(z * p < 1)
    assert np.all(p >= 1) and np.all(np.diff(p) > 0)
    small = z <= 0.05
    assert np.all(np.abs(p[small] - (1 + z[small] / 3 + z[small] ** 2 / 4)) <= 10 * z[small] ** 3)
    assert table.terminated


def test_psi_value_against_oracle(table):
    assert table.psi(0.1) == pytest.approx(1.0359, abs=2e-3)
    assert table.psi(0.1) == pytest.approx(psi_at(0.1), abs=1e-8)
    assert table.psi(0.5) == pytest.approx(psi_at(0.5), abs=1e-7)


def test_termination_point(table):
    # 1 - zeta psi < 0.01 stops slightly before the singular point zeta0
    assert zeta0() == pytest.approx(0.60184, abs=1e-4)
    assert 0 < zeta0() - table.zeta_end < 1e-3


def test_short_table_not_terminated():
    t = integrate_psi(0.3, 1e-3)
    assert not t.terminated
    assert t.zeta_end == pytest.approx(0.3)
    assert t.zeta_values[1] == 1e-3
    assert integrate_psi(0.005, 1e-4).zeta_values[1] == pytest.approx(5e-4)


def test_xi_of_Z(table):
    assert xi_of_Z(0.7, 0.0, table) == 0.0
    assert xi_of_Z(1e-8, 0.3, table) / 1e-8 == pytest.approx(-0.15, rel=1e-6)
    assert xi_of_Z(1.0, 0.5, table) == pytest.approx(-0.25 * psi_at(0.25), abs=1e-8)
    with pytest.raises(OutOfRange):
        xi_of_Z(10.0, 1.0, table)


def test_eta_zero_closed_form(table):
    for sol in (build_tf_solution(0.0, GRID, table), tf_direct_xi_ode(0.0, GRID)):
        assert np.max(np.abs(sol.phi.values - np.sqrt(1 - GRID.nodes**2))) <= 1e-12
        assert np.all(sol.xi.values == 0)


@pytest.mark.parametrize("eta", [0.0, 0.25, 0.5, 0.75])
def test_solution_invariants(eta, table):
    sol = build_tf_solution(eta, GRID, table)
    phi, xi, x = sol.phi.values, sol.xi.values, sol.x
    assert sol.identity_defect() <= 1e-10
    assert np.all(phi[1:-1] > 0) and phi[0] == 0 and phi[-1] == 0
    assert np.max(np.abs(phi - phi[::-1])) <= 1e-10
    assert np.max(np.abs(xi - xi[::-1])) <= 1e-10
    assert np.all(xi <= 0) and xi[0] == 0 and xi[-1] == 0
    assert sol.omega1 == pytest.approx(sol.phi.at(0.0) ** 2, abs=1e-12)


@pytest.mark.parametrize("eta", [0.25, 0.5, 0.75])
def test_direct_matches_manifold(eta, table):
    m = build_tf_solution(eta, GRID, table)
    d = tf_direct_xi_ode(eta, GRID)
    assert np.max(np.abs(m.phi.values - d.phi.values)) <= 1e-5
    assert np.max(np.abs(d.phi.values - d.phi.values[::-1])) <= 1e-10
    assert d.identity_defect() <= 1e-10


def test_against_adaptive_oracle(table):
    phi, _ = direct_phi(0.5, GRID.nodes)
    m = build_tf_solution(0.5, GRID, table)
    assert np.max(np.abs(m.phi.values - phi)) <= 1e-7
    assert m.phi.at(0.0) == pytest.approx(PHI0_AT_HALF, abs=1e-12)


def test_direct_seed_slope():
    eta = 0.6
    d = tf_direct_xi_ode(eta, Grid(-1.0, 1.0, 20001), delta=1e-6)
    slope = (d.xi.values[1] - d.xi.values[0]) / d.x_grid.h
    assert slope == pytest.approx(-eta, rel=1e-3)


def test_direct_needs_odd_nodes():
    with pytest.raises(ValueError):
        tf_direct_xi_ode(0.3, Grid(-1, 1, 10))


def test_amplitude_decreases_with_eta(table):
    vals = [build_tf_solution(e, GRID, table).phi.at(0.0) for e in (0, 0.25, 0.5, 0.75)]
    assert all(a > b for a, b in zip(vals, vals[1:]))
    assert vals[2] < 1.0


@pytest.mark.parametrize("eta", [0.25, 0.5, 0.75])
def test_boundary_layer_coefficient(eta):
    # |phi^2 - (1 - x^2)| <= C (1 - x^2)^2 near x = +-1, C -> eta^2 / 4
    cs = []
    for n in (2001, 4001):
        g = Grid(-1.0, 1.0, n)
        sol = build_tf_solution(eta, g, default_psi_table())
        z = 1 - g.nodes**2
        sel = (z > 0) & (z <= 0.05)
        cs.append(np.max(np.abs(sol.phi.values[sel] ** 2 - z[sel]) / z[sel] ** 2))
    assert cs[1] == pytest.approx(cs[0], rel=1e-3)
    assert cs[1] == pytest.approx(eta**2 / 4, rel=0.1)


def test_breakdown_raised(table):
    with pytest.raises(Breakdown):
        build_tf_solution(1.0, GRID, table)
    with pytest.raises(Breakdown):
        tf_direct_xi_ode(1.0, GRID)


def test_eta0_detection(table):
    assert tf_reaches_center(0.5) and not tf_reaches_center(1.2)
    eta0 = detect_eta0(SolverConfig())
    assert eta0 == pytest.approx(0.93, abs=0.02)
    # closed form of the classifier threshold: alpha(Z_max) = 1
    ze = table.zeta_end
    pe = table.psi_values[-1]
    assert eta0 == pytest.approx(math.sqrt(ze + (ze * pe) ** 2 / 4), abs=1e-3)
    # limit of a vanishing threshold: eta0^2 = zeta0 + 1/4
    assert math.sqrt(zeta0() + 0.25) == pytest.approx(eta0, abs=5e-3)


def test_direct_breakdown_close_to_manifold():
    assert direct_reaches_center(0.9)
    assert not direct_reaches_center(1.0)


def test_threshold_sensitivity():
    """Halving the stop margin moves the classifier threshold by a few 1e-3."""
    import tfpainleve.tf_limit as tl
    t1 = tl.integrate_psi(2.0, 1e-4)
    old = tl.PSI_STOP_MARGIN
    try:
        tl.PSI_STOP_MARGIN = old / 2
        t2 = tl.integrate_psi(2.0, 1e-4)
    finally:
        tl.PSI_STOP_MARGIN = old
    e1 = detect_eta0(classifier=lambda e: tf_reaches_center(e, table=t1))
    e2 = detect_eta0(classifier=lambda e: tf_reaches_center(e, table=t2))
    assert 0 <= e2 - e1 < 5e-3


def gauss(s):
    return np.exp(-s * s)


def test_general_potential_gaussian():
    eps = 0.1
    assert moment_integral(gauss, 0.0) == pytest.approx(-0.5, abs=1e-10)
    assert general_eta0(gauss, eps) == pytest.approx(1 / eps, rel=1e-9)
    r = tf_general_potential(gauss, eps, 0.0, 0.3)
    assert r.phi_sq == pytest.approx(1 - 0.09, abs=1e-15) and r.xi == 0
    far = tf_general_potential(gauss, eps, 5.0, 0.9)
    u = 0.9 / math.sqrt(eps)
    assert far.phi_sq == pytest.approx(1 - 0.81 - 4 * 25 * eps**2 * (0.5 * math.exp(-u * u)) ** 2, abs=1e-12)
    # far outside the support of W the correction vanishes
    assert tf_general_potential(gauss, 0.01, 5.0, 0.9).phi_sq == pytest.approx(1 - 0.81, abs=1e-15)
    c = tf_general_potential(gauss, eps, 5.0, 0.0)
    assert c.phi_sq == pytest.approx(1 - 4 * 25 * 0.01 * 0.25, abs=1e-9)
    assert c.xi == pytest.approx(2 * 5 * 0.1 * -0.5, abs=1e-9)
    with pytest.raises(DomainError):
        tf_general_potential(gauss, eps, 11.0, 0.0)


@settings(max_examples=25, deadline=None)
@given(st.floats(-4, 4))
def test_moment_integral_gaussian_closed_form(u):
    assert moment_integral(gauss, u) == pytest.approx(-0.5 * math.exp(-u * u), abs=1e-9)


@settings(max_examples=15, deadline=None)
@given(st.floats(0.05, 0.85))
def test_identity_property(eta):
    sol = build_tf_solution(eta, Grid(-1, 1, 201), default_psi_table())
    assert sol.identity_defect() <= 1e-10
    assert np.all(sol.phi.values[1:-1] > 0)
