import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import fd_wirtinger, random_bipoly, random_xi
from congruence_flows import BiPoly, CurvePoly, SheetPoly
from congruence_flows.congruence import (
    CongruenceSpec,
    SpinData,
    beta,
    cylinder_congruence,
    focal_points,
    rank_at,
    shear_identity_sides,
    sphere_congruence,
    spin_coefficients,
)
from congruence_flows.errors import DegenerateParameterization, LocateError
from congruence_flows.polynomials import DQuotient

XI = BiPoly.xi()
XIB = BiPoly.xibar()


# --- Wirtinger engine ----------------------------------------------------------


def test_wirtinger_examples():
    assert (XI**2 * XIB).d() == BiPoly({(1, 1): 2})
    assert (XI**2).dbar().is_zero
    assert BiPoly.constant(3 - 1j).d().is_zero


def test_wirtinger_matches_fd(rng):
    for _ in range(30):
        F = random_bipoly(rng, int(rng.integers(1, 6)))
        z = random_xi(rng, 2.0)
        d_fd, db_fd = fd_wirtinger(F, z)
        for exact, approx in ((F.d()(z), d_fd), (F.dbar()(z), db_fd)):
            assert abs(exact - approx) <= 1e-7 * max(1.0, abs(exact))


def test_quotient_rule_matches_fd(rng):
    F = random_bipoly(rng, 3)
    q = DQuotient(F, 2)
    for _ in range(10):
        z = random_xi(rng, 1.5)
        d_fd, db_fd = fd_wirtinger(q, z)
        assert abs(q.d()(z) - d_fd) < 1e-7
        assert abs(q.dbar()(z) - db_fd) < 1e-7


# --- spin coefficients ------------------------------------------------------------


@pytest.mark.parametrize("F, xi, sigma, theta, lam", [
    (BiPoly(), 0.3 - 0.4j, 0, 0, 0),
    (1j * XI, 0, 0, 0, 1),
    (XIB, 0, -1, 0, 0),
])
def test_spin_examples(F, xi, sigma, theta, lam):
    s = spin_coefficients(F, xi)
    assert abs(s.sigma - sigma) < 1e-15
    assert abs(s.theta - theta) < 1e-15
    assert abs(s.lam - lam) < 1e-15


def test_spin_matches_fd(rng):
    for _ in range(20):
        F = random_bipoly(rng, 3)
        z = random_xi(rng, 1.5)
        s = spin_coefficients(F, z)
        _, db = fd_wirtinger(F, z)
        assert abs(s.sigma + db.conjugate()) < 1e-7
        conf = lambda w: 1 + abs(w) ** 2
        d, _ = fd_wirtinger(lambda w: F(w) / conf(w) ** 2, z)
        assert abs(s.rho - conf(z) ** 2 * d) < 1e-7


def test_centred_sphere_is_shear_and_rho_free():
    for z in (0, 0.5j, -1 + 2j):
        s = spin_coefficients(sphere_congruence((0, 0, 0)), z)
        assert abs(s.sigma) == 0 and s.rho == 0


def test_offcentre_sphere_rho_is_minus_centre_coordinate(rng):
    # rho is real and equals minus the r-coordinate of the centre on each line
    from congruence_flows.geometry import point_to_r
    c = rng.uniform(-3, 3, 3)
    F = sphere_congruence(c)
    for _ in range(5):
        z = random_xi(rng, 2.0)
        s = spin_coefficients(F, z)
        assert abs(s.sigma) < 1e-14 and abs(s.lam) < 1e-14
        assert abs(s.theta + point_to_r(c, z)) < 1e-12


# --- shear identity ---------------------------------------------------------------


def test_shear_identity_random(rng):
    for _ in range(20):
        F = random_bipoly(rng, 5)
        lhs, rhs = shear_identity_sides(F)
        for _ in range(5):
            z = random_xi(rng, 2.0)
            assert abs(lhs(z) - rhs(z)) < 1e-8 * max(1.0, abs(lhs(z)))


def test_shear_identity_literal_form_fails():
    # d rho/dxi + 2 conj(F)/D^2 differs from the left side already for F = xi^2
    F = XI**2
    lhs, _ = shear_identity_sides(F)
    spec = CongruenceSpec.rank2(F)
    literal = spec.rho_expr.d() + DQuotient(F.conj() * 2, 2)
    z = 0.5 + 0.25j
    assert abs(lhs(z) - literal(z)) > 0.1


def test_shear_identity_matches_fd(rng):
    F = random_bipoly(rng, 3)
    lhs, _ = shear_identity_sides(F)
    conf = lambda w: 1 + abs(w) ** 2
    for _ in range(5):
        z = random_xi(rng, 1.0)
        _, db = fd_wirtinger(lambda w: spin_coefficients(F, w).sigma / conf(w) ** 2, z)
        assert abs(lhs(z) - conf(z) ** 2 * db) < 1e-6


# --- beta ---------------------------------------------------------------------------


def test_beta_cylinder_zero():
    spec = CongruenceSpec.rank1(CurvePoly({1: 1}), SheetPoly({(0, 1): 1j}))
    for u, v in ((0, 0), (1.5, -2), (-3, 0.7)):
        assert beta(spec, u, v) == pytest.approx(0, abs=1e-15)


def test_beta_recovered_eta_gives_b0():
    spec = cylinder_congruence(0.0, 1.0, 0.0)
    assert beta(spec, 0.0, 0.3) == pytest.approx(1.0, abs=1e-14)


def test_beta_v_rescaling_invariant():
    spec = CongruenceSpec.rank1(CurvePoly({1: 1}), SheetPoly({(0, 1): 2j}))
    assert beta(spec, 0.4, 1.1) == pytest.approx(0, abs=1e-15)


def test_beta_general_solution(rng):
    for _ in range(10):
        b0, b1, ang = rng.uniform(-2, 2), rng.uniform(-2, 2), rng.uniform(0, 2 * math.pi)
        spec = cylinder_congruence(ang, b0, b1)
        for u in np.linspace(-3, 3, 7):
            want = (b0 + 2 * b1 * u - b0 * u * u) / (1 + u * u)
            assert beta(spec, u, rng.normal()) == pytest.approx(want, abs=1e-12)


def test_beta_is_focal_offset(rng):
    # det of the Jacobian vanishes at r = -beta
    spec = cylinder_congruence(0.4, 0.7, -0.3)
    for _ in range(5):
        u, v = rng.uniform(-2, 2, 2)
        assert abs(np.linalg.det(spec.jacobian((u, v, -beta(spec, u, v))))) < 1e-12


def test_beta_reality(rng):
    for _ in range(20):
        xi = CurvePoly([(k, complex(*rng.uniform(-1, 1, 2))) for k in range(3)])
        eta = SheetPoly([(k, l, complex(*rng.uniform(-1, 1, 2)))
                         for k in range(3) for l in range(2)])
        spec = CongruenceSpec.rank1(xi, eta)
        u, v = rng.uniform(-1, 1, 2)
        try:
            beta(spec, u, v)  # asserts the imaginary residue internally
        except DegenerateParameterization:
            pass


def test_beta_degenerate():
    spec = CongruenceSpec.rank1(CurvePoly({1: 1}), SheetPoly({(1, 0): 1}))
    with pytest.raises(DegenerateParameterization):
        beta(spec, 0.2, 0.0)


# --- focal points and rank -----------------------------------------------------------


@pytest.mark.parametrize("s, expected", [
    (SpinData(0, 0, 0), (0.0, 0.0)),
    (SpinData(2, 0, 0), (-2.0, 2.0)),
    (SpinData(1, 1, 2), ()),
])
def test_focal_examples(s, expected):
    assert focal_points(s) == pytest.approx(expected)


@settings(max_examples=100, deadline=None)
@given(st.floats(-5, 5), st.floats(-5, 5), st.floats(-5, 5), st.floats(-5, 5))
def test_focal_roots_solve_quadratic(sr, si, theta, lam):
    s = SpinData(complex(sr, si), theta, lam)
    for r in focal_points(s):
        assert abs(s.focal_quadratic(r)) < 1e-9 * (1 + r * r)


def test_rank_examples():
    assert rank_at(CongruenceSpec.rank2(XIB), 0.3, 0.1) == 2
    assert rank_at(cylinder_congruence(), 0.5, -1.0) == 1
    assert rank_at(CongruenceSpec.rank0(0.2j)) == 0


def test_rank1_stationary_point():
    spec = CongruenceSpec.rank1(CurvePoly({2: 1}), SheetPoly({(0, 1): 1j}))
    assert rank_at(spec, 0.0, 0.0) == 0
    assert rank_at(spec, 1.0, 0.0) == 1


# --- coordinates -------------------------------------------------------------------


def test_jacobian_matches_fd(rng):
    specs = [CongruenceSpec.rank2(random_bipoly(rng, 3)), cylinder_congruence(0.3, 0.5, -0.2),
             CongruenceSpec.rank0(0.3 - 0.1j)]
    for spec in specs:
        q = np.array([0.3, -0.2, 1.7])
        h = 1e-6
        fd = np.stack([(spec.point(q + h * e) - spec.point(q - h * e)) / (2 * h)
                       for e in np.eye(3)], axis=1)
        np.testing.assert_allclose(spec.jacobian(q), fd, atol=1e-7)


def test_locate_roundtrip(rng):
    specs = [CongruenceSpec.rank2(sphere_congruence((0.5, -1, 0.2)) + 0.1 * XIB),
             cylinder_congruence(0.7, 0.3, -1.1), CongruenceSpec.rank0(0.4 + 0.2j)]
    for spec in specs:
        for _ in range(5):
            q = np.array([*rng.uniform(-0.8, 0.8, 2), rng.uniform(2, 4)])
            x = spec.point(q)
            np.testing.assert_allclose(spec.point(spec.locate(x, hint=q)), x, atol=1e-10)
            np.testing.assert_allclose(spec.point(spec.locate(x)), x, atol=1e-10)


def test_locate_failure_is_reported():
    # xi = u, eta = u keeps every line inside the plane x2 = 0
    spec = CongruenceSpec.rank1(CurvePoly({1: 1}), SheetPoly({(1, 0): 1}))
    with pytest.raises((LocateError, DegenerateParameterization)):
        spec.locate(np.array([0.0, 5.0, 0.0]))
