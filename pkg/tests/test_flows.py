import math

import numpy as np
import pytest

from conftest import random_bipoly
from congruence_flows import BiPoly, SheetPoly, TimeSignal
from congruence_flows.congruence import (
    CongruenceSpec,
    SpinData,
    beta,
    cylinder_congruence,
    sphere_congruence,
)
from congruence_flows.errors import CaseMismatch, FocalSingularity, SourceSingularity
from congruence_flows.flows import (
    candidate_pressure_rank1,
    candidate_pressure_rank2,
    canonical_cylinder_flow,
    canonical_plane_flow,
    canonical_sphere_flow,
    divfree_rank0,
    divfree_rank1,
    divfree_rank2,
    pressure_from_spin,
    steady_pressure_from_spin,
)
from congruence_flows.geometry import direction_vector

XI, XIB = BiPoly.xi(), BiPoly.xibar()
T = TimeSignal(0.0, ((1, 1.0),))  # H(t) = t


def speed(flow, x, t=0.0):
    return float(np.linalg.norm(flow.velocity(x, t)))


# --- generic builders ----------------------------------------------------------------


def test_divfree_rank2_examples():
    flow = divfree_rank2(BiPoly(), 1.0)
    np.testing.assert_allclose(flow.velocity((0, 0, 2)), (0, 0, 0.25), atol=1e-15)
    assert speed(flow, (0.3, -0.4, np.sqrt(1 - 0.25))) == pytest.approx(1.0)
    assert speed(divfree_rank2(1j * XI, 1.0), (0, 0, 0)) == pytest.approx(1.0)


def test_divfree_rank2_focal_error():
    with pytest.raises(FocalSingularity):
        divfree_rank2(BiPoly(), 1.0).velocity((0, 0, 0))


def test_divfree_rank1_examples():
    cyl = cylinder_congruence()
    assert speed(divfree_rank1(cyl, 1.0), cyl.point((0, 0, 2))) == pytest.approx(0.5)
    assert speed(divfree_rank1(cyl, 1.0), cyl.point((0, 0, 1))) == pytest.approx(1.0)
    shifted = cylinder_congruence(0.0, 1.0, 0.0)
    assert speed(divfree_rank1(shifted, 1.0), shifted.point((0, 0, 1))) == pytest.approx(0.5)


def test_divfree_rank0_examples():
    np.testing.assert_allclose(divfree_rank0(None, 1.0).velocity((3, -2, 7)), (0, 0, 1))
    assert speed(divfree_rank0(SheetPoly({(1, 0): 1}), 0.0), (2, 0, 5)) == pytest.approx(2.0)
    assert speed(divfree_rank0(SheetPoly({(1, 1): 1}), 1.0), (1, 1, 0)) == pytest.approx(2.0)


def test_builders_reject_wrong_pressure_form():
    with pytest.raises(ValueError):
        divfree_rank1(cylinder_congruence(), 1.0, pressure_form="case_ii")
    with pytest.raises(ValueError):
        divfree_rank0(None, 1.0, pressure_form="rank1")
    with pytest.raises(ValueError):
        divfree_rank2(BiPoly(), 1.0, pressure_form="rank0")


# --- canonical flows -----------------------------------------------------------------


def test_sphere_flow_examples():
    flow = canonical_sphere_flow((0, 0, 0), 1.0, 0.0)
    np.testing.assert_allclose(flow.velocity((0, 0, 2)), (0, 0, 0.25))
    assert flow.pressure((0, 0, 2)) == pytest.approx(-1 / 32)
    zero = canonical_sphere_flow((0, 0, 0), 0.0, 0.7)
    assert speed(zero, (1, 2, 3)) == 0 and zero.pressure((1, 2, 3)) == 0.7
    lin = canonical_sphere_flow((0, 0, 0), T, 0.0)
    assert speed(lin, (0, 1, 0)) == 0 and lin.pressure((0, 1, 0), 0.0) == pytest.approx(1.0)
    with pytest.raises(SourceSingularity):
        flow.velocity((0, 0, 0))


def test_cylinder_flow_examples():
    flow = canonical_cylinder_flow((0, 0, 0), (0, 1, 0), 1.0, 0.0)
    assert speed(flow, (2, 5, 0)) == pytest.approx(0.5)
    assert flow.pressure((0, -1, 2)) == pytest.approx(-1 / 8)
    zero = canonical_cylinder_flow((0, 0, 0), (0, 1, 0), 0.0, 0.3)
    assert speed(zero, (1, 0, 1)) == 0 and zero.pressure((1, 0, 1)) == 0.3
    lin = canonical_cylinder_flow((0, 0, 0), (0, 1, 0), T, 0.0)
    assert speed(lin, (1, 0, 0)) == 0 and lin.pressure((1, 0, 0)) == pytest.approx(0.0)


def test_plane_flow_examples():
    const = canonical_plane_flow(0j, 2.5, None, 0.1)
    np.testing.assert_allclose(const.velocity((4, 5, 6), 3.0), (0, 0, 2.5))
    assert const.pressure((4, 5, 6), 3.0) == 0.1
    assert canonical_plane_flow(0j, T, None, 0.0).pressure((1, 1, 3), 9.0) == pytest.approx(-3.0)
    kflow = canonical_plane_flow(0j, 0.0, SheetPoly({(1, 0): 1}), 0.0)
    np.testing.assert_allclose(kflow.velocity((1, 0, 5)), (0, 0, 1))
    assert kflow.pressure((1, 0, 5)) == 0.0


def test_cylinder_flow_attaches_matching_congruence(rng):
    for _ in range(5):
        ang = rng.uniform(0, 2 * math.pi)
        axis = np.array([-math.sin(ang), math.cos(ang), 0.0])
        point = rng.uniform(-2, 2, 3)
        flow = canonical_cylinder_flow(point, axis, 1.0)
        spec = flow.congruence
        u, v = rng.uniform(-2, 2, 2)
        x = spec.point((u, v, 3.0 - beta(spec, u, v)))
        d = x - point
        assert np.linalg.norm(d - (d @ axis) * axis) == pytest.approx(3.0)
        np.testing.assert_allclose(flow.velocity(x), divfree_rank1(spec, 1.0).velocity(x),
                                   atol=1e-12)


# --- candidate pressures ----------------------------------------------------------------


def test_candidate_rank2_examples():
    for r in (0.5, 1.5, 3.0):
        assert candidate_pressure_rank2(BiPoly(), 2.0, 0.3j, r, p0=0.1) == pytest.approx(
            0.1 - 4.0 / (2 * r**4))
        assert candidate_pressure_rank2(1j * XI, 1.0, 0, r) == pytest.approx(
            -1 / (2 * (r * r + 1) ** 2))
        assert candidate_pressure_rank2(XIB, 1.0, 0, r + 1.1) == pytest.approx(
            -1 / (2 * ((r + 1.1) ** 2 - 1) ** 2))


def test_candidate_rank1_examples():
    cyl = cylinder_congruence()
    assert candidate_pressure_rank1(cyl, 3.0, 0.2, 0.1, 2.0, p0=1.0) == pytest.approx(1 - 9 / 8)
    assert candidate_pressure_rank1(cyl, 0.0, 0.2, 0.1, 2.0, p0=1.0) == 1.0
    assert candidate_pressure_rank1(cyl, T, 0.0, 0.0, math.e, 0.0) == pytest.approx(-1.0)


def test_case_mismatch():
    with pytest.raises(CaseMismatch):
        candidate_pressure_rank2(1j * XI, 1.0, 0, 1.0, case="case_iii")
    with pytest.raises(CaseMismatch):
        candidate_pressure_rank2(XIB, 1.0, 0, 2.0, case="case_ii")


def test_log_case_between_roots():
    with pytest.raises(FocalSingularity):
        candidate_pressure_rank2(XIB, T, 0, 0.0, t=0.0)


@pytest.mark.parametrize("spin", [
    SpinData(0, 0.3, 0),
    SpinData(0.5, -0.2, 1.2),
    SpinData(1.5 + 0.5j, 0.4, 0.7),
])
def test_pressures_solve_along_line_euler(spin):
    # dt f + f dr f + dr p = 0 with f = H / Q
    H = TimeSignal(1.0, ((1, 0.6),), ((0.3, 2.0, 0.1),))
    h = 1e-5
    f = lambda r, t: H(t) / spin.focal_quadratic(r)
    p = lambda r, t: pressure_from_spin(spin, H(t), H.derivative(t), r)
    for r in (2.5, 3.0, 4.0):
        for t in (0.0, 0.9):
            ft = (f(r, t + h) - f(r, t - h)) / (2 * h)
            fr = (f(r + h, t) - f(r - h, t)) / (2 * h)
            pr = (p(r + h, t) - p(r - h, t)) / (2 * h)
            assert abs(ft + f(r, t) * fr + pr) < 1e-8


def test_case_continuity():
    for disc in (1e-4, -1e-4):
        lam, sig = (math.sqrt(disc), 0.0) if disc > 0 else (0.0, math.sqrt(-disc))
        near = SpinData(sig, 0.2, lam)
        flat = SpinData(0, 0.2, 0)
        for r in (0.8, 1.5, 3.0):
            assert abs(pressure_from_spin(near, 1.0, 0.0, r)
                       - pressure_from_spin(flat, 1.0, 0.0, r)) < 1e-3


def test_steady_reduction(rng):
    c = rng.uniform(-1, 1, 3)
    H = 1.7
    sphere = canonical_sphere_flow(c, H)
    cyl = canonical_cylinder_flow(c, (0, 1, 0), H)
    plane = canonical_plane_flow(0j, H, SheetPoly({(1, 0): 0.3}))
    for _ in range(5):
        x = c + rng.uniform(1, 2, 3)
        r = float(np.linalg.norm(x - c))
        assert sphere.pressure(x, 0.0) == sphere.pressure(x, 5.0)
        assert abs(sphere.pressure(x) - steady_pressure_from_spin(SpinData(0, 0, 0), H, r)) < 1e-12
        rc = math.hypot(x[0] - c[0], x[2] - c[2])
        assert abs(cyl.pressure(x, 2.0) - (-H * H / (2 * rc * rc))) < 1e-12
        assert plane.pressure(x, 1.0) == 0.0


# --- tangency -------------------------------------------------------------------------


def _angle(a, b):
    c = np.dot(a, b) / (np.linalg.norm(a) * np.linalg.norm(b))
    return math.acos(min(1.0, abs(c)))


def test_tangency(rng):
    rank2 = CongruenceSpec.rank2(random_bipoly(rng, 3, 0.5))
    cyl = cylinder_congruence(0.6, 0.2, -0.4)
    cases = [
        (rank2, divfree_rank2(rank2, 1.0)),
        (rank2, divfree_rank2(rank2, XI * XIB + 1)),
        (cyl, divfree_rank1(cyl, 2.0)),
        (CongruenceSpec.rank0(0.5 - 0.5j),
         divfree_rank0(SheetPoly({(0, 0): 1, (1, 1): 0.2}), 1.0, 0.5 - 0.5j)),
    ]
    for spec, flow in cases:
        for _ in range(5):
            q = (*rng.uniform(-0.7, 0.7, 2), rng.uniform(3, 5))
            line = spec.line(q[0], q[1])
            assert _angle(flow.velocity(spec.point(q)), direction_vector(line.xi)) < 1e-10
    sphere = CongruenceSpec.rank2(sphere_congruence((1, 2, 3)))
    for q in ((0.2, -0.3, 2.0), (-0.6, 0.1, 0.5)):
        x = sphere.point(q)
        flow = canonical_sphere_flow((1, 2, 3), 1.0)
        assert _angle(flow.velocity(x), direction_vector(complex(q[0], q[1]))) < 1e-10


def test_time_signal():
    H = TimeSignal(1.0, ((2, 3.0),), ((0.5, 2.0, 0.0),))
    assert H(1.0) == pytest.approx(4.0 + 0.5 * math.sin(2.0))
    assert H.derivative(1.0) == pytest.approx(6.0 + math.cos(2.0))
    assert TimeSignal(2.0).is_steady and not H.is_steady
    with pytest.raises(ValueError):
        TimeSignal(float("nan"))
