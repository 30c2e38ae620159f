"""Velocity fields tangent to a congruence and their pressures.

Every builder returns a :class:`FlowField`, an immutable bundle of evaluators
in Euclidean coordinates.  The generic ``divfree_*`` builders locate the
congruence line through each query point; the canonical sphere, cylinder and
plane flows use closed forms.
"""
from __future__ import annotations

import math
from collections.abc import Callable
from dataclasses import dataclass, field

import numpy as np

from . import geometry
from .congruence import (
    CongruenceSpec,
    SpinData,
    beta,
    cylinder_congruence,
    focal_points,
    sphere_congruence,
    spin_coefficients,
)
from .errors import CaseMismatch, FocalSingularity, SourceSingularity
from .polynomials import BiPoly, SheetPoly

PRESSURE_FORMS = ("steady", "case_i", "case_ii", "case_iii", "candidate",
                  "rank1", "rank0", "none")
CASE_TOL = 1e-10
FOCAL_GUARD = 1e-12
SOURCE_GUARD = 1e-9


@dataclass(frozen=True)
class TimeSignal:
    """``constant + sum c t^k + sum A sin(w t + phase)`` with its derivative."""

    constant: float = 0.0
    poly: tuple[tuple[int, float], ...] = ()
    sinusoids: tuple[tuple[float, float, float], ...] = ()

    def __post_init__(self):
        poly = tuple((int(k), float(c)) for k, c in self.poly)
        sins = tuple((float(a), float(w), float(ph)) for a, w, ph in self.sinusoids)
        vals = [self.constant, *(c for _, c in poly), *(x for s in sins for x in s)]
        if not all(math.isfinite(v) for v in vals):
            raise ValueError("TimeSignal parameters must be finite")
        if any(k < 0 for k, _ in poly):
            raise ValueError("TimeSignal powers must be nonnegative")
        object.__setattr__(self, "constant", float(self.constant))
        object.__setattr__(self, "poly", poly)
        object.__setattr__(self, "sinusoids", sins)

    def __call__(self, t: float) -> float:
        out = self.constant
        for k, c in self.poly:
            out += c * t**k
        for a, w, ph in self.sinusoids:
            out += a * math.sin(w * t + ph)
        return out

    def derivative(self, t: float) -> float:
        out = 0.0
        for k, c in self.poly:
            if k:
                out += k * c * t ** (k - 1)
        for a, w, ph in self.sinusoids:
            out += a * w * math.cos(w * t + ph)
        return out

    @property
    def is_steady(self) -> bool:
        return all(k == 0 or c == 0 for k, c in self.poly) and all(
            a == 0 or w == 0 for a, w, _ in self.sinusoids)


def as_time_signal(h) -> TimeSignal:
    if isinstance(h, TimeSignal):
        return h
    return TimeSignal(constant=float(h))


def _amplitude(h, rank: int):
    """Normalize ``H`` to ``f(p1, p2, t) -> (H, dH/dt)``."""
    if isinstance(h, (int, float)):
        h = TimeSignal(float(h))
    if isinstance(h, TimeSignal):
        return lambda p1, p2, t: (h(t), h.derivative(t))
    if isinstance(h, BiPoly):
        return lambda p1, p2, t: (float(h(complex(p1, p2)).real), 0.0)
    if isinstance(h, SheetPoly):
        return lambda p1, p2, t: (float(h(p1, p2).real), 0.0)
    if callable(h):
        if rank == 2:
            return lambda p1, p2, t: (float(h(complex(p1, p2))), 0.0)
        return lambda p1, p2, t: (float(h(p1, p2)), 0.0)
    raise TypeError(f"unsupported H of type {type(h).__name__}")


@dataclass(frozen=True, eq=False)
class FlowField:
    """Time-dependent velocity and pressure tangent to a congruence."""

    congruence: CongruenceSpec | None
    H: object
    p0: float
    pressure_form: str
    velocity_fn: Callable = field(repr=False)
    pressure_fn: Callable | None = field(default=None, repr=False)
    dvdt_fn: Callable | None = field(default=None, repr=False)
    singular_fn: Callable | None = field(default=None, repr=False)
    locates: bool = False
    K: SheetPoly | None = None
    kind: str = "divfree"

    def __post_init__(self):
        if self.pressure_form not in PRESSURE_FORMS:
            raise ValueError(f"unknown pressure form {self.pressure_form!r}")

    def coords(self, x, hint=None):
        """Congruence coordinates of ``x`` for flows that need them, else ``None``."""
        if not self.locates:
            return None
        return self.congruence.locate(x, hint=hint)

    def velocity(self, x, t: float = 0.0, hint=None) -> np.ndarray:
        return self.velocity_fn(geometry.as_point(x), t, hint)

    def pressure(self, x, t: float = 0.0, hint=None) -> float:
        if self.pressure_fn is None:
            raise ValueError("flow has no pressure")
        return self.pressure_fn(geometry.as_point(x), t, hint)

    def velocity_dt(self, x, t: float = 0.0, hint=None):
        """Analytic time derivative of the velocity, or ``None`` if unavailable."""
        if self.dvdt_fn is None:
            return None
        return self.dvdt_fn(geometry.as_point(x), t, hint)

    def singular_distance(self, x, hint=None) -> float:
        if self.singular_fn is None:
            return math.inf
        return self.singular_fn(geometry.as_point(x), hint)


# --- pressures -----------------------------------------------------------------


def _case_of(disc: float) -> str:
    if abs(disc) <= CASE_TOL:
        return "case_ii"
    return "case_i" if disc > 0 else "case_iii"


def pressure_from_spin(s: SpinData, H: float, Hdot: float, r: float, p0: float = 0.0,
                       case: str | None = None) -> float:
    """Closed-form pressure along one line of a rank-2 congruence."""
    disc = s.discriminant
    actual = _case_of(disc)
    if case is None or case == "candidate":
        case = actual
    elif case != actual:
        raise CaseMismatch(f"{case} requested but lambda^2-|sigma|^2 = {disc!r}")
    x = r + s.theta
    if case == "case_ii":
        if abs(x) < FOCAL_GUARD:
            raise FocalSingularity("pressure evaluated on the focal set")
        return p0 - H * H / (2.0 * x**4) + Hdot / x
    q = x * x + disc
    if abs(q) < FOCAL_GUARD:
        raise FocalSingularity("pressure evaluated on the focal set")
    p = p0 - H * H / (2.0 * q * q)
    if Hdot == 0.0:
        return p
    if case == "case_i":
        w = math.sqrt(disc)
        return p - Hdot / w * math.atan(x / w)
    w = math.sqrt(-disc)
    num, den = x - w, x + w
    if num == 0.0 or den == 0.0:
        raise FocalSingularity("pressure evaluated on the focal set")
    ratio = num / den
    if ratio <= 0.0:
        raise FocalSingularity("log pressure undefined between the focal radii")
    return p - Hdot / (2.0 * w) * math.log(ratio)


def steady_pressure_from_spin(s: SpinData, H: float, r: float, p0: float = 0.0) -> float:
    q = s.focal_quadratic(r)
    if abs(q) < FOCAL_GUARD:
        raise FocalSingularity("pressure evaluated on the focal set")
    return p0 - H * H / (2.0 * q * q)


def candidate_pressure_rank2(F, H, xi, r: float, t: float = 0.0, p0: float = 0.0,
                             case: str | None = None) -> float:
    """Pressure solving the along-line Euler equation for a rank-2 congruence.

    The form is chosen by the sign of ``lambda^2 - |sigma|^2`` at ``xi``:
    arctan for positive, rational for zero, logarithmic for negative.
    Forcing ``case`` to a form inconsistent with that sign raises
    :class:`CaseMismatch`.
    """
    H = as_time_signal(H)
    s = spin_coefficients(F, xi)
    return pressure_from_spin(s, H(t), H.derivative(t), r, p0, case)


def candidate_pressure_rank1(spec: CongruenceSpec, H, u: float, v: float, r: float,
                             t: float = 0.0, p0: float = 0.0) -> float:
    H = as_time_signal(H)
    x = r + beta(spec, u, v)
    if abs(x) < FOCAL_GUARD:
        raise FocalSingularity("pressure evaluated on the focal line")
    h = H(t)
    return p0 - h * h / (2.0 * x * x) - H.derivative(t) * math.log(abs(x))


# --- generic divergence-free builders -------------------------------------------


def _rank2_shape(spec: CongruenceSpec, q):
    xi = complex(q[0], q[1])
    s = spin_coefficients(spec, xi)
    return xi, s, s.focal_quadratic(q[2])


def divfree_rank2(F, H=1.0, p0: float = 0.0, pressure_form: str = "none") -> FlowField:
    """``V = H / ((r + theta)^2 + lambda^2 - |sigma|^2) d/dr`` on ``eta = F``.

    ``H`` is a float, a :class:`TimeSignal`, or a real field over ``xi``
    (a callable or a ``BiPoly`` whose real part is used).
    """
    spec = F if isinstance(F, CongruenceSpec) else CongruenceSpec.rank2(F)
    amp = _amplitude(H, 2)

    def parts(x, t, hint):
        q = spec.locate(x, hint=hint)
        xi, s, qd = _rank2_shape(spec, q)
        if abs(qd) < FOCAL_GUARD:
            raise FocalSingularity(f"{x.tolist()} lies on the focal set")
        h, hdot = amp(q[0], q[1], t)
        return q, xi, s, qd, h, hdot

    def velocity(x, t, hint):
        _, xi, _, qd, h, _ = parts(x, t, hint)
        return geometry.direction_vector(xi) * (h / qd)

    def dvdt(x, t, hint):
        _, xi, _, qd, _, hdot = parts(x, t, hint)
        return geometry.direction_vector(xi) * (hdot / qd)

    def singular(x, hint):
        q = spec.locate(x, hint=hint)
        s = spin_coefficients(spec, complex(q[0], q[1]))
        roots = focal_points(s)
        return min((abs(q[2] - rt) for rt in roots), default=math.inf)

    pressure = None
    if pressure_form == "steady":
        def pressure(x, t, hint):
            q, _, s, _, h, _ = parts(x, t, hint)
            return steady_pressure_from_spin(s, h, q[2], p0)
    elif pressure_form in ("case_i", "case_ii", "case_iii", "candidate"):
        def pressure(x, t, hint):
            q, _, s, _, h, hdot = parts(x, t, hint)
            return pressure_from_spin(s, h, hdot, q[2], p0, pressure_form)
    elif pressure_form != "none":
        raise ValueError(f"pressure form {pressure_form!r} does not apply to rank 2")
    return FlowField(spec, H, p0, pressure_form, velocity, pressure, dvdt, singular,
                     locates=True)


def divfree_rank1(spec: CongruenceSpec, H=1.0, p0: float = 0.0,
                  pressure_form: str = "none") -> FlowField:
    """``V = H / (r + beta) d/dr`` on a rank-1 congruence."""
    if spec.rank != 1:
        raise ValueError("divfree_rank1 needs a rank-1 congruence")
    amp = _amplitude(H, 1)

    def parts(x, t, hint):
        q = spec.locate(x, hint=hint)
        b = beta(spec, q[0], q[1])
        den = q[2] + b
        if abs(den) < FOCAL_GUARD:
            raise FocalSingularity(f"{x.tolist()} lies on the focal line")
        h, hdot = amp(q[0], q[1], t)
        return q, complex(spec.xi(q[0])), den, h, hdot

    def velocity(x, t, hint):
        _, xi, den, h, _ = parts(x, t, hint)
        return geometry.direction_vector(xi) * (h / den)

    def dvdt(x, t, hint):
        _, xi, den, _, hdot = parts(x, t, hint)
        return geometry.direction_vector(xi) * (hdot / den)

    def singular(x, hint):
        q = spec.locate(x, hint=hint)
        return abs(q[2] + beta(spec, q[0], q[1]))

    pressure = None
    if pressure_form == "rank1":
        def pressure(x, t, hint):
            _, _, den, h, hdot = parts(x, t, hint)
            return p0 - h * h / (2.0 * den * den) - hdot * math.log(abs(den))
    elif pressure_form != "none":
        raise ValueError(f"pressure form {pressure_form!r} does not apply to rank 1")
    return FlowField(spec, H, p0, pressure_form, velocity, pressure, dvdt, singular,
                     locates=True)


def _real_sheet(K):
    if K is None:
        return lambda u, v: 0.0
    if isinstance(K, SheetPoly):
        return lambda u, v: float(K(u, v).real)
    return K


def divfree_rank0(K=None, H=1.0, xi0=0j, p0: float = 0.0,
                  pressure_form: str = "none") -> FlowField:
    """``V = (H(t) + K(u, v)) d/dr`` on the parallel lines with direction ``xi0``."""
    spec = CongruenceSpec.rank0(xi0)
    Hs = as_time_signal(H)
    k = _real_sheet(K)
    d = geometry.direction_vector(spec.xi0)

    def velocity(x, t, hint):
        u, v, _ = spec.locate(x)
        return d * (Hs(t) + k(u, v))

    def dvdt(x, t, hint):
        return d * Hs.derivative(t)

    pressure = None
    if pressure_form == "rank0":
        def pressure(x, t, hint):
            return p0 - Hs.derivative(t) * geometry.point_to_r(x, spec.xi0)
    elif pressure_form != "none":
        raise ValueError(f"pressure form {pressure_form!r} does not apply to rank 0")
    return FlowField(spec, Hs, p0, pressure_form, velocity, pressure, dvdt, None,
                     K=K if isinstance(K, SheetPoly) else None)


# --- canonical flows --------------------------------------------------------------


def canonical_sphere_flow(center=(0.0, 0.0, 0.0), H=1.0, p0: float = 0.0) -> FlowField:
    """Point source at ``center``: ``V = H/r^2``, ``p = p0 - H^2/(2r^4) + H'/r``."""
    c = geometry.as_point(center)
    Hs = as_time_signal(H)

    def radial(x):
        d = x - c
        r = float(np.linalg.norm(d))
        if r < SOURCE_GUARD:
            raise SourceSingularity("evaluation at the sphere centre")
        return d / r, r

    def velocity(x, t, hint):
        e, r = radial(x)
        return e * (Hs(t) / r**2)

    def dvdt(x, t, hint):
        e, r = radial(x)
        return e * (Hs.derivative(t) / r**2)

    def pressure(x, t, hint):
        _, r = radial(x)
        h = Hs(t)
        return p0 - h * h / (2.0 * r**4) + Hs.derivative(t) / r

    def singular(x, hint):
        return float(np.linalg.norm(x - c))

    return FlowField(CongruenceSpec.rank2(sphere_congruence(c)), Hs, p0, "case_ii",
                     velocity, pressure, dvdt, singular, kind="sphere")


def _cylinder_congruence_for(point, direction):
    if abs(direction[2]) > 1e-12:
        return None
    angle = math.atan2(-direction[0], direction[1])
    a = point - np.dot(point, direction) * direction
    b0 = -a[2]
    b1 = -(a[0] * math.cos(angle) + a[1] * math.sin(angle))
    return cylinder_congruence(angle, b0, b1)


def canonical_cylinder_flow(axis_point=(0.0, 0.0, 0.0), axis_direction=(0.0, 1.0, 0.0),
                            H=1.0, p0: float = 0.0) -> FlowField:
    """Line source along an axis: ``V = H/r``, ``p = p0 - H^2/(2r^2) - H' ln r``."""
    a = geometry.as_point(axis_point)
    n = geometry.as_point(axis_direction)
    n = n / np.linalg.norm(n)
    Hs = as_time_signal(H)

    def radial(x):
        d = x - a
        d = d - np.dot(d, n) * n
        r = float(np.linalg.norm(d))
        if r < SOURCE_GUARD:
            raise SourceSingularity("evaluation on the cylinder axis")
        return d / r, r

    def velocity(x, t, hint):
        e, r = radial(x)
        return e * (Hs(t) / r)

    def dvdt(x, t, hint):
        e, r = radial(x)
        return e * (Hs.derivative(t) / r)

    def pressure(x, t, hint):
        _, r = radial(x)
        h = Hs(t)
        return p0 - h * h / (2.0 * r * r) - Hs.derivative(t) * math.log(r)

    def singular(x, hint):
        d = x - a
        return float(np.linalg.norm(d - np.dot(d, n) * n))

    return FlowField(_cylinder_congruence_for(a, n), Hs, p0, "rank1", velocity, pressure,
                     dvdt, singular, kind="cylinder")


def canonical_plane_flow(xi0=0j, H=1.0, K=None, p0: float = 0.0) -> FlowField:
    """Plane source at infinity: ``V = (H(t) + K(u, v)) d/dr``, ``p = p0 - H' r``."""
    flow = divfree_rank0(K, H, xi0, p0, "rank0")
    return FlowField(flow.congruence, flow.H, p0, "rank0", flow.velocity_fn,
                     flow.pressure_fn, flow.dvdt_fn, None, K=flow.K, kind="plane")
