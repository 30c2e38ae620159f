"""Necessary conditions for a congruence to carry an Euler flow, and a classifier.

The rank-2 checks are shear, twist and the constant-mean-curvature relation;
all three vanish only for the lines through a point.  The rank-1 checks are
the great-circle (geodesic) condition, the transport relation for ``beta``
and the second-order ODE ``beta`` must satisfy along the great circle.
Together they sort a congruence into sphere, cylinder, plane or obstructed.
"""
from __future__ import annotations

from collections.abc import Callable, Sequence
from dataclasses import dataclass, field

import numpy as np

from . import geometry
from .congruence import (
    CongruenceSpec,
    beta_jet,
    rank_at,
    spin_coefficients,
)
from .errors import DegenerateParameterization, IllConditioned
from .flows import steady_pressure_from_spin
from .polynomials import BiPoly, CurvePoly, DQuotient

HOLD_TOL = 1e-8
FAIL_TOL = 1e-5
MAX_CONDITION = 1e10


@dataclass(frozen=True)
class RPolyCoeffs:
    degree: int
    coeffs: np.ndarray  # ascending powers of r
    conditioning: float
    fit_residual: float = 0.0

    def __post_init__(self):
        if len(self.coeffs) != self.degree + 1:
            raise ValueError("coefficient count must be degree + 1")


def r_poly_coeffs(sampler: Callable[[float], complex], degree: int,
                  r_samples: Sequence[float]) -> RPolyCoeffs:
    """Least-squares fit of ``sampler(r)`` by a polynomial of ``degree``."""
    r = np.asarray(r_samples, dtype=float)
    if len(np.unique(r)) < degree + 1:
        raise ValueError(f"need at least {degree + 1} distinct samples")
    V = np.vander(r, degree + 1, increasing=True)
    cond = float(np.linalg.cond(V))
    if cond > MAX_CONDITION:
        raise IllConditioned(f"Vandermonde condition {cond:.3g} exceeds {MAX_CONDITION:g}")
    y = np.array([complex(sampler(x)) for x in r])
    coeffs, *_ = np.linalg.lstsq(V, y, rcond=None)
    if np.all(coeffs.imag == 0):
        coeffs = coeffs.real
    resid = float(np.max(np.abs(V @ coeffs - y))) if len(r) else 0.0
    return RPolyCoeffs(degree, coeffs, cond, resid)


def _spec2(F) -> CongruenceSpec:
    return F if isinstance(F, CongruenceSpec) else CongruenceSpec.rank2(F)


def cmc_expr(F) -> DQuotient:
    """``d theta / d xi + 2 conj(F) / (1 + |xi|^2)^2`` as an exact expression."""
    spec = _spec2(F)
    return spec.theta_expr.d() + DQuotient(spec.F.conj() * 2, 2)


def cmc_condition(F, xi) -> complex:
    return complex(cmc_expr(F)(complex(xi)))


def twist_vanishing(F, samples) -> float:
    spec = _spec2(F)
    return float(np.max(np.abs(np.asarray(spec.lambda_expr(np.asarray(samples))).real)))


def shear_vanishing(F, samples) -> float:
    spec = _spec2(F)
    return float(np.max(np.abs(spec.sigma_expr(np.asarray(samples)))))


def discriminant_spread(F, samples) -> float:
    """Spread of ``lambda^2 - |sigma|^2`` over the samples; zero when it is constant."""
    vals = [spin_coefficients(F, xi).discriminant for xi in np.ravel(samples)]
    return float(max(vals) - min(vals))


def geodesic_residual(xi: CurvePoly, u: float) -> complex:
    """Great-circle equation for the direction curve ``xi(u)`` on the sphere."""
    x = complex(xi(u))
    d1 = complex(xi.deriv(1)(u))
    d2 = complex(xi.deriv(2)(u))
    if d1 == 0:
        raise DegenerateParameterization(f"xi'(u) vanishes at u={u}")
    xb, d1b, d2b = x.conjugate(), d1.conjugate(), d2.conjugate()
    return ((1 + (x * xb).real) * (d1b * d2 - d1 * d2b)
            - 2 * (xb * d1 - x * d1b) * d1 * d1b)


class BetaGeneralSolution:
    """``(b0 + 2 b1 u - b0 u^2) / (1 + u^2)`` with exact derivatives."""

    def __init__(self, b0: float, b1: float):
        self.b0, self.b1 = float(b0), float(b1)

    def __repr__(self) -> str:
        return f"BetaGeneralSolution(b0={self.b0!r}, b1={self.b1!r})"

    def __call__(self, u):
        return (self.b0 + 2 * self.b1 * u - self.b0 * u * u) / (1 + u * u)

    def jet(self, u: float):
        n = self.b0 + 2 * self.b1 * u - self.b0 * u * u
        n1 = 2 * self.b1 - 2 * self.b0 * u
        n2 = -2 * self.b0
        m, m1, m2 = 1 + u * u, 2 * u, 2.0
        f1 = (n1 * m - n * m1) / m**2
        f2 = (n2 * m - n * m2) / m**2 - 2 * m1 * (n1 * m - n * m1) / m**3
        return n / m, f1, f2


def _jet(fn, u: float, h: float = 1e-3):
    if hasattr(fn, "jet"):
        return fn.jet(u)
    if hasattr(fn, "deriv"):
        vals = (fn(u), fn.deriv(1)(u), fn.deriv(2)(u))
        return tuple(complex(v).real for v in vals)
    f = [fn(u + k * h) for k in (-2, -1, 0, 1, 2)]
    d1 = (f[0] - 8 * f[1] + 8 * f[3] - f[4]) / (12 * h)
    d2 = (-f[0] + 16 * f[1] - 30 * f[2] + 16 * f[3] - f[4]) / (12 * h * h)
    return f[2], d1, d2


def beta_ode_residual(beta_fn, u: float) -> float:
    """``(1+u^2)^2 b'' + 2u(1+u^2) b' + 4b``.

    Derivatives are exact when ``beta_fn`` offers ``jet`` or ``deriv``
    (``BetaGeneralSolution``, ``CurvePoly``, numpy polynomials), otherwise
    fourth-order finite differences.
    """
    b, b1, b2 = _jet(beta_fn, u)
    m = 1 + u * u
    return m * m * b2 + 2 * u * m * b1 + 4 * b


def recovered_eta(xi: CurvePoly, beta_fn, u: float, v: float) -> complex:
    """Fibre coordinate forced by the transport relation for ``beta``."""
    x = complex(xi(u))
    d1 = complex(xi.deriv(1)(u))
    if d1 == 0:
        raise DegenerateParameterization(f"xi'(u) vanishes at u={u}")
    _, b1, _ = _jet(beta_fn, u)
    conf = 1 + (x * x.conjugate()).real
    return (-conf**2 / (4 * abs(d1) ** 2) * b1 + 1j * v) * d1


def transverse_residual(F, H, xi, r: float, p0: float = 0.0, step: float = 1e-4) -> complex:
    """Transverse Euler equation for the steady pressure, times the focal quadratic cubed.

    With ``p = p0 - H^2 / (2 Q^2)`` and ``Q = (r+theta)^2 + lambda^2 - |sigma|^2``
    this returns ``Q^3 (dp/dxi + 2 conj(F)/(1+|xi|^2)^2 dp/dr)``, a degree-6
    polynomial in ``r``.  Derivatives of ``p`` are fourth-order finite
    differences; ``H`` is a float or a real field over ``xi``.
    """
    spec = _spec2(F)
    hfun = (lambda z: float(H)) if isinstance(H, (int, float)) else (
        (lambda z: float(H(z).real)) if isinstance(H, BiPoly) else H)
    xi = complex(xi)

    def p(z, rr):
        return steady_pressure_from_spin(spin_coefficients(spec, z), hfun(z), rr, p0)

    def d(f):
        return (f(-2) - 8 * f(-1) + 8 * f(1) - f(2)) / (12 * step)

    p_a = d(lambda k: p(xi + k * step, r))
    p_b = d(lambda k: p(xi + 1j * k * step, r))
    p_r = d(lambda k: p(xi, r + k * step))
    p_xi = 0.5 * (p_a - 1j * p_b)
    conf = 1 + abs(xi) ** 2
    q = spin_coefficients(spec, xi).focal_quadratic(r)
    return q**3 * (p_xi + 2 * complex(spec.F(xi)).conjugate() / conf**2 * p_r)


def default_samples(spec: CongruenceSpec, n: int = 9):
    if spec.rank == 2:
        g = np.linspace(-1.0, 1.0, n)
        pts = [complex(a, b) for a in g for b in g if a * a + b * b <= 1.0 + 1e-12]
        return [(z.real, z.imag) for z in pts]
    g = np.linspace(-2.0, 2.0, n)
    return [(a, b) for a in g for b in g]


@dataclass
class ClassificationVerdict:
    verdict: str
    parameters: dict = field(default_factory=dict)
    diagnostics: list = field(default_factory=list)
    reason: str | None = None
    indeterminate: bool = False
    notes: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.verdict in ("sphere", "cylinder", "plane")


_REASONS = {
    "shear": "shear nonzero",
    "twist": "twist nonzero",
    "cmc": "cmc condition violated",
    "geodesic": "direction curve not a great circle",
    "beta_v_independence": "beta depends on v",
    "beta_transport": "beta transport relation violated",
    "beta_ode": "beta ODE violated",
}


def _judge(diagnostics, hold: float):
    """First non-holding condition decides; returns ``(reason, indeterminate)``."""
    for name, sup in diagnostics:
        if name not in _REASONS:
            continue
        if sup < hold:
            continue
        if sup > FAIL_TOL:
            return _REASONS[name], False
        return _REASONS[name] + " (indeterminate, refine sampling)", True
    return None, False


def fit_sphere_center(F: BiPoly, samples) -> tuple[np.ndarray, float]:
    """Least-squares centre for ``F = (z0 - 2 t0 xi - conj(z0) xi^2) / 2``."""
    xi = np.array([complex(a, b) for a, b in samples])
    cols = np.stack([0.5 * (1 - xi**2), 0.5j * (1 + xi**2), -xi], axis=1)
    A = np.concatenate([cols.real, cols.imag])
    y = np.asarray(F(xi))
    rhs = np.concatenate([y.real, y.imag])
    sol, *_ = np.linalg.lstsq(A, rhs, rcond=None)
    return sol, float(np.max(np.abs(A @ sol - rhs)))


def fit_cylinder_axis(spec: CongruenceSpec, samples) -> tuple[np.ndarray, np.ndarray, float]:
    """Axis met by every line, from the great-circle plane and a linear fit."""
    dirs = np.array([geometry.direction_vector(complex(spec.xi(u))) for u, _ in samples])
    _, _, vt = np.linalg.svd(dirs)
    axis = vt[-1] / np.linalg.norm(vt[-1])
    if axis[np.argmax(np.abs(axis))] < 0:
        axis = -axis
    rows, rhs = [], []
    for (u, v), d in zip(samples, dirs):
        p = geometry.line_to_point(spec.line(u, v), 0.0)
        p = p - np.dot(p, axis) * axis
        nrm = np.cross(axis, d)
        rows.append(nrm)
        rhs.append(np.dot(nrm, p))
    rows.append(axis)  # pin the point to the plane through the origin
    rhs.append(0.0)
    A, b = np.array(rows), np.array(rhs)
    c, *_ = np.linalg.lstsq(A, b, rcond=None)
    return c, axis, float(np.max(np.abs(A @ c - b)))


def _classify_rank2(spec, samples, hold):
    xi = np.array([complex(a, b) for a, b in samples])
    diags = [
        ("shear", shear_vanishing(spec, xi)),
        ("twist", twist_vanishing(spec, xi)),
        ("cmc", float(np.max(np.abs(cmc_expr(spec)(xi))))),
    ]
    center, fit = fit_sphere_center(spec.F, samples)
    diags.append(("sphere_fit", fit))
    diags.append(("discriminant_spread", discriminant_spread(spec, xi)))
    reason, indet = _judge(diags, hold)
    if reason:
        return ClassificationVerdict("obstructed", {}, diags, reason, indet)
    params = {"center": [float(center[0]), float(center[1]), float(center[2])]}
    return ClassificationVerdict("sphere", params, diags)


def _classify_rank1(spec, samples, hold):
    notes = ["geodesic residual normalized by |xi'|^3; polynomial reparameterizations "
             "of a great circle are accepted"]
    d1 = spec.xi.deriv(1)
    geo, transport, bv = 0.0, 0.0, 0.0
    for u, v in samples:
        x = complex(spec.xi(u))
        xd = complex(d1(u))
        geo = max(geo, abs(geodesic_residual(spec.xi, u)) / abs(xd) ** 3)
        b, bu, _, b_v = beta_jet(spec, u, v)
        eta = complex(spec.eta(u, v))
        conf = 1 + abs(x) ** 2
        rel = bu + 2 * (eta.conjugate() * xd + eta * xd.conjugate()).real / conf**2
        transport = max(transport, abs(rel) / abs(xd))
        bv = max(bv, abs(b_v))
    diags = [("geodesic", geo), ("beta_v_independence", bv), ("beta_transport", transport)]
    if geo < hold:
        # Polynomial great circles pass through the north pole: xi = e^{i phi} s(u).
        us = sorted({u for u, _ in samples})
        lead = complex(d1(us[len(us) // 2]))
        w = lead / abs(lead)
        ode = 0.0
        for u, v in samples:
            s = (complex(spec.xi(u)) / w).real
            s1 = (complex(d1(u)) / w).real
            s2 = (complex(spec.xi.deriv(2)(u)) / w).real
            _, bu, buu, _ = beta_jet(spec, u, v)
            b = beta_jet(spec, u, v)[0]
            bs = bu / s1
            bss = (buu - bs * s2) / s1**2
            m = 1 + s * s
            ode = max(ode, abs(m * m * bss + 2 * s * m * bs + 4 * b))
        diags.append(("beta_ode", ode))
    reason, indet = _judge(diags, hold)
    if reason:
        return ClassificationVerdict("obstructed", {}, diags, reason, indet, notes)
    point, axis, fit = fit_cylinder_axis(spec, samples)
    diags.append(("axis_fit", fit))
    params = {"axis_point": [float(c) for c in point], "axis_direction": [float(c) for c in axis]}
    return ClassificationVerdict("cylinder", params, diags, notes=notes)


def classify(spec: CongruenceSpec, samples=None) -> ClassificationVerdict:
    """Sort a congruence into sphere, cylinder, plane, obstructed or mixed rank."""
    samples = default_samples(spec) if samples is None else [tuple(s) for s in samples]
    ranks = {rank_at(spec, *s) for s in samples} if spec.rank != 0 else {0}
    if ranks != {spec.rank}:
        return ClassificationVerdict("mixed_rank", {}, [("rank", float(min(ranks)))],
                                     f"ranks {sorted(ranks)} found on the sample set")
    hold = HOLD_TOL * (1.0 + spec.max_abs_coeff())
    if spec.rank == 2:
        return _classify_rank2(spec, samples, hold)
    if spec.rank == 1:
        try:
            return _classify_rank1(spec, samples, hold)
        except DegenerateParameterization as exc:
            return ClassificationVerdict("obstructed", {}, [], f"degenerate parameterization: {exc}")
    normal = geometry.direction_vector(spec.xi0)
    return ClassificationVerdict("plane", {"normal": [float(c) for c in normal]},
                                 [("rank", 0.0)])
