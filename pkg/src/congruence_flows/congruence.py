"""Polynomial oriented line congruences and their first-order invariants.

A congruence of rank 2 is the graph ``eta = F(xi, conj xi)``; rank 1 is a
sheet ``(u, v) -> (xi(u), eta(u, v))``; rank 0 is the family of parallel
lines with direction ``xi0``, parameterized as ``eta = (u + i v) / 2``.

Every congruence is addressed by real parameters ``(p1, p2)``: ``xi = p1 + i p2``
for rank 2, ``(u, v)`` otherwise.  Together with the arclength ``r`` these
form the congruence coordinates.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from . import geometry
from .errors import DegenerateJacobian, DegenerateParameterization, LocateError
from .polynomials import BiPoly, CurvePoly, DQuotient, SheetPoly, as_complex

MAX_DEGREE = 8
RANK_THRESHOLD = 1e-8
# Discriminants this close to zero count as a double focal point.
FOCAL_TOL = 1e-12


@dataclass(frozen=True)
class SpinData:
    """Shear, divergence and twist of a rank-2 congruence at one line."""

    sigma: complex
    theta: float
    lam: float

    @property
    def rho(self) -> complex:
        return complex(self.theta, self.lam)

    @property
    def discriminant(self) -> float:
        """``lambda**2 - |sigma|**2``; its sign selects the pressure case."""
        return self.lam**2 - abs(self.sigma) ** 2

    def focal_quadratic(self, r):
        return (r + self.theta) ** 2 + self.lam**2 - abs(self.sigma) ** 2


@dataclass(frozen=True, eq=False)
class CongruenceSpec:
    rank: int
    F: BiPoly | None = None
    xi: CurvePoly | None = None
    eta: SheetPoly | None = None
    xi0: complex | None = None
    max_degree: int = field(default=MAX_DEGREE, repr=False)

    def __post_init__(self):
        if self.rank == 2:
            if not isinstance(self.F, BiPoly):
                raise TypeError("rank-2 congruence needs a BiPoly F")
            if self.F.degree > self.max_degree:
                raise ValueError(f"degree {self.F.degree} exceeds {self.max_degree}")
        elif self.rank == 1:
            if not isinstance(self.xi, CurvePoly) or not isinstance(self.eta, SheetPoly):
                raise TypeError("rank-1 congruence needs CurvePoly xi and SheetPoly eta")
            if self.xi.is_constant():
                raise ValueError("rank-1 congruence needs a non-constant xi(u)")
        elif self.rank == 0:
            if self.xi0 is None:
                raise TypeError("rank-0 congruence needs xi0")
            object.__setattr__(self, "xi0", as_complex(self.xi0))
        else:
            raise ValueError(f"rank must be 0, 1 or 2, got {self.rank!r}")

    @classmethod
    def rank2(cls, F) -> CongruenceSpec:
        return cls(2, F=F if isinstance(F, BiPoly) else BiPoly(F))

    @classmethod
    def rank1(cls, xi, eta) -> CongruenceSpec:
        return cls(1, xi=xi if isinstance(xi, CurvePoly) else CurvePoly(xi),
                   eta=eta if isinstance(eta, SheetPoly) else SheetPoly(eta))

    @classmethod
    def rank0(cls, xi0=0j) -> CongruenceSpec:
        return cls(0, xi0=xi0)

    def max_abs_coeff(self) -> float:
        if self.rank == 2:
            return self.F.max_abs_coeff()
        if self.rank == 1:
            return max(self.xi.max_abs_coeff(), self.eta.max_abs_coeff())
        return abs(self.xi0)

    # --- lines and tangents -------------------------------------------------

    def line(self, p1: float, p2: float) -> geometry.OrientedLine:
        if self.rank == 2:
            xi = complex(p1, p2)
            return geometry.OrientedLine(xi, complex(self.F(xi)))
        if self.rank == 1:
            return geometry.OrientedLine(complex(self.xi(p1)), complex(self.eta(p1, p2)))
        return geometry.OrientedLine(self.xi0, 0.5 * complex(p1, p2))

    def tangents(self, p1: float, p2: float):
        """``[(dxi/dp1, deta/dp1), (dxi/dp2, deta/dp2)]`` at a parameter point."""
        if self.rank == 2:
            xi = complex(p1, p2)
            fd, fdb = complex(self._Fd(xi)), complex(self._Fdb(xi))
            return [(1 + 0j, fd + fdb), (1j, 1j * (fd - fdb))]
        if self.rank == 1:
            return [(complex(self._xi_u(p1)), complex(self._eta_u(p1, p2))),
                    (0j, complex(self._eta_v(p1, p2)))]
        return [(0j, 0.5 + 0j), (0j, 0.5j)]

    def point(self, coords) -> np.ndarray:
        p1, p2, r = coords
        return geometry.line_to_point(self.line(p1, p2), r)

    def jacobian(self, coords) -> np.ndarray:
        """Exact Jacobian of ``(p1, p2, r) -> x``."""
        p1, p2, r = coords
        line = self.line(p1, p2)
        return geometry.phi_jacobian(line.xi, line.eta, r, self.tangents(p1, p2))

    @cached_property
    def _Fd(self) -> BiPoly:
        return self.F.d()

    @cached_property
    def _Fdb(self) -> BiPoly:
        return self.F.dbar()

    @cached_property
    def _xi_u(self) -> CurvePoly:
        return self.xi.du()

    @cached_property
    def _eta_u(self) -> SheetPoly:
        return self.eta.du()

    @cached_property
    def _eta_v(self) -> SheetPoly:
        return self.eta.dv()

    # --- exact spin expressions for rank 2 -----------------------------------

    @cached_property
    def sigma_expr(self) -> DQuotient:
        return DQuotient(-self.F.dbar().conj())

    @cached_property
    def rho_expr(self) -> DQuotient:
        return DQuotient(self.F, 2).d().times_conformal(2)

    @cached_property
    def theta_expr(self) -> DQuotient:
        return self.rho_expr.real()

    @cached_property
    def lambda_expr(self) -> DQuotient:
        return self.rho_expr.imag()

    # --- beta for rank 1 ------------------------------------------------------

    @cached_property
    def _beta_parts(self) -> tuple[SheetPoly, SheetPoly]:
        xi, xib = SheetPoly(self.xi.terms), SheetPoly(self.xi.conj().terms)
        eta, etab = self.eta, self.eta.conj()
        conf = xi * xib + 1
        num = ((eta.dv() * etab.du() - eta.du() * etab.dv()) * conf
               - (etab * xi * xib.du() * eta.dv() - eta * xib * xi.du() * etab.dv()) * 2)
        den = (eta.dv() * xib.du() - etab.dv() * xi.du()) * conf
        return num, den

    @cached_property
    def _beta_derivs(self):
        n, m = self._beta_parts
        return n, n.du(), n.du().du(), n.dv(), m, m.du(), m.du().du(), m.dv()

    # --- locating a point -----------------------------------------------------

    def locate(self, x, hint=None, tol: float = 1e-13) -> np.ndarray:
        """Congruence coordinates ``(p1, p2, r)`` of a line through ``x``.

        Newton iteration on ``point(coords) = x``; ``hint`` seeds it, otherwise
        a coarse search over the parameter domain does.
        """
        x = geometry.as_point(x)
        if self.rank == 0:
            line = geometry.line_through(x, self.xi0)
            w = 2.0 * line.eta
            return np.array([w.real, w.imag, geometry.point_to_r(x, self.xi0)])
        seeds = [np.asarray(hint, dtype=float)] if hint is not None else []
        seeds.extend(self._seeds(x))
        scale = 1.0 + np.linalg.norm(x)
        for q in seeds:
            q = self._newton(q, x, tol * scale)
            if q is not None:
                return q
        raise LocateError(f"no congruence line found through {x.tolist()}")

    def _newton(self, q, x, tol):
        q = np.array(q, dtype=float)
        for _ in range(60):
            res = self.point(q) - x
            if not np.all(np.isfinite(res)):
                return None
            if np.linalg.norm(res) < tol:
                return q
            J = self.jacobian(q)
            try:
                step = np.linalg.solve(J, res)
            except np.linalg.LinAlgError:
                return None
            # Damp large steps so the iteration stays in the seed's basin.
            n = np.linalg.norm(step)
            if n > 1.0:
                step = step / n
            q = q - step
        res = self.point(q) - x
        return q if np.linalg.norm(res) < 1e3 * tol else None

    def _seeds(self, x):
        if self.rank == 2:
            if np.linalg.norm(x) > 0:
                try:
                    xi = geometry.stereographic(x)
                    yield np.array([xi.real, xi.imag, geometry.point_to_r(x, xi)])
                except Exception:
                    pass
            g = np.linspace(-2.5, 2.5, 31)
            a, b = np.meshgrid(g, g, indexing="ij")
            xi = (a + 1j * b).ravel()
            eta = np.asarray(self.F(xi))
        else:
            g = np.linspace(-3.0, 3.0, 31)
            a, b = np.meshgrid(g, g, indexing="ij")
            a, b = a.ravel(), b.ravel()
            xi = np.asarray(self.xi(a))
            eta = np.asarray(self.eta(a, b))
            xi = xi + 0 * a
        m = (xi * np.conj(xi)).real
        z = complex(x[0], x[1])
        r = (2.0 * (z * np.conj(xi)).real + x[2] * (1.0 - m)) / (1.0 + m)
        dist = np.linalg.norm(geometry.phi(xi, eta, r) - x, axis=-1)
        for idx in np.argsort(dist)[:6]:
            yield np.array([a.ravel()[idx], b.ravel()[idx], r[idx]])


def sphere_congruence(center) -> BiPoly:
    """``F`` for the lines through ``center``: ``(z0 - 2 t0 xi - conj(z0) xi^2) / 2``."""
    c = geometry.as_point(center)
    z0 = complex(c[0], c[1])
    return BiPoly({(0, 0): 0.5 * z0, (1, 0): -c[2], (2, 0): -0.5 * z0.conjugate()})


def cylinder_congruence(angle: float = 0.0, b0: float = 0.0, b1: float = 0.0) -> CongruenceSpec:
    """Normals to a circular cylinder with horizontal axis.

    For ``angle = 0`` the axis is parallel to ``x2`` through ``(-b1, 0, -b0)``;
    ``angle`` rotates everything about ``x3``.
    """
    w = complex(math.cos(angle), math.sin(angle))
    xi = CurvePoly({1: w})
    eta = SheetPoly({(0, 0): -0.5 * b1 * w, (1, 0): b0 * w, (2, 0): 0.5 * b1 * w,
                     (0, 1): 1j * w})
    return CongruenceSpec.rank1(xi, eta)


def spin_coefficients(F: BiPoly | CongruenceSpec, xi) -> SpinData:
    spec = F if isinstance(F, CongruenceSpec) else CongruenceSpec.rank2(F)
    xi = complex(xi)
    rho = complex(spec.rho_expr(xi))
    return SpinData(complex(spec.sigma_expr(xi)), rho.real, rho.imag)


def shear_identity_sides(F: BiPoly | CongruenceSpec):
    """Both sides of the derivative identity linking shear and divergence.

    Returns ``(lhs, rhs)`` as exact expressions with
    ``lhs = (1+|xi|^2)^2 d/dxibar(sigma / (1+|xi|^2)^2)`` and
    ``rhs = -(d conj(rho)/dxi + 2 conj(F) / (1+|xi|^2)^2)``.
    """
    spec = F if isinstance(F, CongruenceSpec) else CongruenceSpec.rank2(F)
    sig = spec.sigma_expr
    lhs = DQuotient(sig.num, sig.k + 2).dbar().times_conformal(2)
    rhs = -(spec.rho_expr.conj().d() + DQuotient(spec.F.conj() * 2, 2))
    return lhs, rhs


def beta(spec: CongruenceSpec, u: float, v: float) -> float:
    return beta_jet(spec, u, v)[0]


def beta_jet(spec: CongruenceSpec, u: float, v: float):
    """``(beta, beta_u, beta_uu, beta_v)`` at ``(u, v)``, all exact."""
    if spec.rank != 1:
        raise ValueError("beta is defined for rank-1 congruences")
    n, nu, nuu, nv, m, mu, muu, mv = (complex(p(u, v)) for p in spec._beta_derivs)
    scale = max(abs(n), spec.max_abs_coeff() ** 2, 1.0)
    if abs(m) <= 1e-14 * scale:
        raise DegenerateParameterization(f"beta denominator vanishes at u={u}, v={v}")
    b = n / m
    b_u = (nu * m - n * mu) / m**2
    b_uu = (nuu * m - n * muu) / m**2 - 2.0 * mu * (nu * m - n * mu) / m**3
    b_v = (nv * m - n * mv) / m**2
    if abs(b.imag) > 1e-10 * (1.0 + abs(b)):
        raise AssertionError(f"beta has imaginary part {b.imag!r}")
    return b.real, b_u.real, b_uu.real, b_v.real


def focal_points(s: SpinData) -> tuple[float, ...]:
    """Real roots of ``(r + theta)^2 + lambda^2 - |sigma|^2``, with multiplicity."""
    disc = abs(s.sigma) ** 2 - s.lam**2
    if disc < -FOCAL_TOL:
        return ()
    h = math.sqrt(max(disc, 0.0))
    return (-s.theta - h, -s.theta + h)


def rank_at(spec: CongruenceSpec, p1: float = 0.0, p2: float = 0.0) -> int:
    """Numerical rank of ``params -> (Re xi, Im xi)``."""
    if spec.rank == 2:
        jac = np.eye(2)
    elif spec.rank == 1:
        d = complex(spec._xi_u(p1))
        jac = np.array([[d.real, 0.0], [d.imag, 0.0]])
    else:
        jac = np.zeros((2, 2))
    sv = np.linalg.svd(jac, compute_uv=False)
    if sv[0] == 0.0:
        return 0
    return int(np.sum(sv > RANK_THRESHOLD * sv[0]))


def check_nondegenerate(spec: CongruenceSpec, coords, tol: float = 1e-12) -> np.ndarray:
    J = spec.jacobian(coords)
    if abs(np.linalg.det(J)) < tol:
        raise DegenerateJacobian(f"congruence coordinates degenerate at {list(coords)}")
    return J
