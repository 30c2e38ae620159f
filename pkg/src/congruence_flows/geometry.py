"""Coordinates on the space of oriented lines.

A line is a pair ``(xi, eta)``: ``xi`` is its direction under stereographic
projection from the north pole, ``eta`` a complex fibre coordinate.  The map
``line_to_point`` places the point at signed distance ``r`` from the point of
the line closest to the origin.  Only one chart is used; the south-pole
direction is not representable.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ChartError
from .polynomials import as_complex

# |xi| beyond this is treated as the south pole.
CHART_LIMIT = 1e8


@dataclass(frozen=True)
class OrientedLine:
    xi: complex
    eta: complex

    def __post_init__(self):
        xi = as_complex(self.xi)
        if abs(xi) > CHART_LIMIT:
            raise ChartError("direction too close to the south pole for the chart")
        object.__setattr__(self, "xi", xi)
        object.__setattr__(self, "eta", as_complex(self.eta))


def as_point(p) -> np.ndarray:
    arr = np.asarray(p, dtype=float).reshape(3)
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"non-finite point {p!r}")
    return arr


def direction_vector(xi) -> np.ndarray:
    """Unit direction of lines with stereographic direction ``xi``."""
    xi = complex(xi)
    m = (xi * xi.conjugate()).real
    d = 1.0 + m
    w = 2.0 * xi / d
    return np.array([w.real, w.imag, (1.0 - m) / d])


def stereographic(direction) -> complex:
    """Inverse of :func:`direction_vector` for any nonzero 3-vector."""
    n = np.asarray(direction, dtype=float)
    n = n / np.linalg.norm(n)
    denom = 1.0 + n[2]
    if denom < 1.0 / CHART_LIMIT:
        raise ChartError("south-pole direction is outside the chart")
    return complex(n[0], n[1]) / denom


def line_to_point(line: OrientedLine, r: float) -> np.ndarray:
    xi, eta = line.xi, line.eta
    xib, etab = xi.conjugate(), eta.conjugate()
    m = (xi * xib).real
    d = 1.0 + m
    z = 2.0 * (eta - xi * xi * etab) / d**2 + 2.0 * xi * r / d
    x3 = -2.0 * (xi * etab + xib * eta).real / d**2 + (1.0 - m) * r / d
    return np.array([z.real, z.imag, x3])


def phi(xi, eta, r) -> np.ndarray:
    """Vectorized :func:`line_to_point`; returns an array of shape ``(..., 3)``."""
    xi = np.asarray(xi, dtype=complex)
    eta = np.asarray(eta, dtype=complex)
    r = np.asarray(r, dtype=float)
    m = (xi * np.conj(xi)).real
    d = 1.0 + m
    z = 2.0 * (eta - xi * xi * np.conj(eta)) / d**2 + 2.0 * xi * r / d
    x3 = -2.0 * (xi * np.conj(eta)).real * 2.0 / d**2 + (1.0 - m) * r / d
    return np.stack(np.broadcast_arrays(z.real, z.imag, x3), axis=-1)


def point_to_r(p, xi) -> float:
    """Signed distance from the closest-to-origin point of the line to ``p``."""
    x1, x2, x3 = as_point(p)
    xi = complex(xi)
    z = complex(x1, x2)
    m = (xi * xi.conjugate()).real
    return (2.0 * (z * xi.conjugate()).real + x3 * (1.0 - m)) / (1.0 + m)


def line_through(p, xi) -> OrientedLine:
    """The oriented line with direction ``xi`` passing through ``p``."""
    x1, x2, x3 = as_point(p)
    xi = as_complex(xi)
    z = complex(x1, x2)
    return OrientedLine(xi, 0.5 * (z - 2.0 * x3 * xi - z.conjugate() * xi * xi))


def phi_partials(xi: complex, eta: complex, r: float):
    """Partial derivatives of ``(z, x3)`` with respect to ``xi, eta`` and ``r``.

    ``xi, conj(xi), eta, conj(eta)`` are treated as independent.  Returns
    ``(z_xi, z_xib, z_eta, z_etab, x3_xi, x3_eta, z_r, x3_r)``; the conjugate
    partials of the real ``x3`` follow by conjugation.
    """
    xib, etab = xi.conjugate(), eta.conjugate()
    d = 1.0 + (xi * xib).real
    a = eta - xi * xi * etab
    s = xi * etab + xib * eta
    z_xi = -4.0 * xi * etab / d**2 - 4.0 * xib * a / d**3 + 2.0 * r / d**2
    z_xib = -4.0 * xi * a / d**3 - 2.0 * xi * xi * r / d**2
    z_eta = 2.0 / d**2
    z_etab = -2.0 * xi * xi / d**2
    x3_xi = -2.0 * etab / d**2 + 4.0 * xib * s / d**3 - 2.0 * xib * r / d**2
    x3_eta = -2.0 * xib / d**2
    z_r = 2.0 * xi / d
    x3_r = (1.0 - (xi * xib).real) / d
    return z_xi, z_xib, z_eta, z_etab, x3_xi, x3_eta, z_r, x3_r


def phi_jacobian(xi: complex, eta: complex, r: float, tangents) -> np.ndarray:
    """Jacobian of ``(params, r) -> point``.

    ``tangents`` holds one ``(dxi, deta)`` pair per parameter: the complex
    derivatives of ``xi`` and ``eta`` along it.  The last column is ``d/dr``.
    """
    z_xi, z_xib, z_eta, z_etab, x3_xi, x3_eta, z_r, x3_r = phi_partials(xi, eta, r)
    cols = []
    for dxi, deta in tangents:
        dz = z_xi * dxi + z_xib * dxi.conjugate() + z_eta * deta + z_etab * deta.conjugate()
        dx3 = 2.0 * (x3_xi * dxi + x3_eta * deta).real
        cols.append((dz.real, dz.imag, dx3))
    cols.append((z_r.real, z_r.imag, x3_r))
    return np.array(cols).T


def rotation_matrix(axis, angle: float) -> np.ndarray:
    """Rodrigues rotation about ``axis`` by ``angle`` radians."""
    k = np.asarray(axis, dtype=float)
    k = k / np.linalg.norm(k)
    kx = np.array([[0, -k[2], k[1]], [k[2], 0, -k[0]], [-k[1], k[0], 0]])
    return np.eye(3) + math.sin(angle) * kx + (1 - math.cos(angle)) * kx @ kx
