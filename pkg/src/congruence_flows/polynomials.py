"""Sparse complex polynomials used to describe congruences.

``BiPoly`` is a polynomial in a complex variable and its conjugate, with
exact Wirtinger derivatives.  ``DQuotient`` wraps a ``BiPoly`` numerator over
an integer power of ``1 + xi*conj(xi)``; the denominator is never expanded, so
the quotient rule stays closed on this small class.  ``SheetPoly`` and
``CurvePoly`` are complex-valued polynomials in real parameters ``(u, v)``
and ``u``.
"""
from __future__ import annotations

import math
from collections.abc import Iterable, Mapping
from typing import Union

import numpy as np

Number = Union[int, float, complex]


def _check_coeff(c: Number) -> complex:
    c = complex(c)
    if not (math.isfinite(c.real) and math.isfinite(c.imag)):
        raise ValueError(f"non-finite coefficient {c!r}")
    return c


def as_complex(value) -> complex:
    """Coerce to ``complex`` and reject NaN/inf components."""
    if isinstance(value, (tuple, list)) and len(value) == 2:
        value = complex(value[0], value[1])
    return _check_coeff(value)


class BiPoly:
    """Polynomial ``sum c_ij xi^i conj(xi)^j`` with complex coefficients."""

    __slots__ = ("_terms",)

    def __init__(self, terms: Mapping[tuple[int, int], Number] | Iterable = ()):
        acc: dict[tuple[int, int], complex] = {}
        items = terms.items() if isinstance(terms, Mapping) else (
            ((t[0], t[1]), t[2]) for t in terms)
        for (i, j), c in items:
            i, j = int(i), int(j)
            if i < 0 or j < 0:
                raise ValueError(f"negative power ({i}, {j})")
            acc[(i, j)] = acc.get((i, j), 0j) + _check_coeff(c)
        self._terms = {k: c for k, c in sorted(acc.items()) if c != 0}

    @classmethod
    def constant(cls, c: Number) -> BiPoly:
        return cls({(0, 0): c})

    @classmethod
    def xi(cls) -> BiPoly:
        return cls({(1, 0): 1})

    @classmethod
    def xibar(cls) -> BiPoly:
        return cls({(0, 1): 1})

    @classmethod
    def conformal(cls) -> BiPoly:
        """The polynomial ``1 + xi*conj(xi)``."""
        return cls({(0, 0): 1, (1, 1): 1})

    @property
    def terms(self) -> dict[tuple[int, int], complex]:
        return dict(self._terms)

    @property
    def degree(self) -> int:
        return max((i + j for i, j in self._terms), default=0)

    def max_abs_coeff(self) -> float:
        return max((abs(c) for c in self._terms.values()), default=0.0)

    def is_zero(self) -> bool:
        return not self._terms

    def __iter__(self):
        for (i, j), c in self._terms.items():
            yield i, j, c

    def __eq__(self, other) -> bool:
        return isinstance(other, BiPoly) and self._terms == other._terms

    def __hash__(self) -> int:
        return hash(tuple(self._terms.items()))

    def __repr__(self) -> str:
        return f"BiPoly({self._terms!r})"

    def __call__(self, xi):
        xi = np.asarray(xi, dtype=complex)
        xib = np.conj(xi)
        out = np.zeros_like(xi)
        for (i, j), c in self._terms.items():
            out = out + c * xi**i * xib**j
        return out[()] if out.ndim == 0 else out

    def __add__(self, other) -> BiPoly:
        other = _as_bipoly(other)
        acc = dict(self._terms)
        for k, c in other._terms.items():
            acc[k] = acc.get(k, 0j) + c
        return BiPoly(acc)

    __radd__ = __add__

    def __neg__(self) -> BiPoly:
        return BiPoly({k: -c for k, c in self._terms.items()})

    def __sub__(self, other) -> BiPoly:
        return self + (-_as_bipoly(other))

    def __rsub__(self, other) -> BiPoly:
        return _as_bipoly(other) - self

    def __mul__(self, other) -> BiPoly:
        if isinstance(other, (int, float, complex)):
            return BiPoly({k: c * other for k, c in self._terms.items()})
        other = _as_bipoly(other)
        acc: dict[tuple[int, int], complex] = {}
        for (i1, j1), c1 in self._terms.items():
            for (i2, j2), c2 in other._terms.items():
                k = (i1 + i2, j1 + j2)
                acc[k] = acc.get(k, 0j) + c1 * c2
        return BiPoly(acc)

    __rmul__ = __mul__

    def __pow__(self, n: int) -> BiPoly:
        out = BiPoly.constant(1)
        for _ in range(n):
            out = out * self
        return out

    def d(self) -> BiPoly:
        """Wirtinger derivative with respect to xi."""
        return BiPoly({(i - 1, j): i * c for (i, j), c in self._terms.items() if i})

    def dbar(self) -> BiPoly:
        """Wirtinger derivative with respect to conj(xi)."""
        return BiPoly({(i, j - 1): j * c for (i, j), c in self._terms.items() if j})

    def conj(self) -> BiPoly:
        """The polynomial whose values are the complex conjugates of ours."""
        return BiPoly({(j, i): c.conjugate() for (i, j), c in self._terms.items()})


def _as_bipoly(x) -> BiPoly:
    if isinstance(x, BiPoly):
        return x
    if isinstance(x, (int, float, complex)):
        return BiPoly.constant(x)
    raise TypeError(f"cannot use {type(x).__name__} as BiPoly")


_D = BiPoly.conformal()


class DQuotient:
    """``num(xi, conj xi) / (1 + xi conj xi)**k`` for integer ``k >= 0``."""

    __slots__ = ("num", "k")

    def __init__(self, num: BiPoly | Number, k: int = 0):
        num = _as_bipoly(num)
        while k < 0:
            num, k = num * _D, k + 1
        self.num = num
        self.k = int(k)

    def __repr__(self) -> str:
        return f"DQuotient({self.num!r}, k={self.k})"

    def __call__(self, xi):
        xi = np.asarray(xi, dtype=complex)
        val = self.num(xi) / (1.0 + (xi * np.conj(xi)).real) ** self.k
        return val[()] if np.ndim(val) == 0 else val

    def _lift(self, k: int) -> BiPoly:
        return self.num * _D ** (k - self.k)

    def __add__(self, other) -> DQuotient:
        other = other if isinstance(other, DQuotient) else DQuotient(other)
        k = max(self.k, other.k)
        return DQuotient(self._lift(k) + other._lift(k), k)

    __radd__ = __add__

    def __neg__(self) -> DQuotient:
        return DQuotient(-self.num, self.k)

    def __sub__(self, other) -> DQuotient:
        other = other if isinstance(other, DQuotient) else DQuotient(other)
        return self + (-other)

    def __mul__(self, other) -> DQuotient:
        if isinstance(other, DQuotient):
            return DQuotient(self.num * other.num, self.k + other.k)
        if isinstance(other, BiPoly):
            return DQuotient(self.num * other, self.k)
        return DQuotient(self.num * complex(other), self.k)

    __rmul__ = __mul__

    def times_conformal(self, m: int) -> DQuotient:
        """Multiply by ``(1 + xi conj xi)**m``; ``m`` may be negative."""
        return DQuotient(self.num, self.k - m)

    def d(self) -> DQuotient:
        return DQuotient(self.num.d() * _D - self.num * BiPoly.xibar() * self.k, self.k + 1)

    def dbar(self) -> DQuotient:
        return DQuotient(self.num.dbar() * _D - self.num * BiPoly.xi() * self.k, self.k + 1)

    def conj(self) -> DQuotient:
        return DQuotient(self.num.conj(), self.k)

    def real(self) -> DQuotient:
        return (self + self.conj()) * 0.5

    def imag(self) -> DQuotient:
        return (self - self.conj()) * (-0.5j)


class SheetPoly:
    """Complex polynomial ``sum c_kl u^k v^l`` in real parameters."""

    __slots__ = ("_terms",)

    def __init__(self, terms: Mapping[tuple[int, int], Number] | Iterable = ()):
        acc: dict[tuple[int, int], complex] = {}
        items = terms.items() if isinstance(terms, Mapping) else (
            ((t[0], t[1]), t[2]) for t in terms)
        for (k, l), c in items:
            k, l = int(k), int(l)
            if k < 0 or l < 0:
                raise ValueError(f"negative power ({k}, {l})")
            acc[(k, l)] = acc.get((k, l), 0j) + _check_coeff(c)
        self._terms = {key: c for key, c in sorted(acc.items()) if c != 0}

    @property
    def terms(self) -> dict[tuple[int, int], complex]:
        return dict(self._terms)

    def max_abs_coeff(self) -> float:
        return max((abs(c) for c in self._terms.values()), default=0.0)

    def is_zero(self) -> bool:
        return not self._terms

    def __iter__(self):
        for (k, l), c in self._terms.items():
            yield k, l, c

    def __eq__(self, other) -> bool:
        return isinstance(other, SheetPoly) and self._terms == other._terms

    def __hash__(self) -> int:
        return hash(tuple(self._terms.items()))

    def __repr__(self) -> str:
        return f"{type(self).__name__}({self._terms!r})"

    def __call__(self, u, v=0.0):
        u = np.asarray(u, dtype=float)
        v = np.asarray(v, dtype=float)
        out = np.zeros(np.broadcast(u, v).shape, dtype=complex)
        for (k, l), c in self._terms.items():
            out = out + c * u**k * v**l
        return out[()] if out.ndim == 0 else out

    def __add__(self, other) -> SheetPoly:
        other = _as_sheet(other)
        acc = dict(self._terms)
        for key, c in other._terms.items():
            acc[key] = acc.get(key, 0j) + c
        return SheetPoly(acc)

    __radd__ = __add__

    def __neg__(self) -> SheetPoly:
        return SheetPoly({key: -c for key, c in self._terms.items()})

    def __sub__(self, other) -> SheetPoly:
        return self + (-_as_sheet(other))

    def __rsub__(self, other) -> SheetPoly:
        return _as_sheet(other) - self

    def __mul__(self, other) -> SheetPoly:
        if isinstance(other, (int, float, complex)):
            return SheetPoly({key: c * other for key, c in self._terms.items()})
        other = _as_sheet(other)
        acc: dict[tuple[int, int], complex] = {}
        for (k1, l1), c1 in self._terms.items():
            for (k2, l2), c2 in other._terms.items():
                key = (k1 + k2, l1 + l2)
                acc[key] = acc.get(key, 0j) + c1 * c2
        return SheetPoly(acc)

    __rmul__ = __mul__

    def du(self) -> SheetPoly:
        return SheetPoly({(k - 1, l): k * c for (k, l), c in self._terms.items() if k})

    def dv(self) -> SheetPoly:
        return SheetPoly({(k, l - 1): l * c for (k, l), c in self._terms.items() if l})

    def conj(self) -> SheetPoly:
        return SheetPoly({key: c.conjugate() for key, c in self._terms.items()})

    def depends_on_v(self) -> bool:
        return any(l for (_, l) in self._terms)


def _as_sheet(x) -> SheetPoly:
    if isinstance(x, SheetPoly):
        return x
    if isinstance(x, (int, float, complex)):
        return SheetPoly({(0, 0): x})
    raise TypeError(f"cannot use {type(x).__name__} as SheetPoly")


class CurvePoly(SheetPoly):
    """Complex polynomial in ``u`` alone; built from ``(k, coeff)`` pairs."""

    __slots__ = ()

    def __init__(self, terms: Mapping[int, Number] | Iterable = ()):
        if isinstance(terms, SheetPoly):
            if terms.depends_on_v():
                raise ValueError("CurvePoly cannot depend on v")
            super().__init__(terms.terms)
            return
        items = terms.items() if isinstance(terms, Mapping) else terms
        acc: dict[tuple[int, int], complex] = {}
        for k, c in items:
            acc[(int(k), 0)] = acc.get((int(k), 0), 0j) + _check_coeff(c)
        super().__init__(acc)

    def is_constant(self) -> bool:
        return all(k == 0 for (k, _) in self._terms)

    def du(self) -> CurvePoly:
        return CurvePoly(super().du())

    def deriv(self, m: int = 1) -> CurvePoly:
        out = self
        for _ in range(m):
            out = out.du()
        return out

    def conj(self) -> CurvePoly:
        return CurvePoly(super().conj())

