"""Polynomials in ``(z, conj(z))`` and L-analytic polynomial bases.

A :class:`BiPoly` is the sparse sum ``sum c[j, k] z**j zbar**k``.  Wirtinger
derivatives act termwise (``d`` lowers ``j``, ``dbar`` lowers ``k``) and real
derivatives are recovered as ``d_x = d + dbar`` and ``d_y = i (d - dbar)``,
so applying an operator to a polynomial is exact up to rounding of the
coefficient arithmetic.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from math import comb
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import InvalidDegree
from .opcore import (
    NSE,
    SE,
    CanonicalForm,
    EllipticOperator,
    RealLinearMap,
    canonical_operator,
)

__all__ = [
    "BiPoly",
    "Family",
    "LBasis",
    "Z",
    "ZBAR",
    "ONE",
    "d",
    "dbar",
    "d_tau",
    "apply_operator",
    "substitute_linear",
    "lanalytic_basis",
    "pullback",
    "pullback_basis",
    "evaluate",
    "evaluate_grid",
]

_PRUNE = 1e-300


class BiPoly:
    """Immutable sparse polynomial in ``z`` and ``zbar``."""

    __slots__ = ("_c",)

    def __init__(self, coeffs: Mapping[tuple[int, int], complex] | None = None):
        c = {}
        for (j, k), v in (coeffs or {}).items():
            if j < 0 or k < 0:
                raise ValueError("negative exponent")
            v = complex(v)
            if abs(v) > _PRUNE:
                c[(int(j), int(k))] = v
        self._c = c

    @classmethod
    def _raw(cls, c: dict) -> "BiPoly":
        p = cls.__new__(cls)
        p._c = {key: v for key, v in c.items() if abs(v) > _PRUNE}
        return p

    @classmethod
    def constant(cls, c: complex) -> "BiPoly":
        return cls({(0, 0): c})

    @classmethod
    def monomial(cls, j: int, k: int, c: complex = 1.0) -> "BiPoly":
        return cls({(j, k): c})

    @classmethod
    def linear(cls, a: complex, b: complex) -> "BiPoly":
        """``a z + b zbar``."""
        return cls({(1, 0): a, (0, 1): b})

    @property
    def coeffs(self) -> dict[tuple[int, int], complex]:
        return dict(self._c)

    def __getitem__(self, key: tuple[int, int]) -> complex:
        return self._c.get(key, 0j)

    def __iter__(self):
        return iter(sorted(self._c.items()))

    def __len__(self):
        return len(self._c)

    @property
    def degree(self) -> int:
        return max((j + k for j, k in self._c), default=0)

    def is_zero(self) -> bool:
        return not self._c

    def max_abs(self) -> float:
        return max((abs(v) for v in self._c.values()), default=0.0)

    # arithmetic -----------------------------------------------------------
    def __add__(self, other):
        other = _as_poly(other)
        c = dict(self._c)
        for key, v in other._c.items():
            c[key] = c.get(key, 0j) + v
        return BiPoly._raw(c)

    __radd__ = __add__

    def __neg__(self):
        return BiPoly._raw({key: -v for key, v in self._c.items()})

    def __sub__(self, other):
        return self + (-_as_poly(other))

    def __rsub__(self, other):
        return _as_poly(other) - self

    def __mul__(self, other):
        if isinstance(other, (int, float, complex, np.number)):
            return BiPoly._raw({key: v * other for key, v in self._c.items()})
        other = _as_poly(other)
        c: dict[tuple[int, int], complex] = {}
        for (j1, k1), v1 in self._c.items():
            for (j2, k2), v2 in other._c.items():
                key = (j1 + j2, k1 + k2)
                c[key] = c.get(key, 0j) + v1 * v2
        return BiPoly._raw(c)

    __rmul__ = __mul__

    def __truediv__(self, s):
        return self * (1.0 / s)

    def __pow__(self, n: int):
        if n < 0:
            raise ValueError("negative power")
        result, base = ONE, self
        while n:
            if n & 1:
                result = result * base
            n >>= 1
            if n:
                base = base * base
        return result

    def __eq__(self, other):
        if not isinstance(other, BiPoly):
            return NotImplemented
        return self._c == other._c

    def __hash__(self):
        return hash(frozenset(self._c.items()))

    def allclose(self, other, atol: float = 1e-12) -> bool:
        return (self - _as_poly(other)).max_abs() <= atol

    def conj(self) -> "BiPoly":
        """Termwise conjugate: evaluates to ``conj(p(z))``."""
        return BiPoly._raw({(k, j): v.conjugate() for (j, k), v in self._c.items()})

    def __call__(self, z):
        return evaluate(self, z)

    def __repr__(self):
        if not self._c:
            return "BiPoly(0)"
        terms = [f"({v:.6g})*z^{j}*zb^{k}" for (j, k), v in self]
        return "BiPoly(" + " + ".join(terms) + ")"

    # serialization --------------------------------------------------------
    def to_json(self) -> list[list[float]]:
        return [[j, k, v.real, v.imag] for (j, k), v in self]

    @classmethod
    def from_json(cls, data: Iterable[Sequence[float]]) -> "BiPoly":
        return cls({(int(j), int(k)): complex(re, im) for j, k, re, im in data})


def _as_poly(x) -> BiPoly:
    if isinstance(x, BiPoly):
        return x
    return BiPoly.constant(x)


ONE = BiPoly.constant(1.0)
Z = BiPoly.monomial(1, 0)
ZBAR = BiPoly.monomial(0, 1)


# ---------------------------------------------------------------------------
# derivatives and operators


def d(p: BiPoly) -> BiPoly:
    return BiPoly._raw({(j - 1, k): j * v for (j, k), v in p._c.items() if j})


def dbar(p: BiPoly) -> BiPoly:
    return BiPoly._raw({(j, k - 1): k * v for (j, k), v in p._c.items() if k})


def d_tau(p: BiPoly, tau: complex) -> BiPoly:
    return dbar(p) + d(p) * complex(tau)


def apply_operator(op: EllipticOperator, p: BiPoly) -> BiPoly:
    """``c11 p_xx + 2 c12 p_xy + c22 p_yy``."""
    dd, db, bb = d(d(p)), d(dbar(p)), dbar(dbar(p))
    p_xx = dd + 2 * db + bb
    p_xy = (dd - bb) * 1j
    p_yy = -(dd - 2 * db + bb)
    return p_xx * op.c11 + p_xy * (2 * op.c12) + p_yy * op.c22


def substitute_linear(p: BiPoly, m: RealLinearMap) -> BiPoly:
    """``q(w) = p(a w + b conj(w))``, expanded binomially."""
    if p.is_zero():
        return p
    a, b = m.a, m.b
    jmax = max(j for j, _ in p._c)
    kmax = max(k for _, k in p._c)
    # homogeneous pieces stored by the power of wbar
    zpow = [np.array([1 + 0j])]
    for j in range(1, jmax + 1):
        zpow.append(np.array([comb(j, i) * a ** (j - i) * b ** i for i in range(j + 1)]))
    zbpow = [np.array([1 + 0j])]
    ab, bb = a.conjugate(), b.conjugate()
    for k in range(1, kmax + 1):
        zbpow.append(np.array([comb(k, i) * bb ** (k - i) * ab ** i for i in range(k + 1)]))
    out: dict[tuple[int, int], complex] = {}
    for (j, k), v in p._c.items():
        row = np.convolve(zpow[j], zbpow[k]) * v
        deg = j + k
        for i, c in enumerate(row):
            key = (deg - i, i)
            out[key] = out.get(key, 0j) + c
    return BiPoly._raw(out)


def evaluate(p: BiPoly, z):
    """Evaluate at scalar or array ``z`` by nested Horner in ``zbar`` then ``z``."""
    z = np.asarray(z, dtype=complex)
    zb = np.conj(z)
    if p.is_zero():
        return np.zeros_like(z) if z.ndim else 0j
    by_j: dict[int, dict[int, complex]] = {}
    for (j, k), v in p._c.items():
        by_j.setdefault(j, {})[k] = v
    jmax = max(by_j)
    acc = np.zeros_like(z)
    for j in range(jmax, -1, -1):
        row = by_j.get(j)
        inner = np.zeros_like(z)
        if row:
            for k in range(max(row), -1, -1):
                inner = inner * zb + row.get(k, 0j)
        acc = acc * z + inner
    return acc if acc.ndim else complex(acc)


def evaluate_grid(p: BiPoly, points: Sequence[complex]) -> np.ndarray:
    return np.asarray(evaluate(p, np.asarray(points, dtype=complex)))


# ---------------------------------------------------------------------------
# L-analytic bases


@dataclass(frozen=True)
class Family:
    """The polynomials ``multiplier * variable**k`` for ``k = start .. start+count-1``."""

    multiplier: BiPoly
    variable: BiPoly
    start: int
    count: int
    label: str = ""

    def elements(self) -> list[BiPoly]:
        base = self.multiplier * self.variable ** self.start
        out = []
        for _ in range(self.count):
            out.append(base)
            base = base * self.variable
        return out


@dataclass(frozen=True)
class LBasis:
    canonical: CanonicalForm
    degree: int
    tau: complex
    families: tuple[Family, ...]
    elements: tuple[BiPoly, ...] = field(repr=False)

    def __len__(self):
        return len(self.elements)

    def operator(self) -> EllipticOperator:
        """Canonical operator (with the possibly complex ``tau`` in use)."""
        return canonical_operator(self.canonical.kind, self.tau, self.canonical.scale)

    def coefficient_matrix(self) -> np.ndarray:
        keys = sorted({key for e in self.elements for key in e.coeffs})
        index = {key: i for i, key in enumerate(keys)}
        mat = np.zeros((len(keys), len(self.elements)), dtype=complex)
        for col, e in enumerate(self.elements):
            for key, v in e.coeffs.items():
                mat[index[key], col] = v
        return mat

    def combine(self, coefficients: Sequence[complex]) -> BiPoly:
        out = BiPoly()
        for c, e in zip(coefficients, self.elements):
            out = out + e * complex(c)
        return out


def lanalytic_basis(canonical: CanonicalForm, n: int,
                    tau_override: complex | None = None) -> LBasis:
    """Basis of canonical L-analytic polynomials of total degree at most ``n``.

    NSE: ``z**k`` with ``z_tau**k`` (``tau > 0``) or ``zbar z**(k-1)`` (``tau = 0``).
    SE: ``zbar**k`` with ``z_tau**k`` (``tau > 0``) or ``z**k, zbar**k`` (``tau = 0``).
    """
    if n < 0:
        raise InvalidDegree(f"degree must be nonnegative, got {n}")
    tau = complex(canonical.tau if tau_override is None else tau_override)
    if abs(tau) >= 1:
        raise ValueError("|tau| must be < 1")
    zt = Z - ZBAR * tau
    if canonical.kind == NSE:
        first = Family(ONE, Z, 0, n + 1, "z")
        second = (Family(ONE, zt, 1, n, "z_tau") if tau != 0
                  else Family(ZBAR, Z, 0, n, "zbar*z"))
    elif canonical.kind == SE:
        if tau != 0:
            first = Family(ONE, ZBAR, 0, n + 1, "zbar")
            second = Family(ONE, zt, 1, n, "z_tau")
        else:
            first = Family(ONE, Z, 0, n + 1, "z")
            second = Family(ONE, ZBAR, 1, n, "zbar")
    else:
        raise ValueError(f"cannot build a basis for {canonical.kind}")
    families = (first, second) if n > 0 else (first,)
    elements = tuple(e for fam in families for e in fam.elements())
    return LBasis(canonical, n, tau, families, elements)


def pullback(p: BiPoly, canonical: CanonicalForm) -> BiPoly:
    """``p o T*``: a canonical solution expressed in the original coordinates."""
    return substitute_linear(p, canonical.transform)


def pullback_basis(basis: LBasis) -> list[BiPoly]:
    """Pull every basis element back through ``T*``, family by family.

    Equal to ``[pullback(e) for e in basis.elements]`` but substitutes into the
    linear generators before raising powers, which avoids the cancellation that
    term-by-term substitution of ``z_tau**k`` suffers when ``tau`` is near 1.
    """
    out = []
    for fam in basis.families:
        mult = pullback(fam.multiplier, basis.canonical)
        var = pullback(fam.variable, basis.canonical)
        out.extend(Family(mult, var, fam.start, fam.count).elements())
    return out
