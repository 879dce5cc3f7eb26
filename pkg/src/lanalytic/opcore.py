"""Constant-coefficient second-order operators in the plane.

An operator is stored as the triple ``(c11, c12, c22)`` acting as
``c11 f_xx + 2 c12 f_xy + c22 f_yy``.  Its characteristic roots solve
``c11 l**2 + 2 c12 l + c22 = 0``; the operator is elliptic when neither root
is real and strongly elliptic when the roots sit in opposite half-planes.

:func:`reduce` produces a real-linear change of variables ``w = T* z`` under
which the operator becomes ``c * dbar d_tau`` (not strongly elliptic) or
``c * d d_tau`` (strongly elliptic) with ``d_tau = dbar + tau d`` and
``0 <= tau < 1``.
"""
from __future__ import annotations

import cmath
import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import Degenerate, NotElliptic, NotSecondOrder, ReductionDegenerate

__all__ = [
    "Ellipticity",
    "EllipticOperator",
    "CharacteristicRoots",
    "RealLinearMap",
    "CanonicalForm",
    "char_roots",
    "classify",
    "reduce",
    "canonical_operator",
    "map_apply",
    "map_inverse",
    "map_compose",
    "map_jacobian",
    "rotate_parameter",
    "quadratic_image",
]

DEFAULT_TOL = 1e-10
_TIE_TOL = 1e-12


class Ellipticity(str, enum.Enum):
    NOT_ELLIPTIC = "not_elliptic"
    STRONGLY_ELLIPTIC = "strongly_elliptic"
    NOT_STRONGLY_ELLIPTIC = "not_strongly_elliptic"


SE = Ellipticity.STRONGLY_ELLIPTIC
NSE = Ellipticity.NOT_STRONGLY_ELLIPTIC


def _pair(z: complex) -> list[float]:
    z = complex(z)
    return [z.real, z.imag]


def _unpair(v) -> complex:
    if isinstance(v, (list, tuple)):
        re, im = v
        return complex(float(re), float(im))
    return complex(v)


@dataclass(frozen=True)
class EllipticOperator:
    """``c11 d_xx + 2 c12 d_xy + c22 d_yy`` with complex coefficients.

    Construction does not check ellipticity; use :func:`classify`.
    """

    c11: complex
    c12: complex
    c22: complex

    def __post_init__(self):
        for name in ("c11", "c12", "c22"):
            object.__setattr__(self, name, complex(getattr(self, name)))

    def scaled(self, k: complex) -> "EllipticOperator":
        return EllipticOperator(k * self.c11, k * self.c12, k * self.c22)

    @property
    def coefficient_scale(self) -> float:
        return abs(self.c11) + abs(self.c12) + abs(self.c22)

    def symbol(self, xi1, xi2):
        return self.c11 * xi1 ** 2 + 2 * self.c12 * xi1 * xi2 + self.c22 * xi2 ** 2

    def to_json(self) -> dict:
        return {"c11": _pair(self.c11), "c12": _pair(self.c12), "c22": _pair(self.c22)}

    @classmethod
    def from_json(cls, d: dict) -> "EllipticOperator":
        return cls(_unpair(d["c11"]), _unpair(d["c12"]), _unpair(d["c22"]))

    @classmethod
    def from_reals(cls, *vals: float) -> "EllipticOperator":
        """Build from six reals ``re11 im11 re12 im12 re22 im22``."""
        if len(vals) != 6:
            raise ValueError("expected six real numbers")
        v = [float(x) for x in vals]
        return cls(complex(v[0], v[1]), complex(v[2], v[3]), complex(v[4], v[5]))


@dataclass(frozen=True)
class CharacteristicRoots:
    lambda1: complex
    lambda2: complex

    def __iter__(self):
        yield self.lambda1
        yield self.lambda2

    def residual(self, op: EllipticOperator) -> tuple[float, float]:
        return tuple(abs(op.c11 * l * l + 2 * op.c12 * l + op.c22) for l in self)


def char_roots(op: EllipticOperator) -> CharacteristicRoots:
    """Roots of ``c11 l^2 + 2 c12 l + c22``.

    ``lambda1`` is the root with the larger ``|Im|``.  Ties go to the smaller
    real part, then to the larger imaginary part, so that the Laplacian gives
    ``(i, -i)``.
    """
    if op.c11 == 0:
        raise NotSecondOrder("c11 = 0: the symbol vanishes at (1, 0)")
    with np.errstate(all="raise"):
        try:
            disc = op.c12 * op.c12 - op.c11 * op.c22
            sq = cmath.sqrt(disc)
        except (OverflowError, FloatingPointError) as exc:
            raise Degenerate("discriminant evaluation overflowed") from exc
    if not (math.isfinite(disc.real) and math.isfinite(disc.imag)):
        raise Degenerate("discriminant evaluation overflowed")
    # pick the sign that avoids cancellation in -c12 -/+ sqrt
    if (op.c12.conjugate() * sq).real < 0:
        sq = -sq
    q = -(op.c12 + sq)
    if q == 0:
        r1 = r2 = 0j
    else:
        r1 = q / op.c11
        r2 = op.c22 / q
    if not all(map(cmath.isfinite, (r1, r2))):
        raise Degenerate("root computation overflowed")
    return CharacteristicRoots(*_label(r1, r2))


def _label(r1: complex, r2: complex) -> tuple[complex, complex]:
    tol = _TIE_TOL * (1.0 + max(abs(r1), abs(r2)))
    d = abs(r1.imag) - abs(r2.imag)
    if d > tol:
        return r1, r2
    if d < -tol:
        return r2, r1
    if abs(r1.real - r2.real) > tol:
        return (r1, r2) if r1.real < r2.real else (r2, r1)
    return (r1, r2) if r1.imag >= r2.imag else (r2, r1)


def classify(op: EllipticOperator, tol: float = DEFAULT_TOL) -> Ellipticity:
    if tol <= 0:
        raise ValueError("tol must be positive")
    l1, l2 = char_roots(op)
    scale = 1.0 + max(abs(l1), abs(l2))
    if min(abs(l1.imag), abs(l2.imag)) <= tol * scale:
        return Ellipticity.NOT_ELLIPTIC
    if (l1.imag > 0) != (l2.imag > 0):
        return SE
    return NSE


# ---------------------------------------------------------------------------
# real-linear maps


@dataclass(frozen=True)
class RealLinearMap:
    """``z -> a z + b conj(z)``."""

    a: complex = 1 + 0j
    b: complex = 0j

    def __post_init__(self):
        object.__setattr__(self, "a", complex(self.a))
        object.__setattr__(self, "b", complex(self.b))

    def __call__(self, z):
        return map_apply(self, z)

    @property
    def jacobian(self) -> float:
        return map_jacobian(self)

    @property
    def sense_preserving(self) -> bool:
        return abs(self.a) > abs(self.b)

    def is_degenerate(self) -> bool:
        scale = max(abs(self.a), abs(self.b))
        return scale == 0 or abs(abs(self.a) - abs(self.b)) <= 1e-14 * scale

    def inverse(self) -> "RealLinearMap":
        return map_inverse(self)

    def compose(self, inner: "RealLinearMap") -> "RealLinearMap":
        return map_compose(self, inner)

    def linear_form(self) -> tuple[complex, complex]:
        """Coefficients ``(P, Q)`` with ``a z + b conj(z) = P x + Q y``."""
        return self.a + self.b, 1j * (self.a - self.b)

    def to_json(self) -> dict:
        return {"a": _pair(self.a), "b": _pair(self.b)}

    @classmethod
    def from_json(cls, d: dict) -> "RealLinearMap":
        return cls(_unpair(d["a"]), _unpair(d["b"]))

    @classmethod
    def shear(cls, tau: complex) -> "RealLinearMap":
        """The map ``z -> z - tau conj(z)``."""
        return cls(1.0, -complex(tau))


IDENTITY = RealLinearMap(1.0, 0.0)


def map_apply(m: RealLinearMap, z):
    return m.a * z + m.b * np.conj(z)


def map_jacobian(m: RealLinearMap) -> float:
    return abs(m.a) ** 2 - abs(m.b) ** 2


def map_inverse(m: RealLinearMap) -> RealLinearMap:
    if m.is_degenerate():
        raise Degenerate(f"|a| = |b| for map {m}")
    j = map_jacobian(m)
    return RealLinearMap(m.a.conjugate() / j, -m.b / j)


def map_compose(outer: RealLinearMap, inner: RealLinearMap) -> RealLinearMap:
    """Return ``outer o inner``."""
    a = outer.a * inner.a + outer.b * inner.b.conjugate()
    b = outer.a * inner.b + outer.b * inner.a.conjugate()
    return RealLinearMap(a, b)


def rotate_parameter(tau: complex, alpha: float) -> complex:
    """Parameter of the equation satisfied by ``f(exp(i alpha) z + b)``."""
    return complex(tau) * cmath.exp(-2j * alpha)


# ---------------------------------------------------------------------------
# canonical reduction


def quadratic_image(op: EllipticOperator, u: tuple[complex, complex],
                    v: tuple[complex, complex]) -> complex:
    """Constant ``L(u v)`` for linear forms ``u = u0 x + u1 y`` and ``v``."""
    return 2 * (op.c11 * u[0] * v[0] + op.c12 * (u[0] * v[1] + u[1] * v[0])
                + op.c22 * u[1] * v[1])


def canonical_operator(kind: Ellipticity, tau: complex, scale: complex = 1) -> EllipticOperator:
    """Expand ``c dbar d_tau`` (NSE) or ``c d d_tau`` (SE) into ``(c11, c12, c22)``."""
    c, t = complex(scale), complex(tau)
    if kind == NSE:
        return EllipticOperator(c * (1 + t) / 4, 1j * c / 4, c * (t - 1) / 4)
    if kind == SE:
        return EllipticOperator(c * (1 + t) / 4, -1j * c * t / 4, c * (1 - t) / 4)
    raise ValueError(f"no canonical operator for {kind}")


@dataclass(frozen=True)
class CanonicalForm:
    kind: Ellipticity
    tau: float
    scale: complex
    transform: RealLinearMap

    def operator(self) -> EllipticOperator:
        """The reduced operator acting in the new coordinates ``w = T* z``."""
        return canonical_operator(self.kind, self.tau, self.scale)

    def to_json(self) -> dict:
        return {
            "kind": self.kind.value,
            "tau": self.tau,
            "scale": _pair(self.scale),
            "transform": self.transform.to_json(),
        }

    @classmethod
    def from_json(cls, d: dict) -> "CanonicalForm":
        return cls(Ellipticity(d["kind"]), float(d["tau"]), _unpair(d["scale"]),
                   RealLinearMap.from_json(d["transform"]))

    @classmethod
    def standard(cls, kind: Ellipticity | str, tau: float, scale: complex = 1) -> "CanonicalForm":
        """Canonical form already in reduced coordinates (identity transform)."""
        kind = _kind(kind)
        return cls(kind, float(tau), complex(scale), IDENTITY)


def _kind(kind) -> Ellipticity:
    if isinstance(kind, Ellipticity):
        return kind
    k = str(kind).lower()
    if k in ("se", "strongly_elliptic"):
        return SE
    if k in ("nse", "not_strongly_elliptic"):
        return NSE
    raise ValueError(f"unknown kind {kind!r}")


def reduce(op: EllipticOperator, tol: float = DEFAULT_TOL) -> CanonicalForm:
    """Canonical form ``(kind, tau, c, T*)`` of an elliptic operator.

    With ``mu_s = 1 / lambda_s`` the transform is ``c2 (x + mu1 y)`` for NSE and
    ``c2 (x + conj(mu1) y)`` for SE, where the unimodular ``c2`` makes ``tau``
    real and nonnegative.
    """
    kind = classify(op, tol)
    if kind == Ellipticity.NOT_ELLIPTIC:
        raise NotElliptic(f"operator {op} is not elliptic")
    l1, l2 = char_roots(op)
    mu1, mu2 = 1 / l1, 1 / l2
    lead = mu1 if kind == NSE else mu1.conjugate()
    other = mu1.conjugate() if kind == NSE else mu1
    num, den = lead - mu2, other - mu2
    if abs(num) <= 1e-14 * abs(den):
        tau, c2 = 0.0, 1 + 0j
    else:
        tu = num / den
        tau = abs(tu)
        c2 = cmath.exp(-0.5j * cmath.phase(tu))
    if tau >= 1 - 1e-12:
        raise ReductionDegenerate(f"tau = {tau} too close to 1")
    # w = c2 (x + lead y) = a z + b conj(z)
    t_star = RealLinearMap(c2 * (1 - 1j * lead) / 2, c2 * (1 + 1j * lead) / 2)
    w = t_star.linear_form()
    wbar = (w[0].conjugate(), w[1].conjugate())
    if kind == NSE:
        scale = quadratic_image(op, wbar, wbar) / 2
    else:
        scale = quadratic_image(op, w, wbar)
    return CanonicalForm(kind, float(tau), complex(scale), t_star)
