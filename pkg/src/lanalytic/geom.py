"""Boundary curves, closed-form conformal maps, Schwarz functions, quadrature.

Every curve carries a ``fill`` map from the closed unit disk onto the closure of
its interior with ``fill(exp(it)) = gamma(t)``.  For curves that come from a
conformal map this is the map itself (composed with any normalization or
real-linear image), so interior grids are pullbacks of polar grids.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Callable, NamedTuple

import numpy as np
from scipy.optimize import minimize_scalar

from .errors import Degenerate, OutsideDomain, PoleAtCenter, UnivalenceViolation
from .opcore import RealLinearMap

__all__ = [
    "ConformalMapFamily",
    "BoundaryCurve",
    "SchwarzArc",
    "Quadrature",
    "make_disk",
    "make_poly_map",
    "make_holder_map",
    "curve_from_map",
    "transform_curve",
    "schwarz",
    "s_tau",
    "boundary_quadrature",
    "nearest_boundary_point",
    "winding_number",
    "holder_growth",
    "disk_area_integral",
    "write_curve_csv",
]

TWO_PI = 2.0 * math.pi
ANALYTIC = "analytic"

Fn = Callable[[np.ndarray], np.ndarray]


# ---------------------------------------------------------------------------
# conformal maps


@dataclass(frozen=True)
class ConformalMapFamily:
    """A closed-form univalent map of the unit disk with two derivatives."""

    kind: str
    m: int = 0
    c: complex = 0j
    alpha: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "c", complex(self.c))
        if self.kind == "poly_map":
            if self.m < 2:
                raise ValueError("poly_map needs m >= 2")
            if self.m * abs(self.c) > 0.95:
                raise UnivalenceViolation(f"m*|c| = {self.m * abs(self.c):.4g} > 0.95")
        elif self.kind == "holder_map":
            if not 0 < self.alpha < 1:
                raise ValueError("alpha must lie in (0, 1)")
            if abs(self.c) > 0.5:
                raise UnivalenceViolation(f"|c| = {abs(self.c):.4g} > 0.5")
        elif self.kind != "disk":
            raise ValueError(f"unknown map family {self.kind!r}")

    @property
    def smoothness(self) -> str:
        if self.kind == "holder_map":
            return f"C1alpha({self.alpha:g})"
        return ANALYTIC

    def phi(self, w):
        w = np.asarray(w, dtype=complex)
        if self.kind == "disk":
            return w
        if self.kind == "poly_map":
            return w + self.c * w ** self.m
        a = self.alpha
        return w + self.c * (1 - w) ** (1 + a) / (1 + a)

    def dphi(self, w):
        w = np.asarray(w, dtype=complex)
        if self.kind == "disk":
            return np.ones_like(w)
        if self.kind == "poly_map":
            return 1 + self.m * self.c * w ** (self.m - 1)
        return 1 - self.c * (1 - w) ** self.alpha

    def d2phi(self, w):
        w = np.asarray(w, dtype=complex)
        if self.kind == "disk":
            return np.zeros_like(w)
        if self.kind == "poly_map":
            return self.m * (self.m - 1) * self.c * w ** (self.m - 2)
        with np.errstate(divide="ignore", invalid="ignore"):
            return self.c * self.alpha * (1 - w) ** (self.alpha - 1)

    def to_json(self) -> dict:
        d = {"kind": self.kind}
        if self.kind == "poly_map":
            d.update(m=self.m, c=[self.c.real, self.c.imag])
        elif self.kind == "holder_map":
            d.update(alpha=self.alpha, c=[self.c.real, self.c.imag])
        return d

    @classmethod
    def from_json(cls, d: dict) -> "ConformalMapFamily":
        c = complex(*d.get("c", (0.0, 0.0)))
        return cls(d["kind"], m=int(d.get("m", 0)), c=c, alpha=float(d.get("alpha", 1.0)))


def make_poly_map(m: int, c: complex) -> ConformalMapFamily:
    """``phi(w) = w + c w**m``; requires ``m |c| <= 0.95``."""
    return ConformalMapFamily("poly_map", m=m, c=c)


def make_holder_map(alpha: float, c: complex) -> ConformalMapFamily:
    """``phi(w) = w + c (1-w)**(1+alpha) / (1+alpha)``, principal branch.

    The image boundary is C^{1,alpha} but not C^2: ``phi''`` blows up like
    ``|1-w|**(alpha-1)`` at ``w = 1``.
    """
    return ConformalMapFamily("holder_map", c=c, alpha=alpha)


def holder_growth(cmap: ConformalMapFamily, radii=None, angles: int = 64) -> tuple[float, np.ndarray]:
    """Sup of ``|phi''(w)| (1-|w|)**(1-alpha)`` and the radial profile ``|phi''(r)|``."""
    if radii is None:
        radii = 1 - np.logspace(-8, -0.3, 60)
    radii = np.asarray(radii, dtype=float)
    theta = np.linspace(-math.pi, math.pi, angles, endpoint=False)
    w = radii[:, None] * np.exp(1j * theta)[None, :]
    weighted = np.abs(cmap.d2phi(w)) * (1 - radii[:, None]) ** (1 - cmap.alpha)
    return float(weighted.max()), np.abs(cmap.d2phi(radii.astype(complex)))


def disk_area_integral(fun: Fn, nr: int = 200, nt: int = 512) -> float:
    """``int_D fun dm2`` by Gauss-Legendre in ``r`` and the trapezoid rule in angle."""
    x, wx = np.polynomial.legendre.leggauss(nr)
    r = 0.5 * (x + 1)
    wr = 0.5 * wx
    theta = TWO_PI * np.arange(nt) / nt
    pts = r[:, None] * np.exp(1j * theta)[None, :]
    vals = np.asarray(fun(pts))
    return float(np.sum(vals * (wr * r)[:, None]) * TWO_PI / nt)


# ---------------------------------------------------------------------------
# curves


@dataclass(frozen=True)
class BoundaryCurve:
    """A regular closed parametrization ``t -> gamma(t)`` on ``[0, 2 pi)``."""

    gamma: Fn
    dgamma: Fn
    smoothness: str = ANALYTIC
    M: int = 1024
    fill: Fn | None = field(default=None, repr=False)
    cmap: ConformalMapFamily | None = None
    rotation: float = 0.0
    name: str = ""

    def __call__(self, t):
        return self.gamma(np.asarray(t, dtype=float))

    def derivative(self, t):
        return self.dgamma(np.asarray(t, dtype=float))

    def sample(self, M: int | None = None) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        M = M or self.M
        t = TWO_PI * np.arange(M) / M
        return t, self.gamma(t), self.dgamma(t)

    def area(self, M: int = 4096) -> float:
        q = boundary_quadrature(self, M)
        return float((np.sum(np.conj(q.nodes) * q.dz) / 2j).real)

    def centroid(self, M: int = 4096) -> complex:
        """By Green's formula: ``int z dA = (1/2i) oint |z|^2 dz``."""
        q = boundary_quadrature(self, M)
        moment = np.sum(np.abs(q.nodes) ** 2 * q.dz) / 2j
        return complex(moment / self.area(M))

    def length(self, M: int = 4096) -> float:
        return float(boundary_quadrature(self, M).ds.sum())

    def contains(self, z: complex) -> bool:
        return winding_number(self, z) == 1

    def interior_grid(self, nr: int = 64, nt: int = 256) -> np.ndarray:
        """Pullback of the polar grid ``rho = (j + 0.5)/nr``, ``theta = 2 pi k/nt``."""
        rho = (np.arange(nr) + 0.5) / nr
        theta = TWO_PI * np.arange(nt) / nt
        w = rho[:, None] * np.exp(1j * theta)[None, :]
        if self.fill is not None:
            return np.asarray(self.fill(w))
        # star-shaped fallback about the centroid
        c = self.centroid()
        return c + rho[:, None] * (self.gamma(theta)[None, :] - c)


def make_disk(M: int = 1024) -> BoundaryCurve:
    return curve_from_map(ConformalMapFamily("disk"), M=M)


def curve_from_map(cmap: ConformalMapFamily, normalize: bool = False, M: int = 1024) -> BoundaryCurve:
    """``t -> phi(exp(it))``, optionally moved so it passes through 0 with a real tangent.

    Normalization is ``z -> nu (z - phi(1))`` with unimodular ``nu``; the angle
    ``arg nu`` is kept in ``curve.rotation`` so callers can rotate ``tau``.
    """
    if normalize:
        tangent = 1j * complex(cmap.dphi(1.0 + 0j))
        nu = tangent.conjugate() / abs(tangent)
        shift = complex(cmap.phi(1.0 + 0j))
        theta = math.atan2(nu.imag, nu.real)
    else:
        nu, shift, theta = 1.0 + 0j, 0j, 0.0

    def fill(w):
        return nu * (cmap.phi(w) - shift)

    def gamma(t):
        return fill(np.exp(1j * np.asarray(t, dtype=float)))

    def dgamma(t):
        e = np.exp(1j * np.asarray(t, dtype=float))
        return nu * 1j * e * cmap.dphi(e)

    name = cmap.kind + ("/normalized" if normalize else "")
    return BoundaryCurve(gamma, dgamma, cmap.smoothness, M, fill, cmap, theta, name)


def transform_curve(curve: BoundaryCurve, m: RealLinearMap) -> BoundaryCurve:
    """Image of ``curve`` under ``z -> a z + b conj(z)``."""
    if m.is_degenerate():
        raise Degenerate("transform_curve needs |a| != |b|")
    a, b = m.a, m.b
    old_fill = curve.fill

    def gamma(t):
        g = curve.gamma(t)
        return a * g + b * np.conj(g)

    def dgamma(t):
        dg = curve.dgamma(t)
        return a * dg + b * np.conj(dg)

    fill = None
    if old_fill is not None:
        def fill(w):
            g = old_fill(w)
            return a * g + b * np.conj(g)

    return BoundaryCurve(gamma, dgamma, curve.smoothness, curve.M, fill, None,
                         curve.rotation, (curve.name + "/T").lstrip("/"))


# ---------------------------------------------------------------------------
# quadrature


class Quadrature(NamedTuple):
    nodes: np.ndarray
    dz: np.ndarray
    ds: np.ndarray

    @property
    def t(self) -> np.ndarray:
        return TWO_PI * np.arange(len(self.nodes)) / len(self.nodes)


def boundary_quadrature(curve: BoundaryCurve, M: int | None = None) -> Quadrature:
    """Equispaced trapezoid rule: ``oint F dz ~ sum F(nodes) dz``, likewise ``|dz|``."""
    M = curve.M if M is None else M
    if M < 16 or M % 2:
        raise ValueError(f"M must be an even integer >= 16, got {M}")
    t = TWO_PI * np.arange(M) / M
    dg = curve.dgamma(t)
    h = TWO_PI / M
    return Quadrature(curve.gamma(t), dg * h, np.abs(dg) * h)


def winding_number(curve: BoundaryCurve, z: complex, samples: int = 2048) -> int:
    """Winding number from the unwrapped argument of ``gamma(t) - z``.

    The sampling is refined until each step is much shorter than the distance
    to the curve, so consecutive argument jumps stay well below pi.
    """
    z = complex(z)
    n = samples
    for _ in range(12):
        t = TWO_PI * np.arange(n + 1) / n
        g = curve.gamma(t) - z
        dist = np.abs(g).min()
        if dist == 0:
            return 0
        step = np.abs(np.diff(curve.gamma(t))).max()
        if step < 0.25 * dist:
            ang = np.unwrap(np.angle(g))
            return int(round((ang[-1] - ang[0]) / TWO_PI))
        n = min(int(n * max(2.0, 4.0 * step / dist)), 1 << 24)
    raise OutsideDomain(f"point {z} is numerically on the curve")


def nearest_boundary_point(curve: BoundaryCurve, z: complex,
                           samples: int = 2048) -> tuple[complex, float, float]:
    """Global minimizer of ``|z - gamma(t)|`` for ``z`` strictly inside.

    A coarse scan picks the discrete local minima, each is refined by bounded
    Brent search, and ties go to the smallest ``t``.
    """
    z = complex(z)
    if winding_number(curve, z) != 1:
        raise OutsideDomain(f"{z} is not inside the curve")
    h = TWO_PI / samples
    t = h * np.arange(samples)
    dist = np.abs(curve.gamma(t) - z)
    is_min = (dist <= np.roll(dist, 1)) & (dist <= np.roll(dist, -1))
    cand = np.flatnonzero(is_min)
    cand = cand[np.argsort(dist[cand], kind="stable")][:16]

    def obj(s):
        return float(np.abs(curve.gamma(np.array([s]))[0] - z))

    best = None
    for j in sorted(cand):
        res = minimize_scalar(obj, bounds=(t[j] - h, t[j] + h), method="bounded",
                              options={"xatol": 1e-13})
        s = float(res.x) % TWO_PI
        d = obj(s)
        if best is None or d < best[1] * (1 - 1e-13):
            best = (s, d)
    s, d = best
    return complex(curve.gamma(np.array([s]))[0]), d, s


def write_curve_csv(curve: BoundaryCurve, path, M: int | None = None, comment: str | None = None):
    t, g, dg = curve.sample(M)
    with open(path, "w", newline="") as fh:
        if comment:
            fh.write(f"# {comment}\n")
        w = csv.writer(fh)
        w.writerow(["t", "re", "im", "re_deriv", "im_deriv"])
        for row in zip(t, g.real, g.imag, dg.real, dg.imag):
            w.writerow([repr(float(v)) for v in row])


# ---------------------------------------------------------------------------
# Schwarz functions of circles


@dataclass(frozen=True)
class SchwarzArc:
    """Circle ``|z - center| = radius`` with ``S(z) = conj(center) + r^2/(z - center)``."""

    center: complex
    radius: float

    def __post_init__(self):
        if not self.radius > 0:
            raise ValueError("radius must be positive")

    def schwarz(self, z):
        return schwarz(self, z)

    def s_tau(self, tau, z):
        return s_tau(self, tau, z)

    def points(self, n: int):
        return self.center + self.radius * np.exp(TWO_PI * 1j * np.arange(n) / n)


def schwarz(arc: SchwarzArc, z):
    z = np.asarray(z, dtype=complex)
    dz = z - arc.center
    if np.any(dz == 0):
        raise PoleAtCenter("Schwarz function has a pole at the center")
    out = np.conj(arc.center) + arc.radius ** 2 / dz
    return out if out.ndim else complex(out)


def s_tau(arc: SchwarzArc, tau: complex, z):
    """``z - tau S(z)``; equals ``z_tau`` on the circle."""
    out = np.asarray(z, dtype=complex) - complex(tau) * np.asarray(schwarz(arc, z))
    return out if out.ndim else complex(out)
