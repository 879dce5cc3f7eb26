"""Bump functionals on the unit circle and the checks built on them.

For a smooth bump ``Psi`` supported in ``D(zeta, eps)`` the functionals
``M_n(F) = oint_T Psi F z**n dz`` have norm ``mu0 = oint_T Psi |dz|`` but decay
in ``n`` on traces of L-analytic functions.  This module evaluates them, fits
decay rates, and checks the closed-form identities that go with them.
"""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from numpy.polynomial import Polynomial
from scipy.special import exp1

from .errors import DegreeOrder, OutsideDomain, QuadratureNotConverged
from .geom import (
    BoundaryCurve,
    SchwarzArc,
    nearest_boundary_point,
    s_tau,
    transform_curve,
)
from .opcore import NSE, RealLinearMap, canonical_operator
from .polyzbar import ONE, Z, ZBAR, BiPoly, apply_operator, dbar, evaluate

__all__ = [
    "BumpFunctional",
    "SolutionPair",
    "TrigPoly",
    "DecayReport",
    "make_bump",
    "eval_Mn",
    "area_form_Mn",
    "decay_experiment",
    "trig_poly_bound",
    "modulus_of_continuity",
    "derivative_check",
    "green_identity_check",
    "schwarz_consistency",
    "BUMP_RADIAL_INTEGRAL",
]

# int_0^1 exp(-1/(1-s^2)) s ds = (exp(-1) - E1(1)) / 2
BUMP_RADIAL_INTEGRAL = 0.5 * (math.exp(-1.0) - float(exp1(1.0)))
MAX_NODES = 1 << 20


def _radial_integral(n: int) -> float:
    # substitute u = s^2; the integrand 0.5 exp(-1/(1-u)) is flat at u = 1
    x, w = np.polynomial.legendre.leggauss(n)
    u = 0.5 * (x + 1)
    with np.errstate(divide="ignore", over="ignore"):
        vals = np.exp(-1.0 / (1.0 - u))
    return float(0.25 * np.sum(w * vals))


@dataclass(frozen=True)
class BumpFunctional:
    zeta: complex
    eps: float
    area_norm: float
    mu0: float
    half_width: float  # the support meets T in the arc arg(zeta) +- half_width

    @property
    def theta0(self) -> float:
        return math.atan2(self.zeta.imag, self.zeta.real)

    def __call__(self, z):
        z = np.asarray(z, dtype=complex)
        q = np.abs(z - self.zeta) ** 2 / self.eps ** 2
        out = np.zeros(z.shape)
        inside = q < 1
        out[inside] = self.area_norm * np.exp(-1.0 / (1.0 - q[inside]))
        return out if out.ndim else float(out)

    def dbar(self, z):
        """``dbar Psi = Psi * (-(z - zeta)/eps^2) / (1 - q)^2``."""
        z = np.asarray(z, dtype=complex)
        q = np.abs(z - self.zeta) ** 2 / self.eps ** 2
        out = np.zeros(z.shape, dtype=complex)
        inside = q < 1
        qi = q[inside]
        out[inside] = (self.area_norm * np.exp(-1.0 / (1.0 - qi))
                       * (-(z[inside] - self.zeta) / self.eps ** 2) / (1.0 - qi) ** 2)
        return out

    def dbar_sup(self, samples: int = 200001) -> float:
        """``sup |dbar Psi|`` from the radial profile."""
        rho = np.linspace(0, 1, samples, endpoint=False)
        return float(np.abs(self.dbar(self.zeta + self.eps * rho)).max())

    def arc(self, N: int) -> tuple[np.ndarray, float]:
        """``N + 1`` equispaced arc parameters including both (zero-valued) ends."""
        s = np.linspace(-self.half_width, self.half_width, N + 1)
        return self.theta0 + s, 2 * self.half_width / N


def _arc_mass(eps: float, half_width: float, N: int, zeta: complex, area_norm: float) -> float:
    s = np.linspace(-half_width, half_width, N + 1)
    q = (2 * np.sin(s / 2)) ** 2 / eps ** 2
    vals = np.zeros_like(s)
    inside = q < 1
    vals[inside] = area_norm * np.exp(-1.0 / (1.0 - q[inside]))
    return float(np.sum(vals) * 2 * half_width / N)


def make_bump(zeta: complex = 1.0, eps: float = 0.3, quad_resolution: int = 64) -> BumpFunctional:
    """Mollifier ``A exp(-1/(1 - |z - zeta|^2/eps^2))`` normalized to unit area."""
    zeta = complex(zeta)
    if not 0 < eps <= 0.5:
        raise ValueError("eps must lie in (0, 0.5]")
    if abs(abs(zeta) - 1) > 1e-12:
        raise ValueError("zeta must lie on the unit circle")
    zeta = zeta / abs(zeta)
    n = quad_resolution
    prev = _radial_integral(n)
    for _ in range(8):
        n *= 2
        cur = _radial_integral(n)
        if abs(cur - prev) <= 1e-8 * abs(cur):
            break
        prev = cur
    else:
        raise QuadratureNotConverged("area normalization did not settle")
    area_norm = 1.0 / (2 * math.pi * eps ** 2 * cur)
    half_width = 2 * math.asin(eps / 2)
    N = 4096
    mu0 = _arc_mass(eps, half_width, N, zeta, area_norm)
    while N < MAX_NODES:
        nxt = _arc_mass(eps, half_width, 2 * N, zeta, area_norm)
        N *= 2
        if abs(nxt - mu0) <= 1e-12 * nxt:
            mu0 = nxt
            break
        mu0 = nxt
    return BumpFunctional(zeta, eps, area_norm, mu0, half_width)


def _mn_sum(bump: BumpFunctional, F, n: int, N: int) -> complex:
    t, h = bump.arc(N)
    z = np.exp(1j * t)
    psi = bump(z)
    live = psi > 0
    zl = z[live]
    vals = psi[live] * np.asarray(F(zl), dtype=complex) * zl ** n * (1j * zl)
    return complex(np.sum(vals) * h)


def eval_Mn(bump: BumpFunctional, F: Callable, n: int, tol: float = 1e-9,
            scale: float | None = None) -> complex:
    """``oint_T Psi F z**n dz`` on the support arc.

    Starts at ``max(4096, 16 n)`` nodes and doubles until two values agree to
    ``tol * scale`` (default scale ``mu0 * max|F|`` on the arc) or the node cap
    is reached.
    """
    if n < 0:
        raise ValueError("n must be nonnegative")
    N = max(4096, 16 * n)
    if scale is None:
        t, _ = bump.arc(N)
        fmax = float(np.abs(np.asarray(F(np.exp(1j * t)), dtype=complex)).max(initial=0.0))
        scale = bump.mu0 * fmax
    val = _mn_sum(bump, F, n, N)
    while N < MAX_NODES:
        N *= 2
        nxt = _mn_sum(bump, F, n, N)
        if abs(nxt - val) <= tol * scale:
            return nxt
        val = nxt
    return val


def area_form_Mn(bump: BumpFunctional, F: BiPoly, n: int, nr: int = 200, nt: int = 400) -> complex:
    """``2i int_D z**n dbar[Psi F] dm2`` over ``D`` intersected with the support.

    Gauss-Legendre in the radius ``r in [1 - eps, 1]`` and the trapezoid rule
    on each chord arc of the support disk.
    """
    x, wx = np.polynomial.legendre.leggauss(nr)
    r0 = max(0.0, 1 - bump.eps)
    r = r0 + (1 - r0) * 0.5 * (x + 1)
    wr = (1 - r0) * 0.5 * wx
    dF = dbar(F)
    total = 0j
    for ri, wi in zip(r, wr):
        c = (1 + ri ** 2 - bump.eps ** 2) / (2 * ri)
        if c >= 1:
            continue
        beta = math.acos(max(-1.0, c))
        th = bump.theta0 + np.linspace(-beta, beta, nt + 1)
        z = ri * np.exp(1j * th)
        integrand = z ** n * (bump.dbar(z) * evaluate(F, z) + bump(z) * evaluate(dF, z))
        total += wi * ri * np.sum(integrand) * (2 * beta / nt)
    return 2j * total


# ---------------------------------------------------------------------------
# solutions and trigonometric polynomials


@dataclass(frozen=True)
class SolutionPair:
    """``f(z) = h(z - tau zbar) + g(z)``, or ``zbar h(z) + g(z)`` when bianalytic."""

    h: Polynomial
    g: Polynomial
    tau: complex = 0j
    bianalytic: bool = False

    def __post_init__(self):
        object.__setattr__(self, "tau", complex(self.tau))
        if abs(self.tau) >= 1:
            raise ValueError("|tau| must be < 1")
        if self.bianalytic and self.tau != 0:
            raise ValueError("the bianalytic form needs tau = 0")

    @classmethod
    def from_coeffs(cls, h: Sequence[complex], g: Sequence[complex], tau: complex = 0,
                    bianalytic: bool = False) -> "SolutionPair":
        return cls(Polynomial(np.asarray(h, dtype=complex)),
                   Polynomial(np.asarray(g, dtype=complex)), tau, bianalytic)

    def inner(self, z):
        """Argument fed to ``h``: ``z_tau`` (or ``z`` in the bianalytic form)."""
        z = np.asarray(z, dtype=complex)
        return z if self.bianalytic else z - self.tau * np.conj(z)

    def __call__(self, z):
        z = np.asarray(z, dtype=complex)
        if self.bianalytic:
            return np.conj(z) * self.h(z) + self.g(z)
        return self.h(z - self.tau * np.conj(z)) + self.g(z)

    def scaled(self, k: complex) -> "SolutionPair":
        return SolutionPair(self.h * k, self.g * k, self.tau, self.bianalytic)

    def is_zero(self) -> bool:
        return not (np.any(self.h.coef) or np.any(self.g.coef))

    def to_bipoly(self) -> BiPoly:
        inner = Z if self.bianalytic else Z - ZBAR * self.tau
        out, p = BiPoly(), ONE
        for c in self.h.coef:
            out = out + p * complex(c)
            p = p * inner
        if self.bianalytic:
            out = out * ZBAR
        p = ONE
        for c in self.g.coef:
            out = out + p * complex(c)
            p = p * Z
        return out

    def residual(self) -> float:
        """Coefficient residual under its canonical operator (``dbar d_tau`` or ``dbar^2``)."""
        op = canonical_operator(NSE, self.tau, 4)
        return apply_operator(op, self.to_bipoly()).max_abs()


@dataclass(frozen=True)
class TrigPoly:
    """``P(e^{it}) = sum_k c_k e^{ikt}`` for integer ``k`` of either sign."""

    coeffs: tuple[tuple[int, complex], ...]

    @classmethod
    def from_dict(cls, d: dict) -> "TrigPoly":
        return cls(tuple(sorted((int(k), complex(v)) for k, v in d.items() if v != 0)))

    @property
    def degree(self) -> int:
        return max((abs(k) for k, _ in self.coeffs), default=0)

    def __call__(self, z):
        z = np.asarray(z, dtype=complex)
        return sum((c * z ** k for k, c in self.coeffs), np.zeros_like(z))

    def shifted(self, nu: int) -> "TrigPoly":
        return TrigPoly(tuple((k + nu, c) for k, c in self.coeffs))

    def sup(self, samples: int = 4096) -> float:
        t = 2 * math.pi * np.arange(samples) / samples
        return float(np.abs(self(np.exp(1j * t))).max())


def trig_poly_bound(bump: BumpFunctional, P: TrigPoly, n: int) -> dict:
    """Shift identity ``|M_n(P)| = |M_{n-nu}(z^nu P)|`` and the bound ``mu0 |P|``."""
    nu = P.degree
    if n <= nu:
        raise DegreeOrder(f"need n > degree, got n={n}, degree={nu}")
    lhs = abs(eval_Mn(bump, P, n))
    rhs = abs(eval_Mn(bump, P.shifted(nu), n - nu))
    bound = bump.mu0 * P.sup()
    return {
        "abs_Mn": lhs,
        "abs_shifted": rhs,
        "agree": abs(lhs - rhs) <= 1e-10 * max(bump.mu0 * P.sup(), 1e-300),
        "norm_bound": bound,
        "within_bound": lhs <= bound + 1e-9,
    }


# ---------------------------------------------------------------------------
# decay of M_n on solution traces


@dataclass
class DecayReport:
    ns: list[int]
    abs_Mn: list[float]
    slope: float
    window: tuple[int, int]
    reference_exponent: float
    empirical_constant: float
    norm_estimate: float
    config: dict = field(default_factory=dict)

    def to_csv(self) -> str:
        buf = io.StringIO()
        if self.config:
            buf.write("# config: " + json.dumps(self.config, sort_keys=True) + "\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["n", "abs_Mn"])
        for n, v in zip(self.ns, self.abs_Mn):
            w.writerow([n, repr(v)])
        return buf.getvalue()

    def summary(self) -> dict:
        out = {"config": self.config} if self.config else {}
        out.update(slope=self.slope, window=list(self.window),
                   reference_exponent=self.reference_exponent,
                   empirical_constant=self.empirical_constant,
                   norm_estimate=self.norm_estimate)
        return out

    def to_svg(self, width: int = 480, height: int = 320) -> str:
        """Minimal log-log polyline with axes."""
        pts = [(math.log10(n), math.log10(v)) for n, v in zip(self.ns, self.abs_Mn) if v > 0]
        if len(pts) < 2:
            return f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}"/>'
        xs, ys = zip(*pts)
        pad = 40
        x0, x1, y0, y1 = min(xs), max(xs), min(ys), max(ys)
        sx = (width - 2 * pad) / ((x1 - x0) or 1)
        sy = (height - 2 * pad) / ((y1 - y0) or 1)
        poly = " ".join(f"{pad + (x - x0) * sx:.2f},{height - pad - (y - y0) * sy:.2f}" for x, y in pts)
        return (
            f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}">'
            f'<line x1="{pad}" y1="{height - pad}" x2="{width - pad}" y2="{height - pad}" stroke="black"/>'
            f'<line x1="{pad}" y1="{pad}" x2="{pad}" y2="{height - pad}" stroke="black"/>'
            f'<polyline fill="none" stroke="blue" points="{poly}"/>'
            f'<text x="{pad}" y="{pad - 10}" font-size="12">log|M_n| vs log n, slope {self.slope:.3f}</text>'
            "</svg>"
        )


def default_ns(lo: int = 32, hi: int = 512) -> list[int]:
    """Half-octave grid from ``lo`` to ``hi``."""
    out, k = [], 0
    while True:
        n = int(round(lo * 2 ** (k / 2)))
        if n > hi:
            break
        out.append(n)
        k += 1
    if out[-1] != hi:
        out.append(hi)
    return out


def _domain_norm(f: SolutionPair, curve: BoundaryCurve) -> float:
    grid = curve.interior_grid()
    t = 2 * math.pi * np.arange(16384) / 16384
    vals = np.concatenate([np.ravel(f(grid)), f(curve.gamma(t))])
    return float(np.abs(vals).max())


def decay_experiment(bump: BumpFunctional, curve: BoundaryCurve, f: SolutionPair,
                     n_list: Sequence[int] | None = None, window: tuple[int, int] = (32, 512),
                     alpha: float | None = None, config: dict | None = None) -> DecayReport:
    """``|M_n(f o phi)|`` over ``n`` and its log-log slope on ``window``.

    ``curve.fill`` plays the role of ``phi``; for the normalized map families
    ``phi(1) = 0`` with a real tangent there.  ``f`` must already carry the
    rotated ``tau``.
    """
    if curve.fill is None:
        raise ValueError("decay_experiment needs a curve with a disk parametrization")
    if n_list is None:
        n_list = default_ns(*window)
    if alpha is None:
        alpha = curve.cmap.alpha if curve.cmap is not None and curve.cmap.kind == "holder_map" else 1.0
    fill = curve.fill

    def F(w):
        return f(fill(w))

    norm = _domain_norm(f, curve)
    scale = bump.mu0 * max(norm, 1e-300)
    vals = [abs(eval_Mn(bump, F, n, tol=1e-12, scale=scale)) for n in n_list]
    ref = -alpha if f.bianalytic else -alpha / 2
    sel = [(n, v) for n, v in zip(n_list, vals) if window[0] <= n <= window[1] and v > 0]
    if len(sel) >= 2:
        ln = np.log([n for n, _ in sel])
        lv = np.log([v for _, v in sel])
        slope = float(np.polyfit(ln, lv, 1)[0])
    else:
        slope = float("-inf")
    const = max((v * n ** (-ref) for n, v in zip(n_list, vals)), default=0.0)
    const = const / norm if norm > 0 else 0.0
    return DecayReport(list(n_list), vals, slope, tuple(window), ref, const, norm, dict(config or {}))


# ---------------------------------------------------------------------------
# derivative estimates at interior points


def _points_inside(curve: BoundaryCurve, z: np.ndarray, M: int = 2048) -> np.ndarray:
    t = 2 * math.pi * np.arange(M + 1) / M
    g = curve.gamma(t)
    flat = z.ravel()
    res = np.empty(flat.shape, dtype=bool)
    for s in range(0, flat.size, 1024):
        chunk = flat[s : s + 1024]
        d = g[None, :] - chunk[:, None]
        ang = np.angle(d[:, 1:] / d[:, :-1]).sum(axis=1)
        res[s : s + 1024] = np.abs(ang) > math.pi
    return res.reshape(z.shape)


def _boundary_distance(curve: BoundaryCurve, z: np.ndarray, M: int = 2048) -> np.ndarray:
    """Lower bound on the distance to the curve from ``M`` samples."""
    t = 2 * math.pi * np.arange(M) / M
    g = curve.gamma(t)
    margin = np.abs(np.diff(np.append(g, g[0]))).max()
    out = np.empty(z.shape)
    for s in range(0, z.size, 1024):
        out[s : s + 1024] = np.abs(g[None, :] - z[s : s + 1024, None]).min(axis=1)
    return out - margin


def modulus_of_continuity(f: Callable, curve: BoundaryCurve, deltas: Sequence[float],
                          pairs: int = 20000, seed: int = 0) -> np.ndarray:
    """Empirical ``omega(f, delta)``: max over random close pairs, then a running max.

    Pairs ``(z, z + delta u e^{i theta})`` use the same random draws for every
    ``delta``; a pair counts only if both points lie in the closed domain.
    """
    deltas = np.asarray(deltas, dtype=float)
    rng = np.random.default_rng(seed)
    w = np.sqrt(rng.random(pairs)) * np.exp(2j * math.pi * rng.random(pairs))
    z = curve.fill(w) if curve.fill is not None else curve.interior_grid().ravel()[:pairs]
    u = rng.random(pairs)
    th = 2 * math.pi * rng.random(pairs)
    fz = f(z)
    dist = _boundary_distance(curve, z)
    order = np.argsort(deltas)
    est = np.zeros(len(deltas))
    for i in order:
        zp = z + deltas[i] * u * np.exp(1j * th)
        ok = dist > deltas[i]
        near = ~ok
        if near.any():
            ok[near] = _points_inside(curve, zp[near])
        diff = np.abs(f(zp[ok]) - fz[ok])
        est[i] = diff.max(initial=0.0)
    running = np.maximum.accumulate(est[order])
    out = np.empty_like(est)
    out[order] = running
    return out


def derivative_check(f: SolutionPair, curve: BoundaryCurve, points: Sequence[complex],
                     m_list: Sequence[int] = (1, 2, 3), pairs: int = 20000, seed: int = 0) -> list[dict]:
    """Normalized derivative ratios at interior points.

    ``r_h = |h^(m)(a_tau)| d_tau^m / (m! omega(f, d_tau))`` with ``d_tau`` the
    distance from ``T a`` to the image boundary under ``T z = z - tau zbar``,
    and ``r_g`` likewise with ``g``, ``a`` and ``d``.
    """
    shear = RealLinearMap.shear(f.tau)
    tcurve = transform_curve(curve, shear)
    geo = []
    for a in points:
        a = complex(a)
        _, d, _ = nearest_boundary_point(curve, a)
        at = complex(shear(a))
        if f.bianalytic:
            dt = d
        else:
            _, dt, _ = nearest_boundary_point(tcurve, at)
        geo.append((a, at, d, dt))
    deltas = sorted({x for _, _, d, dt in geo for x in (d, dt)})
    om = dict(zip(deltas, modulus_of_continuity(f, curve, deltas, pairs, seed)))
    rows = []
    for a, at, d, dt in geo:
        ah = a if f.bianalytic else at
        for m in m_list:
            hm = complex(f.h.deriv(m)(ah)) if f.h.degree() >= m else 0j
            gm = complex(f.g.deriv(m)(a)) if f.g.degree() >= m else 0j
            fm = math.factorial(m)
            wh, wg = om[dt], om[d]
            rh = abs(hm) * dt ** m / (fm * wh) if wh > 0 else 0.0
            rg = abs(gm) * d ** m / (fm * wg) if wg > 0 else 0.0
            rows.append({"a": a, "m": m, "d": d, "d_tau": dt, "omega_d": wg, "omega_d_tau": wh,
                         "r_h": rh, "r_g": rg})
    return rows


# ---------------------------------------------------------------------------
# closed-form identities


def _disk_moment(p: int, a: int, b: int) -> float:
    """``int_D (1 - |z|^2)^p z^a zbar^b dm2``: zero unless ``a == b``."""
    if a != b:
        return 0.0
    return math.pi / ((a + p + 1) * math.comb(a + p, p))


def _weighted_integral(F: BiPoly, p: int, shift: int) -> complex:
    return sum(v * _disk_moment(p, j + shift, k) for (j, k), v in F)


def green_identity_check(F: BiPoly, k: int, N: int) -> tuple[complex, complex, float]:
    """Both sides of ``int (1-|z|^2)^(k-1) F z^(N-k+1) = (1/k) int (1-|z|^2)^k z^(N-k) dbar F``.

    Exact monomial moments, no quadrature.  The discrepancy is relative to the
    absolute-value sum of the contributing terms.
    """
    if k < 1 or N < k:
        raise ValueError("need k >= 1 and N >= k")
    lhs = complex(_weighted_integral(F, k - 1, N - k + 1))
    dF = dbar(F)
    rhs = complex(_weighted_integral(dF, k, N - k)) / k
    scale = sum(abs(v) * _disk_moment(k - 1, j + N - k + 1, kk) for (j, kk), v in F)
    scale = max(scale, abs(lhs), abs(rhs), 1e-300)
    return lhs, rhs, abs(lhs - rhs) / scale


def schwarz_consistency(f: SolutionPair, arc: SchwarzArc, approach_points: Sequence[complex]) -> dict:
    """``|h(S_tau(z)) - h(z_tau)|`` along points approaching the circle."""
    pts = np.asarray(approach_points, dtype=complex)
    tau = f.tau
    vals = np.abs(f.h(s_tau(arc, tau, pts)) - f.h(pts - tau * np.conj(pts)))
    dist = np.abs(arc.radius - np.abs(pts - arc.center))
    order = np.argsort(-dist)
    v = vals[order]
    mono = bool(np.all(v[1:] <= 1.1 * v[:-1] + 1e-15))
    rows = [{"z": complex(pts[i]), "d": float(dist[i]), "value": float(vals[i])} for i in order]
    return {"rows": rows, "monotone": mono}
