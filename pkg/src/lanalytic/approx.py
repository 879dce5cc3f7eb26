"""Least-squares Dirichlet fitting by L-analytic polynomials on a boundary curve.

Columns are never formed as raw powers.  Each basis family ``m * v**k`` is
orthonormalized by Arnoldi on the sampled values (the Vandermonde-with-Arnoldi
trick), which keeps a recurrence that can be replayed at any other points.
The families are then orthogonalized against each other by classical
Gram-Schmidt with one reorthogonalization pass, dropping columns whose
residual falls below ``DROP_TOL``.
"""
from __future__ import annotations

import csv
import io
import json
import math
import re
import warnings
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.linalg import null_space, solve_triangular

from .errors import ConstraintInfeasible, RankDeficientWarning
from .geom import BoundaryCurve, boundary_quadrature
from .opcore import CanonicalForm
from .polyzbar import Family, LBasis, evaluate, lanalytic_basis

__all__ = [
    "DROP_TOL",
    "TINY",
    "SampledBasis",
    "FitResult",
    "SweepRow",
    "SweepReport",
    "ProbeResult",
    "fit_dirichlet",
    "convergence_sweep",
    "max_principle_probe",
    "boundary_data",
    "default_nodes",
]

DROP_TOL = 1e-12
TINY = 1e-300
VANISH_TOL = 1e-12  # boundary sup below this (with P(z0) = 1) counts as zero
OVERSAMPLE = 8

Data = Callable[[np.ndarray], np.ndarray]


def default_nodes(n: int, curve: BoundaryCurve | None = None) -> int:
    """Smallest even node count ``>= 8 (2n + 1)`` and at least ``curve.M``."""
    M = max(OVERSAMPLE * (2 * n + 1), 16, curve.M if curve is not None else 0)
    return M + (M % 2)


# ---------------------------------------------------------------------------
# sampled, orthonormalized basis


@dataclass
class _FamilyArnoldi:
    family: Family
    H: np.ndarray  # (count + 1, count) recurrence, H[0, 0] holds the first norm
    U: np.ndarray  # Q = A U with A the raw family columns

    def replay(self, z: np.ndarray) -> np.ndarray:
        fam = self.family
        mult = np.asarray(evaluate(fam.multiplier, z))
        var = np.asarray(evaluate(fam.variable, z))
        q0 = mult * var ** fam.start / self.H[0, 0]
        Q = np.empty(z.shape + (fam.count,), dtype=complex)
        Q[..., 0] = q0
        for k in range(fam.count - 1):
            v = var * Q[..., k]
            v = v - Q[..., : k + 1] @ self.H[1 : k + 2, k]
            Q[..., k + 1] = v / self.H[k + 2, k]
        return Q


def _arnoldi(fam: Family, z: np.ndarray, w: np.ndarray) -> tuple[np.ndarray, _FamilyArnoldi]:
    """Weighted Arnoldi on ``mult * var**(start + k)`` sampled at ``z``.

    ``H[0, 0]`` is the norm of the first column and ``H[1:, :]`` the usual
    Hessenberg matrix, each column orthogonalized twice.
    """
    n = fam.count
    mult = np.asarray(evaluate(fam.multiplier, z))
    var = np.asarray(evaluate(fam.variable, z))
    H = np.zeros((n + 1, max(n, 1)), dtype=complex)
    U = np.zeros((n, n), dtype=complex)
    Q = np.empty((len(z), n), dtype=complex)

    q = mult * var ** fam.start
    nrm = math.sqrt(float(np.sum(w * np.abs(q) ** 2)))
    H[0, 0] = nrm
    Q[:, 0] = q / nrm
    U[0, 0] = 1 / nrm
    for k in range(n - 1):
        v = var * Q[:, k]
        h = np.zeros(k + 1, dtype=complex)
        for _ in range(2):
            c = Q[:, : k + 1].conj().T @ (w * v)
            v = v - Q[:, : k + 1] @ c
            h += c
        nrm = math.sqrt(float(np.sum(w * np.abs(v) ** 2)))
        H[1 : k + 2, k] = h
        H[k + 2, k] = nrm
        Q[:, k + 1] = v / nrm
        # U[:, k+1] = (shift(U[:, k]) - U[:, :k+1] h) / nrm; shift multiplies by var
        col = np.zeros(n, dtype=complex)
        col[1 : k + 2] = U[: k + 1, k]
        col -= U[:, : k + 1] @ h
        U[:, k + 1] = col / nrm
    return Q, _FamilyArnoldi(fam, H, U)


@dataclass
class SampledBasis:
    """An :class:`LBasis` orthonormalized against weighted boundary samples.

    ``Q = B @ R^{-1}`` restricted to ``kept`` columns is orthonormal in the
    weighted inner product, where ``B`` stacks the per-family Arnoldi columns.
    """

    basis: LBasis
    nodes: np.ndarray
    weights: np.ndarray
    families: list[_FamilyArnoldi]
    B: np.ndarray
    Q: np.ndarray
    R: np.ndarray
    kept: np.ndarray
    drop_tol: float = DROP_TOL

    @classmethod
    def build(cls, basis: LBasis, nodes, weights, drop_tol: float = DROP_TOL) -> "SampledBasis":
        nodes = np.asarray(nodes, dtype=complex)
        weights = np.asarray(weights, dtype=float)
        blocks, fams = [], []
        for fam in basis.families:
            Qf, fa = _arnoldi(fam, nodes, weights)
            blocks.append(Qf)
            fams.append(fa)
        B = np.hstack(blocks)
        Q, R, kept = _cgs2(B, weights, drop_tol)
        return cls(basis, nodes, weights, fams, B, Q, R, kept, drop_tol)

    @property
    def rank(self) -> int:
        return int(self.kept.size)

    @property
    def size(self) -> int:
        return self.B.shape[1]

    def raw_at(self, z) -> np.ndarray:
        """Per-family Arnoldi columns replayed at new points."""
        z = np.asarray(z, dtype=complex)
        return np.concatenate([fa.replay(z) for fa in self.families], axis=-1)

    def block_U(self) -> np.ndarray:
        """Block-diagonal map from Arnoldi coordinates to basis coefficients."""
        n = self.size
        U = np.zeros((n, n), dtype=complex)
        i = 0
        for fa in self.families:
            k = fa.U.shape[0]
            U[i : i + k, i : i + k] = fa.U
            i += k
        return U

    def condition_estimate(self) -> float:
        """Ratio of extreme diagonal entries of the triangular factor of the raw columns.

        The raw columns satisfy ``A = Q R U^{-1}`` on the kept set, so the
        diagonal of the combined factor is ``diag(R) / diag(U)``.
        """
        dU = np.abs(np.diag(self.block_U()))[self.kept]
        dR = np.abs(np.diag(self.R))
        d = dR / dU
        return float(d.max() / d.min())

    def to_basis_coefficients(self, y: np.ndarray) -> np.ndarray:
        """Coefficients in :class:`LBasis` order from coordinates ``y`` in ``Q``."""
        x = np.zeros(self.size, dtype=complex)
        x[self.kept] = solve_triangular(self.R, y)
        return self.block_U() @ x

    def evaluate(self, y: np.ndarray, z) -> np.ndarray:
        x = solve_triangular(self.R, y)
        return self.raw_at(z)[..., self.kept] @ x


def _cgs2(B: np.ndarray, w: np.ndarray, tol: float):
    """Weighted classical Gram-Schmidt, two passes, with column dropping."""
    m, n = B.shape
    Q = np.zeros((m, n), dtype=complex)
    R = np.zeros((n, n), dtype=complex)
    kept: list[int] = []
    for j in range(n):
        v = B[:, j].copy()
        before = math.sqrt(float(np.sum(w * np.abs(v) ** 2)))
        r = np.zeros(len(kept), dtype=complex)
        if kept:
            Qk = Q[:, : len(kept)]
            for _ in range(2):
                c = Qk.conj().T @ (w * v)
                v = v - Qk @ c
                r += c
        nrm = math.sqrt(float(np.sum(w * np.abs(v) ** 2)))
        if before == 0 or nrm <= tol * before:
            continue
        i = len(kept)
        R[:i, len(kept)] = r
        R[i, i] = nrm
        Q[:, i] = v / nrm
        kept.append(j)
    k = len(kept)
    # R is indexed by kept position; entries above refer to earlier kept columns
    return Q[:, :k], R[:k, :k], np.array(kept, dtype=int)


# ---------------------------------------------------------------------------
# fitting


@dataclass
class FitResult:
    degree: int
    coefficients: np.ndarray
    boundary_l2_residual: float
    boundary_sup_residual: float
    interior_sup: float
    boundary_sup: float
    condition_estimate: float
    rank: int
    size: int
    method: str = "l2"
    sampled: SampledBasis | None = field(default=None, repr=False)
    q_coefficients: np.ndarray | None = field(default=None, repr=False)

    @property
    def ratio(self) -> float:
        return self.interior_sup / max(self.boundary_sup, TINY)

    @property
    def rank_deficient(self) -> bool:
        return self.rank < self.size

    def __call__(self, z):
        return self.sampled.evaluate(self.q_coefficients, z)


def _lawson(Q: np.ndarray, w: np.ndarray, f: np.ndarray, iterations: int) -> np.ndarray:
    """Lawson's reweighting towards the minimax fit; returns ``Q``-coordinates."""
    y = Q.conj().T @ (w * f)
    best = (np.abs(Q @ y - f).max(), y)
    lam = np.full(len(f), 1.0 / len(f))
    for _ in range(iterations):
        err = np.abs(Q @ y - f)
        lam = lam * err
        s = lam.sum()
        if s == 0:
            break
        lam /= s
        sq = np.sqrt(lam)
        y, *_ = np.linalg.lstsq(Q * sq[:, None], f * sq, rcond=None)
        e = np.abs(Q @ y - f).max()
        if e < best[0]:
            best = (e, y)
    return best[1]


def fit_dirichlet(basis: LBasis, curve: BoundaryCurve, psi: Data, M: int | None = None,
                  method: str = "l2", lawson_iterations: int = 60,
                  interior: tuple[int, int] = (64, 256)) -> FitResult:
    """Best approximation of boundary data ``psi(t)`` from the span of ``basis``.

    ``method="l2"`` is the arclength-weighted projection.  ``method="lawson"``
    starts there and reweights towards the uniform best approximation.
    Residuals are measured on an 8x oversampled boundary grid and the
    interior sup on the pullback of a polar grid.
    """
    n = basis.degree
    if M is None:
        M = default_nodes(n, curve)
    if M < OVERSAMPLE * (2 * n + 1):
        raise ValueError(f"M = {M} is below 8 (2n + 1) = {OVERSAMPLE * (2 * n + 1)}")
    q = boundary_quadrature(curve, M)
    sb = SampledBasis.build(basis, q.nodes, q.ds)
    if sb.rank < sb.size:
        warnings.warn(f"degree {n}: rank {sb.rank} < {sb.size} at drop tolerance {DROP_TOL:g}",
                      RankDeficientWarning, stacklevel=2)
    f = np.asarray(psi(q.t), dtype=complex)
    if method == "l2":
        y = sb.Q.conj().T @ (q.ds * f)
    elif method == "lawson":
        y = _lawson(sb.Q, q.ds, f, lawson_iterations)
    else:
        raise ValueError(f"unknown method {method!r}")

    r = sb.Q @ y - f
    l2 = math.sqrt(float(np.sum(q.ds * np.abs(r) ** 2)))
    Mo = OVERSAMPLE * M
    to = 2 * math.pi * np.arange(Mo) / Mo
    Po = sb.evaluate(y, curve.gamma(to))
    sup_res = float(np.abs(Po - np.asarray(psi(to), dtype=complex)).max())
    bsup = float(np.abs(Po).max())
    grid = curve.interior_grid(*interior)
    isup = float(np.abs(sb.evaluate(y, grid)).max())
    return FitResult(n, sb.to_basis_coefficients(y), l2, sup_res, isup, bsup,
                     sb.condition_estimate(), sb.rank, sb.size, method, sb, y)


# ---------------------------------------------------------------------------
# sweeps


@dataclass(frozen=True)
class SweepRow:
    n: int
    res_l2: float
    res_sup: float
    interior_sup: float
    boundary_sup: float
    ratio: float
    rank: int
    condition: float


@dataclass
class SweepReport:
    rows: list[SweepRow]
    res_tol: float
    ratio_cap: float
    method: str
    config: dict = field(default_factory=dict)

    @property
    def dichotomy_flag(self) -> bool:
        last = self.rows[-1]
        return not (last.res_sup <= self.res_tol and last.ratio <= self.ratio_cap)

    def to_csv(self) -> str:
        buf = io.StringIO()
        if self.config:
            buf.write("# config: " + json.dumps(self.config, sort_keys=True) + "\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["n", "res_l2", "res_sup", "interior_sup", "ratio"])
        for r in self.rows:
            w.writerow([r.n, repr(r.res_l2), repr(r.res_sup), repr(r.interior_sup), repr(r.ratio)])
        return buf.getvalue()

    def summary(self) -> dict:
        last = self.rows[-1]
        out = {"config": self.config} if self.config else {}
        out.update(
            dichotomy_flag=self.dichotomy_flag,
            method=self.method,
            res_tol=self.res_tol,
            ratio_cap=self.ratio_cap,
            final={"n": last.n, "res_sup": last.res_sup, "ratio": last.ratio},
            rows=[r.__dict__.copy() for r in self.rows],
        )
        return out


def convergence_sweep(canonical: CanonicalForm, curve: BoundaryCurve, psi: Data,
                      degrees: Sequence[int], res_tol: float = 1e-3, ratio_cap: float = 10.0,
                      method: str = "lawson", M: int | None = None, tau: complex | None = None,
                      config: dict | None = None) -> SweepReport:
    """Fit at each degree on one common node set and report the dichotomy flag.

    The flag is set unless the final degree has ``res_sup <= res_tol`` and
    ``ratio <= ratio_cap``.
    """
    degrees = list(degrees)
    if not degrees:
        raise ValueError("empty degree list")
    if any(b <= a for a, b in zip(degrees, degrees[1:])):
        raise ValueError("degrees must be strictly increasing")
    if M is None:
        M = default_nodes(degrees[-1], curve)
    rows = []
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RankDeficientWarning)
        for n in degrees:
            fit = fit_dirichlet(lanalytic_basis(canonical, n, tau), curve, psi, M, method=method)
            rows.append(SweepRow(n, fit.boundary_l2_residual, fit.boundary_sup_residual,
                                 fit.interior_sup, fit.boundary_sup, fit.ratio, fit.rank,
                                 fit.condition_estimate))
    return SweepReport(rows, res_tol, ratio_cap, method, dict(config or {}))


# ---------------------------------------------------------------------------
# weak maximum principle probe


@dataclass
class ProbeResult:
    degree: int
    z0: complex
    coefficients: np.ndarray
    boundary_sup: float
    boundary_l2: float
    value_at_z0: complex
    basis: LBasis = field(repr=False)

    @property
    def amplification(self) -> float:
        """``1 / boundary_sup``; ``inf`` once the witness vanishes on the boundary."""
        if self.boundary_sup <= VANISH_TOL:
            return math.inf
        return 1.0 / max(self.boundary_sup, TINY)

    def witness(self):
        return self.basis.combine(self.coefficients)


def max_principle_probe(canonical: CanonicalForm, curve: BoundaryCurve, z0: complex, n: int,
                        M: int | None = None, tau: complex | None = None) -> ProbeResult:
    """Smallest boundary L2 norm of an L-analytic polynomial with ``P(z0) = 1``.

    The constraint ``v . c = 1`` is eliminated with a particular solution and a
    null-space basis; the remaining least-squares problem runs in the
    per-family Arnoldi coordinates, which keep every column so exact boundary
    annihilators (such as ``1 - z zbar`` on the circle) are found.
    """
    z0 = complex(z0)
    basis = lanalytic_basis(canonical, n, tau)
    if M is None:
        M = default_nodes(n, curve)
    q = boundary_quadrature(curve, M)
    sb = SampledBasis.build(basis, q.nodes, q.ds)
    v = sb.raw_at(np.array([z0]))[0]
    vn = np.linalg.norm(v)
    if vn == 0:
        raise ConstraintInfeasible("every basis element vanishes at z0")
    x_p = v.conj() / vn ** 2
    N = null_space(v[None, :])
    sw = np.sqrt(q.ds)[:, None]
    A = sw * sb.B
    if N.shape[1]:
        y, *_ = np.linalg.lstsq(A @ N, -(A @ x_p), rcond=None)
        x = x_p + N @ y
    else:
        x = x_p
    Mo = OVERSAMPLE * M
    to = 2 * math.pi * np.arange(Mo) / Mo
    Po = sb.raw_at(curve.gamma(to)) @ x
    bsup = float(np.abs(Po).max())
    bl2 = float(np.linalg.norm(A @ x))
    coeffs = sb.block_U() @ x
    return ProbeResult(n, z0, coeffs, bsup, bl2, complex(v @ x), basis)


# ---------------------------------------------------------------------------
# named boundary data


_MONO = re.compile(r"^(zbar|z)(\d*)$")


def _parse_trace(expr: str):
    """``zbar2``, ``z*zbar``, ``z3*zbar2`` ... as exponent pair ``(j, k)``."""
    j = k = 0
    for tok in expr.split("*"):
        m = _MONO.match(tok.strip())
        if not m:
            raise ValueError(f"cannot parse monomial {expr!r}")
        p = int(m.group(2) or 1)
        if m.group(1) == "z":
            j += p
        else:
            k += p
    return j, k


def boundary_data(spec: str, curve: BoundaryCurve) -> Data:
    """Boundary data from a registry name.

    ``trace_of:<monomial>`` such as ``trace_of:zbar2``; ``inv_pole:a`` for
    ``1/(z - a)``; ``abs_cos`` for ``|cos t|``; ``abs_z`` for ``|z|``;
    ``fourier:k:c,k:c,...`` for ``sum c exp(ikt)``.
    """
    name, _, arg = spec.partition(":")
    if name == "trace_of":
        j, k = _parse_trace(arg)

        def psi(t):
            z = curve.gamma(t)
            return z ** j * np.conj(z) ** k
    elif name == "inv_pole":
        a = complex(arg.replace(" ", ""))

        def psi(t):
            return 1.0 / (curve.gamma(t) - a)
    elif name == "abs_cos":
        def psi(t):
            return np.abs(np.cos(t)).astype(complex)
    elif name == "abs_z":
        def psi(t):
            return np.abs(curve.gamma(t)).astype(complex)
    elif name == "fourier":
        terms = []
        for item in filter(None, arg.split(",")):
            kk, _, cc = item.partition(":")
            terms.append((int(kk), complex(cc.replace(" ", ""))))
        if not terms:
            raise ValueError("fourier data needs at least one k:c term")

        def psi(t):
            t = np.asarray(t, dtype=float)
            return sum(c * np.exp(1j * k * t) for k, c in terms)
    else:
        raise ValueError(f"unknown boundary data {spec!r}")
    return psi
