"""Coefficient-level analysis of ``psi(z) = z + sum_{k>=k0} z**m_k / (k m_k)``.

Exponents such as ``2**(k**2)`` are far too large to raise a complex number
to, so everything is carried as ``log2 m_k`` and evaluated through ``exp2``,
``expm1`` and friends.  No quadrature is involved anywhere.
"""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import AnnulusOverlap

__all__ = [
    "RULES",
    "LacunarySpec",
    "Conditions",
    "H2Norm",
    "L1Bound",
    "check_conditions",
    "h2_norm_psi_prime",
    "l1_psi_second_lower_bound",
    "annuli_disjoint",
    "evaluate_demo",
    "lacunary_csv",
]

LN2 = math.log(2.0)
INNER, OUTER = 0.1, 0.9  # annulus A_k is r**m_k in [INNER, OUTER]
FLAT_TOL = 1e-6
FLAT_FROM = 10

# log2 m_k as a function of k
RULES = {
    "2^k^2": lambda k: float(k * k),
    "3^k": lambda k: k * math.log2(3.0),
    "4^k": lambda k: 2.0 * k,  # small-exponent demo; fails the summability condition
}


@dataclass(frozen=True)
class LacunarySpec:
    K: int = 8
    k0: int = 2
    rule: str = "2^k^2"

    def __post_init__(self):
        if self.rule not in RULES:
            raise ValueError(f"unknown rule {self.rule!r}; choose from {sorted(RULES)}")
        if self.k0 < 1:
            raise ValueError("k0 must be >= 1")

    def log2_m(self, k: int) -> float:
        return RULES[self.rule](k)

    def to_json(self) -> dict:
        return {"K": self.K, "k0": self.k0, "rule": self.rule}


class Conditions(NamedTuple):
    min_ratio: float
    double_sum_partial: float
    ok: bool
    increments: tuple[float, ...]  # increments[n - 2] = sum_{k<n} m_k/m_n


def check_conditions(spec: LacunarySpec) -> Conditions:
    """Gap ratio ``min m_{k+1}/m_k`` and the partial double sum over ``k = 1..K``.

    The increments are monitored up to ``n = max(K, 16)``; ``ok`` requires a
    gap above 2 and increments below ``1e-6`` from ``n = 11`` on.
    """
    if spec.K < 2:
        raise ValueError("K must be >= 2")
    top = max(spec.K, FLAT_FROM + 6)
    L = [spec.log2_m(k) for k in range(1, top + 1)]
    min_gap = min(L[k] - L[k - 1] for k in range(1, spec.K))
    inc = []
    for n in range(2, top + 1):
        ln = L[n - 1]
        inc.append(math.fsum(2.0 ** (L[k - 1] - ln) for k in range(1, n)))
    partial = math.fsum(inc[: spec.K - 1])
    flat = all(v < FLAT_TOL for n, v in enumerate(inc, start=2) if n > FLAT_FROM)
    min_ratio = 2.0 ** min_gap
    return Conditions(min_ratio, partial, bool(min_ratio > 2 and flat), tuple(inc))


class H2Norm(NamedTuple):
    value: float
    squared: float
    tail_bound: float


def h2_norm_psi_prime(spec: LacunarySpec) -> H2Norm:
    """``|psi'|_{H^2}`` by Parseval: the squared norm is ``1 + sum 1/k^2``.

    The omitted tail ``sum_{k>K} 1/k^2`` is below ``1/K``.
    """
    sq = 1.0 + math.fsum(1.0 / (k * k) for k in range(spec.k0, spec.K + 1))
    return H2Norm(math.sqrt(sq), sq, 1.0 / max(spec.K, 1))


def _log_abs_ln(x: float) -> float:
    return math.log(-math.log(x))


def annuli_disjoint(spec: LacunarySpec) -> bool:
    """Whether consecutive annuli ``r**m_k in [0.1, 0.9]`` are disjoint.

    With ``s = |ln r|`` the annulus is ``s in [ln(1/0.9)/m_k, ln(1/0.1)/m_k]``;
    compare the logarithms of the endpoints.
    """
    for k in range(spec.k0, spec.K):
        inner_next = _log_abs_ln(INNER) - spec.log2_m(k + 1) * LN2
        outer_here = _log_abs_ln(OUTER) - spec.log2_m(k) * LN2
        if not inner_next < outer_here:
            return False
    return True


def _annulus_mass(rho: float) -> float:
    """``r1**m - r0**m`` on ``A_k`` for the exponent ratio ``rho = m / m_k``."""
    return math.expm1(rho * math.log(OUTER)) - math.expm1(rho * math.log(INNER))


class L1Bound(NamedTuple):
    ks: tuple[int, ...]
    contributions: tuple[float, ...]
    partial_sum: float
    harmonic_reference: float
    cross_fraction: float  # worst contamination relative to the own term


def l1_psi_second_lower_bound(spec: LacunarySpec) -> L1Bound:
    """Lower bound for ``int_D |psi''| dm2`` from disjoint annuli.

    On ``A_k`` the ``k``-th term of ``psi''`` contributes
    ``2 pi (1 - 1/m_k)(0.9 - 0.1)/k`` and every other term is subtracted
    through the triangle inequality, each in closed form.
    """
    if spec.K < spec.k0:
        raise ValueError("need K >= k0")
    if not annuli_disjoint(spec):
        raise AnnulusOverlap(f"annuli overlap for rule {spec.rule!r} from k0={spec.k0}")
    ks = list(range(spec.k0, spec.K + 1))
    L = {k: spec.log2_m(k) for k in ks}

    def mass(j: int, k: int) -> float:
        # 2 pi (m_j - 1)/(j m_j) * (r1^m_j - r0^m_j) on A_k
        lead = -math.expm1(-L[j] * LN2) / j
        return 2 * math.pi * lead * _annulus_mass(2.0 ** (L[j] - L[k]))

    contributions, worst = [], 0.0
    for k in ks:
        own = mass(k, k)
        cross = math.fsum(mass(j, k) for j in ks if j != k)
        contributions.append(own - cross)
        worst = max(worst, cross / own)
    harmonic = math.fsum(1.0 / k for k in ks)
    return L1Bound(tuple(ks), tuple(contributions), math.fsum(contributions), harmonic, worst)


def evaluate_demo(spec: LacunarySpec, z):
    """Pointwise ``psi`` for small-exponent rules only (``m_K <= 2**20``)."""
    if spec.log2_m(spec.K) > 20:
        raise ValueError("pointwise evaluation is limited to exponents up to 2**20")
    z = np.asarray(z, dtype=complex)
    out = z.copy()
    for k in range(spec.k0, spec.K + 1):
        m = int(round(2.0 ** spec.log2_m(k)))
        out = out + z ** m / (k * m)
    return out


def lacunary_csv(spec: LacunarySpec, config: dict | None = None) -> str:
    """Rows ``k, m_k_log2, term_contribution, partial_sum, harmonic_partial``."""
    bound = l1_psi_second_lower_bound(spec)
    buf = io.StringIO()
    if config:
        buf.write("# config: " + json.dumps(config, sort_keys=True) + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["k", "m_k_log2", "term_contribution", "partial_sum", "harmonic_partial"])
    partial = harmonic = 0.0
    for k, c in zip(bound.ks, bound.contributions):
        partial += c
        harmonic += 1.0 / k
        w.writerow([k, repr(spec.log2_m(k)), repr(c), repr(partial), repr(harmonic)])
    return buf.getvalue()
