import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.special import exp1

from lanalytic import ONE, ZBAR, BiPoly, Z, SchwarzArc, curve_from_map, make_disk, make_holder_map
from lanalytic import rotate_parameter
from lanalytic.errors import DegreeOrder
from lanalytic.probe import (
    BUMP_RADIAL_INTEGRAL,
    SolutionPair,
    TrigPoly,
    area_form_Mn,
    decay_experiment,
    derivative_check,
    eval_Mn,
    green_identity_check,
    make_bump,
    schwarz_consistency,
    trig_poly_bound,
)

BUMP = make_bump(1, 0.3)
HOLDER = curve_from_map(make_holder_map(0.5, 0.4), normalize=True)


def test_radial_integral_oracle():
    assert BUMP_RADIAL_INTEGRAL == pytest.approx(0.5 * (math.exp(-1) - exp1(1)), rel=1e-14)


def test_bump_examples():
    assert BUMP.mu0 > 0
    assert BUMP(1 + 1.01 * 0.3) == 0
    assert BUMP(1 + 0j) > 0
    # area normalization by an independent polar rule, doubled
    for nr in (400, 800):
        x, w = np.polynomial.legendre.leggauss(nr)
        r = 0.15 * (x + 1)
        th = 2 * math.pi * np.arange(64) / 64
        pts = 1 + r[:, None] * np.exp(1j * th)[None, :]
        area = np.sum(BUMP(pts) * (0.15 * w * r)[:, None]) * 2 * math.pi / 64
        assert area == pytest.approx(1, abs=1e-8)


def test_bump_is_nonnegative_and_flat_at_edge():
    z = 1 + 0.3 * np.linspace(0, 1.2, 2001)[:, None] * np.exp(1j * np.linspace(0, 6.28, 17))[None, :]
    assert np.all(BUMP(z) >= 0)
    edge = [BUMP(1 + 0.3 * (1 - h)) / h for h in (1e-1, 3e-2, 1e-2)]
    assert edge[0] > edge[1] > edge[2]


def test_mn_norm_attained():
    for n in (0, 7, 50, 200):
        v = eval_Mn(BUMP, lambda z, n=n: -1j * np.conj(z) ** (n + 1), n)
        assert abs(v - BUMP.mu0) <= 1e-8 * BUMP.mu0


def test_mn_trivial_and_green_bound():
    assert eval_Mn(BUMP, lambda z: np.zeros_like(z), 10) == 0
    v = eval_Mn(BUMP, lambda z: np.ones_like(z), 64)
    assert abs(v) <= 2 * math.pi * BUMP.dbar_sup() / 66


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 300),
       st.lists(st.tuples(st.integers(-6, 6), st.complex_numbers(max_magnitude=2, allow_nan=False)),
                min_size=1, max_size=5))
def test_operator_norm_bound(n, terms):
    P = TrigPoly.from_dict(dict(terms))
    v = eval_Mn(BUMP, P, n)
    assert abs(v) <= BUMP.mu0 * P.sup(8192) + 1e-9


@pytest.mark.parametrize("n", [0, 3, 10])
def test_area_form_agrees(n):
    F = Z ** 2 + ZBAR * 0.5 + Z * ZBAR
    assert abs(eval_Mn(BUMP, F, n) - area_form_Mn(BUMP, F, n)) < 1e-6


def test_holomorphic_decay():
    F = Z ** 3 - Z * 2j + ONE
    c = [abs(eval_Mn(BUMP, F, n)) * n for n in (16, 32, 64, 128, 256, 512)]
    assert max(c) <= 1.5 * max(c[:2])


def test_trig_poly_shift_identity():
    r = trig_poly_bound(BUMP, TrigPoly.from_dict({-3: 1}), 40)
    assert r["agree"]
    assert r["abs_Mn"] == pytest.approx(abs(eval_Mn(BUMP, lambda z: np.ones_like(z), 37)), abs=1e-10)
    r = trig_poly_bound(BUMP, TrigPoly.from_dict({0: 1}), 5)
    assert r["abs_Mn"] == r["abs_shifted"]
    rng = np.random.default_rng(3)
    P = TrigPoly.from_dict({k: complex(*rng.normal(size=2)) for k in range(-8, 9)})
    r = trig_poly_bound(BUMP, P, 64)
    assert r["within_bound"] and r["agree"]
    with pytest.raises(DegreeOrder):
        trig_poly_bound(BUMP, P, 8)


def test_decay_zero_solution():
    tau = rotate_parameter(0.5, -HOLDER.rotation)
    f = SolutionPair.from_coeffs([0], [0], tau)
    rep = decay_experiment(BUMP, HOLDER, f, n_list=[32, 64, 128])
    assert max(rep.abs_Mn) <= 1e-14


def test_decay_report_exports():
    tau = rotate_parameter(0.5, -HOLDER.rotation)
    f = SolutionPair.from_coeffs([0, 0, 1], [0, 0, 0, 1], tau)
    rep = decay_experiment(BUMP, HOLDER, f, n_list=[32, 64, 128, 256], config={"x": 1})
    csv = rep.to_csv().splitlines()
    assert csv[0].startswith("# config:") and csv[1] == "n,abs_Mn"
    s = rep.summary()
    assert {"slope", "window", "reference_exponent", "empirical_constant"} <= set(s)
    assert rep.to_svg().startswith("<svg")


def test_solution_pair_is_annihilated():
    f = SolutionPair.from_coeffs([1, 2, 0, 1j], [0, 1, 1], 0.3 - 0.2j)
    assert f.residual() < 1e-12
    g = SolutionPair.from_coeffs([0, 1], [2], 0, bianalytic=True)
    assert g.residual() < 1e-12
    with pytest.raises(ValueError):
        SolutionPair.from_coeffs([1], [1], 0.5, bianalytic=True)


def test_derivative_check_examples():
    disk = make_disk()
    ds = [1e-1, 1e-2, 1e-3]
    pts = [(1 - d) * np.exp(0.7j) for d in ds]
    zero = SolutionPair.from_coeffs([0], [0], 0.5)
    assert all(r["r_h"] == 0 and r["r_g"] == 0 for r in derivative_check(zero, disk, pts))
    f = SolutionPair.from_coeffs([0, 0, 0, 1], [0, 0, 1], 0.5)
    rows = derivative_check(f, disk, pts)
    assert max(max(r["r_h"], r["r_g"]) for r in rows) <= 10
    rows5 = derivative_check(f.scaled(5), disk, pts)
    for a, b in zip(rows, rows5):
        assert a["r_h"] == pytest.approx(b["r_h"], rel=1e-12)
        assert a["r_g"] == pytest.approx(b["r_g"], rel=1e-12)


def test_green_identity_examples():
    lhs, rhs, disc = green_identity_check(ZBAR, 1, 1)
    assert lhs == pytest.approx(math.pi / 2) and rhs == pytest.approx(math.pi / 2)
    lhs, rhs, _ = green_identity_check(Z ** 3, 2, 4)
    assert lhs == 0 and rhs == 0
    with pytest.raises(ValueError):
        green_identity_check(Z, 0, 3)


@settings(max_examples=40, deadline=None)
@given(st.dictionaries(st.tuples(st.integers(0, 6), st.integers(0, 6)),
                       st.complex_numbers(max_magnitude=5, allow_nan=False), min_size=1, max_size=6),
       st.integers(1, 4), st.integers(0, 6))
def test_green_identity_random(terms, k, extra):
    _, _, disc = green_identity_check(BiPoly(terms), k, k + extra)
    assert disc <= 1e-12


def test_schwarz_consistency_examples():
    arc = SchwarzArc(0, 1)
    f = SolutionPair.from_coeffs([0, 0, 1], [0], 0.5)
    on = schwarz_consistency(f, arc, arc.points(64))
    assert max(r["value"] for r in on["rows"]) < 1e-13
    pts = [(1 - d) * np.exp(0.2j) for d in (1e-1, 1e-2, 1e-3, 1e-4)]
    out = schwarz_consistency(f, arc, pts)
    assert out["monotone"]
    const = SolutionPair.from_coeffs([3], [0], 0.5)
    assert all(r["value"] == 0 for r in schwarz_consistency(const, arc, pts)["rows"])
