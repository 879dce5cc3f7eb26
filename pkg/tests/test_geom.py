import csv
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lanalytic import (
    RealLinearMap,
    SchwarzArc,
    boundary_quadrature,
    curve_from_map,
    make_disk,
    make_holder_map,
    make_poly_map,
    nearest_boundary_point,
    s_tau,
    schwarz,
    transform_curve,
)
from lanalytic.errors import Degenerate, OutsideDomain, PoleAtCenter, UnivalenceViolation
from lanalytic.geom import disk_area_integral, holder_growth, winding_number, write_curve_csv

HOLDER = make_holder_map(0.5, 0.4)


def test_holder_examples():
    assert complex(HOLDER.phi(1 + 0j)) == 1
    assert complex(HOLDER.d2phi(0j)) == pytest.approx(0.2)
    a = disk_area_integral(lambda w: np.abs(HOLDER.d2phi(w)), 200, 512)
    b = disk_area_integral(lambda w: np.abs(HOLDER.d2phi(w)), 400, 1024)
    assert math.isfinite(a) and abs(a - b) < 1e-3 * a


def test_holder_derivatives_consistent():
    w = np.array([0.3 + 0.2j, -0.5j, 0.7])
    h = 1e-6
    num = (HOLDER.phi(w + h) - HOLDER.phi(w - h)) / (2 * h)
    assert np.allclose(num, HOLDER.dphi(w), rtol=1e-8)
    num2 = (HOLDER.dphi(w + h) - HOLDER.dphi(w - h)) / (2 * h)
    assert np.allclose(num2, HOLDER.d2phi(w), rtol=1e-6)


def test_univalence_guards():
    with pytest.raises(UnivalenceViolation):
        make_poly_map(3, 0.4)
    with pytest.raises(UnivalenceViolation):
        make_holder_map(0.5, 0.6)
    with pytest.raises(ValueError):
        make_holder_map(1.0, 0.1)
    make_poly_map(2, 0.475)


def test_holder_growth_signature():
    sup, prof = holder_growth(HOLDER)
    assert math.isfinite(sup) and sup < 1
    assert prof[0] > 1000 * prof[-1]  # radii run towards the boundary first


def test_curve_from_map_examples():
    disk = curve_from_map(make_disk().cmap, normalize=True)
    assert disk.rotation == pytest.approx(-math.pi / 2)
    assert abs(disk(0.0)) < 1e-15
    tangent = complex(disk.derivative(0.0))
    assert abs(tangent.imag) < 1e-15 and tangent.real > 0
    assert complex(curve_from_map(make_poly_map(3, 0.1))(0.0)) == pytest.approx(1.1)
    for cmap in (make_poly_map(3, 0.1), HOLDER, make_poly_map(2, 0.3j)):
        c = curve_from_map(cmap, normalize=True)
        assert abs(c(0.0)) < 1e-15
        assert abs(complex(c.derivative(0.0)).imag) < 1e-14


def test_curve_is_closed_and_regular():
    for c in (make_disk(), curve_from_map(HOLDER), curve_from_map(make_poly_map(4, 0.2))):
        assert abs(c(0.0) - c(2 * math.pi - 1e-13)) < 1e-12
        assert np.abs(c.sample(4096)[2]).min() > 0


def test_transform_examples():
    e = transform_curve(make_disk(), RealLinearMap(1, -0.5))
    t = np.linspace(0, 2 * math.pi, 50)
    assert np.allclose(e(t), 0.5 * np.cos(t) + 1.5j * np.sin(t))
    d = make_disk()
    same = transform_curve(d, RealLinearMap(1, 0))
    assert np.allclose(same(t), d(t))
    h = 1e-6
    assert np.allclose((e(t + h) - e(t - h)) / (2 * h), e.derivative(t), atol=1e-8)
    with pytest.raises(Degenerate):
        transform_curve(d, RealLinearMap(1, 1))


@settings(max_examples=30, deadline=None)
@given(st.complex_numbers(max_magnitude=2, allow_nan=False), st.complex_numbers(max_magnitude=2, allow_nan=False))
def test_sense_preservation(a, b):
    if abs(a) < 1e-2 or abs(abs(a) - abs(b)) < 0.05 * abs(a):
        return
    m = RealLinearMap(a, b)
    c = transform_curve(curve_from_map(make_poly_map(3, 0.2)), m)
    w = winding_number(c, complex(m(0.1 + 0.05j)))
    assert w == (1 if abs(a) > abs(b) else -1)


def test_schwarz_examples():
    unit = SchwarzArc(0, 1)
    assert schwarz(unit, 1j) == pytest.approx(-1j)
    assert s_tau(unit, 0.5, 1) == pytest.approx(0.5)
    assert schwarz(SchwarzArc(1, 2), 3) == pytest.approx(3)
    with pytest.raises(PoleAtCenter):
        schwarz(unit, 0)


@pytest.mark.parametrize("center,radius", [(0, 1), (1 + 2j, 0.5), (-3j, 4)])
def test_schwarz_identity_on_circle(center, radius):
    arc = SchwarzArc(center, radius)
    z = arc.points(4096)
    assert np.abs(schwarz(arc, z) - np.conj(z)).max() <= 1e-12 * max(1, abs(center) + radius)
    tau = 0.3 - 0.2j
    assert np.abs(s_tau(arc, tau, z) - (z - tau * np.conj(z))).max() <= 1e-12 * max(1, abs(center) + radius)


def test_quadrature_examples():
    q = boundary_quadrature(make_disk(), 64)
    assert abs(np.sum(q.dz / q.nodes) - 2j * math.pi) < 1e-13
    for k in range(6):
        assert abs(np.sum(q.nodes ** k * q.dz)) < 1e-13
    with pytest.raises(ValueError):
        boundary_quadrature(make_disk(), 15)
    with pytest.raises(ValueError):
        boundary_quadrature(make_disk(), 8)


def test_holder_arclength_matches_dense_oracle():
    c = curve_from_map(HOLDER)
    ref = boundary_quadrature(c, 1 << 20).ds.sum()
    assert abs(boundary_quadrature(c, 1 << 17).ds.sum() - ref) <= 1e-8 * ref


def test_spectral_convergence():
    # oint exp(z) conj(z)^2 dz over an analytic curve, error vs a fine reference
    c = curve_from_map(make_poly_map(3, 0.15))
    f = lambda z: np.exp(z) * np.conj(z) ** 2
    q = boundary_quadrature(c, 512)
    ref = np.sum(f(q.nodes) * q.dz)
    prev = None
    M = 16
    while True:
        q = boundary_quadrature(c, M)
        err = abs(np.sum(f(q.nodes) * q.dz) - ref)
        if err < 1e-12:
            break
        if prev is not None:
            assert err <= 0.5 * prev
        prev = err
        M += 8


def test_nearest_point_examples():
    d = make_disk()
    b, dist, t = nearest_boundary_point(d, 0.9)
    assert abs(b - 1) < 1e-8 and dist == pytest.approx(0.1) and abs(t) < 1e-8
    _, dist, _ = nearest_boundary_point(d, 0)
    assert dist == pytest.approx(1)
    e = transform_curve(d, RealLinearMap(1, -0.5))
    _, dist, _ = nearest_boundary_point(e, 0.3j)
    tt = np.linspace(0, 2 * math.pi, 1 << 20, endpoint=False)
    assert abs(dist - np.abs(e(tt) - 0.3j).min()) < 1e-9
    with pytest.raises(OutsideDomain):
        nearest_boundary_point(d, 1.5)


def test_centroid_area_and_contains():
    d = make_disk()
    assert d.area() == pytest.approx(math.pi)
    assert abs(d.centroid()) < 1e-14
    c = curve_from_map(HOLDER, normalize=True)
    assert c.contains(c.centroid())
    assert not c.contains(5)
    grid = c.interior_grid(8, 16)
    assert grid.shape == (8, 16)


def test_curve_csv(tmp_path):
    path = tmp_path / "c.csv"
    write_curve_csv(make_disk(), path, M=16, comment="disk")
    rows = list(csv.reader(open(path)))
    assert rows[0] == ["# disk"]
    assert rows[1] == ["t", "re", "im", "re_deriv", "im_deriv"]
    assert len(rows) == 18
    assert float(rows[2][1]) == 1.0


def test_map_json_round_trip():
    from lanalytic.geom import ConformalMapFamily

    for m in (HOLDER, make_poly_map(3, 0.1 + 0.1j), ConformalMapFamily("disk")):
        assert ConformalMapFamily.from_json(m.to_json()) == m
