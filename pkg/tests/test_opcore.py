import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lanalytic import (
    IDENTITY,
    NSE,
    SE,
    CanonicalForm,
    EllipticOperator,
    Ellipticity,
    RealLinearMap,
    canonical_operator,
    char_roots,
    classify,
    map_apply,
    map_compose,
    map_inverse,
    map_jacobian,
    reduce,
    rotate_parameter,
)
from lanalytic.errors import Degenerate, NotElliptic, NotSecondOrder, ReductionDegenerate
from lanalytic.opcore import quadratic_image

LAPLACE = EllipticOperator(1, 0, 1)
BITSADZE = EllipticOperator(1, 1j, -1)

cplx = st.complex_numbers(max_magnitude=10, allow_nan=False, allow_infinity=False)


def random_elliptic(rng, margin=0.05):
    while True:
        c = rng.uniform(-1, 1, 6)
        op = EllipticOperator.from_reals(*c)
        if op.c11 == 0:
            continue
        l1, l2 = char_roots(op)
        if min(abs(l1.imag), abs(l2.imag)) > margin * (1 + max(abs(l1), abs(l2))):
            return op


def test_roots_examples():
    assert tuple(char_roots(LAPLACE)) == pytest.approx((1j, -1j), abs=1e-15)
    assert tuple(char_roots(BITSADZE)) == pytest.approx((-1j, -1j), abs=1e-15)
    assert tuple(char_roots(EllipticOperator(1, 0, 4))) == pytest.approx((2j, -2j), abs=1e-15)


def test_roots_reject_first_order():
    with pytest.raises(NotSecondOrder):
        char_roots(EllipticOperator(0, 1, 1))


def test_roots_overflow_is_degenerate():
    with pytest.raises(Degenerate):
        char_roots(EllipticOperator(1e-300, 1e300, 1))


def test_root_residual_random():
    rng = np.random.default_rng(7)
    for _ in range(1000):
        c = rng.uniform(-10, 10, 6)
        op = EllipticOperator.from_reals(*c)
        r = char_roots(op)
        for lam, res in zip(r, r.residual(op)):
            assert res <= 1e-12 * op.coefficient_scale * (1 + abs(lam)) ** 2


def test_label_prefers_larger_imaginary_part():
    # roots 3i and -i
    op = EllipticOperator(1, -1j, 3)
    l1, l2 = char_roots(op)
    assert abs(l1.imag) >= abs(l2.imag)
    assert l1 == pytest.approx(3j) or l1 == pytest.approx(-3j)


def test_classify_examples():
    assert classify(LAPLACE) == Ellipticity.STRONGLY_ELLIPTIC
    assert classify(BITSADZE) == Ellipticity.NOT_STRONGLY_ELLIPTIC
    assert classify(EllipticOperator(1, 1, 1)) == Ellipticity.NOT_ELLIPTIC


@settings(max_examples=200, deadline=None)
@given(cplx, cplx, cplx, cplx.filter(lambda k: abs(k) > 1e-3))
def test_classify_scale_invariant(c11, c12, c22, k):
    op = EllipticOperator(c11, c12, c22)
    if abs(c11) < 1e-6:
        return
    assert classify(op.scaled(k)) == classify(op)


def test_reduce_examples():
    cf = reduce(LAPLACE)
    assert cf.kind == SE and cf.tau == pytest.approx(0, abs=1e-15)
    assert cf.scale == pytest.approx(4)
    assert (cf.transform.a, cf.transform.b) == pytest.approx((1, 0), abs=1e-15)

    cf = reduce(BITSADZE)
    assert cf.kind == NSE and cf.tau == 0
    assert cf.scale == pytest.approx(4)
    assert (cf.transform.a, cf.transform.b) == pytest.approx((1, 0), abs=1e-15)

    cf = reduce(EllipticOperator(0.375, 0.25j, -0.125))
    assert cf.kind == NSE
    assert cf.tau == pytest.approx(0.5, abs=1e-14)
    assert cf.scale == pytest.approx(1)
    assert (cf.transform.a, cf.transform.b) == pytest.approx((1, 0), abs=1e-14)
    assert tuple(char_roots(EllipticOperator(0.375, 0.25j, -0.125))) == pytest.approx((-1j, -1j / 3))


def test_reduce_errors():
    with pytest.raises(NotElliptic):
        reduce(EllipticOperator(1, 1, 1))
    # roots 5i and 1 + 1e-13 i: elliptic only at a tiny tolerance, tau within 1e-12 of 1
    l1, l2 = 5j, 1 + 1e-13j
    op = EllipticOperator(1, -(l1 + l2) / 2, l1 * l2)
    with pytest.raises(ReductionDegenerate):
        reduce(op, tol=1e-16)


@pytest.mark.parametrize("kind", [SE, NSE])
def test_reduce_round_trip(kind):
    for tau in np.arange(10) / 10:
        for c in (1, 2j, 1 + 1j):
            cf = reduce(canonical_operator(kind, tau, c))
            assert cf.kind == kind
            assert cf.tau == pytest.approx(tau, abs=1e-10)
            assert abs(cf.scale - c) <= 1e-10 * abs(c)


def _tau_from_roots(kind, l1, l2):
    mu1, mu2 = 1 / l1, 1 / l2
    if kind == NSE:
        return abs(mu1 - mu2) / abs(mu1.conjugate() - mu2)
    return abs(mu1.conjugate() - mu2) / abs(mu1 - mu2)


def test_tau_labeling_invariance():
    rng = np.random.default_rng(3)
    for _ in range(200):
        op = random_elliptic(rng)
        cf = reduce(op)
        l1, l2 = char_roots(op)
        if l1 == l2:
            continue
        swapped = _tau_from_roots(cf.kind, l2, l1)
        assert abs(swapped - cf.tau) <= 1e-12 * max(1, cf.tau) or (cf.tau < 1e-8 and swapped < 1e-8)


def test_scale_consistency_two_quadratics():
    rng = np.random.default_rng(4)
    for _ in range(200):
        op = random_elliptic(rng)
        cf = reduce(op)
        w = cf.transform.linear_form()
        wb = (w[0].conjugate(), w[1].conjugate())
        if cf.kind == NSE:
            # dbar d_tau (w wbar + wbar^2) = tau + 2
            alt = (quadratic_image(op, w, wb) + quadratic_image(op, wb, wb)) / (cf.tau + 2)
        else:
            # d d_tau (w wbar + w^2) = 1 + 2 tau
            alt = (quadratic_image(op, w, wb) + quadratic_image(op, w, w)) / (1 + 2 * cf.tau)
        assert abs(alt - cf.scale) <= 1e-10 * abs(cf.scale)


def test_canonical_tau_range():
    rng = np.random.default_rng(5)
    for _ in range(200):
        op = random_elliptic(rng)
        cf = reduce(op)
        assert 0 <= cf.tau < 1
        assert cf.kind == classify(op)
        assert not cf.transform.is_degenerate()


def test_map_examples():
    assert map_jacobian(RealLinearMap(1, -0.5)) == pytest.approx(0.75)
    assert map_apply(IDENTITY, 3 + 4j) == 3 + 4j
    with pytest.raises(Degenerate):
        map_inverse(RealLinearMap(1, 1))


@settings(max_examples=200, deadline=None)
@given(cplx, cplx, cplx)
def test_map_inverse_and_compose(a, b, z):
    m = RealLinearMap(a, b)
    if abs(abs(a) - abs(b)) < 1e-3 * max(abs(a), abs(b), 1e-300) or max(abs(a), abs(b)) < 1e-3:
        return
    inv = map_inverse(m)
    back = map_apply(map_compose(m, inv), z)
    cond = (abs(a) + abs(b)) / abs(abs(a) - abs(b))
    assert abs(back - z) <= 1e-14 * cond * (1 + abs(z)) * 10
    assert m.sense_preserving == (abs(a) > abs(b))
    assert map_jacobian(m) == pytest.approx(abs(a) ** 2 - abs(b) ** 2, rel=1e-12, abs=1e-12)


def test_shear_jacobian():
    for tau in (0.1, 0.5, 0.9):
        assert map_jacobian(RealLinearMap.shear(tau)) == pytest.approx(1 - tau ** 2)


def test_rotate_parameter():
    assert rotate_parameter(0.5, 0) == pytest.approx(0.5)
    assert rotate_parameter(0.5, math.pi) == pytest.approx(0.5)
    assert rotate_parameter(0.5, math.pi / 2) == pytest.approx(-0.5)


@given(st.floats(0, 0.99), st.floats(-10, 10))
def test_rotate_preserves_modulus(t, alpha):
    assert abs(rotate_parameter(t, alpha)) == pytest.approx(t, abs=1e-15)


def test_json_round_trips():
    op = EllipticOperator(1 + 2j, -0.5j, 3)
    assert EllipticOperator.from_json(op.to_json()) == op
    cf = reduce(EllipticOperator(0.375, 0.25j, -0.125))
    back = CanonicalForm.from_json(cf.to_json())
    assert back == cf
    assert set(cf.to_json()) == {"kind", "tau", "scale", "transform"}
