import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from shadowlab.errors import InvalidParameter, OutsideDisk
from shadowlab.hardy import (
    TaylorPoly,
    binomial_series,
    boundary_values,
    evaluate,
    h2_inner,
    h2_norm,
    hp_norm,
    kernel,
    pointwise_bound_margin,
    poly_arith,
)

coeff_lists = st.lists(
    st.complex_numbers(max_magnitude=5, allow_nan=False, allow_infinity=False), min_size=1, max_size=30
)
disk_points = st.builds(lambda r, t: r * np.exp(1j * t), st.floats(0, 0.9), st.floats(0, 2 * math.pi))


def test_poly_arith_examples():
    assert np.allclose(poly_arith(TaylorPoly([1, 0]), TaylorPoly([0, 1]), "add").coeffs, [1, 1])
    sq = poly_arith(TaylorPoly([1, 1, 0]), TaylorPoly([1, 1, 0]), "truncated_multiply")
    assert np.allclose(sq.coeffs, [1, 2, 1])
    assert np.allclose(poly_arith(TaylorPoly([0.5, 0.5]), None, "scale", 2).coeffs, [1, 1])
    with pytest.raises(InvalidParameter):
        poly_arith(TaylorPoly([1]), TaylorPoly([1]), "divide")


def test_operators_and_padding():
    f, g = TaylorPoly([1, 2]), TaylorPoly([0, 0, 3])
    assert np.allclose((f + g).coeffs, [1, 2, 3])
    assert np.allclose((g - f).coeffs, [-1, -2, 3])
    assert np.allclose((2 * f).coeffs, [2, 4])
    assert np.allclose(f.padded(3).coeffs, [1, 2, 0, 0])
    assert np.allclose(g.padded(1).coeffs, [0, 0])


def test_h2_inner_examples():
    assert h2_inner(TaylorPoly([1, 1, 1]), TaylorPoly([1, 1, 1])) == pytest.approx(3)
    assert h2_inner(TaylorPoly([1, 0]), TaylorPoly([0, 1])) == 0
    assert h2_inner(TaylorPoly([1, 2, 0, 0]), kernel(0.6, 3).poly) == pytest.approx(2.2)
    assert h2_inner(TaylorPoly([0, 1j]), TaylorPoly([0, 1])) == pytest.approx(1j)


def test_evaluate_at_zero_is_constant_term():
    assert evaluate(TaylorPoly([3 - 1j, 5, 7]), 0) == 3 - 1j


def test_kernel_examples():
    k0 = kernel(0, 10)
    assert np.allclose(k0.poly.coeffs, [1] + [0] * 10)
    assert kernel(0.6).exact_norm_sq == pytest.approx(1.5625)
    assert kernel(0.5j, 4).poly.coeffs[2] == pytest.approx(-0.25)
    with pytest.raises(OutsideDisk):
        kernel(1.0)


def test_kernel_truncation_gap():
    k = kernel(0.6, 20)
    assert h2_norm(k.poly) ** 2 + k.truncation_gap == pytest.approx(k.exact_norm_sq, rel=1e-14)


@settings(max_examples=60, deadline=None)
@given(coeff_lists, disk_points)
def test_reproducing_identity(coeffs, w):
    f = TaylorPoly(coeffs)
    k = kernel(w, f.truncation)
    assert abs(h2_inner(f, k.poly) - evaluate(f, w)) <= 1e-10 * max(1, h2_norm(f) * 10)


@settings(max_examples=60, deadline=None)
@given(coeff_lists, disk_points)
def test_cauchy_schwarz_growth(coeffs, w):
    f = TaylorPoly(coeffs)
    assert abs(evaluate(f, w)) <= h2_norm(f) / math.sqrt(1 - abs(w) ** 2) + 1e-9


def test_hp_norm_examples():
    assert hp_norm(TaylorPoly([1]), 1) == pytest.approx(1)
    assert hp_norm(TaylorPoly([1]), math.inf) == pytest.approx(1)
    assert hp_norm(TaylorPoly([0, 1]), 2) == pytest.approx(h2_norm(TaylorPoly([0, 1])))
    assert abs(hp_norm(TaylorPoly([1, 1]), 2, 256) - math.sqrt(2)) < 1e-10
    with pytest.raises(InvalidParameter):
        hp_norm(TaylorPoly([1]), 0.5)
    with pytest.raises(InvalidParameter):
        hp_norm(TaylorPoly([1]), 2, 2)


def test_boundary_values_fold_high_degrees():
    f = TaylorPoly(np.arange(1, 12))
    theta = 2 * np.pi * np.arange(8) / 8
    assert np.allclose(boundary_values(f, 8), evaluate(f, np.exp(1j * theta)))


@settings(max_examples=40, deadline=None)
@given(coeff_lists)
def test_hp_norm_monotone_in_p(coeffs):
    f = TaylorPoly(coeffs)
    norms = [hp_norm(f, p) for p in (1, 2, 4, math.inf)]
    assert all(a <= b + 1e-8 * max(1, b) for a, b in zip(norms, norms[1:]))


def test_hp_norm_quadrature_stable(rng):
    # exact for even p once M > p * deg; odd p converges more slowly near zeros of f
    f = TaylorPoly(rng.standard_normal(65) + 1j * rng.standard_normal(65))
    for p in (2, 4):
        assert abs(hp_norm(f, p, 512) - hp_norm(f, p, 1024)) < 1e-8


def test_pointwise_margin_examples():
    assert pointwise_bound_margin(TaylorPoly([1]), 0.6, 2) == pytest.approx(0.25)
    assert pointwise_bound_margin(TaylorPoly([0, 1]), 0, 2) == pytest.approx(1)
    margins = [pointwise_bound_margin(kernel(0.6, N).poly, 0.6, 2) for N in (8, 32, 128)]
    assert all(m >= -1e-9 for m in margins)
    assert margins[-1] < margins[0] and margins[-1] < 1e-9
    with pytest.raises(OutsideDisk):
        pointwise_bound_margin(TaylorPoly([1]), 1.0, 2)


def test_binomial_series_examples():
    assert np.allclose(binomial_series(0.5, 3).coeffs, [1, 0.5, 0.375, 0.3125])
    assert np.allclose(binomial_series(1, 20).coeffs, 1)
    with pytest.raises(InvalidParameter):
        binomial_series(0)


def test_binomial_series_matches_function():
    f = binomial_series(0.3, 400)
    assert evaluate(f, 0.5) == pytest.approx(0.5**-0.3, rel=1e-12)


def test_serialization():
    f = TaylorPoly([1 + 2j, -0.5])
    assert np.allclose(TaylorPoly.from_json(json.loads(json.dumps(f.to_json()))).coeffs, f.coeffs)
    assert f.to_csv().splitlines() == ["n,re,im", "0,1.0,2.0", "1,-0.5,0.0"]
