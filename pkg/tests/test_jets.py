"""Taylor-jet arithmetic: construction, ring laws, calculus rules."""
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from aim_spectra.errors import InvalidInputError, OrderExhaustedError, PoleError
from aim_spectra.jets import (
    Jet,
    jet_add,
    jet_const,
    jet_diff,
    jet_eval,
    jet_identity,
    jet_mul,
    jet_recip,
    jet_scale,
    jet_sub,
    jet_truncate,
)


def coeff_lists(min_size=2, max_size=6, lo=-10.0, hi=10.0):
    return st.lists(
        st.floats(min_value=lo, max_value=hi, allow_nan=False),
        min_size=min_size,
        max_size=max_size,
    )


def jets_same_shape(order, x0=0.5):
    return st.builds(
        lambda c: Jet(np.array(c), x0),
        st.lists(
            st.floats(min_value=-10, max_value=10, allow_nan=False),
            min_size=order + 1,
            max_size=order + 1,
        ),
    )


class TestConstruction:
    def test_const(self):
        j = jet_const(4.0, 2, 1.0)
        assert list(j.coeffs) == [4.0, 0.0, 0.0]
        assert j.order == 2
        assert j.value() == 4.0

    def test_const_zero_order(self):
        assert list(jet_const(0.0, 0, 0.0).coeffs) == [0.0]

    def test_const_nonfinite(self):
        with pytest.raises(InvalidInputError):
            jet_const(float("inf"), 2, 0.0)

    def test_const_negative_order(self):
        with pytest.raises(InvalidInputError):
            jet_const(1.0, -1, 0.0)

    def test_identity(self):
        j = jet_identity(3, 0.840896)
        assert list(j.coeffs) == [0.840896, 1.0, 0.0, 0.0]

    def test_identity_order_zero_rejected(self):
        with pytest.raises(InvalidInputError):
            jet_identity(0, 1.0)

    def test_nonfinite_coeffs_rejected(self):
        with pytest.raises(InvalidInputError):
            Jet(np.array([1.0, float("nan")]), 0.0)

    def test_empty_rejected(self):
        with pytest.raises(InvalidInputError):
            Jet(np.array([]), 0.0)


class TestLinearOps:
    def test_add(self):
        a = Jet(np.array([1.0, 2.0]), 0.0)
        b = Jet(np.array([3.0, 4.0]), 0.0)
        assert list(jet_add(a, b).coeffs) == [4.0, 6.0]

    def test_sub_self_is_zero(self):
        a = Jet(np.array([1.0, 2.0]), 0.0)
        assert list(jet_sub(a, a).coeffs) == [0.0, 0.0]

    def test_scale(self):
        a = Jet(np.array([1.0, -1.0, 0.0]), 0.0)
        assert list(jet_scale(a, 2.0).coeffs) == [2.0, -2.0, 0.0]

    def test_mismatched_order(self):
        a = Jet(np.array([1.0, 2.0]), 0.0)
        b = Jet(np.array([1.0, 2.0, 3.0]), 0.0)
        with pytest.raises(InvalidInputError):
            jet_add(a, b)

    def test_mismatched_x0(self):
        a = Jet(np.array([1.0, 2.0]), 0.0)
        b = Jet(np.array([1.0, 2.0]), 1.0)
        with pytest.raises(InvalidInputError):
            jet_add(a, b)


class TestMulRecip:
    def test_difference_of_squares(self):
        one_plus = Jet(np.array([1.0, 1.0, 0.0]), 0.0)
        one_minus = Jet(np.array([1.0, -1.0, 0.0]), 0.0)
        assert list(jet_mul(one_plus, one_minus).coeffs) == [1.0, 0.0, -1.0]

    def test_mul_identity_element(self):
        a = Jet(np.array([2.0, 3.0, 1.0]), 0.0)
        out = jet_mul(a, jet_const(1.0, 2, 0.0))
        assert np.allclose(out.coeffs, a.coeffs)

    def test_square_of_identity(self):
        # (2 + h)^2 = 4 + 4h + h^2
        x = jet_identity(2, 2.0)
        assert list(jet_mul(x, x).coeffs) == [4.0, 4.0, 1.0]

    def test_recip_geometric_series(self):
        x = jet_identity(3, 1.0)
        assert np.allclose(jet_recip(x).coeffs, [1.0, -1.0, 1.0, -1.0])

    def test_recip_constant(self):
        j = jet_recip(Jet(np.array([2.0, 0.0, 0.0]), 0.0))
        assert list(j.coeffs) == [0.5, 0.0, 0.0]

    def test_recip_involution(self):
        a = Jet(np.array([2.0, 3.0, 1.0]), 0.0)
        assert np.allclose(jet_recip(jet_recip(a)).coeffs, a.coeffs, atol=1e-12)

    def test_recip_pole(self):
        with pytest.raises(PoleError):
            jet_recip(Jet(np.array([0.0, 1.0]), 0.0))


class TestDiff:
    def test_cube(self):
        # x^3 about 2: [8, 12, 6, 1]; derivative 3x^2 about 2: [12, 12, 3]
        j = jet_diff(Jet(np.array([8.0, 12.0, 6.0, 1.0]), 2.0))
        assert list(j.coeffs) == [12.0, 12.0, 3.0]

    def test_constant_derivative_vanishes(self):
        j = jet_diff(jet_const(5.0, 3, 0.0))
        assert not j.coeffs.any()

    def test_identity_derivative_is_one(self):
        j = jet_diff(jet_identity(2, 3.0))
        assert list(j.coeffs) == [1.0, 0.0]

    def test_order_zero_exhausted(self):
        with pytest.raises(OrderExhaustedError):
            jet_diff(jet_const(1.0, 0, 0.0))

    def test_truncate(self):
        a = Jet(np.array([1.0, 2.0, 3.0]), 0.0)
        assert list(jet_truncate(a, 1).coeffs) == [1.0, 2.0]
        with pytest.raises(InvalidInputError):
            jet_truncate(a, 5)


class TestProperties:
    @given(jets_same_shape(4), jets_same_shape(4))
    @settings(max_examples=60, deadline=None)
    def test_mul_commutative(self, a, b):
        ab, ba = jet_mul(a, b), jet_mul(b, a)
        assert np.allclose(ab.coeffs, ba.coeffs, rtol=1e-13, atol=1e-13)

    @given(jets_same_shape(3), jets_same_shape(3), jets_same_shape(3))
    @settings(max_examples=60, deadline=None)
    def test_mul_associative(self, a, b, c):
        left = jet_mul(jet_mul(a, b), c)
        right = jet_mul(a, jet_mul(b, c))
        scale = max(1.0, np.abs(left.coeffs).max())
        assert np.allclose(left.coeffs, right.coeffs, rtol=1e-13, atol=1e-13 * scale)

    @given(jets_same_shape(3), jets_same_shape(3), jets_same_shape(3))
    @settings(max_examples=60, deadline=None)
    def test_mul_distributes_over_add(self, a, b, c):
        left = jet_mul(a, jet_add(b, c))
        right = jet_add(jet_mul(a, b), jet_mul(a, c))
        scale = max(1.0, np.abs(left.coeffs).max())
        assert np.allclose(left.coeffs, right.coeffs, rtol=1e-13, atol=1e-13 * scale)

    @given(jets_same_shape(4), jets_same_shape(4))
    @settings(max_examples=60, deadline=None)
    def test_leibniz(self, a, b):
        left = jet_diff(jet_mul(a, b))
        right = jet_add(
            jet_mul(jet_diff(a), jet_truncate(b, b.order - 1)),
            jet_mul(jet_truncate(a, a.order - 1), jet_diff(b)),
        )
        scale = max(1.0, np.abs(left.coeffs).max())
        assert np.allclose(left.coeffs, right.coeffs, rtol=1e-12, atol=1e-12 * scale)

    @given(jets_same_shape(4))
    @settings(max_examples=60, deadline=None)
    def test_recip_inverts(self, a):
        if abs(a.coeffs[0]) <= 1e-6:
            return
        r = jet_recip(a)
        prod = jet_mul(a, r)
        expect = np.zeros(a.order + 1)
        expect[0] = 1.0
        # 1e-12 relative to the computation's own scale: the product sums
        # terms of size |a| * |1/a|, which is where roundoff enters
        scale = max(1.0, np.abs(a.coeffs).max()) * max(1.0, np.abs(r.coeffs).max())
        assert np.allclose(prod.coeffs, expect, atol=1e-12 * scale)

    def test_eval_matches_finite_differences(self):
        # jet of p(x) = x^3 - 2x + 1 about x0 = 1.3 against central differences
        x0 = 1.3
        x = jet_identity(3, x0)
        p = jet_add(
            jet_sub(jet_mul(jet_mul(x, x), x), jet_scale(x, 2.0)),
            jet_const(1.0, 3, x0),
        )
        def poly(t):
            return t ** 3 - 2 * t + 1
        h = 1e-5
        d1 = (poly(x0 + h) - poly(x0 - h)) / (2 * h)
        d2 = (poly(x0 + h) - 2 * poly(x0) + poly(x0 - h)) / h ** 2
        assert p.coeffs[0] == pytest.approx(poly(x0), rel=1e-12)
        assert p.coeffs[1] == pytest.approx(d1, rel=1e-6)
        assert p.coeffs[2] == pytest.approx(d2 / 2.0, rel=1e-4)
        assert jet_eval(p, 2.0) == pytest.approx(poly(2.0), rel=1e-12)
