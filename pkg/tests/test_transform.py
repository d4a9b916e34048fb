"""Folded-FFT transform tests against the schoolbook oracle."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tfhesim.torus import Q32, Q64
from tfhesim.transform import (
    NegacyclicTransform,
    TransformPrecisionError,
    fft_initiation_interval,
    negacyclic_mul_naive,
)


def schoolbook_int(a, b, n, q):
    """Pure-Python exact negacyclic product; meta-oracle for the numpy oracle."""
    c = [0] * n
    for i in range(n):
        for j in range(n):
            e = i + j
            if e < n:
                c[e] = (c[e] + a[i] * b[j]) % q
            else:
                c[e - n] = (c[e - n] - a[i] * b[j]) % q
    return c


def monomial(e, n, dtype=np.uint32):
    p = np.zeros(n, dtype)
    p[e] = 1
    return p


class TestNaiveOracle:
    @given(st.integers(0, 2**32 - 1))
    @settings(max_examples=30)
    def test_matches_schoolbook_full_range(self, seed):
        rng = np.random.default_rng(seed)
        n = 8
        a = rng.integers(0, Q32, n, dtype=np.uint32)
        b = rng.integers(0, Q32, n, dtype=np.uint32)
        expect = schoolbook_int([int(x) for x in a], [int(x) for x in b], n, Q32)
        assert list(negacyclic_mul_naive(a, b)) == expect

    def test_mul_by_one(self):
        rng = np.random.default_rng(3)
        a = rng.integers(0, Q32, 64, dtype=np.uint32)
        one = monomial(0, 64)
        assert np.array_equal(negacyclic_mul_naive(a, one), a)

    def test_half_degree_squares_to_minus_one(self):
        n = 64
        x_half = monomial(n // 2, n)
        out = negacyclic_mul_naive(x_half, x_half)
        expect = np.zeros(n, np.uint32)
        expect[0] = Q32 - 1
        assert np.array_equal(out, expect)

    def test_q64_path(self):
        rng = np.random.default_rng(4)
        a = rng.integers(0, Q64, 8, dtype=np.uint64)
        b = rng.integers(0, Q64, 8, dtype=np.uint64)
        expect = schoolbook_int([int(x) for x in a], [int(x) for x in b], 8, Q64)
        assert [int(x) for x in negacyclic_mul_naive(a, b)] == expect


class TestForward:
    def test_constant_one_is_flat_spectrum(self):
        plan = NegacyclicTransform(16)
        spec = plan.forward(monomial(0, 16))
        assert np.allclose(spec, np.ones(8), atol=1e-12)

    def test_rejects_small_or_odd_degree(self):
        with pytest.raises(ValueError):
            NegacyclicTransform(2)
        with pytest.raises(ValueError):
            NegacyclicTransform(24)

    def test_rejects_uint64(self):
        plan = NegacyclicTransform(8)
        with pytest.raises(ValueError):
            plan.forward(np.zeros(8, np.uint64))

    @pytest.mark.parametrize("n,a,b", [(16, 3, 5), (16, 7, 7), (64, 10, 20)])
    def test_monomial_product_no_wrap(self, n, a, b):
        plan = NegacyclicTransform(n)
        out = plan.inverse(plan.forward(monomial(a, n)) * plan.forward(monomial(b, n)))
        assert np.array_equal(out, monomial(a + b, n))

    @pytest.mark.parametrize("n,a,b", [(16, 10, 9), (16, 15, 15), (64, 60, 10)])
    def test_monomial_product_negacyclic_wrap(self, n, a, b):
        plan = NegacyclicTransform(n)
        out = plan.inverse(plan.forward(monomial(a, n)) * plan.forward(monomial(b, n)))
        expect = np.zeros(n, np.uint32)
        expect[a + b - n] = Q32 - 1
        assert np.array_equal(out, expect)


class TestInverse:
    def test_roundtrip_decomposed_magnitude(self):
        plan = NegacyclicTransform(1024)
        rng = np.random.default_rng(11)
        p = (rng.integers(-128, 128, 1024).astype(np.int64) % Q32).astype(np.uint32)
        assert np.array_equal(plan.inverse(plan.forward(p)), p)

    def test_linearity(self):
        plan = NegacyclicTransform(64)
        rng = np.random.default_rng(12)
        p = (rng.integers(-100, 100, 64) % Q32).astype(np.uint32)
        r = (rng.integers(-100, 100, 64) % Q32).astype(np.uint32)
        out = plan.inverse(plan.forward(p) + plan.forward(r))
        assert np.array_equal(out, p + r)

    def test_all_ones_spectrum_is_constant_one(self):
        plan = NegacyclicTransform(32)
        out = plan.inverse(np.ones(16, np.complex128))
        assert np.array_equal(out, monomial(0, 32))

    def test_precision_fault_raised(self):
        plan = NegacyclicTransform(8)
        spec = plan.forward(monomial(0, 8)) * 1.3        # lands 0.3 off integers
        with pytest.raises(TransformPrecisionError):
            plan.inverse(spec)
        out = plan.inverse(spec, threshold=None)          # check disabled
        assert out.shape == (8,)

    def test_threshold_configurable(self):
        plan = NegacyclicTransform(8, precision_threshold=0.4)
        spec = plan.forward(monomial(0, 8)) * 1.3
        plan.inverse(spec)  # 0.3 < 0.4 passes


class TestConvolutionTheorem:
    @pytest.mark.parametrize("n", [8, 64, 1024])
    def test_fft_equals_naive_decomposition_magnitude(self, n):
        plan = NegacyclicTransform(n)
        rng = np.random.default_rng(n)
        for _ in range(50):
            a = (rng.integers(-128, 128, n) % Q32).astype(np.uint32)
            b = (rng.integers(-128, 128, n) % Q32).astype(np.uint32)
            assert np.array_equal(plan.multiply(a, b), negacyclic_mul_naive(a, b))

    def test_exhaustive_small_ring(self):
        # every monomial pair at N=8, full sign grid
        n = 8
        plan = NegacyclicTransform(n)
        for i in range(n):
            for j in range(n):
                for s in (1, Q32 - 1):
                    a = monomial(i, n) * np.uint32(s)
                    b = monomial(j, n)
                    assert np.array_equal(
                        plan.multiply(a, b), negacyclic_mul_naive(a, b))

    def test_small_times_full_range(self):
        # one operand at decomposition magnitude, the other arbitrary mod q:
        # the regime external products live in
        n = 64
        plan = NegacyclicTransform(n)
        rng = np.random.default_rng(99)
        for _ in range(50):
            a = (rng.integers(-128, 128, n) % Q32).astype(np.uint32)
            b = rng.integers(0, Q32, n, dtype=np.uint32)
            assert np.array_equal(plan.multiply(a, b), negacyclic_mul_naive(a, b))


class TestKernels:
    @pytest.mark.parametrize("n", [8, 64, 256])
    def test_radix2_matches_pocketfft(self, n):
        fast = NegacyclicTransform(n, kernel="pocket")
        ref = NegacyclicTransform(n, kernel="radix2")
        rng = np.random.default_rng(n + 1)
        p = rng.integers(0, Q32, (5, n), dtype=np.uint32)
        assert np.allclose(fast.forward(p), ref.forward(p), rtol=1e-9, atol=1e-6)

    def test_radix2_products_exact(self):
        n = 64
        ref = NegacyclicTransform(n, kernel="radix2")
        rng = np.random.default_rng(5)
        for _ in range(20):
            a = (rng.integers(-128, 128, n) % Q32).astype(np.uint32)
            b = (rng.integers(-128, 128, n) % Q32).astype(np.uint32)
            assert np.array_equal(ref.multiply(a, b), negacyclic_mul_naive(a, b))


def test_parseval():
    plan = NegacyclicTransform(256)
    rng = np.random.default_rng(21)
    p = (rng.integers(-128, 128, 256) % Q32).astype(np.uint32)
    z = plan.fold(p)
    spec = plan.forward(p)
    e_sig = np.sum(np.abs(z) ** 2)
    e_spec = np.sum(np.abs(spec) ** 2)
    assert abs(e_spec - plan.m * e_sig) <= 1e-9 * e_spec


def test_initiation_interval():
    assert fft_initiation_interval(1024, 4, folding=True) == 128
    assert fft_initiation_interval(1024, 4, folding=False) == 256
    assert fft_initiation_interval(16384, 4, folding=True) == 2048


@settings(max_examples=20, deadline=None)
@given(st.sampled_from([8, 32, 128]), st.integers(0, 2**31))
def test_roundtrip_property(n, seed):
    plan = NegacyclicTransform(n)
    rng = np.random.default_rng(seed)
    p = (rng.integers(-(2**20), 2**20, n) % Q32).astype(np.uint32)
    assert np.array_equal(plan.inverse(plan.forward(p)), p)
