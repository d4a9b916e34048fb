"""Negacyclic polynomial multiplication via a half-size folded complex FFT.

A length-N real polynomial in Z_q[X]/(X^N + 1) is folded into an N/2-point
complex signal: the low half of the coefficient vector becomes the real
lanes and the high half the imaginary lanes.  After multiplying lane j by
the 2N-th root of unity zeta^j (the negacyclic twist), an N/2-point
complex FFT evaluates the polynomial at the quarter subset of odd powers
of zeta that determines a real polynomial completely.  Pointwise products
of two such spectra therefore realize negacyclic convolution, with no
spectrum-separation step.

The quadratic schoolbook product is kept alongside as the independent
oracle for the convolution-theorem path.
"""

from __future__ import annotations

import numpy as np
import scipy.fft as _sfft

from .torus import Q32, Q64, dtype_for_modulus, modulus_for_dtype, to_signed


class TransformPrecisionError(ArithmeticError):
    """Raised when pre-rounding reconstruction error exceeds the threshold."""


def fft_initiation_interval(n_ring: int, clp: int, folding: bool = True) -> int:
    """Cycles between consecutive polynomials in a CLP-lane pipelined FFT.

    With folding the transform runs at N/2 points, so a polynomial is
    consumed every (N/2)/CLP cycles; without folding, every N/CLP.
    Consumed by the accelerator timing model.
    """
    n_eff = n_ring // 2 if folding else n_ring
    return n_eff // clp


def _bit_reverse_indices(m: int) -> np.ndarray:
    bits = m.bit_length() - 1
    idx = np.arange(m)
    rev = np.zeros(m, dtype=np.intp)
    for b in range(bits):
        rev |= ((idx >> b) & 1) << (bits - 1 - b)
    return rev


class NegacyclicTransform:
    """Reusable transform plan for one ring degree N.

    Twiddle tables are built once at construction and never mutated, so a
    plan can be shared freely across threads; forward/inverse allocate or
    reuse caller scratch and touch no plan state.

    kernel:
      "pocket"  pocketfft via scipy (default, fast)
      "radix2"  self-contained iterative radix-2, kept as the reference
                kernel and cross-checked against pocketfft in the tests
    """

    def __init__(self, n_ring: int, kernel: str = "pocket",
                 precision_threshold: float | None = 0.125):
        if n_ring < 4 or n_ring & (n_ring - 1):
            raise ValueError(f"ring degree must be a power of two >= 4, got {n_ring}")
        if kernel not in ("pocket", "radix2"):
            raise ValueError(f"unknown FFT kernel {kernel!r}")
        self.n_ring = n_ring
        self.m = n_ring // 2
        self.kernel = kernel
        self.precision_threshold = precision_threshold
        j = np.arange(self.m)
        self.twist = np.exp(1j * np.pi * j / n_ring)
        self.untwist = self.twist.conj()
        if kernel == "radix2":
            self._rev = _bit_reverse_indices(self.m)
            self._stage_tw = []
            half = 1
            while half < self.m:
                self._stage_tw.append(np.exp(-2j * np.pi * np.arange(half) / (2 * half)))
                half *= 2

    # -- complex FFT kernels -------------------------------------------------

    def _cfft(self, z: np.ndarray, inverse: bool) -> np.ndarray:
        if self.kernel == "pocket":
            if inverse:
                return _sfft.ifft(z, axis=-1, overwrite_x=True)
            return _sfft.fft(z, axis=-1, overwrite_x=True)
        return self._radix2(z, inverse)

    def _radix2(self, z: np.ndarray, inverse: bool) -> np.ndarray:
        a = np.ascontiguousarray(z)[..., self._rev].copy()
        for tw in self._stage_tw:
            half = tw.shape[0]
            view = a.reshape(a.shape[:-1] + (self.m // (2 * half), 2, half))
            w = tw.conj() if inverse else tw
            u = view[..., 0, :].copy()
            v = view[..., 1, :] * w
            view[..., 0, :] = u + v
            view[..., 1, :] = u - v
        if inverse:
            a /= self.m
        return a

    # -- folded transform ----------------------------------------------------

    def fold(self, p: np.ndarray) -> np.ndarray:
        """Signed float view of p folded to (..., N/2) complex, twisted."""
        if p.dtype == np.uint32:
            x = to_signed(p, Q32).astype(np.float64)
        elif p.dtype == np.uint64:
            raise ValueError("double-precision FFT cannot carry 64-bit coefficients; "
                             "use the naive product for q = 2**64")
        else:
            x = np.asarray(p, dtype=np.float64)
        z = np.empty(x.shape[:-1] + (self.m,), np.complex128)
        z.real = x[..., : self.m]
        z.imag = x[..., self.m:]
        z *= self.twist
        return z

    def forward(self, p: np.ndarray) -> np.ndarray:
        """Folded spectrum of p: (..., N/2) complex points."""
        if p.shape[-1] != self.n_ring:
            raise ValueError(f"expected ring degree {self.n_ring}, got {p.shape[-1]}")
        return self._cfft(self.fold(p), inverse=False)

    def inverse(self, spec: np.ndarray, q: int = Q32,
                threshold: float | None = ...,
                overwrite: bool = False) -> np.ndarray:
        """Unfold a spectrum back to integer coefficients mod q.

        Rounds each reconstructed coefficient to the nearest integer.  If
        the pre-rounding deviation of any coefficient exceeds the
        threshold (default from the plan), a TransformPrecisionError is
        raised: the wrapped value would no longer be trustworthy long
        before errors reach 0.5.  Pass threshold=None to skip the check;
        pass overwrite=True to let the transform consume spec.
        """
        if spec.shape[-1] != self.m:
            raise ValueError(f"expected {self.m} spectrum points, got {spec.shape[-1]}")
        if threshold is ...:
            threshold = self.precision_threshold
        z = self._cfft(spec if overwrite else np.array(spec, copy=True),
                       inverse=True)
        z *= self.untwist
        re = np.rint(z.real)
        im = np.rint(z.imag)
        if threshold is not None:
            dev = max(np.abs(z.real - re).max(), np.abs(z.imag - im).max())
            if dev > threshold:
                raise TransformPrecisionError(
                    f"reconstruction deviation {dev:.3g} exceeds threshold {threshold}")
        dt = dtype_for_modulus(q)
        out = np.empty(z.shape[:-1] + (self.n_ring,), dt)
        out[..., : self.m] = re.astype(np.int64).astype(dt)
        out[..., self.m:] = im.astype(np.int64).astype(dt)
        return out

    def multiply(self, a: np.ndarray, b: np.ndarray, q: int = Q32) -> np.ndarray:
        """Negacyclic product via the convolution theorem."""
        return self.inverse(self.forward(a) * self.forward(b), q)


def negacyclic_mul_naive(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Exact schoolbook product in Z_q[X]/(X^N + 1).

    For q = 2**32 the accumulation runs in uint64, whose wraparound is
    congruent mod 2**32, so the result is exact for arbitrary operands.
    For q = 2**64 it falls back to Python integers (small N only).
    """
    if a.shape[-1] != b.shape[-1]:
        raise ValueError("ring degree mismatch")
    if a.dtype != b.dtype:
        raise ValueError("modulus mismatch")
    q = modulus_for_dtype(a.dtype)
    n = a.shape[-1]
    if q == Q32:
        aa = a.astype(np.uint64)
        bb = b.astype(np.uint64)
        full = np.zeros(2 * n - 1, np.uint64)
        for i in range(n):
            full[i: i + n] += aa[i] * bb
        out = full[:n].copy()
        out[: n - 1] -= full[n:]
        return out.astype(np.uint32)
    coeffs = [0] * (2 * n - 1)
    al = [int(x) for x in a]
    bl = [int(x) for x in b]
    for i in range(n):
        ai = al[i]
        for j in range(n):
            coeffs[i + j] += ai * bl[j]
    out = [(coeffs[i] - (coeffs[i + n] if i + n < 2 * n - 1 else 0)) % Q64
           for i in range(n)]
    return np.array(out, dtype=np.uint64)
