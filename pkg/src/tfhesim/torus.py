"""Exact arithmetic on the discretized torus Z_q and the ring Z_q[X]/(X^N + 1).

Torus scalars are unsigned integers reduced mod q, where q is a power of
two matching a machine word (2^32 or 2^64), so addition and subtraction
wrap for free in the corresponding numpy dtype.  Polynomials are numpy
arrays whose last axis has length N; all ring arithmetic is negacyclic
(X^N == -1).
"""

from __future__ import annotations

import numpy as np

Q32 = 1 << 32
Q64 = 1 << 64


def dtype_for_modulus(q: int) -> np.dtype:
    """Unsigned dtype whose word size matches the modulus q."""
    if q == Q32:
        return np.dtype(np.uint32)
    if q == Q64:
        return np.dtype(np.uint64)
    raise ValueError(f"modulus must be 2**32 or 2**64, got {q}")


def modulus_for_dtype(dt: np.dtype) -> int:
    dt = np.dtype(dt)
    if dt == np.uint32:
        return Q32
    if dt == np.uint64:
        return Q64
    raise ValueError(f"torus arrays must be uint32 or uint64, got {dt}")


def to_signed(a: np.ndarray, q: int) -> np.ndarray:
    """Centered representative in [-q/2, q/2) as an int64 array.

    Only valid for q = 2^32; int64 cannot hold centered 2^64 values, and
    the 2^64 case is handled with Python ints where it matters.
    """
    if q != Q32:
        raise ValueError("to_signed supports q = 2**32 only")
    s = a.astype(np.int64)
    return np.where(s >= Q32 // 2, s - Q32, s)


def _is_pow2(x: int) -> bool:
    return x > 0 and (x & (x - 1)) == 0


def mod_switch(c, q: int, two_n: int):
    """Rescale torus values from modulus q to modulus two_n = 2N.

    Returns round(c * two_n / q) mod two_n with ties rounded half away
    from zero (equivalently half up, since the unsigned representative is
    non-negative).  Accepts a Python int or a numpy array of the matching
    unsigned dtype; always returns plain integers (int or int64 array) in
    [0, two_n).
    """
    if not _is_pow2(two_n) or not _is_pow2(q):
        raise ValueError("moduli must be powers of two")
    if two_n > q:
        raise ValueError(f"target modulus {two_n} exceeds source modulus {q}")
    step = q // two_n
    if isinstance(c, (int, np.integer)):
        c = int(c)
        if not 0 <= c < q:
            raise ValueError("value out of range for modulus")
        return ((c + step // 2) // step) % two_n
    dt = np.dtype(c.dtype)
    if modulus_for_dtype(dt) != q:
        raise ValueError(f"array dtype {dt} does not match modulus {q}")
    half = dt.type(step // 2)
    shift = dt.type(step.bit_length() - 1)
    # the +half add may wrap mod q; the wrap is congruent mod two_n after
    # the shift, so the result is still the rounded quotient mod two_n
    v = (c + half) >> shift
    return (v & dt.type(two_n - 1)).astype(np.int64)


def negacyclic_rotate(p: np.ndarray, r, direction: str = "right") -> np.ndarray:
    """Multiply p by X^r ('right') or X^-r ('left') in Z_q[X]/(X^N + 1).

    p has shape (..., N); r is an int or an integer array broadcastable
    over the leading axes (one rotation amount per row).  r is reduced
    mod 2N here; `_rotate_reduced` is the branch-free inner op.
    """
    n = p.shape[-1]
    if direction not in ("right", "left"):
        raise ValueError("direction must be 'right' or 'left'")
    r = np.asarray(r, dtype=np.int64) % (2 * n)
    if direction == "left":
        r = (2 * n - r) % (2 * n)
    return _rotate_reduced(p, r)


def _rotate_reduced(p: np.ndarray, r) -> np.ndarray:
    """X^r * p with r already in [0, 2N). r scalar or shaped (batch,)."""
    n = p.shape[-1]
    r = np.asarray(r, dtype=np.int64)
    if r.ndim == 0:
        m = (np.arange(n, dtype=np.int64) - int(r)) % (2 * n)
        idx = m & (n - 1) if _is_pow2(n) else m % n
        g = p[..., idx]
        return np.where(m < n, g, p.dtype.type(0) - g)
    # batched: p is (B, ..., N), r is (B,)
    m = (np.arange(n, dtype=np.int64)[None, :] - r[:, None]) % (2 * n)
    idx = m % n
    expand = (slice(None),) + (None,) * (p.ndim - 2) + (slice(None),)
    g = np.take_along_axis(p, np.broadcast_to(idx[expand], p.shape), axis=-1)
    neg = (m >= n)[expand]
    return np.where(neg, p.dtype.type(0) - g, g)


def poly_addsub(a: np.ndarray, b: np.ndarray, sign: str = "+") -> np.ndarray:
    """Coefficient-wise a +/- b mod q.  Shapes and dtypes must agree."""
    if a.shape[-1] != b.shape[-1]:
        raise ValueError(f"ring degree mismatch: {a.shape[-1]} vs {b.shape[-1]}")
    if a.dtype != b.dtype:
        raise ValueError(f"modulus mismatch: {a.dtype} vs {b.dtype}")
    if sign == "+":
        return a + b
    if sign == "-":
        return a - b
    raise ValueError("sign must be '+' or '-'")
