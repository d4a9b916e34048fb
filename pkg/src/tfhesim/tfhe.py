"""The TFHE scheme over power-of-two moduli.

Key generation, LWE/GLWE encryption, gadget decomposition, external
products, blind rotation, sample extraction, programmable bootstrapping,
keyswitching, and boolean gates.  Every operation accepts either a single
ciphertext or a batch (leading axis), and the blind-rotation engine is
vectorized over the batch in cache-sized chunks.

Layouts:
  LWE ciphertext   (dim+1,) unsigned, mask first, body last
  GLWE ciphertext  (k+1, N), mask rows first, body row last
  GGSW ciphertext  ((k+1)*l_b, k+1, N); row i*l_b + t encrypts
                   m * q/B^(t+1) at component i
Decryption phase is body - <mask, key>.

Messages carry `precision` bits plus one guard bit above them
(scale q / 2^(precision+1)), which keeps every lookup slot on the
non-negated half of the rotation range so tables cover the full
2^precision input space.

Functional operations require q = 2^32; the 2^64 parameter set is served
by the performance model and by the exact scalar ops (decomposition,
modulus switching), not by the FFT engine.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator

import numpy as np

from .params import TfheParams
from .torus import Q32, dtype_for_modulus, mod_switch
from .transform import NegacyclicTransform, negacyclic_mul_naive


@dataclass(frozen=True)
class LweKey:
    bits: np.ndarray  # (dim,) int64 in {0,1}

    @property
    def dim(self) -> int:
        return self.bits.shape[0]


@dataclass(frozen=True)
class GlweKey:
    polys: np.ndarray  # (k, N) int64 in {0,1}

    @property
    def k(self) -> int:
        return self.polys.shape[0]

    @property
    def n_ring(self) -> int:
        return self.polys.shape[1]


@dataclass(frozen=True)
class BootstrappingKey:
    """n GGSW encryptions of the LWE key bits, plus their folded spectra.

    ggsw:     (n, (k+1)*l_b, k+1, N) torus coefficients
    spectral: (n, (k+1)*l_b, k+1, N/2) complex128, the forward transform
              of every row polynomial, precomputed at keygen
    """
    ggsw: np.ndarray
    spectral: np.ndarray | None

    def __len__(self) -> int:
        return self.ggsw.shape[0]


@dataclass(frozen=True)
class KeyswitchKey:
    """k*N*l_k LWE rows; row j*l_k + t encrypts s_ext[j] * q/B_k^(t+1)."""
    rows: np.ndarray  # (k*N*l_k, n+1)

    @property
    def shape(self) -> tuple:
        return self.rows.shape


@dataclass(frozen=True)
class KeySet:
    lwe: LweKey
    glwe: GlweKey
    bsk: BootstrappingKey
    ksk: KeyswitchKey
    params: TfheParams

    def __iter__(self) -> Iterator:
        return iter((self.lwe, self.glwe, self.bsk, self.ksk))


class UnsupportedModulusError(ValueError):
    """Functional engine limited to q = 2^32."""


def _require_q32(params: TfheParams, what: str) -> None:
    if params.q != Q32:
        raise UnsupportedModulusError(
            f"{what} requires q = 2**32; parameter set {params.name!r} uses a "
            f"64-bit modulus and is covered by the performance model only")


def transform_plan(params: TfheParams, kernel: str = "pocket") -> NegacyclicTransform:
    return NegacyclicTransform(params.N, kernel=kernel)


# ---------------------------------------------------------------------------
# randomness and noise

def make_rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def gaussian_noise(rng: np.random.Generator, std_frac: float, params: TfheParams,
                   shape) -> np.ndarray:
    dt = dtype_for_modulus(params.q)
    if std_frac == 0.0:
        return np.zeros(shape, dt)
    e = np.rint(rng.normal(0.0, std_frac * params.q, shape)).astype(np.int64)
    return e.astype(dt)


# ---------------------------------------------------------------------------
# message encoding: `precision` bits plus one guard bit

def encode_message(m, precision: int, params: TfheParams):
    delta = params.q >> (precision + 1)
    m_arr = np.asarray(m)
    if np.any(m_arr < 0) or np.any(m_arr >= 1 << precision):
        raise ValueError(f"message outside [0, 2^{precision})")
    dt = dtype_for_modulus(params.q)
    return (m_arr.astype(np.uint64) * np.uint64(delta)).astype(dt)


def decode_phase(phase, precision: int, params: TfheParams):
    """Nearest message slot for a raw phase; wraps in the guarded space."""
    space = 1 << (precision + 1)
    return mod_switch(phase, params.q, space)


# ---------------------------------------------------------------------------
# LWE

def encrypt_lwe_raw(phase, key: LweKey, params: TfheParams, rng,
                    noise_std: float | None = None) -> np.ndarray:
    """Encrypt raw torus value(s) under an LWE key. phase scalar or (B,)."""
    rng = make_rng(rng)
    std = params.lwe_noise_std if noise_std is None else noise_std
    dt = dtype_for_modulus(params.q)
    phase = np.asarray(phase, dtype=dt)
    single = phase.ndim == 0
    phase = np.atleast_1d(phase)
    dim = key.dim
    a = rng.integers(0, params.q, phase.shape + (dim,), dtype=np.uint64).astype(dt)
    mask_dot = (a * key.bits.astype(dt)).sum(axis=-1, dtype=dt)
    b = mask_dot + phase + gaussian_noise(rng, std, params, phase.shape)
    out = np.concatenate([a, b[..., None]], axis=-1)
    return out[0] if single else out


def lwe_phase(ct: np.ndarray, key: LweKey) -> np.ndarray:
    """body - <mask, key> mod q, the noisy plaintext."""
    a = ct[..., :-1]
    b = ct[..., -1]
    return b - (a * key.bits.astype(ct.dtype)).sum(axis=-1, dtype=ct.dtype)


def encrypt_lwe(m, key: LweKey, params: TfheParams, rng,
                precision: int = 2, noise_std: float | None = None) -> np.ndarray:
    return encrypt_lwe_raw(encode_message(m, precision, params), key, params,
                           rng, noise_std)


def decrypt_lwe(ct: np.ndarray, key: LweKey, params: TfheParams,
                precision: int = 2):
    return decode_phase(lwe_phase(ct, key), precision, params)


def lwe_trivial(phase, dim: int, params: TfheParams) -> np.ndarray:
    dt = dtype_for_modulus(params.q)
    phase = np.asarray(phase, dtype=dt)
    out = np.zeros(phase.shape + (dim + 1,), dt)
    out[..., -1] = phase
    return out


# ---------------------------------------------------------------------------
# GLWE

def _glwe_mask_dot(a: np.ndarray, key: GlweKey, params: TfheParams,
                   plan: NegacyclicTransform | None) -> np.ndarray:
    """sum_i a_i * s_i for masks a of shape (..., k, N).

    Routed through the transform (exact here: binary keys keep products
    far inside double precision); the naive path backs the small cases.
    """
    dt = dtype_for_modulus(params.q)
    if plan is None:
        out = np.zeros(a.shape[:-2] + a.shape[-1:], dt)
        for i in range(key.k):
            out += negacyclic_mul_naive(a[..., i, :], key.polys[i].astype(dt))
        return out
    s_spec = plan.forward(key.polys.astype(dt))
    spec = (plan.forward(a) * s_spec).sum(axis=-2)
    return plan.inverse(spec, params.q)


def encrypt_glwe(message_poly: np.ndarray, key: GlweKey, params: TfheParams,
                 rng, noise_std: float | None = None,
                 plan: NegacyclicTransform | None = None) -> np.ndarray:
    """GLWE encryption of message polynomial(s); batch via leading axes."""
    _require_q32(params, "GLWE encryption")
    rng = make_rng(rng)
    std = params.glwe_noise_std if noise_std is None else noise_std
    k, n_ring = key.k, key.n_ring
    dt = dtype_for_modulus(params.q)
    msg = np.asarray(message_poly, dtype=dt)
    a = rng.integers(0, params.q, msg.shape[:-1] + (k, n_ring),
                     dtype=np.uint64).astype(dt)
    b = msg + gaussian_noise(rng, std, params, msg.shape)
    b += _glwe_mask_dot(a, key, params, plan)
    return np.concatenate([a, b[..., None, :]], axis=-2)


def glwe_phase(ct: np.ndarray, key: GlweKey) -> np.ndarray:
    """body - sum_i a_i * s_i, the noisy plaintext polynomial (exact path)."""
    if ct.ndim != 2:
        raise ValueError("glwe_phase takes a single (k+1, N) ciphertext")
    out = ct[-1].copy()
    for i in range(key.k):
        out -= negacyclic_mul_naive(ct[i], key.polys[i].astype(ct.dtype))
    return out


def glwe_trivial(body: np.ndarray, params: TfheParams) -> np.ndarray:
    dt = dtype_for_modulus(params.q)
    out = np.zeros((params.k + 1, params.N), dt)
    out[-1] = np.asarray(body, dtype=dt)
    return out


# ---------------------------------------------------------------------------
# gadget decomposition

def gadget_decompose(p: np.ndarray, l: int, B: int, q: int) -> np.ndarray:
    """Signed balanced base-B digits of the top l*log2(B) bits of p.

    Returns int64 digits of shape (..., l, N-or-scalar-last-dim) with
    digit t in [-B/2, B/2) carrying weight q/B^(t+1), most significant
    first; sum_t d_t * q/B^(t+1) reconstructs p to within q/(2*B^l).
    """
    b_bits = B.bit_length() - 1
    logq = q.bit_length() - 1
    if l * b_bits > logq:
        raise ValueError("decomposition exceeds word size")
    dt = dtype_for_modulus(q)
    p = np.asarray(p, dtype=dt)
    v = _fused_decompose_input(p, l, b_bits, logq, dt)
    out = np.empty(p.shape[:-1] + (l,) + p.shape[-1:], np.int64)
    half = 1 << (b_bits - 1)
    mask = dt.type((1 << b_bits) - 1)
    for t in range(l):
        shift = dt.type(logq - b_bits * (t + 1))
        out[..., t, :] = ((v >> shift) & mask).astype(np.int64) - half
    return out


def _fused_decompose_input(p: np.ndarray, l: int, b_bits: int, logq: int,
                           dt: np.dtype) -> np.ndarray:
    """p plus the carry-prepropagation bias.

    Adding B/2 at every digit position plus a rounding half below the
    kept bits turns balanced signed digit extraction into plain masking:
    digit t is ((p + bias) >> (logq - b_bits*(t+1))) & (B-1), minus B/2.
    The final carry out of the top digit wraps mod q and is dropped.
    """
    bias = 0
    for t in range(l):
        bias += (1 << (b_bits - 1)) << (logq - b_bits * (t + 1))
    if logq > l * b_bits:  # rounding half below the kept bits
        bias += 1 << (logq - l * b_bits - 1)
    return p + dt.type(bias & ((1 << logq) - 1))


def gadget_recompose(digits: np.ndarray, l: int, B: int, q: int) -> np.ndarray:
    """Sum_t d_t * q/B^(t+1) mod q; inverse direction of gadget_decompose."""
    dt = dtype_for_modulus(q)
    acc = np.zeros(digits.shape[:-2] + digits.shape[-1:], dt)
    for t in range(l):
        w = q >> ((B.bit_length() - 1) * (t + 1))
        acc += (digits[..., t, :].astype(np.int64) * w).astype(dt)
    return acc


# ---------------------------------------------------------------------------
# key generation

def keygen(params: TfheParams, seed) -> KeySet:
    """Deterministic key material for one parameter record.

    bsk holds one GGSW per LWE key bit (spectral form precomputed); ksk
    holds k*N*l_k LWE rows encrypting the flattened GLWE key.
    """
    _require_q32(params, "key generation")
    ss = np.random.SeedSequence(seed) if not isinstance(seed, np.random.SeedSequence) else seed
    r_lwe, r_glwe, r_bsk, r_ksk = [np.random.default_rng(s) for s in ss.spawn(4)]

    lwe_key = LweKey(r_lwe.integers(0, 2, params.n).astype(np.int64))
    glwe_key = GlweKey(r_glwe.integers(0, 2, (params.k, params.N)).astype(np.int64))

    plan = transform_plan(params)
    bsk = _make_bootstrapping_key(lwe_key, glwe_key, params, r_bsk, plan)
    ksk = _make_keyswitch_key(glwe_key, lwe_key, params, r_ksk)
    return KeySet(lwe_key, glwe_key, bsk, ksk, params)


def _add_gadget_terms(ggsw: np.ndarray, bits: np.ndarray,
                      params: TfheParams) -> None:
    """Add m * q/B^(t+1) to component i of row i*l_b + t, in place.

    ggsw is (..., rows, k+1, N) of zero encryptions; bits is the scalar
    message per leading entry.
    """
    dt = ggsw.dtype.type
    b_bits = params.B_b.bit_length() - 1
    logq = params.q.bit_length() - 1
    m = np.asarray(bits, np.uint64)
    for i in range(params.k + 1):
        for t in range(params.l_b):
            w = np.uint64(1 << (logq - b_bits * (t + 1)))
            ggsw[..., i * params.l_b + t, i, 0] += (m * w).astype(ggsw.dtype)


def ggsw_encrypt(m: int, key: GlweKey, params: TfheParams, rng,
                 noise_std: float | None = None,
                 plan: NegacyclicTransform | None = None) -> np.ndarray:
    """GGSW encryption of a small integer (key bits: 0 or 1)."""
    rows = (params.k + 1) * params.l_b
    plan = plan or transform_plan(params)
    zeros = np.zeros((rows, params.N), dtype_for_modulus(params.q))
    out = encrypt_glwe(zeros, key, params, rng, noise_std, plan)
    _add_gadget_terms(out, m, params)
    return out


def _make_bootstrapping_key(lwe_key: LweKey, glwe_key: GlweKey,
                            params: TfheParams, rng, plan) -> BootstrappingKey:
    n = params.n
    rows = (params.k + 1) * params.l_b
    dt = dtype_for_modulus(params.q)
    zeros = np.zeros((n * rows, params.N), dt)
    ggsw = encrypt_glwe(zeros, glwe_key, params, rng, plan=plan)
    ggsw = ggsw.reshape(n, rows, params.k + 1, params.N)
    _add_gadget_terms(ggsw, lwe_key.bits, params)
    return BootstrappingKey(ggsw=ggsw, spectral=plan.forward(ggsw))


def _make_keyswitch_key(glwe_key: GlweKey, lwe_key: LweKey,
                        params: TfheParams, rng) -> KeyswitchKey:
    s_ext = extracted_key(glwe_key).bits
    kn = params.k * params.N
    bk_bits = params.B_k.bit_length() - 1
    logq = params.q.bit_length() - 1
    dt = dtype_for_modulus(params.q)
    phases = np.empty((kn, params.l_k), dt)
    for t in range(params.l_k):
        w = 1 << (logq - bk_bits * (t + 1))
        phases[:, t] = (s_ext.astype(np.uint64) * np.uint64(w)).astype(dt)
    rows = encrypt_lwe_raw(phases.reshape(-1), lwe_key, params, rng)
    return KeyswitchKey(rows=rows)


# GGSW encryption of a key bit must add m*q/B^(t+1) to component i of row
# (i, t); row layout above threads i over GLWE components with the body
# last, matching the external-product digit ordering.


def extracted_key(glwe_key: GlweKey) -> LweKey:
    """The flattened GLWE key, under which extracted samples decrypt."""
    return LweKey(glwe_key.polys.reshape(-1).copy())


# ---------------------------------------------------------------------------
# external product and CMux

def _decompose_to_spectra(glwe_batch: np.ndarray, params: TfheParams,
                          plan: NegacyclicTransform,
                          scratch: np.ndarray | None = None) -> np.ndarray:
    """Digit-decompose (B, k+1, N) and transform: (B, (k+1)*l_b, M)."""
    b_bits = params.B_b.bit_length() - 1
    logq = params.q.bit_length() - 1
    dt = glwe_batch.dtype.type
    batch = glwe_batch.shape[0]
    rows = (params.k + 1) * params.l_b
    half = 1 << (b_bits - 1)
    mask = dt(params.B_b - 1)
    v = _fused_decompose_input(glwe_batch, params.l_b, b_bits, logq,
                               glwe_batch.dtype)
    if scratch is None or scratch.shape != (batch, rows, params.N):
        scratch = np.empty((batch, rows, params.N), np.float64)
    for i in range(params.k + 1):
        for t in range(params.l_b):
            shift = dt(logq - b_bits * (t + 1))
            scratch[:, i * params.l_b + t, :] = \
                ((v[:, i, :] >> shift) & mask).astype(np.int32) - np.int32(half)
    return plan.forward(scratch)


def external_product(ggsw: np.ndarray, glwe: np.ndarray, params: TfheParams,
                     plan: NegacyclicTransform | None = None,
                     use_fft: bool = True,
                     ggsw_spectral: np.ndarray | None = None) -> np.ndarray:
    """GGSW x GLWE product: decompose, multiply row-wise, accumulate.

    The FFT route multiply-accumulates in the frequency domain and
    inverse-transforms the k+1 output columns once; the naive route is
    the exact oracle used for equivalence testing.
    """
    single = glwe.ndim == 2
    g = glwe[None] if single else glwe
    if use_fft:
        plan = plan or transform_plan(params)
        spec = _decompose_to_spectra(g, params, plan)
        if ggsw_spectral is None:
            ggsw_spectral = plan.forward(ggsw)
        prod = np.einsum("brm,rcm->bcm", spec, ggsw_spectral)
        out = plan.inverse(prod, params.q)
    else:
        digits = gadget_decompose(g, params.l_b, params.B_b, params.q)
        rows = (params.k + 1) * params.l_b
        dig = digits.reshape(g.shape[0], rows, params.N)
        dt = g.dtype
        out = np.zeros_like(g)
        for b in range(g.shape[0]):
            for r in range(rows):
                d_poly = (dig[b, r].astype(np.int64) % params.q).astype(dt)
                for c in range(params.k + 1):
                    out[b, c] += negacyclic_mul_naive(d_poly, ggsw[r, c])
    return out[0] if single else out


def cmux(ggsw: np.ndarray, c0: np.ndarray, c1: np.ndarray, params: TfheParams,
         plan: NegacyclicTransform | None = None) -> np.ndarray:
    """Encrypted selector: c0 + ExternalProduct(bit, c1 - c0)."""
    return c0 + external_product(ggsw, c1 - c0, params, plan)


# ---------------------------------------------------------------------------
# blind rotation

def _engine_chunk(params: TfheParams) -> int:
    """Batch chunk sized so the spectra working set stays cache-resident."""
    per_ct = (params.k + 1) * params.l_b * (params.N // 2) * 16
    return int(np.clip((3 << 20) // per_ct, 16, 192))


def blind_rotate(tv: np.ndarray, c_switched: np.ndarray,
                 bsk: BootstrappingKey, params: TfheParams,
                 plan: NegacyclicTransform | None = None,
                 stats: dict | None = None) -> np.ndarray:
    """Rotate the test vector by the encrypted phase of c_switched.

    c_switched holds mod-switched entries in [0, 2N): shape (n+1,) or
    (B, n+1).  tv is one GLWE (k+1, N) shared by the batch or a batch
    (B, k+1, N).  Accumulator update per iteration i is the CMux form
    acc <- acc + ExtProd(bsk_i, X^{a_i} * acc - acc); the initial value
    is X^{-b} * tv.
    """
    _require_q32(params, "blind rotation")
    plan = plan or transform_plan(params)
    single = c_switched.ndim == 1
    c = np.atleast_2d(np.asarray(c_switched, dtype=np.int64))
    batch = c.shape[0]
    if c.shape[1] != params.n + 1:
        raise ValueError(f"expected {params.n + 1} mod-switched entries")
    if tv.ndim == 2:
        tv_b = np.broadcast_to(tv, (batch,) + tv.shape)
    else:
        tv_b = tv
    out = np.empty((batch, params.k + 1, params.N), tv.dtype)
    n_ext = 0
    chunk = _engine_chunk(params)
    for lo in range(0, batch, chunk):
        hi = min(batch, lo + chunk)
        out[lo:hi] = _blind_rotate_chunk(tv_b[lo:hi], c[lo:hi], bsk, params, plan)
        n_ext += (hi - lo) * params.n
    if stats is not None:
        stats["external_products"] = stats.get("external_products", 0) + n_ext
        stats["iterations"] = params.n
    return out[0] if single else out


def _blind_rotate_chunk(tv: np.ndarray, c: np.ndarray, bsk: BootstrappingKey,
                        params: TfheParams, plan: NegacyclicTransform) -> np.ndarray:
    n_ring = params.N
    two_n = 2 * n_ring
    batch = c.shape[0]
    rows = (params.k + 1) * params.l_b
    digit_scratch = np.empty((batch, rows, n_ring), np.float64)
    # initial rotation by -b
    acc = _rotate_batch(np.ascontiguousarray(tv), (two_n - c[:, -1]) % two_n)
    spectral = bsk.spectral
    for i in range(params.n):
        rot = _rotate_batch(acc, c[:, i])
        rot -= acc
        spec = _decompose_to_spectra(rot, params, plan, digit_scratch)
        prod = np.einsum("brm,rcm->bcm", spec, spectral[i])
        acc += plan.inverse(prod, params.q, overwrite=True)
    return acc


def _rotate_batch(p: np.ndarray, r: np.ndarray) -> np.ndarray:
    """X^r * p for (B, cols, N) with per-row exponents in [0, 2N)."""
    n = p.shape[-1]
    # power-of-two ring: mask instead of mod, 32-bit index math
    m = (np.arange(n, dtype=np.int32)[None, :]
         - np.asarray(r, np.int32)[:, None]) & np.int32(2 * n - 1)
    idx = m & np.int32(n - 1)
    g = np.take_along_axis(p, np.broadcast_to(idx[:, None, :], p.shape), axis=2)
    return np.where((m < n)[:, None, :], g, p.dtype.type(0) - g)


# ---------------------------------------------------------------------------
# lookup tables and test vectors

@dataclass(frozen=True)
class LookUpTable:
    """A univariate table over 2^precision message slots.

    The encoded test vector is the staircase expansion of the entries
    with a half-slot offset, so phases up to half a slot off-center still
    select the intended entry; the top half-slot wraps negacyclically to
    the negated first entry.
    """
    entries: np.ndarray  # (2^precision,) ints in [0, 2^precision)
    precision: int

    def __post_init__(self):
        if self.entries.shape != (1 << self.precision,):
            raise ValueError("entries length must be 2^precision")

    def redundancy(self, params: TfheParams) -> int:
        """Staircase width N / 2^precision for a given ring degree."""
        return params.N >> self.precision

    def test_vector(self, params: TfheParams) -> np.ndarray:
        if self.precision > int(np.log2(params.N)):
            raise ValueError("lut precision exceeds log2(N)")
        w = params.N >> self.precision
        dt = dtype_for_modulus(params.q)
        j = np.arange(params.N)
        idx = (j + w // 2) // w
        enc = encode_message(self.entries, self.precision, params)
        neg_first = dt.type((params.q - int(enc[0])) % params.q)
        body = np.where(idx < (1 << self.precision),
                        enc[np.minimum(idx, (1 << self.precision) - 1)],
                        neg_first)
        return glwe_trivial(body.astype(dt), params)

    @classmethod
    def from_function(cls, f, precision: int) -> "LookUpTable":
        space = 1 << precision
        vals = np.array([int(f(x)) % space for x in range(space)], np.int64)
        return cls(entries=vals, precision=precision)

    @classmethod
    def identity(cls, precision: int) -> "LookUpTable":
        return cls.from_function(lambda x: x, precision)

    @classmethod
    def constant(cls, value: int, precision: int) -> "LookUpTable":
        return cls.from_function(lambda _: value, precision)


# ---------------------------------------------------------------------------
# sample extraction, PBS, keyswitching

def sample_extract(tv: np.ndarray, params: TfheParams) -> np.ndarray:
    """Constant coefficient of a GLWE as an LWE sample of dimension k*N."""
    single = tv.ndim == 2
    g = tv[None] if single else tv
    batch = g.shape[0]
    kn = params.k * params.N
    out = np.empty((batch, kn + 1), g.dtype)
    for i in range(params.k):
        col = g[:, i, :]
        seg = out[:, i * params.N:(i + 1) * params.N]
        seg[:, 0] = col[:, 0]
        seg[:, 1:] = g.dtype.type(0) - col[:, :0:-1]
    out[:, -1] = g[:, -1, 0]
    return out[0] if single else out


def modulus_switch_lwe(ct: np.ndarray, params: TfheParams) -> np.ndarray:
    """All n+1 entries rescaled to [0, 2N)."""
    return mod_switch(np.asarray(ct), params.q, 2 * params.N)


def pbs(ct: np.ndarray, lut: LookUpTable, bsk: BootstrappingKey,
        params: TfheParams, plan: NegacyclicTransform | None = None,
        stats: dict | None = None) -> np.ndarray:
    """Programmable bootstrap: mod-switch, blind-rotate, sample-extract.

    Output is an LWE of dimension k*N under the extracted key, holding
    lut[decode(ct)] with fresh noise.  ct may be (n+1,) or (B, n+1).
    """
    tv = lut.test_vector(params)
    switched = modulus_switch_lwe(ct, params)
    rotated = blind_rotate(tv, switched, bsk, params, plan, stats)
    return sample_extract(rotated, params)


def keyswitch(ct: np.ndarray, ksk: KeyswitchKey, params: TfheParams) -> np.ndarray:
    """Switch an extracted (k*N)-dimension LWE back to dimension n.

    Decomposes the k*N mask scalars to l_k digits each and subtracts the
    digit-weighted ksk rows from the trivial embedding of the body.
    """
    _require_q32(params, "keyswitching")
    single = ct.ndim == 1
    cts = ct[None] if single else ct
    kn = params.k * params.N
    if cts.shape[-1] != kn + 1:
        raise ValueError(f"expected input dimension {kn}, got {cts.shape[-1] - 1}")
    digits = gadget_decompose(cts[:, :-1], params.l_k, params.B_k, params.q)
    # digits come out (B, l_k, k*N); ksk rows are keyed j*l_k + t
    flat = digits.transpose(0, 2, 1).reshape(cts.shape[0], kn * params.l_k)
    flat = flat.astype(np.float64)
    # products stay below 2^53, so the BLAS float path is exact
    acc = flat @ ksk.rows.astype(np.float64)
    acc_int = np.rint(acc).astype(np.int64)
    out = np.zeros_like(cts[:, : params.n + 1])
    out[:, -1] = cts[:, -1]
    out -= acc_int.astype(ct.dtype)
    return out[0] if single else out


def bootstrap(ct: np.ndarray, lut: LookUpTable, keys: KeySet,
              plan: NegacyclicTransform | None = None) -> np.ndarray:
    """pbs followed by keyswitch: same dimension in and out."""
    return keyswitch(pbs(ct, lut, keys.bsk, keys.params, plan), keys.ksk, keys.params)


# ---------------------------------------------------------------------------
# boolean gates

def encrypt_bool(b, key: LweKey, params: TfheParams, rng) -> np.ndarray:
    """True at phase q/8, False at -q/8."""
    b_arr = np.asarray(b, dtype=bool)
    eighth = params.q // 8
    dt = dtype_for_modulus(params.q)
    phase = np.where(b_arr, dt.type(eighth), dt.type(params.q - eighth))
    return encrypt_lwe_raw(phase, key, params, rng)


def decrypt_bool(ct: np.ndarray, key: LweKey, params: TfheParams):
    phase = lwe_phase(ct, key)
    return np.asarray(phase, np.uint64) < (params.q // 2)


def gate_nand(c1: np.ndarray, c2: np.ndarray, keys: KeySet,
              plan: NegacyclicTransform | None = None) -> np.ndarray:
    """Encrypted NAND: (q/8 - c1 - c2) bootstrapped with the sign table.

    The test vector is the constant q/8 polynomial: positive phases keep
    +q/8 and negative phases flip it, which is exactly the sign function
    under negacyclic rotation.  Output is keyswitched back to dim n.
    """
    params = keys.params
    single = c1.ndim == 1
    a = np.atleast_2d(c1)
    b = np.atleast_2d(c2)
    lin = lwe_trivial(np.full(a.shape[0], params.q // 8, np.uint64),
                      params.n, params) - a - b
    tv = glwe_trivial(np.full(params.N, params.q // 8, np.uint64), params)
    switched = modulus_switch_lwe(lin, params)
    rotated = blind_rotate(tv, switched, keys.bsk, params, plan)
    extracted = sample_extract(rotated, params)
    out = keyswitch(extracted, keys.ksk, params)
    return out[0] if single else out
