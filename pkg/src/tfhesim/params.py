"""TFHE parameter records and the built-in parameter sets I-IV.

The structural fields (n, N, k, l_b, lambda) of the built-in sets
reproduce the reference operating points the performance model is
calibrated against.  The remaining fields (decomposition bases, noise
widths) are artifact defaults, chosen so that the functional decryption
budget holds, and are NOT normative: override them per run or load a
parameter file.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, replace
from pathlib import Path

from .torus import Q32, Q64, dtype_for_modulus


@dataclass(frozen=True)
class TfheParams:
    name: str
    n: int                  # LWE mask length
    N: int                  # ring degree
    k: int                  # GLWE mask length
    l_b: int                # bootstrap decomposition level
    B_b: int                # bootstrap decomposition base (power of two)
    l_k: int                # keyswitch decomposition level
    B_k: int                # keyswitch decomposition base
    q: int = Q32
    lwe_noise_std: float = 2.0 ** -17   # fraction of q
    glwe_noise_std: float = 2.0 ** -25  # fraction of q
    security: str = "unrated"           # claimed security label, carried verbatim

    def __post_init__(self):
        dtype_for_modulus(self.q)  # validates q
        for nm in ("n", "N", "k", "l_b", "B_b", "l_k", "B_k"):
            if getattr(self, nm) < 1:
                raise ValueError(f"{nm} must be positive")
        if self.N & (self.N - 1):
            raise ValueError("ring degree N must be a power of two")
        if self.B_b & (self.B_b - 1) or self.B_k & (self.B_k - 1):
            raise ValueError("decomposition bases must be powers of two")
        logq = self.q.bit_length() - 1
        if self.l_b * (self.B_b.bit_length() - 1) > logq:
            raise ValueError("l_b * log2(B_b) exceeds log2(q)")
        if self.l_k * (self.B_k.bit_length() - 1) > logq:
            raise ValueError("l_k * log2(B_k) exceeds log2(q)")

    @property
    def coeff_bytes(self) -> int:
        """Bytes per torus coefficient (4 for q=2^32, 8 for q=2^64)."""
        return (self.q.bit_length() - 1) // 8

    @property
    def glwe_dim(self) -> int:
        """Flattened GLWE key length k*N, the extracted-LWE dimension."""
        return self.k * self.N

    def to_json_dict(self) -> dict:
        d = asdict(self)
        d["lambda"] = d.pop("security")
        return d

    @classmethod
    def from_json_dict(cls, d: dict) -> "TfheParams":
        d = dict(d)
        if "lambda" in d:
            d["security"] = d.pop("lambda")
        known = set(cls.__dataclass_fields__)
        unknown = set(d) - known
        if unknown:
            raise ValueError(f"unknown parameter fields: {sorted(unknown)}")
        return cls(**d)


# Built-in sets.  Structural fields (n, N, k, l_b, lambda) are fixed;
# B_b/l_k/B_k and the noise widths are non-normative artifact defaults.
# Set IV keeps a 64-bit modulus and is exercised through the performance
# model; its double-precision FFT path is not functional.
PARAM_SETS: dict[str, TfheParams] = {
    "I": TfheParams(name="I", n=500, N=1024, k=1, l_b=2, B_b=256,
                    l_k=4, B_k=16, q=Q32,
                    lwe_noise_std=2.0 ** -17, glwe_noise_std=2.0 ** -25,
                    security="110-bit"),
    "II": TfheParams(name="II", n=630, N=1024, k=1, l_b=3, B_b=256,
                     l_k=4, B_k=16, q=Q32,
                     lwe_noise_std=2.0 ** -17, glwe_noise_std=2.0 ** -25,
                     security="128-bit"),
    "III": TfheParams(name="III", n=592, N=2048, k=1, l_b=3, B_b=256,
                      l_k=4, B_k=16, q=Q32,
                      lwe_noise_std=2.0 ** -17, glwe_noise_std=2.0 ** -26,
                      security="128-bit"),
    "IV": TfheParams(name="IV", n=991, N=16384, k=1, l_b=2, B_b=65536,
                     l_k=3, B_k=16, q=Q64,
                     lwe_noise_std=2.0 ** -40, glwe_noise_std=2.0 ** -50,
                     security="128-bit"),
}


def get_params(spec: str | Path | TfheParams) -> TfheParams:
    """Resolve a set name ('I'..'IV'), a JSON file path, or a record."""
    if isinstance(spec, TfheParams):
        return spec
    key = str(spec)
    if key in PARAM_SETS:
        return PARAM_SETS[key]
    path = Path(key)
    if path.exists():
        return load_params(path)
    raise ValueError(f"unknown parameter set {spec!r} (not a built-in name or file)")


def load_params(path: str | Path) -> TfheParams:
    with open(path) as f:
        return TfheParams.from_json_dict(json.load(f))


def save_params(params: TfheParams, path: str | Path) -> None:
    with open(path, "w") as f:
        json.dump(params.to_json_dict(), f, indent=2, sort_keys=True)
        f.write("\n")


def with_overrides(params: TfheParams, **kwargs) -> TfheParams:
    """Copy of params with selected fields replaced (validation re-runs)."""
    return replace(params, **kwargs)
