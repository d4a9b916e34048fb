"""Length-prefixed little-endian binary serialization for key material.

File layout (all integers little-endian):

    magic    8 bytes  b"TFHESKEY"
    version  u32      currently 1
    nsect    u32      number of sections
    section  repeated:
        name_len u32, name bytes (utf-8)
        dtype    u8   0=int64 1=uint32 2=uint64 3=raw-bytes
        ndim     u8
        dims     ndim x u64
        payload  prod(dims) elements (or dims[0] bytes for raw)

A key set is stored as sections: params (raw JSON), lwe_bits, glwe_polys,
bsk_ggsw, ksk_rows.  The spectral form of the bootstrapping key is
recomputed on load rather than stored.
"""

from __future__ import annotations

import io
import json
import struct
from pathlib import Path

import numpy as np

from .params import TfheParams
from .tfhe import BootstrappingKey, GlweKey, KeySet, KeyswitchKey, LweKey, transform_plan

MAGIC = b"TFHESKEY"
VERSION = 1

_DTYPES = {0: np.dtype("<i8"), 1: np.dtype("<u4"), 2: np.dtype("<u8")}
_DTYPE_CODES = {np.dtype(np.int64): 0, np.dtype(np.uint32): 1, np.dtype(np.uint64): 2}
_RAW = 3


def _write_section(f, name: str, payload) -> None:
    nb = name.encode()
    f.write(struct.pack("<I", len(nb)))
    f.write(nb)
    if isinstance(payload, bytes):
        f.write(struct.pack("<BB", _RAW, 1))
        f.write(struct.pack("<Q", len(payload)))
        f.write(payload)
        return
    arr = np.ascontiguousarray(payload)
    code = _DTYPE_CODES[arr.dtype.newbyteorder("=")]
    f.write(struct.pack("<BB", code, arr.ndim))
    for d in arr.shape:
        f.write(struct.pack("<Q", d))
    f.write(arr.astype(arr.dtype.newbyteorder("<"), copy=False).tobytes())


def _read_section(f) -> tuple:
    (name_len,) = struct.unpack("<I", f.read(4))
    name = f.read(name_len).decode()
    code, ndim = struct.unpack("<BB", f.read(2))
    dims = [struct.unpack("<Q", f.read(8))[0] for _ in range(ndim)]
    if code == _RAW:
        return name, f.read(dims[0])
    dt = _DTYPES.get(code)
    if dt is None:
        raise ValueError(f"unknown dtype code {code} in section {name!r}")
    count = int(np.prod(dims)) if dims else 1
    data = np.frombuffer(f.read(count * dt.itemsize), dtype=dt).reshape(dims)
    return name, data.astype(dt.newbyteorder("="))


def save_keyset(keys: KeySet, path: str | Path) -> None:
    sections = [
        ("params", json.dumps(keys.params.to_json_dict(), sort_keys=True).encode()),
        ("lwe_bits", keys.lwe.bits),
        ("glwe_polys", keys.glwe.polys),
        ("bsk_ggsw", keys.bsk.ggsw),
        ("ksk_rows", keys.ksk.rows),
    ]
    buf = io.BytesIO()
    buf.write(MAGIC)
    buf.write(struct.pack("<II", VERSION, len(sections)))
    for name, payload in sections:
        _write_section(buf, name, payload)
    Path(path).write_bytes(buf.getvalue())


def load_keyset(path: str | Path) -> KeySet:
    raw = Path(path).read_bytes()
    f = io.BytesIO(raw)
    if f.read(8) != MAGIC:
        raise ValueError(f"{path}: not a key file (bad magic)")
    version, nsect = struct.unpack("<II", f.read(8))
    if version != VERSION:
        raise ValueError(f"{path}: unsupported key-file version {version}")
    sections = dict(_read_section(f) for _ in range(nsect))
    missing = {"params", "lwe_bits", "glwe_polys", "bsk_ggsw", "ksk_rows"} - set(sections)
    if missing:
        raise ValueError(f"{path}: missing sections {sorted(missing)}")
    params = TfheParams.from_json_dict(json.loads(sections["params"].decode()))
    plan = transform_plan(params)
    ggsw = sections["bsk_ggsw"]
    bsk = BootstrappingKey(ggsw=ggsw, spectral=plan.forward(ggsw))
    return KeySet(
        lwe=LweKey(sections["lwe_bits"]),
        glwe=GlweKey(sections["glwe_polys"]),
        bsk=bsk,
        ksk=KeyswitchKey(rows=sections["ksk_rows"]),
        params=params,
    )
