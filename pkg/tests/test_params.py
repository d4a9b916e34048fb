"""Parameter-set structure, validation, and JSON round trips."""

import json

import pytest

from tfhesim.params import PARAM_SETS, TfheParams, get_params, load_params, save_params, with_overrides
from tfhesim.torus import Q32, Q64


def test_builtin_sets_structural_fields():
    # the four reference operating points, exactly
    expect = {
        "I": (500, 1024, 1, 2, "110-bit"),
        "II": (630, 1024, 1, 3, "128-bit"),
        "III": (592, 2048, 1, 3, "128-bit"),
        "IV": (991, 16384, 1, 2, "128-bit"),
    }
    for name, (n, N, k, l_b, sec) in expect.items():
        p = PARAM_SETS[name]
        assert (p.n, p.N, p.k, p.l_b, p.security) == (n, N, k, l_b, sec)


def test_moduli_and_widths():
    assert PARAM_SETS["I"].q == Q32 and PARAM_SETS["I"].coeff_bytes == 4
    assert PARAM_SETS["IV"].q == Q64 and PARAM_SETS["IV"].coeff_bytes == 8


def test_decomposition_fits_word():
    for p in PARAM_SETS.values():
        logq = p.q.bit_length() - 1
        assert p.l_b * (p.B_b.bit_length() - 1) <= logq
        assert p.l_k * (p.B_k.bit_length() - 1) <= logq


def test_validation_rejects_overflow():
    with pytest.raises(ValueError):
        TfheParams(name="bad", n=10, N=64, k=1, l_b=5, B_b=256, l_k=2, B_k=16)
    with pytest.raises(ValueError):
        TfheParams(name="bad", n=10, N=63, k=1, l_b=2, B_b=256, l_k=2, B_k=16)
    with pytest.raises(ValueError):
        TfheParams(name="bad", n=10, N=64, k=1, l_b=2, B_b=100, l_k=2, B_k=16)
    with pytest.raises(ValueError):
        TfheParams(name="bad", n=10, N=64, k=1, l_b=2, B_b=256, l_k=2, B_k=16,
                   q=2**30)


def test_json_round_trip(tmp_path):
    p = PARAM_SETS["II"]
    f = tmp_path / "params.json"
    save_params(p, f)
    back = load_params(f)
    assert back == p
    # the on-disk field is named "lambda"
    raw = json.loads(f.read_text())
    assert raw["lambda"] == "128-bit"
    assert "security" not in raw


def test_unknown_fields_rejected(tmp_path):
    f = tmp_path / "params.json"
    d = PARAM_SETS["I"].to_json_dict()
    d["surprise"] = 1
    f.write_text(json.dumps(d))
    with pytest.raises(ValueError, match="unknown parameter"):
        load_params(f)


def test_get_params_resolution(tmp_path):
    assert get_params("III") is PARAM_SETS["III"]
    f = tmp_path / "p.json"
    save_params(PARAM_SETS["I"], f)
    assert get_params(f) == PARAM_SETS["I"]
    with pytest.raises(ValueError):
        get_params("V")


def test_with_overrides_revalidates():
    p = with_overrides(PARAM_SETS["I"], l_k=3)
    assert p.l_k == 3 and p.n == 500
    with pytest.raises(ValueError):
        with_overrides(PARAM_SETS["I"], l_b=10)
