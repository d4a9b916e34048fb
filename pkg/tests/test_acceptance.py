"""Acceptance suite: one test per acceptance criterion, each printing a
PASS/FAIL line.  Tolerances are pinned here and in tfhesim.reference.

Run with `pytest tests/test_acceptance.py -v -s` to see the per-criterion
lines as they complete.
"""

import time
from dataclasses import replace

import numpy as np
import pytest

from tfhesim import reference as ref
from tfhesim.archsim import ArchConfig, simulate_nn, simulate_pbs_stream, sweep_tvlp_clp
from tfhesim.params import PARAM_SETS
from tfhesim.sched import core_batch_capacity
from tfhesim.tfhe import (
    LookUpTable,
    decrypt_bool,
    decrypt_lwe,
    encrypt_bool,
    encrypt_lwe,
    extracted_key,
    gadget_decompose,
    gadget_recompose,
    gate_nand,
    keygen,
)
from tfhesim.tfhe import pbs as run_pbs
from tfhesim.transform import NegacyclicTransform, negacyclic_mul_naive

ARCH = ArchConfig()


def report(criterion: int, ok: bool, detail: str) -> None:
    print(f"\nACCEPTANCE {criterion}: {'PASS' if ok else 'FAIL'} - {detail}")


def test_criterion_1_functional_pbs_and_gates():
    """Sets I-III: 1000-message identity bootstrap >= 99.9% correct each;
    NAND truth table correct on 250 trials per input pair; < 5 minutes."""
    t0 = time.perf_counter()
    lut = LookUpTable.identity(2)
    per_set = {}
    for name in ("I", "II", "III"):
        params = PARAM_SETS[name]
        keys = keygen(params, seed=1000 + ord(name[0]) + len(name))
        rng = np.random.default_rng(52 + len(name))
        msgs = rng.integers(0, 4, 1000)
        cts = encrypt_lwe(msgs, keys.lwe, params, rng, 2)
        outs = run_pbs(cts, lut, keys.bsk, params)
        got = np.asarray(decrypt_lwe(outs, extracted_key(keys.glwe), params, 2))
        per_set[name] = int((got == msgs).sum())
        if name == "I":
            set1_keys = keys
        del keys

    # encrypted NAND: 250 trials per input pair, batched through one run
    params = PARAM_SETS["I"]
    rng = np.random.default_rng(99)
    b1 = np.repeat([False, False, True, True], 250)
    b2 = np.repeat([False, True, False, True], 250)
    c1 = encrypt_bool(b1, set1_keys.lwe, params, rng)
    c2 = encrypt_bool(b2, set1_keys.lwe, params, rng)
    outs = gate_nand(c1, c2, set1_keys)
    got = np.asarray(decrypt_bool(outs, set1_keys.lwe, params))
    expect = ~(b1 & b2)
    nand_correct = int((got == expect).sum())

    elapsed = time.perf_counter() - t0
    pbs_ok = all(v >= 999 for v in per_set.values())
    nand_ok = nand_correct == 1000
    time_ok = elapsed < 300.0
    ok = pbs_ok and nand_ok and time_ok
    report(1, ok, f"identity bootstrap {per_set} /1000 per set, "
                  f"NAND {nand_correct}/1000, runtime {elapsed:.0f}s (limit 300)")
    assert pbs_ok, f"bootstrap success below 99.9%: {per_set}"
    assert nand_ok, f"NAND truth table {nand_correct}/1000"
    assert time_ok, f"functional run took {elapsed:.0f}s, over the 5-minute budget"


def test_criterion_2_decomposition_bound():
    """10^5 random coefficients per parameter set reconstruct within
    q/B^l; zero violations (the implementation meets q/(2 B^l))."""
    worst = {}
    for name, params in PARAM_SETS.items():
        rng = np.random.default_rng(7 + len(name))
        dt = np.uint32 if params.q == 1 << 32 else np.uint64
        vals = rng.integers(0, params.q, 100_000, dtype=np.uint64).astype(dt)
        digits = gadget_decompose(vals, params.l_b, params.B_b, params.q)
        rec = gadget_recompose(digits, params.l_b, params.B_b, params.q)
        err = vals - rec  # wraps mod q
        err = np.minimum(err, dt(0) - err)  # centered magnitude
        bound = params.q // params.B_b ** params.l_b
        worst[name] = (int(err.max()), bound)
    violations = sum(e > b for e, b in worst.values())
    ok = violations == 0
    report(2, ok, "max reconstruction error per set "
                  + ", ".join(f"{n}: {e} <= {b}" for n, (e, b) in worst.items()))
    assert ok, worst


@pytest.mark.parametrize("n_ring", [8, 64, 1024])
def test_criterion_3_transform_oracle(n_ring):
    """Folded-FFT negacyclic products equal the schoolbook oracle exactly
    for 1000 random pairs with decomposition-magnitude coefficients."""
    params = PARAM_SETS["I"]
    half_base = params.B_b // 2
    plan = NegacyclicTransform(n_ring)
    rng = np.random.default_rng(n_ring)
    mismatches = 0
    for _ in range(1000):
        a = (rng.integers(-half_base, half_base, n_ring) % (1 << 32)).astype(np.uint32)
        b = (rng.integers(-half_base, half_base, n_ring) % (1 << 32)).astype(np.uint32)
        if not np.array_equal(plan.multiply(a, b), negacyclic_mul_naive(a, b)):
            mismatches += 1
    ok = mismatches == 0
    report(3, ok, f"N={n_ring}: {1000 - mismatches}/1000 products exact")
    assert ok, f"{mismatches} mismatches at N={n_ring}"


def test_criterion_4_throughput_latency_reference():
    """Simulated throughput within 10% and latency within 15% of the
    reference points for all four parameter sets."""
    lines = []
    ok = True
    for name, params in PARAM_SETS.items():
        num_ct = core_batch_capacity(params, ARCH.local_spm_bytes) * ARCH.tvlp
        rep = simulate_pbs_stream(params, ARCH, num_ct)
        t_ok = ref.within(rep.pbs_throughput_per_s,
                          ref.THROUGHPUT_PBS_PER_S[name], ref.THROUGHPUT_TOL)
        l_ok = ref.within(rep.pbs_latency_s * 1e3, ref.LATENCY_MS[name],
                          ref.LATENCY_TOL)
        ok &= t_ok and l_ok
        lines.append(f"{name}: {rep.pbs_throughput_per_s:.0f}/s vs "
                     f"{ref.THROUGHPUT_PBS_PER_S[name]}, "
                     f"{rep.pbs_latency_s * 1e3:.3f}ms vs {ref.LATENCY_MS[name]}")
        assert t_ok, f"set {name} throughput {rep.pbs_throughput_per_s:.0f} " \
                     f"outside 10% of {ref.THROUGHPUT_PBS_PER_S[name]}"
        assert l_ok, f"set {name} latency {rep.pbs_latency_s*1e3:.3f}ms " \
                     f"outside 15% of {ref.LATENCY_MS[name]}"
    report(4, ok, "; ".join(lines))


def test_criterion_5_folding_ratios():
    """Folding on/off: throughput x1.99 +-10%, latency /1.68 +-15% (set I)."""
    params = PARAM_SETS["I"]
    on = simulate_pbs_stream(params, ARCH, 640)
    off = simulate_pbs_stream(params, replace(ARCH, folding=False), 640)
    thr_ratio = on.pbs_throughput_per_s / off.pbs_throughput_per_s
    lat_ratio = off.pbs_latency_s / on.pbs_latency_s
    t_ok = ref.within(thr_ratio, ref.FOLDING_THROUGHPUT_RATIO,
                      ref.FOLDING_THROUGHPUT_TOL)
    l_ok = ref.within(lat_ratio, ref.FOLDING_LATENCY_RATIO, ref.FOLDING_LATENCY_TOL)
    ok = t_ok and l_ok
    report(5, ok, f"throughput ratio {thr_ratio:.3f} (ref 1.99), "
                  f"latency ratio {lat_ratio:.3f} (ref 1.68)")
    assert t_ok, thr_ratio
    assert l_ok, lat_ratio


def test_criterion_6_sweep_reference():
    """Set-IV sweep under 300 GB/s: five (TvLP, CLP) throughput points
    within 10%; required bandwidth at (8,4) within 15% of 257 GB/s."""
    params = PARAM_SETS["IV"]
    rows = sweep_tvlp_clp(params, ARCH, list(ref.SWEEP_PAIRS),
                          bandwidth_cap=ref.SWEEP_BANDWIDTH_CAP)
    lines = []
    ok = True
    bw_84 = None
    for row in rows:
        key = (row["TvLP"], row["CLP"])
        target = ref.SWEEP_THROUGHPUT[key]
        good = ref.within(row["throughput_pbs_per_s"], target,
                          ref.SWEEP_THROUGHPUT_TOL)
        ok &= good
        lines.append(f"{key}: {row['throughput_pbs_per_s']:.0f} vs {target}")
        if key == (8, 4):
            bw_84 = row["required_bandwidth_gb_per_s"]
        assert good, f"{key}: {row['throughput_pbs_per_s']:.0f} vs {target}"
    bw_ok = ref.within(bw_84, ref.SWEEP_REQUIRED_BW_84_GB, ref.SWEEP_REQUIRED_BW_TOL)
    ok &= bw_ok
    report(6, ok, "; ".join(lines) + f"; required bw (8,4) {bw_84:.0f} GB/s vs 257")
    assert bw_ok, bw_84


def test_criterion_7_fragmentation_staircase():
    """Total time vs ciphertext count is piecewise-constant with a 2x
    jump exactly when the count first exceeds the device batch."""
    params = PARAM_SETS["I"]
    device = simulate_pbs_stream(params, ARCH, 1).device_batch
    t = {n: simulate_pbs_stream(params, ARCH, n).staircase_time_s
         for n in (1, 7, device // 2, device - 1, device,
                   device + 1, 2 * device, 2 * device + 1)}
    flat_first = all(t[n] == t[device] for n in (1, 7, device // 2, device - 1))
    doubled = abs(t[device + 1] / t[device] - 2.0) < 1e-9
    flat_second = t[2 * device] == t[device + 1]
    tripled = abs(t[2 * device + 1] / t[device] - 3.0) < 1e-9
    ok = flat_first and doubled and flat_second and tripled
    report(7, ok, f"device batch {device}: constant to {device}, "
                  f"2.00x at {device + 1}, constant to {2 * device}, "
                  f"3.00x at {2 * device + 1}")
    assert ok, t


def test_criterion_8_utilization():
    """Set-I run at three resident ciphertexts per core: streamed units
    >= 0.95 duty, rotator 0.5 +- 0.1, HBM busy 0.6 +- 0.15."""
    rep = simulate_pbs_stream(PARAM_SETS["I"], ARCH, ref.UTILIZATION_NUM_CT)
    streamed = {u: rep.utilization[u]
                for u in ("decomposer", "fft", "vma", "accumulator")}
    streamed_ok = all(v >= ref.UTILIZATION_MIN_STREAMED for v in streamed.values())
    rot_c, rot_w = ref.UTILIZATION_ROTATOR
    rot_ok = abs(rep.utilization["rotator"] - rot_c) <= rot_w
    hbm_c, hbm_w = ref.UTILIZATION_HBM
    hbm_ok = abs(rep.hbm_utilization - hbm_c) <= hbm_w
    ok = streamed_ok and rot_ok and hbm_ok
    report(8, ok, f"streamed {min(streamed.values()):.3f} min, "
                  f"rotator {rep.utilization['rotator']:.3f}, "
                  f"hbm {rep.hbm_utilization:.3f}")
    assert streamed_ok, streamed
    assert rot_ok, rep.utilization["rotator"]
    assert hbm_ok, rep.hbm_utilization


def test_criterion_9_nn_scaling():
    """Workload times for the 20/50/100-layer networks scale linearly in
    the derived bootstrap counts 2588/5348/9948."""
    times = {}
    counts = {}
    for depth, expect_count in ref.NN_PBS_COUNTS.items():
        rep = simulate_nn(depth, PARAM_SETS["I"], ARCH)
        assert rep.pbs_count == expect_count, (depth, rep.pbs_count)
        times[depth] = rep.time_s
        counts[depth] = rep.pbs_count
    ratio_ok = True
    details = []
    for a, b in ((20, 50), (20, 100), (50, 100)):
        tr = times[b] / times[a]
        cr = counts[b] / counts[a]
        ratio_ok &= abs(tr / cr - 1) <= ref.NN_SCALING_TOL
        details.append(f"t{b}/t{a}={tr:.3f} vs {cr:.3f}")
    # the model is exactly affine in bootstrap count: interpolating the
    # middle point from the endpoints reproduces it
    slope = (times[100] - times[20]) / (counts[100] - counts[20])
    affine_ok = abs(times[50] - (times[20] + slope * (counts[50] - counts[20]))) \
        <= 1e-9 * times[50]
    ok = ratio_ok and affine_ok
    report(9, ok, "; ".join(details) + f"; affine={affine_ok}")
    assert ratio_ok, details
    assert affine_ok
