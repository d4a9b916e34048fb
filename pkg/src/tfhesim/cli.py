"""Command-line interface: functional self-tests, microbenchmarks,
parallelism sweeps, network workloads, and encrypted gates.

Exit codes: 0 all checks within tolerance, 1 tolerance or invariant
failure, 2 configuration error.  Failures emit a machine-readable record
on stderr.  Reports are JSON by default, CSV for table-shaped output;
the default output directory comes from TFHESIM_OUT_DIR.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import secrets
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import reference as ref
from .archsim import (
    ArchConfig,
    load_arch,
    simulate_nn,
    simulate_pbs_stream,
    sweep_tvlp_clp,
)
from .params import PARAM_SETS, get_params
from .sched import UnsatisfiableConfigError
from .tfhe import (
    LookUpTable,
    UnsupportedModulusError,
    decrypt_bool,
    decrypt_lwe,
    encrypt_bool,
    encrypt_lwe,
    extracted_key,
    gate_nand,
    keygen,
    keyswitch,
    pbs,
)

OUT_DIR_ENV = "TFHESIM_OUT_DIR"


class ConfigError(ValueError):
    pass


def _out_path(args, default_name: str) -> Path:
    if args.out:
        return Path(args.out)
    base = Path(os.environ.get(OUT_DIR_ENV, "."))
    base.mkdir(parents=True, exist_ok=True)
    ext = "csv" if args.format == "csv" else "json"
    return base / f"{default_name}.{ext}"


def _write_report(report: dict, rows: list | None, args, default_name: str) -> Path:
    path = _out_path(args, default_name)
    if args.format == "csv" and rows is not None:
        with open(path, "w", newline="") as f:
            w = csv.DictWriter(f, fieldnames=list(rows[0].keys()))
            w.writeheader()
            w.writerows(rows)
    else:
        with open(path, "w") as f:
            json.dump(report, f, indent=2, sort_keys=True)
            f.write("\n")
    return path


def _resolve_arch(args) -> ArchConfig:
    arch = load_arch(args.arch_config) if args.arch_config else ArchConfig()
    if args.folding is not None:
        arch = replace(arch, folding=args.folding == "on")
    if getattr(args, "bandwidth_cap", None):
        arch = replace(arch, hbm_bytes_per_s=float(args.bandwidth_cap))
    return arch


def _resolve_seed(args) -> int:
    return args.seed if args.seed is not None else secrets.randbits(48)


def _check(checks: list, name: str, ok: bool, detail: str) -> bool:
    checks.append({"name": name, "passed": bool(ok), "detail": detail})
    print(f"  [{'PASS' if ok else 'FAIL'}] {name}: {detail}")
    return ok


# ---------------------------------------------------------------------------
# subcommands

def cmd_selftest(args) -> int:
    seed = _resolve_seed(args)
    set_names = [args.param_set] if args.param_set else ["I"]
    checks: list = []
    header = {"command": "selftest", "seed": seed, "sets": set_names,
              "schema_version": 1}
    for name in set_names:
        params = get_params(name)
        rng = np.random.default_rng(seed)
        print(f"selftest on set {params.name} (seed {seed})")

        from .transform import NegacyclicTransform, negacyclic_mul_naive
        plan = NegacyclicTransform(64)
        ok = True
        for _ in range(50):
            a = (rng.integers(-128, 128, 64) % (1 << 32)).astype(np.uint32)
            b = (rng.integers(-128, 128, 64) % (1 << 32)).astype(np.uint32)
            ok &= bool(np.array_equal(plan.multiply(a, b), negacyclic_mul_naive(a, b)))
        _check(checks, "transform_oracle", ok, "50 folded-FFT products == naive")

        from .tfhe import gadget_decompose, gadget_recompose
        vals = rng.integers(0, params.q, 10_000, dtype=np.uint64).astype(
            np.uint32 if params.q == 1 << 32 else np.uint64)
        d = gadget_decompose(vals, params.l_b, params.B_b, params.q)
        rec = gadget_recompose(d, params.l_b, params.B_b, params.q)
        err = (vals - rec).astype(np.int64)
        err = np.where(err >= params.q // 2, err - params.q, err)
        bound = params.q // (2 * params.B_b ** params.l_b)
        _check(checks, "decomposition_bound", int(np.abs(err).max()) <= bound,
               f"max err {int(np.abs(err).max())} <= {bound}")

        keys = keygen(params, seed)
        msgs = rng.integers(0, 4, 1000)
        cts = encrypt_lwe(msgs, keys.lwe, params, rng, 2)
        got = decrypt_lwe(cts, keys.lwe, params, 2)
        _check(checks, "lwe_round_trip", bool(np.array_equal(np.asarray(got), msgs)),
               "1000/1000 decrypts")

        pmsg = rng.integers(0, 4, args.num_ct or 32)
        pcts = encrypt_lwe(pmsg, keys.lwe, params, rng, 2)
        outs = pbs(pcts, LookUpTable.identity(2), keys.bsk, params)
        pgot = np.asarray(decrypt_lwe(outs, extracted_key(keys.glwe), params, 2))
        _check(checks, "pbs_identity", bool(np.array_equal(pgot, pmsg)),
               f"{int((pgot == pmsg).sum())}/{len(pmsg)} bootstraps")

        ksout = keyswitch(outs, keys.ksk, params)
        kgot = np.asarray(decrypt_lwe(ksout, keys.lwe, params, 2))
        _check(checks, "keyswitch_identity", bool(np.array_equal(kgot, pmsg)),
               f"{int((kgot == pmsg).sum())}/{len(pmsg)} after switch")

        nand_ok = True
        for b1 in (False, True):
            for b2 in (False, True):
                c1 = encrypt_bool(b1, keys.lwe, params, rng)
                c2 = encrypt_bool(b2, keys.lwe, params, rng)
                o = gate_nand(c1, c2, keys)
                nand_ok &= bool(decrypt_bool(o, keys.lwe, params)) == (not (b1 and b2))
        _check(checks, "nand_truth_table", nand_ok, "4/4 input pairs")

    report = dict(header, checks=checks,
                  passed=all(c["passed"] for c in checks))
    rows = checks
    path = _write_report(report, rows, args, f"selftest_{'_'.join(set_names)}")
    print(f"report: {path}")
    return 0 if report["passed"] else 1


def cmd_microbench(args) -> int:
    arch = _resolve_arch(args)
    set_names = [args.param_set] if args.param_set else list(PARAM_SETS)
    rows = []
    ok = True
    for name in set_names:
        params = get_params(name)
        num_ct = args.num_ct
        if not num_ct:
            from .sched import core_batch_capacity
            num_ct = core_batch_capacity(params, arch.local_spm_bytes) * arch.tvlp
        rep = simulate_pbs_stream(params, arch, num_ct)
        row = {
            "param_set": params.name,
            "num_ct": num_ct,
            "throughput_pbs_per_s": round(rep.pbs_throughput_per_s, 1),
            "latency_ms": round(rep.pbs_latency_s * 1e3, 4),
            "core_batch": rep.core_batch,
            "hbm_utilization": round(rep.hbm_utilization, 4),
        }
        if params.name in ref.THROUGHPUT_PBS_PER_S and arch == ArchConfig():
            t_ok = ref.within(rep.pbs_throughput_per_s,
                              ref.THROUGHPUT_PBS_PER_S[params.name], ref.THROUGHPUT_TOL)
            l_ok = ref.within(rep.pbs_latency_s * 1e3,
                              ref.LATENCY_MS[params.name], ref.LATENCY_TOL)
            row["within_reference"] = t_ok and l_ok
            ok &= t_ok and l_ok
        rows.append(row)
        print(f"set {params.name}: {row['throughput_pbs_per_s']:>9} bootstraps/s, "
              f"{row['latency_ms']} ms latency"
              + ("" if row.get("within_reference", True) else "  [OUT OF TOLERANCE]"))
    report = {"command": "microbench", "schema_version": 1,
              "arch": arch.to_json_dict(), "rows": rows, "passed": ok}
    path = _write_report(report, rows, args, "microbench")
    print(f"report: {path}")
    return 0 if ok else 1


def cmd_sweep(args) -> int:
    arch = _resolve_arch(args)
    params = get_params(args.param_set or "IV")
    cap = float(args.bandwidth_cap) if args.bandwidth_cap else ref.SWEEP_BANDWIDTH_CAP
    pairs = list(ref.SWEEP_PAIRS)
    with ThreadPoolExecutor(max_workers=args.workers) as pool:
        futures = [pool.submit(sweep_tvlp_clp, params, arch, [pr], cap) for pr in pairs]
        rows = [f.result()[0] for f in futures]
    ok = True
    for row in rows:
        key = (row["TvLP"], row["CLP"])
        if params.name == "IV" and key in ref.SWEEP_THROUGHPUT and cap == ref.SWEEP_BANDWIDTH_CAP:
            row["within_reference"] = ref.within(
                row["throughput_pbs_per_s"], ref.SWEEP_THROUGHPUT[key],
                ref.SWEEP_THROUGHPUT_TOL)
            ok &= row["within_reference"]
        print(f"TvLP={row['TvLP']:>2} CLP={row['CLP']:>2}: "
              f"{row['throughput_pbs_per_s']:8.0f} bootstraps/s, "
              f"{row['latency_ms']:6.2f} ms, "
              f"{row['required_bandwidth_gb_per_s']:7.1f} GB/s required")
    report = {"command": "sweep", "schema_version": 1, "param_set": params.name,
              "bandwidth_cap": cap, "rows": rows, "passed": ok}
    path = _write_report(report, rows, args, f"sweep_{params.name}")
    print(f"report: {path}")
    return 0 if ok else 1


def cmd_nn(args) -> int:
    arch = _resolve_arch(args)
    params = get_params(args.param_set or "I")
    depths = [int(d) for d in (args.depths or "20,50,100").split(",")]
    rows = []
    for d in depths:
        rep = simulate_nn(d, params, arch)
        rows.append({"depth": d, "pbs_count": rep.pbs_count,
                     "time_ms": round(rep.time_s * 1e3, 3)})
        print(f"depth {d:>3}: {rep.pbs_count:>5} bootstraps, {rep.time_s*1e3:9.2f} ms")
    ok = all(b["time_ms"] > a["time_ms"] for a, b in zip(rows, rows[1:]))
    report = {"command": "nn", "schema_version": 1, "param_set": params.name,
              "rows": rows, "passed": ok}
    path = _write_report(report, rows, args, f"nn_{params.name}")
    print(f"report: {path}")
    return 0 if ok else 1


def cmd_gates(args) -> int:
    seed = _resolve_seed(args)
    params = get_params(args.param_set or "I")
    trials = args.trials
    keys = keygen(params, seed)
    rng = np.random.default_rng(seed + 1)
    rows = []
    ok = True
    for b1 in (False, True):
        for b2 in (False, True):
            c1 = encrypt_bool(np.full(trials, b1), keys.lwe, params, rng)
            c2 = encrypt_bool(np.full(trials, b2), keys.lwe, params, rng)
            outs = gate_nand(c1, c2, keys)
            got = decrypt_bool(outs, keys.lwe, params)
            correct = int((got == (not (b1 and b2))).sum())
            rows.append({"a": int(b1), "b": int(b2), "trials": trials,
                         "correct": correct})
            ok &= correct == trials
            print(f"NAND({int(b1)},{int(b2)}): {correct}/{trials} correct")
    report = {"command": "gates", "schema_version": 1, "seed": seed,
              "param_set": params.name, "rows": rows, "passed": ok}
    path = _write_report(report, rows, args, f"gates_{params.name}")
    print(f"report: {path}")
    return 0 if ok else 1


# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="tfhesim",
        description="TFHE engine and streaming-accelerator performance model")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, bandwidth=False):
        sp.add_argument("--param-set", help="I..IV or a parameter JSON file")
        sp.add_argument("--arch-config", help="architecture JSON file")
        sp.add_argument("--num-ct", type=int, help="ciphertexts per run")
        sp.add_argument("--seed", type=int, help="PRNG seed (recorded in report)")
        sp.add_argument("--out", help="report file path")
        sp.add_argument("--format", choices=("json", "csv"), default="json")
        sp.add_argument("--folding", choices=("on", "off"), default=None)
        if bandwidth:
            sp.add_argument("--bandwidth-cap", type=float,
                            help="external bandwidth limit in bytes/s")

    sp = sub.add_parser("selftest", help="functional invariant suite")
    common(sp)
    sp.set_defaults(func=cmd_selftest)

    sp = sub.add_parser("microbench", help="throughput/latency per parameter set")
    common(sp, bandwidth=True)
    sp.set_defaults(func=cmd_microbench)

    sp = sub.add_parser("sweep", help="TvLP/CLP trade-off table")
    common(sp, bandwidth=True)
    sp.add_argument("--workers", type=int, default=4, help="sweep worker pool size")
    sp.set_defaults(func=cmd_sweep)

    sp = sub.add_parser("nn", help="staged-network workload times")
    common(sp)
    sp.add_argument("--depths", help="comma-separated layer depths (default 20,50,100)")
    sp.set_defaults(func=cmd_nn)

    sp = sub.add_parser("gates", help="encrypted NAND truth tables")
    common(sp)
    sp.add_argument("--trials", type=int, default=25, help="trials per input pair")
    sp.set_defaults(func=cmd_gates)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, UnsatisfiableConfigError, UnsupportedModulusError,
            ValueError, FileNotFoundError) as e:
        record = {"error": str(e), "kind": type(e).__name__, "command": args.command}
        print(json.dumps(record), file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
