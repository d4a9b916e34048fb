"""Deterministic cycle-level performance model of the streaming accelerator.

The modeled machine is a set of TvLP cores, each a fully pipelined chain
of five functional units (rotator, decomposer, I/FFT, vector
multiply-add, accumulator) fed by a two-level scratchpad hierarchy and an
HBM stack whose channels are split between bootstrapping-key,
keyswitching-key, and ciphertext streams.

The model is analytical at per-iteration granularity: one blind-rotation
iteration streams the core's ciphertext batch through the pipeline in
core_batch * per_lwe_cycles cycles (the FFT initiation interval is the
bottleneck stage), floored by the time to stream the next
bootstrapping-key slice over HBM.  All reported figures are exact
functions of the configuration, so identical inputs give identical
reports.

Calibration constants (stream word widths, pipeline fill per FFT stage)
are ArchConfig fields with defaults fitted to the reference operating
points exercised in the acceptance suite.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

from .params import TfheParams
from .sched import (
    build_nn_workload,
    core_batch_capacity,
    fragment_count,
    plan_epochs,
    total_time,
)
from .transform import fft_initiation_interval

SCHEMA_VERSION = 1

UNITS = ("rotator", "decomposer", "fft", "vma", "accumulator")


@dataclass(frozen=True)
class ArchConfig:
    tvlp: int = 8                    # cores (test-vector level parallelism)
    clp: int = 4                     # FFT lanes (coefficient level)
    plp: int = 2                     # FFT/VMA instance pairs (polynomial level)
    colp: int = 2                    # output-column instances
    clock_hz: float = 1.2e9
    local_spm_bytes: int = 640 * 1024          # 0.625 MB per core
    global_spm_bytes: int = 21 * 1024 * 1024   # shared key/ciphertext store
    hbm_bytes_per_s: float = 300e9
    hbm_channels: tuple = (8, 4, 4)  # (bsk, ksk, ct) split of 16 channels
    folding: bool = True
    ks_clp: int = 8                  # keyswitch cluster lanes, fixed
    ks_colp: int = 8
    fft_stage_fill_cycles: int = 10  # pipeline fill per FFT stage (calibrated)
    bsk_stream_bytes_per_coeff: int = 6   # spectral 48-bit re+im per point
    ksk_stream_bytes_per_coeff: int = 4

    def __post_init__(self):
        for nm in ("tvlp", "clp", "plp", "colp", "ks_clp", "ks_colp"):
            if getattr(self, nm) < 1:
                raise ValueError(f"{nm} must be positive")
        if len(self.hbm_channels) != 3 or any(c < 0 for c in self.hbm_channels):
            raise ValueError("hbm_channels must be three non-negative counts")

    @property
    def hbm_share(self) -> dict:
        """Bandwidth per stream class under the channel split."""
        total = sum(self.hbm_channels)
        return {
            "bsk": self.hbm_bytes_per_s * self.hbm_channels[0] / total,
            "ksk": self.hbm_bytes_per_s * self.hbm_channels[1] / total,
            "ct": self.hbm_bytes_per_s * self.hbm_channels[2] / total,
        }

    _JSON_ALIASES = {"TvLP": "tvlp", "CLP": "clp", "PLP": "plp", "CoLP": "colp"}

    def to_json_dict(self) -> dict:
        d = asdict(self)
        d["hbm_channels"] = list(self.hbm_channels)
        for alias, nm in self._JSON_ALIASES.items():
            d[alias] = d.pop(nm)
        return d

    @classmethod
    def from_json_dict(cls, d: dict) -> "ArchConfig":
        d = dict(d)
        for alias, nm in cls._JSON_ALIASES.items():
            if alias in d:
                d[nm] = d.pop(alias)
        known = set(cls.__dataclass_fields__)
        unknown = set(d) - known
        if unknown:
            raise ValueError(f"unknown arch fields: {sorted(unknown)}")
        if "hbm_channels" in d:
            d["hbm_channels"] = tuple(d["hbm_channels"])
        return cls(**d)


def load_arch(path: str | Path) -> ArchConfig:
    with open(path) as f:
        return ArchConfig.from_json_dict(json.load(f))


def save_arch(arch: ArchConfig, path: str | Path) -> None:
    with open(path, "w") as f:
        json.dump(arch.to_json_dict(), f, indent=2, sort_keys=True)
        f.write("\n")


def _ceil_div(a: int, b: int) -> int:
    return -(-a // b)


# ---------------------------------------------------------------------------
# per-iteration building blocks

def effective_points(params: TfheParams, arch: ArchConfig) -> int:
    """FFT points per polynomial: folding halves the transform length."""
    return params.N // 2 if arch.folding else params.N


def per_lwe_cycles(params: TfheParams, arch: ArchConfig) -> int:
    """Pipeline occupancy of one ciphertext in one blind-rotation iteration.

    (k+1)*l_b decomposed polynomials stream through PLP transform pairs,
    each polynomial holding an FFT pipe for one initiation interval.
    """
    rows = (params.k + 1) * params.l_b
    interval = fft_initiation_interval(params.N, arch.clp, arch.folding)
    return _ceil_div(rows, arch.plp) * interval


def pipeline_fill_cycles(params: TfheParams, arch: ArchConfig) -> int:
    """First-output delay of the unit chain, dominated by the FFT stages."""
    stages = int(math.log2(effective_points(params, arch)))
    return arch.fft_stage_fill_cycles * stages


def bsk_bytes_per_iteration(params: TfheParams, arch: ArchConfig) -> int:
    """One GGSW, multicast to all cores once per iteration."""
    coeffs = (params.k + 1) * params.l_b * (params.k + 1) * params.N
    return coeffs * arch.bsk_stream_bytes_per_coeff


def ksk_bytes_total(params: TfheParams, arch: ArchConfig) -> int:
    """The whole keyswitching key, streamed once per epoch it overlaps."""
    return params.k * params.N * params.l_k * (params.n + 1) * \
        arch.ksk_stream_bytes_per_coeff


def memory_floor_cycles(params: TfheParams, arch: ArchConfig,
                        overlap_keyswitch: bool = True) -> int:
    """Minimum iteration spacing imposed by streaming keys over HBM.

    The next iteration's bootstrapping-key slice (plus its share of the
    keyswitching-key stream when keyswitching overlaps) must arrive
    within one iteration; transfers may use the full stack since idle
    channel groups yield to the dominant stream.
    """
    bytes_per_iter = bsk_bytes_per_iteration(params, arch)
    if overlap_keyswitch:
        bytes_per_iter += ksk_bytes_total(params, arch) / params.n
    return int(math.ceil(bytes_per_iter * arch.clock_hz / arch.hbm_bytes_per_s))


def iteration_cycles(params: TfheParams, arch: ArchConfig, core_batch: int,
                     overlap_keyswitch: bool = True) -> int:
    """One blind-rotation iteration with core_batch ciphertexts in flight.

    Streaming hides the pipeline fill once at least two ciphertexts are
    in flight per iteration; below that the fill is exposed.  The HBM
    floor applies regardless of batch.
    """
    if core_batch < 1:
        raise ValueError("core batch must be at least 1")
    plw = per_lwe_cycles(params, arch)
    compute = max(core_batch * plw, plw + pipeline_fill_cycles(params, arch))
    return max(compute, memory_floor_cycles(params, arch, overlap_keyswitch))


def compute_bound_throughput(params: TfheParams, arch: ArchConfig) -> float:
    """Closed-form ceiling: TvLP * clock / (n * per_lwe_cycles)."""
    return arch.tvlp * arch.clock_hz / (params.n * per_lwe_cycles(params, arch))


def single_ct_latency_s(params: TfheParams, arch: ArchConfig) -> float:
    """Service latency of one ciphertext's bootstrap, keyswitch excluded.

    n iterations at batch 1 (floored by the bootstrapping-key stream
    alone: no keyswitch traffic competes inside one bootstrap), plus the
    modulus-switch and sample-extract epilogues.
    """
    plw = per_lwe_cycles(params, arch)
    iter_cycles = max(plw + pipeline_fill_cycles(params, arch),
                      memory_floor_cycles(params, arch, overlap_keyswitch=False))
    epilogue = (params.n + 1) + params.N // (2 * arch.clp)
    return (params.n * iter_cycles + epilogue) / arch.clock_hz


# ---------------------------------------------------------------------------
# keyswitch cluster

def keyswitch_cycles_per_lwe(params: TfheParams, arch: ArchConfig) -> int:
    """Tiled vector-matrix multiply over the k*N*l_k x (n+1) key."""
    macs = params.k * params.N * params.l_k * (params.n + 1)
    return _ceil_div(macs, arch.ks_clp * arch.ks_colp)


@dataclass(frozen=True)
class KeyswitchReport:
    num_ct: int
    cycles_per_lwe: int
    ks_time_s: float        # standalone, per fully loaded core
    exposed_s: float        # after hiding behind the next rotation window

    def to_json_dict(self) -> dict:
        return asdict(self)


def simulate_keyswitch(params: TfheParams, arch: ArchConfig, num_ct: int,
                       next_epoch_br_s: float = 0.0) -> KeyswitchReport:
    """Keyswitch num_ct ciphertexts, overlapped against the next rotation.

    Exposed time is whatever the next epoch's blind rotation cannot
    cover; with no following epoch (next_epoch_br_s = 0) the whole
    keyswitch is exposed.
    """
    if num_ct < 1:
        raise ValueError("need at least one ciphertext")
    per_core = _ceil_div(num_ct, arch.tvlp)
    cyc = keyswitch_cycles_per_lwe(params, arch)
    ks_time = per_core * cyc / arch.clock_hz
    return KeyswitchReport(
        num_ct=num_ct,
        cycles_per_lwe=cyc,
        ks_time_s=ks_time,
        exposed_s=max(0.0, ks_time - next_epoch_br_s),
    )


# ---------------------------------------------------------------------------
# bandwidth

def required_bandwidth(params: TfheParams, arch: ArchConfig) -> dict:
    """Bandwidth needed to keep the cores streaming at full batch.

    bsk_stream: the per-iteration key slice over the iteration's compute
    time at full core-batch occupancy (scales with the clock).
    ksk_ct_reserved: the channel-split allocation held for keyswitching
    keys and ciphertext I/O, counted as provisioned bandwidth.
    """
    cb = core_batch_capacity(params, arch.local_spm_bytes)
    compute_cycles = max(cb * per_lwe_cycles(params, arch),
                         per_lwe_cycles(params, arch) + pipeline_fill_cycles(params, arch))
    iter_time = compute_cycles / arch.clock_hz
    bsk_rate = bsk_bytes_per_iteration(params, arch) / iter_time
    share = arch.hbm_share
    reserved = share["ksk"] + share["ct"]
    return {
        "bsk_stream_bytes_per_s": bsk_rate,
        "ksk_ct_reserved_bytes_per_s": reserved,
        "total_bytes_per_s": bsk_rate + reserved,
    }


# ---------------------------------------------------------------------------
# stream simulation

@dataclass(frozen=True)
class SimReport:
    schema_version: int
    params_name: str
    num_ct: int
    core_batch: int
    device_batch: int
    num_epochs: int
    fragmentation: int
    per_lwe_cycles: int
    iteration_cycles_full: int
    pbs_latency_s: float            # single-ciphertext service latency
    pbs_latency_steady_s: float     # full epoch time / device batch
    pbs_throughput_per_s: float     # sustainable rotation-pipeline rate
    br_time_s: float                # blind-rotation span of this run
    ks_time_s: float
    ks_exposed_s: float
    makespan_s: float               # br_time + exposed keyswitch tail
    staircase_time_s: float         # fragments x full-capacity pass time
    utilization: dict               # unit -> busy fraction of the BR span
    hbm_utilization: float          # bootstrapping-key channel-group duty
    hbm_channel_utilization: dict
    required_bandwidth_bytes_per_s: float
    required_bandwidth_breakdown: dict
    trace: list = field(default_factory=list, repr=False)

    def to_json_dict(self) -> dict:
        d = asdict(self)
        d.pop("trace")
        return d

    def write_json(self, path: str | Path) -> None:
        with open(path, "w") as f:
            json.dump(self.to_json_dict(), f, indent=2, sort_keys=True)
            f.write("\n")

    def write_trace_csv(self, path: str | Path) -> None:
        with open(path, "w", newline="") as f:
            w = csv.writer(f)
            w.writerow(["epoch", "iteration", "unit", "busy_cycles"])
            w.writerows(self.trace)


def validate_report_dict(d: dict) -> None:
    """Reject unknown fields and version drift in a serialized report."""
    known = set(SimReport.__dataclass_fields__) - {"trace"}
    unknown = set(d) - known
    if unknown:
        raise ValueError(f"unknown report fields: {sorted(unknown)}")
    if d.get("schema_version") != SCHEMA_VERSION:
        raise ValueError(f"unsupported report schema {d.get('schema_version')}")


def simulate_pbs_stream(params: TfheParams, arch: ArchConfig, num_ct: int,
                        overlap_keyswitch: bool = True,
                        collect_trace: bool = False) -> SimReport:
    """Advance epochs x n blind-rotation iterations and account busy time.

    Per-unit busy cycles follow each unit's occupancy: the decomposer,
    transform, multiply-add, and accumulator stages stream every resident
    ciphertext for its full pipeline interval each iteration, while the
    rotator touches each ciphertext for one read-modify pass of its
    2*CLP lanes.  HBM busy time is the bootstrapping-key slice over the
    bsk channel group, double-buffered against compute.  Throughput is
    the sustainable rotation-pipeline rate; keyswitch runs on its own
    cluster and only its un-hidden tail extends the makespan.
    """
    if num_ct < 1:
        raise ValueError("need at least one ciphertext")
    plan = plan_epochs(num_ct, arch, params)
    plw = per_lwe_cycles(params, arch)
    fill = pipeline_fill_cycles(params, arch)
    rot_pass = params.N // (2 * arch.clp)
    share = arch.hbm_share
    bsk_cycles = bsk_bytes_per_iteration(params, arch) * arch.clock_hz / share["bsk"]
    ksk_cycles_epoch = (ksk_bytes_total(params, arch) * arch.clock_hz / share["ksk"]
                        if overlap_keyswitch else 0.0)
    ks_per_lwe = keyswitch_cycles_per_lwe(params, arch)

    busy = {u: 0.0 for u in UNITS}
    hbm_busy = {"bsk": 0.0, "ksk": 0.0, "ct": 0.0}
    total_cycles = 0.0
    trace = []
    epoch_infos = []
    for e, (lo, hi) in enumerate(plan.epochs):
        cb = _ceil_div(hi - lo, arch.tvlp)
        iter_c = iteration_cycles(params, arch, cb, overlap_keyswitch)
        epoch_cycles = params.n * iter_c + fill
        per_iter = {
            "rotator": cb * rot_pass,
            "decomposer": cb * plw,
            "fft": cb * plw,
            "vma": cb * plw,
            "accumulator": cb * plw,
        }
        for u in UNITS:
            busy[u] += params.n * per_iter[u]
        hbm_busy["bsk"] += params.n * min(bsk_cycles, iter_c)
        hbm_busy["ksk"] += params.n * min(ksk_cycles_epoch / params.n, iter_c)
        total_cycles += epoch_cycles
        epoch_infos.append((hi - lo, cb, iter_c, epoch_cycles))
        if collect_trace:
            for i in range(params.n):
                for u in UNITS:
                    trace.append((e, i, u, per_iter[u]))
                trace.append((e, i, "hbm_bsk", round(min(bsk_cycles, iter_c), 3)))

    br_time = total_cycles / arch.clock_hz

    # keyswitch: epoch e hides behind epoch e+1's rotation; the last tail
    # is exposed
    ks_total = 0.0
    ks_exposed = 0.0
    for e, (count, cb, _, epoch_cycles) in enumerate(epoch_infos):
        ks_cyc = cb * ks_per_lwe
        ks_total += ks_cyc / arch.clock_hz
        next_window = (epoch_infos[e + 1][3] / arch.clock_hz
                       if e + 1 < len(epoch_infos) else 0.0)
        ks_exposed += max(0.0, ks_cyc / arch.clock_hz - next_window)

    # full-capacity reference pass for the fragmentation staircase
    full_iter = iteration_cycles(params, arch, plan.core_batch, overlap_keyswitch)
    full_epoch_s = (params.n * full_iter + fill) / arch.clock_hz
    frags = fragment_count(num_ct, plan.device_batch)
    staircase = total_time(frags, full_epoch_s)

    bw = required_bandwidth(params, arch)
    util = {u: busy[u] / total_cycles for u in UNITS}
    hbm_util = {k: v / total_cycles for k, v in hbm_busy.items()}

    return SimReport(
        schema_version=SCHEMA_VERSION,
        params_name=params.name,
        num_ct=num_ct,
        core_batch=plan.core_batch,
        device_batch=plan.device_batch,
        num_epochs=plan.num_epochs,
        fragmentation=frags,
        per_lwe_cycles=plw,
        iteration_cycles_full=full_iter,
        pbs_latency_s=single_ct_latency_s(params, arch),
        pbs_latency_steady_s=full_epoch_s / plan.device_batch,
        pbs_throughput_per_s=num_ct / br_time,
        br_time_s=br_time,
        ks_time_s=ks_total,
        ks_exposed_s=ks_exposed,
        makespan_s=br_time + ks_exposed,
        staircase_time_s=staircase,
        utilization=util,
        hbm_utilization=hbm_util["bsk"],
        hbm_channel_utilization=hbm_util,
        required_bandwidth_bytes_per_s=bw["total_bytes_per_s"],
        required_bandwidth_breakdown=bw,
        trace=trace,
    )


# ---------------------------------------------------------------------------
# sweeps and workloads

def sweep_tvlp_clp(params: TfheParams, arch: ArchConfig, pairs,
                   bandwidth_cap: float | None = None) -> list:
    """Re-instantiate the machine at each (TvLP, CLP) point and simulate.

    The product TvLP*CLP must stay constant (same silicon budget).  The
    bandwidth cap replaces the HBM rate, so over-demanding points go
    memory-bound through the iteration floor.
    """
    products = {t * c for t, c in pairs}
    if len(products) != 1:
        raise ValueError("TvLP * CLP must be constant across sweep points")
    rows = []
    for tvlp, clp in pairs:
        point = replace(arch, tvlp=tvlp, clp=clp,
                        hbm_bytes_per_s=bandwidth_cap or arch.hbm_bytes_per_s)
        cb = core_batch_capacity(params, point.local_spm_bytes)
        report = simulate_pbs_stream(params, point, num_ct=cb * tvlp)
        plw = per_lwe_cycles(params, point)
        compute = max(cb * plw, plw + pipeline_fill_cycles(params, point))
        rows.append({
            "TvLP": tvlp,
            "CLP": clp,
            "throughput_pbs_per_s": report.pbs_throughput_per_s,
            "latency_ms": report.pbs_latency_s * 1e3,
            "required_bandwidth_gb_per_s":
                report.required_bandwidth_bytes_per_s / 1e9,
            "memory_bound": memory_floor_cycles(params, point) > compute,
        })
    return rows


@dataclass(frozen=True)
class WorkloadReport:
    name: str
    pbs_count: int
    time_s: float
    node_times: dict

    def to_json_dict(self) -> dict:
        return asdict(self)


def simulate_workload(graph, params: TfheParams, arch: ArchConfig,
                      name: str = "workload") -> WorkloadReport:
    """Makespan of a dependency chain of bootstrap and linear nodes.

    Each bootstrap node runs its ciphertexts through the rotation
    pipeline; its keyswitch hides behind the node's own next epoch where
    possible, and the un-hidden tail is exposed because a dependent layer
    cannot start early.  Linear nodes are free.
    """
    node_times = {}
    total = 0.0
    for node in graph.nodes:
        if node.kind != "pbs" or node.count == 0:
            node_times[node.name] = 0.0
            continue
        rep = simulate_pbs_stream(params, arch, node.count)
        t = rep.makespan_s
        node_times[node.name] = t
        total += t
    return WorkloadReport(name=name, pbs_count=graph.pbs_count,
                          time_s=total, node_times=node_times)


def simulate_nn(depth: int, params: TfheParams, arch: ArchConfig) -> WorkloadReport:
    graph = build_nn_workload(depth, params)
    return simulate_workload(graph, params, arch, name=f"nn-{depth}")
