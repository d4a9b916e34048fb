"""Two-level ciphertext batching and workload planning.

Device-level batching spreads ciphertexts across cores that share one
bootstrapping-key stream; core-level batching streams several ciphertexts
through one core per blind-rotation iteration.  When a run exceeds the
combined batch capacity, the extra sequential blind-rotation passes are
fragments: total time grows in steps of one full pass per fragment.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

from .params import TfheParams


class UnsatisfiableConfigError(ValueError):
    """A workload or buffer cannot fit the configured hardware."""


def fragment_count(num_ct: int, batch_size: int) -> int:
    """ceil(num_ct / batch_size) - 1 extra sequential passes; 0 for no work."""
    if batch_size < 1:
        raise ValueError("batch size must be at least 1")
    if num_ct < 0:
        raise ValueError("ciphertext count must be non-negative")
    if num_ct == 0:
        return 0
    return -(-num_ct // batch_size) - 1


def total_time(frags: int, br_time_per_core: float) -> float:
    """(fragments + 1) passes, each costing one blind-rotation round."""
    if frags < 0 or br_time_per_core < 0:
        raise ValueError("inputs must be non-negative")
    return (frags + 1) * br_time_per_core


@dataclass(frozen=True)
class BatchPlan:
    core_batch: int                 # ciphertexts streamed per core per iteration
    device_batch: int               # core_batch * cores
    epochs: tuple                   # ((start, stop), ...) index ranges

    @property
    def num_epochs(self) -> int:
        return len(self.epochs)


def core_batch_capacity(params: TfheParams, local_spm_bytes: int) -> int:
    """Test vectors that fit the per-core scratchpad.

    One resident test vector is (k+1) polynomials of N coefficients at
    the modulus word width.
    """
    footprint = (params.k + 1) * params.N * params.coeff_bytes
    cap = local_spm_bytes // footprint
    if cap < 1:
        raise UnsatisfiableConfigError(
            f"test-vector footprint {footprint} B exceeds local scratchpad "
            f"{local_spm_bytes} B")
    return int(cap)


def plan_epochs(num_ct: int, arch, params: TfheParams) -> BatchPlan:
    """Partition a run into epochs of at most device_batch ciphertexts."""
    if num_ct < 1:
        raise ValueError("need at least one ciphertext")
    cb = core_batch_capacity(params, arch.local_spm_bytes)
    device = cb * arch.tvlp
    spans = []
    lo = 0
    while lo < num_ct:
        hi = min(num_ct, lo + device)
        spans.append((lo, hi))
        lo = hi
    return BatchPlan(core_batch=cb, device_batch=device, epochs=tuple(spans))


# ---------------------------------------------------------------------------
# workload graphs

NODE_KINDS = ("pbs", "linear")


@dataclass(frozen=True)
class WorkloadNode:
    name: str
    kind: str            # "pbs" (bootstrap + keyswitch) or "linear"
    count: int           # ciphertexts through this node
    deps: tuple = ()

    def __post_init__(self):
        if self.kind not in NODE_KINDS:
            raise ValueError(f"unknown node kind {self.kind!r}")
        if self.count < 0:
            raise ValueError("node count must be non-negative")


@dataclass(frozen=True)
class WorkloadGraph:
    nodes: tuple

    def __post_init__(self):
        names = [n.name for n in self.nodes]
        if len(set(names)) != len(names):
            raise ValueError("duplicate node names")
        known = set()
        for n in self.nodes:  # topological input order, so deps must precede
            for d in n.deps:
                if d not in known:
                    raise ValueError(f"node {n.name!r} depends on {d!r} "
                                     "which is undefined or later in the order")
            known.add(n.name)

    @property
    def pbs_count(self) -> int:
        return sum(n.count for n in self.nodes if n.kind == "pbs")

    def to_json_dict(self) -> dict:
        return {"nodes": [{"name": n.name, "kind": n.kind, "count": n.count,
                           "deps": list(n.deps)} for n in self.nodes]}

    @classmethod
    def from_json_dict(cls, d: dict) -> "WorkloadGraph":
        extra = set(d) - {"nodes"}
        if extra:
            raise ValueError(f"unknown workload fields: {sorted(extra)}")
        nodes = []
        for nd in d["nodes"]:
            extra = set(nd) - {"name", "kind", "count", "deps"}
            if extra:
                raise ValueError(f"unknown node fields: {sorted(extra)}")
            nodes.append(WorkloadNode(name=nd["name"], kind=nd["kind"],
                                      count=int(nd["count"]),
                                      deps=tuple(nd.get("deps", ()))))
        return cls(nodes=tuple(nodes))


def load_workload(path: str | Path) -> WorkloadGraph:
    with open(path) as f:
        return WorkloadGraph.from_json_dict(json.load(f))


def save_workload(graph: WorkloadGraph, path: str | Path) -> None:
    with open(path, "w") as f:
        json.dump(graph.to_json_dict(), f, indent=2)
        f.write("\n")


# Deep-NN benchmark shape: a 10x11 convolution over a 28x28 input image
# produces [1, 2, 21, 20] = 840 activations, then dense layers of 92
# neurons; every activation costs one bootstrap.
NN_CONV_OUTPUTS = 2 * 21 * 20
NN_DENSE_WIDTH = 92


def build_nn_workload(depth: int, params: TfheParams) -> WorkloadGraph:
    """PBS/keyswitch workload shape of the depth-layer benchmark network.

    Bootstrap count is 840 for the convolution stage plus 92 per dense
    layer; linear nodes carry zero modeled cost between them.
    """
    if depth < 1:
        raise ValueError(f"unsupported depth {depth}: need at least 1 layer")
    nodes = [WorkloadNode("conv", "pbs", NN_CONV_OUTPUTS)]
    prev = "conv"
    for i in range(1, depth):
        lin = WorkloadNode(f"linear{i}", "linear", NN_DENSE_WIDTH, deps=(prev,))
        act = WorkloadNode(f"dense{i}", "pbs", NN_DENSE_WIDTH, deps=(lin.name,))
        nodes.extend([lin, act])
        prev = act.name
    return WorkloadGraph(nodes=tuple(nodes))
