"""TFHE engine with programmable bootstrapping plus a cycle-level
performance model of a streaming bootstrap accelerator."""

from .archsim import (
    ArchConfig,
    SimReport,
    iteration_cycles,
    required_bandwidth,
    simulate_keyswitch,
    simulate_nn,
    simulate_pbs_stream,
    sweep_tvlp_clp,
)
from .params import PARAM_SETS, TfheParams, get_params
from .sched import WorkloadGraph, build_nn_workload, fragment_count, plan_epochs, total_time
from .tfhe import (
    KeySet,
    LookUpTable,
    blind_rotate,
    bootstrap,
    decrypt_bool,
    decrypt_lwe,
    encrypt_bool,
    encrypt_lwe,
    external_product,
    gadget_decompose,
    gate_nand,
    keygen,
    keyswitch,
    pbs,
    sample_extract,
)
from .transform import NegacyclicTransform, negacyclic_mul_naive

__version__ = "0.1.0"

__all__ = [
    "ArchConfig", "SimReport", "PARAM_SETS", "TfheParams", "get_params",
    "WorkloadGraph", "build_nn_workload", "fragment_count", "plan_epochs",
    "total_time", "KeySet", "LookUpTable", "blind_rotate", "bootstrap",
    "decrypt_bool", "decrypt_lwe", "encrypt_bool", "encrypt_lwe",
    "external_product", "gadget_decompose", "gate_nand", "keygen",
    "keyswitch", "pbs", "sample_extract", "NegacyclicTransform",
    "negacyclic_mul_naive", "iteration_cycles", "required_bandwidth",
    "simulate_keyswitch", "simulate_nn", "simulate_pbs_stream",
    "sweep_tvlp_clp", "__version__",
]
