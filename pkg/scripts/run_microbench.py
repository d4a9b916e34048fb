#!/usr/bin/env python3
"""Bootstrap throughput/latency across the four parameter sets, plus the
folding on/off comparison on set I."""

from dataclasses import replace

from tfhesim.archsim import ArchConfig, simulate_pbs_stream
from tfhesim.params import PARAM_SETS
from tfhesim.sched import core_batch_capacity


def main():
    arch = ArchConfig()
    print(f"{'set':>4} {'n':>5} {'N':>6} {'l_b':>4} {'batch':>6} "
          f"{'throughput/s':>13} {'latency ms':>11}")
    for name, params in PARAM_SETS.items():
        num_ct = core_batch_capacity(params, arch.local_spm_bytes) * arch.tvlp
        rep = simulate_pbs_stream(params, arch, num_ct)
        print(f"{name:>4} {params.n:>5} {params.N:>6} {params.l_b:>4} "
              f"{rep.core_batch:>6} {rep.pbs_throughput_per_s:>13.0f} "
              f"{rep.pbs_latency_s * 1e3:>11.3f}")

    print("\nfolding effect on set I:")
    p = PARAM_SETS["I"]
    on = simulate_pbs_stream(p, arch, 640)
    off = simulate_pbs_stream(p, replace(arch, folding=False), 640)
    print(f"  throughput {off.pbs_throughput_per_s:.0f} -> "
          f"{on.pbs_throughput_per_s:.0f}  "
          f"(x{on.pbs_throughput_per_s / off.pbs_throughput_per_s:.2f})")
    print(f"  latency    {off.pbs_latency_s * 1e3:.3f} -> "
          f"{on.pbs_latency_s * 1e3:.3f} ms "
          f"(x{off.pbs_latency_s / on.pbs_latency_s:.2f})")


if __name__ == "__main__":
    main()
