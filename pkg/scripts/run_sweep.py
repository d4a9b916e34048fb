#!/usr/bin/env python3
"""Core-count vs lane-count trade-off on the large-ring parameter set
under a fixed external-bandwidth budget."""

import sys

from tfhesim.archsim import ArchConfig, sweep_tvlp_clp
from tfhesim.params import PARAM_SETS
from tfhesim.reference import SWEEP_BANDWIDTH_CAP, SWEEP_PAIRS


def main():
    cap = float(sys.argv[1]) if len(sys.argv) > 1 else SWEEP_BANDWIDTH_CAP
    params = PARAM_SETS["IV"]
    rows = sweep_tvlp_clp(params, ArchConfig(), list(SWEEP_PAIRS), cap)
    print(f"set {params.name}, bandwidth cap {cap / 1e9:.0f} GB/s")
    print(f"{'TvLP':>5} {'CLP':>4} {'throughput/s':>13} {'latency ms':>11} "
          f"{'req BW GB/s':>12} {'bound':>7}")
    for r in rows:
        print(f"{r['TvLP']:>5} {r['CLP']:>4} {r['throughput_pbs_per_s']:>13.0f} "
              f"{r['latency_ms']:>11.2f} {r['required_bandwidth_gb_per_s']:>12.1f} "
              f"{'memory' if r['memory_bound'] else 'compute':>7}")


if __name__ == "__main__":
    main()
