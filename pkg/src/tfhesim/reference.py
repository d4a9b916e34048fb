"""Reference operating points for the modeled accelerator.

The performance model is calibrated against these figures; the
microbench/sweep commands and the acceptance suite judge runs against
them at the stated tolerances.
"""

# chip-level bootstrap rate and single-ciphertext latency per parameter set
THROUGHPUT_PBS_PER_S = {"I": 74_696, "II": 39_600, "III": 21_104, "IV": 2_368}
LATENCY_MS = {"I": 0.16, "II": 0.23, "III": 0.44, "IV": 3.31}
THROUGHPUT_TOL = 0.10
LATENCY_TOL = 0.15

# effect of the FFT folding scheme on set I
FOLDING_THROUGHPUT_RATIO = 1.99
FOLDING_THROUGHPUT_TOL = 0.10
FOLDING_LATENCY_RATIO = 1.68
FOLDING_LATENCY_TOL = 0.15

# core-count/lane-count trade-off on set IV under a 300 GB/s stack
SWEEP_BANDWIDTH_CAP = 300e9
SWEEP_PAIRS = ((16, 2), (8, 4), (4, 8), (2, 16), (1, 32))
SWEEP_THROUGHPUT = {(16, 2): 2368, (8, 4): 2368, (4, 8): 2364,
                    (2, 16): 1240, (1, 32): 620}
SWEEP_THROUGHPUT_TOL = 0.10
SWEEP_REQUIRED_BW_84_GB = 257.0
SWEEP_REQUIRED_BW_TOL = 0.15

# functional-unit duty on set I with three resident ciphertexts per core
UTILIZATION_MIN_STREAMED = 0.95      # decomposer, fft, vma, accumulator
UTILIZATION_ROTATOR = (0.5, 0.1)     # center, half-width
UTILIZATION_HBM = (0.6, 0.15)
UTILIZATION_NUM_CT = 24              # 3 per core at TvLP=8

# workload shape: bootstrap counts of the staged benchmark network
NN_PBS_COUNTS = {20: 2588, 50: 5348, 100: 9948}
NN_SCALING_TOL = 0.05


def within(value: float, target: float, tol: float) -> bool:
    return abs(value / target - 1.0) <= tol
