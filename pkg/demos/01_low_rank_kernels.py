"""Tour of the dense kernels: truncated SVD, bilateral random
projections and top-k hard thresholding.

Run: python demos/01_low_rank_kernels.py
"""

import time

import numpy as np

from sdgs import (
    LowRankApproxConfig,
    brp_low_rank_approx,
    hard_threshold_top_k,
    truncated_svd_approx,
)

rng = np.random.default_rng(0)

print("== rank-limited approximation ==")
signal = rng.standard_normal((400, 10)) @ rng.standard_normal((10, 150))
noisy = signal + 0.05 * rng.standard_normal(signal.shape)

svd_out = truncated_svd_approx(noisy, 10)
print(f"truncated SVD, rank 10: residual {np.linalg.norm(noisy - svd_out):.4f}")

cfg = LowRankApproxConfig(target_rank=10, mode="brp")
brp_out = brp_low_rank_approx(noisy, cfg, rng=7)
print(f"randomized (1 pass):    residual {np.linalg.norm(noisy - brp_out):.4f}")

cfg2 = LowRankApproxConfig(target_rank=10, mode="brp", power_passes=2)
brp_out2 = brp_low_rank_approx(noisy, cfg2, rng=7)
print(f"randomized (2 passes):  residual {np.linalg.norm(noisy - brp_out2):.4f}")
print("the second pass drives the sketch onto the dominant singular")
print("subspace, closing most of the gap to the exact truncation\n")

print("== determinism ==")
again = brp_low_rank_approx(noisy, cfg, rng=7)
print(f"same seed twice -> identical output: {np.array_equal(brp_out, again)}\n")

print("== speed at a larger size ==")
big = rng.standard_normal((3000, 8)) @ rng.standard_normal((8, 600))
start = time.perf_counter()
truncated_svd_approx(big, 8)
svd_s = time.perf_counter() - start
start = time.perf_counter()
brp_low_rank_approx(big, LowRankApproxConfig(8, "brp"), rng=1)
brp_s = time.perf_counter() - start
print(f"3000x600 rank-8: exact {svd_s * 1000:.0f} ms, randomized {brp_s * 1000:.0f} ms "
      f"(x{svd_s / brp_s:.1f} faster)\n")

print("== top-k hard thresholding ==")
m = np.zeros((4, 6))
m[1, 2], m[0, 5], m[3, 0], m[2, 4] = 9.0, -7.0, 3.0, -1.0
kept, support = hard_threshold_top_k(m, 2)
print("входные nonzeros:", {(i, j): m[i, j] for i, j in np.argwhere(m)})
print("kept (k=2):", {(i, j): kept[i, j] for i, j in sorted(support)})
