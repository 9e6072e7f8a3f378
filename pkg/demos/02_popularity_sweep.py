"""Hybrid placement against the two baselines as popularity skew grows.

Pure coded caching wins when demand is flat, pure uncoded caching when a few
contents dominate; the hybrid placement contains both and never does worse.
"""
import numpy as np

from hybridcache import (
    SystemConfig,
    optimize_hybrid,
    optimize_pure_coded,
    optimize_pure_uncoded,
    zipf_popularity,
)

cfg = SystemConfig(K=10, N=1000, M=100, Z=[10] * 10)

print(f"{'alpha':>5} {'hybrid':>8} {'coded':>8} {'uncoded':>8}  (N1*, M1*)  saving vs best baseline")
for alpha in np.round(np.arange(0.5, 1.61, 0.1), 2):
    pop = zipf_popularity(cfg.N, alpha, cfg.K)
    hy = optimize_hybrid(cfg, pop)
    pc = optimize_pure_coded(cfg, pop)
    pu = optimize_pure_uncoded(cfg, pop)
    best_base = min(pc.r, pu.r)
    print(f"{alpha:5.1f} {hy.r:8.3f} {pc.r:8.3f} {pu.r:8.3f}  ({hy.placement.N1:4d}, {hy.placement.M1:3d})"
          f"  {100 * (1 - hy.r / best_base):5.1f}%")
