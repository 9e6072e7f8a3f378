"""Monte Carlo check of the analytical load.

Simulates 2000 slots at the optimal hybrid placement for a few user-count
vectors, then shows where the rank approximation behind the coded-load
formula breaks down: a pure coded placement under steep popularity.
"""
from hybridcache import HybridPlacement, SystemConfig, simulate, total_load, zipf_popularity

cases = [
    ([10] * 10, 1.0, HybridPlacement(37, 352)),
    ([1, 1, 1, 1, 1, 5, 15, 20, 25, 30], 1.0, HybridPlacement(52, 172)),
    ([10] * 10, 1.6, HybridPlacement(0, 125)),  # pure coded, most popular contents in the coded set
]

for Z, alpha, pl in cases:
    cfg = SystemConfig(K=10, N=1000, M=100, Z=Z)
    pop = zipf_popularity(1000, alpha, 10)
    rep = simulate(cfg, pop, pl, slots=2000, seed=1, threads=4)
    r = total_load(cfg, pop, pl).r
    print(f"Z={Z} alpha={alpha} (M1={pl.M1}, N1={pl.N1})")
    print(f"   analysis {r:.3f}   simulation {rep.mean_r:.3f} +/- {rep.se_r:.3f}"
          f"   gap {100 * (r - rep.mean_r) / r:+.1f}%")

# the formula treats the coded set as if it were uniform; repeated requests for
# a hot coded content are undercounted as duplicates, so it overestimates r1
