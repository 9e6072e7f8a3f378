"""Exhaustive placement search.

Homogeneous popularity: every ``(N1, M1)`` with an integer replication
degree ``T`` is scored analytically; the pure-coded (``M1 = 0``) and
pure-uncoded (``N1 = M``) baselines are restrictions of the same search.

Heterogeneous popularity: covers of the SBS set by groups of size >= 2,
per-group coded shares and contents, and per-SBS uncoded caches are
searched exactly on small instances.  For a fixed coded layout the best
uncoded caches are found by a dynamic program over contents whose state is
the vector of per-SBS cache slots already used.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations, product
from math import prod

import numpy as np

from .analysis import _hybrid_coded, _miss_prob, expected_uncoded_load, group_coded_load, total_load
from .model import (
    HeteroPlacement,
    HybridPlacement,
    InstanceTooLarge,
    LoadReport,
    PopularityMatrix,
    SystemConfig,
)

__all__ = [
    "SearchResult",
    "hybrid_candidates",
    "optimize_hybrid",
    "optimize_pure_coded",
    "optimize_pure_uncoded",
    "candidate_groups",
    "enumerate_covers",
    "best_uncoded_caches",
    "optimize_hetero",
    "HETERO_BOUNDS",
]

TIE_TOL = 1e-12
HETERO_BOUNDS = {"K": 5, "N": 8, "M": 4}
UNCODED_BOUNDS = {"K": 5, "N": 12}
COVER_MAX_K = 6


@dataclass(frozen=True, eq=False)
class SearchResult:
    placement: object
    report: LoadReport
    evaluated: int
    log: tuple = field(default=(), repr=False)
    pruned: bool = False

    @property
    def r(self) -> float:
        return self.report.r


def _pick(scored, key):
    """Minimum score; near-ties (within TIE_TOL) go to the smallest ``key``."""
    best = min(s for s, _ in scored)
    tol = TIE_TOL * max(1.0, abs(best))
    return min((item for s, item in scored if s <= best + tol), key=key)


# --- homogeneous ---------------------------------------------------------------


def hybrid_candidates(config: SystemConfig, pure_coded: bool = False) -> list:
    """All valid ``HybridPlacement`` values, ordered by ``(M1, N1)``.

    With ``pure_coded`` only ``M1 = 0`` coded placements are listed.
    """
    K, N, M = config.K, config.N, config.M
    out = [] if pure_coded else [HybridPlacement(M, M)]
    m1_range = ([0] if M > 0 else []) if pure_coded else range(M)
    for M1 in m1_range:
        d = M - M1
        # N1 - M1 = K d / T with 1 <= T <= K-1 enumerates every integer T with N1 > M
        n1s = sorted(M1 + K * d // T for T in range(1, K) if (K * d) % T == 0)
        out.extend(HybridPlacement(M1, n1) for n1 in n1s if n1 <= N)
    return out


def _score_hybrid(config, pop, candidates):
    p = pop.sorted_probs
    mass = np.concatenate([[0.0], np.cumsum(p)])
    miss = _miss_prob(p, config.total_users)
    r2_from = np.concatenate([np.cumsum(miss[::-1])[::-1], [0.0]])
    scored = []
    for pl in candidates:
        r1 = float(_hybrid_coded(config, mass[pl.N1] - mass[pl.M1], pl.M1, pl.N1).sum())
        scored.append((r1 + float(r2_from[pl.N1]), pl))
    return scored


def _homogeneous_search(config, pop, candidates, keep_log, simulate_slots=None, seed=0):
    if not pop.is_homogeneous:
        raise ValueError("this search needs a homogeneous popularity matrix")
    if simulate_slots:
        from .simulator import simulate

        scored = [(simulate(config, pop, pl, simulate_slots, seed).mean_r, pl) for pl in candidates]
    else:
        scored = _score_hybrid(config, pop, candidates)
    best = _pick(scored, key=lambda pl: (pl.N1, pl.M1))
    return SearchResult(
        placement=best,
        report=total_load(config, pop, best),
        evaluated=len(scored),
        log=tuple((pl, r) for r, pl in scored) if keep_log else (),
    )


def optimize_hybrid(config: SystemConfig, pop: PopularityMatrix, keep_log: bool = False) -> SearchResult:
    """Minimise ``r1 + r2`` over all three-group placements with integer ``T``."""
    return _homogeneous_search(config, pop, hybrid_candidates(config), keep_log)


def optimize_pure_coded(
    config: SystemConfig,
    pop: PopularityMatrix,
    keep_log: bool = False,
    simulate_slots: int | None = None,
    seed: int = 0,
) -> SearchResult:
    """Best two-partition placement (``M1 = 0``): ``N1`` most popular contents coded, rest uncached.

    The analytic ``q_j`` approximation is loosest here, so ``simulate_slots``
    optionally ranks the candidates by simulated load instead.  When no coded
    placement exists (``M = 0`` or ``M = N``) the uncoded placement is returned.
    Heterogeneous matrices are delegated to the exact small-instance search.
    """
    if not pop.is_homogeneous:
        return _hetero_pure_coded(config, pop)
    cands = hybrid_candidates(config, pure_coded=True) or [HybridPlacement(config.M, config.M)]
    return _homogeneous_search(config, pop, cands, keep_log, simulate_slots, seed)


def optimize_pure_uncoded(config: SystemConfig, pop: PopularityMatrix) -> SearchResult:
    """Best placement without coding.

    Homogeneous: the ``M`` most popular contents everywhere.  Heterogeneous:
    exact search over per-SBS caches with the broadcast-aware uncoded load.
    """
    if pop.is_homogeneous:
        pl = HybridPlacement(config.M, config.M)
        return SearchResult(pl, total_load(config, pop, pl), evaluated=1)
    _check_bounds(config, UNCODED_BOUNDS)
    f = _miss_factors(config, pop, np.zeros((config.N, config.K), dtype=bool))
    Y = best_uncoded_caches(f, [config.M] * config.K)
    pl = HeteroPlacement((), np.zeros((config.N, 0), bool), Y, ())
    return SearchResult(pl, total_load(config, pop, pl), evaluated=1)


# --- heterogeneous ---------------------------------------------------------------


def _check_bounds(config, bounds):
    for name, limit in bounds.items():
        value = getattr(config, name)
        if value > limit:
            raise InstanceTooLarge(f"{name}={value} exceeds the exact-mode bound {name} <= {limit}")


def candidate_groups(K: int) -> list:
    """Every SBS subset of size >= 2 (``2^K - K - 1`` of them), by size then lexicographically."""
    return [g for size in range(2, K + 1) for g in combinations(range(K), size)]


def enumerate_covers(K: int, max_groups: int | None = None):
    """Yield every cover of ``range(K)`` by at most ``max_groups`` distinct candidate groups."""
    if K > COVER_MAX_K:
        raise InstanceTooLarge(f"K={K} exceeds the exact-mode bound K <= {COVER_MAX_K}")
    groups = candidate_groups(K)
    everyone = set(range(K))
    top = len(groups) if max_groups is None else min(max_groups, len(groups))
    for size in range(1, top + 1):
        for cover in combinations(groups, size):
            if set().union(*cover) == everyone:
                yield cover


_MASKS = {}


def _subset_masks(K):
    if K not in _MASKS:
        a = np.arange(2**K)
        _MASKS[K] = ((a[:, None] >> np.arange(K)[None, :]) & 1).astype(bool)
    return _MASKS[K]


def _miss_factors(config, pop, covered):
    """``(1 - p[n,c])^Z_c`` where ``(n, c)`` is not coded-covered, else 1."""
    Z = np.array(config.Z, dtype=float)
    with np.errstate(divide="ignore"):
        f = np.exp(Z[None, :] * np.log1p(-pop.p))
    return np.where(covered, 1.0, f)


def best_uncoded_caches(f: np.ndarray, caps) -> np.ndarray:
    """Choose ``Y`` (``caps[c]`` contents per SBS) minimising ``sum_n 1 - prod_{c: not Y[n,c]} f[n,c]``.

    ``f[n, c]`` is the probability that SBS ``c`` sends no request for content
    ``n`` to the MBS when it does not cache it.  Exact: dynamic programming
    over contents, state = slots used per SBS.  Ties go to the lowest subset
    code, contents processed in index order.
    """
    N, K = f.shape
    caps = [int(c) for c in caps]
    masks = _subset_masks(K)
    ok = [a for a in range(2**K) if all(caps[c] > 0 for c in np.flatnonzero(masks[a]))]
    keep = np.prod(np.where(masks[None, :, :], 1.0, f[:, None, :]), axis=2)  # (N, 2^K)
    shape = tuple(c + 1 for c in caps)
    V = np.full(shape, -np.inf)
    V[(0,) * K] = 0.0
    choice = []
    for n in range(N):
        padded = np.pad(V, [(1, 0)] * K, constant_values=-np.inf)
        best = np.full(shape, -np.inf)
        arg = np.zeros(shape, dtype=np.int64)
        for a in ok:
            idx = tuple(slice(0, -1) if masks[a, c] else slice(1, None) for c in range(K))
            cand = padded[idx] + keep[n, a]
            better = cand > best
            best = np.where(better, cand, best)
            arg = np.where(better, a, arg)
        V = best
        choice.append(arg)
    if not np.isfinite(V[tuple(caps)]):
        raise ValueError(f"cannot fill caches of sizes {caps} from {N} contents")
    Y = np.zeros((N, K), dtype=bool)
    used = list(caps)
    for n in reversed(range(N)):
        a = choice[n][tuple(used)]
        Y[n] = masks[a]
        used = [u - int(m) for u, m in zip(used, masks[a])]
    return Y


class _HeteroEngine:
    """Shared scoring state for one heterogeneous search."""

    def __init__(self, config, pop):
        self.config = config
        self.pop = pop
        self._r1 = {}
        self._y = {}

    def group_r1(self, members, Mg, x):
        key = (members, Mg, x)
        if key not in self._r1:
            self._r1[key] = float(group_coded_load(self.config, self.pop, members, np.array(x, bool), Mg).sum())
        return self._r1[key]

    def uncoded(self, covered, caps):
        key = (covered.tobytes(), tuple(caps))
        if key not in self._y:
            f = _miss_factors(self.config, self.pop, covered)
            self._y[key] = best_uncoded_caches(f, caps)
        return self._y[key]

    def x_options(self, members, Mg, prune):
        N = self.config.N
        Kg = len(members)
        out = []
        weight = (self.pop.p[:, list(members)] * np.array([self.config.Z[c] for c in members])).sum(axis=1)
        ranked = np.argsort(-weight, kind="stable")
        for Ng in range(Mg + 1, N + 1):
            if (Kg * Mg) % Ng:
                continue
            subsets = [tuple(sorted(ranked[:Ng]))] if prune else combinations(range(N), Ng)
            for s in subsets:
                x = np.zeros(N, dtype=bool)
                x[list(s)] = True
                out.append(tuple(x.tolist()))
        return out

    def layouts(self, covers, mg_options, prune):
        """Yield ``(cover, Mg, per-group X options, caps)`` for every feasible share assignment."""
        K, M = self.config.K, self.config.M
        for cover in covers:
            S = np.zeros((K, len(cover)), dtype=int)
            for g, members in enumerate(cover):
                S[list(members), g] = 1
            if S.sum(axis=1).max() > M:
                continue
            for Mg in mg_options(cover):
                caps = M - S @ np.array(Mg)
                if caps.min() < 0:
                    continue
                opts = [self.x_options(members, mg, prune) for members, mg in zip(cover, Mg)]
                if all(opts):
                    yield cover, Mg, opts, caps, S

    def search(self, covers, mg_options, prune, budget, include_uncoded):
        covers = list(covers)
        total = sum(prod(len(o) for o in opts) for _, _, opts, _, _ in self.layouts(covers, mg_options, prune))
        if total > budget:
            raise InstanceTooLarge(
                f"{total} coded layouts exceed the exact-search budget of {budget}; "
                "lower max_groups or enable prune"
            )
        N, K, M = self.config.N, self.config.K, self.config.M
        scored = []
        if include_uncoded:
            Y = self.uncoded(np.zeros((N, K), bool), [M] * K)
            pl = HeteroPlacement((), np.zeros((N, 0), bool), Y, ())
            scored.append((total_load(self.config, self.pop, pl).r, pl))
        for cover, Mg, opts, caps, S in self.layouts(covers, mg_options, prune):
            for xs in product(*opts):
                X = np.array(xs, dtype=bool).T
                covered = (X.astype(int) @ S.T) > 0
                Y = self.uncoded(covered, caps)
                pl = HeteroPlacement(cover, X, Y, Mg)
                r1 = sum(self.group_r1(m, mg, x) for m, mg, x in zip(cover, Mg, xs))
                scored.append((r1 + expected_uncoded_load(self.config, self.pop, pl), pl))
        if not scored:
            return None
        best = _pick(scored, key=lambda pl: pl.encoding())
        return SearchResult(best, total_load(self.config, self.pop, best), evaluated=len(scored), pruned=prune)


def optimize_hetero(
    config: SystemConfig,
    pop: PopularityMatrix,
    max_groups: int = 2,
    single_group: bool = False,
    prune: bool = False,
    budget: int = 200_000,
) -> SearchResult:
    """Exact hybrid search for SBS-dependent popularity on small instances.

    Parameters
    ----------
    max_groups : int
        Largest number of groups in a cover.
    single_group : bool
        Only consider the cover made of one group holding every SBS.
    prune : bool
        Per group, only try the top-``N_g`` contents by ``sum_c Z_c p[n, c]``
        instead of every ``N_g``-subset.  Flagged on the result.
    budget : int
        Refuse (``InstanceTooLarge``) when more coded layouts than this
        would be scored.

    The pure-uncoded placement (empty cover) is always among the candidates.
    """
    _check_bounds(config, HETERO_BOUNDS)
    if config.K < 2:
        return optimize_pure_uncoded(config, pop)
    M = config.M
    covers = [(tuple(range(config.K)),)] if single_group else enumerate_covers(config.K, max_groups)
    engine = _HeteroEngine(config, pop)
    return engine.search(
        covers,
        lambda cover: product(range(1, M + 1), repeat=len(cover)),
        prune,
        budget,
        include_uncoded=True,
    )


def _hetero_pure_coded(config, pop):
    _check_bounds(config, UNCODED_BOUNDS)
    M = config.M
    res = None
    if config.K >= 2 and 0 < M < config.N:
        engine = _HeteroEngine(config, pop)
        res = engine.search([(tuple(range(config.K)),)], lambda cover: [(M,)], False, float("inf"), False)
    return res or optimize_pure_uncoded(config, pop)
