"""Closed-form expected MBS load of hybrid coded/uncoded placements.

The coded load is built bottom-up: the probability ``q_j`` that the next
request at an SBS is the ``j``-th distinct coded content gives the
distribution of the number ``l_c`` of distinct coded requests per SBS;
its tail sums ``P[c, i] = Pr{l_c >= i}`` give the number ``Q_i`` of
non-empty coded queues at delivery step ``i``; and each step costs
``(C(K, T+1) - C(K-Q_i, T+1)) / C(K, T)`` contents on the shared link.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from math import comb

import numpy as np

from .model import (
    HeteroPlacement,
    HybridPlacement,
    LoadReport,
    PopularityMatrix,
    SystemConfig,
)

__all__ = [
    "DistinctRequestDistribution",
    "QueueOccupancyDistribution",
    "q_coded",
    "q_coded_group",
    "distinct_distribution",
    "queue_distribution",
    "coded_step_load",
    "step_load_table",
    "group_coded_load",
    "expected_coded_load",
    "expected_uncoded_load",
    "total_load",
]


@dataclass(frozen=True)
class DistinctRequestDistribution:
    """``pmf[j] = Pr{l = j}`` for ``j = 0..Z`` and tail sums ``tail[i] = Pr{l >= i}``."""

    pmf: np.ndarray
    tail: np.ndarray

    def P(self, i: int) -> float:
        return float(self.tail[i]) if 0 <= i < len(self.tail) else 0.0


@dataclass(frozen=True)
class QueueOccupancyDistribution:
    """``pmf[k, i-1] = Pr{Q_i = k}`` for ``k = 0..K`` and steps ``i = 1..steps``."""

    pmf: np.ndarray

    def step(self, i: int) -> np.ndarray:
        return self.pmf[:, i - 1]


def q_coded(pop: PopularityMatrix, placement: HybridPlacement, c: int, j: int) -> float:
    """Approximate probability that SBS ``c``'s next request is its ``j``-th distinct coded content.

    Exact when popularity is uniform over the coded contents; otherwise the
    already-requested mass is approximated by ``(j-1)/(N1-M1)`` of the coded mass.
    """
    if j < 1:
        raise ValueError(f"rank j must be >= 1, got {j}")
    L = placement.N1 - placement.M1
    if j > L:
        return 0.0
    mass = float(pop.sorted_probs[placement.M1:placement.N1].sum())
    return (1.0 - (j - 1) / L) * mass


def q_coded_group(pop: PopularityMatrix, placement: HeteroPlacement, c: int, g: int, j: int) -> float:
    """Heterogeneous twin of :func:`q_coded` for SBS ``c`` within group ``g``."""
    if c not in placement.groups[g]:
        raise ValueError(f"SBS {c} is not a member of group {g}")
    if j < 1:
        raise ValueError(f"rank j must be >= 1, got {j}")
    Ng = int(placement.Ng[g])
    if j > Ng:
        return 0.0
    mass = float(pop.p[placement.X[:, g], c].sum())
    return (1.0 - (j - 1) / Ng) * mass


def distinct_distribution(q, Z: int) -> DistinctRequestDistribution:
    """Distribution of the number of distinct coded requests among ``Z`` requests.

    Parameters
    ----------
    q : callable or sequence
        ``q(j)`` (or ``q[j-1]``) is the probability that a request is a new
        distinct coded content given ``j - 1`` have been seen.  Ranks beyond a
        sequence's length count as zero.
    Z : int
        Number of requests at the SBS.
    """
    if callable(q):
        qv = np.array([0.0] + [q(j) for j in range(1, Z + 2)], dtype=float)
    else:
        seq = np.asarray(q, dtype=float)[: Z + 1]
        qv = np.zeros(Z + 2)
        qv[1 : 1 + len(seq)] = seq
    pr = np.zeros(Z + 1)
    pr[0] = 1.0
    for z in range(1, Z + 1):
        new = np.zeros_like(pr)
        new[0] = pr[0] * (1.0 - qv[1])
        new[1 : z + 1] = pr[1 : z + 1] * (1.0 - qv[2 : z + 2]) + pr[0:z] * qv[1 : z + 1]
        pr = new
    tail = np.cumsum(pr[::-1])[::-1]
    return DistinctRequestDistribution(pmf=pr, tail=tail)


def queue_distribution(P) -> np.ndarray:
    """Distribution of the number of non-empty queues.

    ``P`` has shape ``(K,)`` or ``(K, steps)``: ``P[c, i]`` is the probability
    that queue ``c`` is non-empty at a step.  Returns ``pmf`` with shape
    ``(K+1,)`` or ``(K+1, steps)`` accordingly.
    """
    P = np.asarray(P, dtype=float)
    K = P.shape[0]
    pr = np.zeros((K + 1,) + P.shape[1:])
    pr[0] = 1.0
    for c in range(K):
        pc = P[c]
        new = np.zeros_like(pr)
        new[0] = pr[0] * (1.0 - pc)
        new[1 : c + 2] = pr[1 : c + 2] * (1.0 - pc) + pr[0 : c + 1] * pc
        pr = new
    return pr


def coded_step_load(K: int, T: int, k: int, N1: int, M: int) -> float:
    """Coded load of one delivery step with ``k`` non-empty queues.

    ``min((C(K,T+1) - C(K-k,T+1)) / C(K,T), N1 - M)``.  Python integers keep
    the binomials exact; the true division rounds once.
    """
    if not 0 <= k <= K:
        raise ValueError(f"k must lie in [0, K={K}], got {k}")
    num = comb(K, T + 1) - comb(K - k, T + 1)
    return min(num / comb(K, T), N1 - M)


@lru_cache(maxsize=4096)
def _step_table(K: int, T: int, cap: int) -> np.ndarray:
    out = np.array([coded_step_load(K, T, k, cap, 0) for k in range(K + 1)])
    out.setflags(write=False)
    return out


def step_load_table(K: int, T: int, N1: int, M: int) -> np.ndarray:
    """``coded_step_load`` for every ``k = 0..K``."""
    return _step_table(K, T, N1 - M)


@lru_cache(maxsize=65536)
def _tail_for(L: int, mass: float, Z: int) -> np.ndarray:
    # P_i for i = 1..Z when the coded set has L contents carrying total probability `mass`
    j = np.arange(1, min(L, Z + 1) + 1)
    q = (1.0 - (j - 1) / L) * mass
    tail = distinct_distribution(q, Z).tail[1:]
    tail.setflags(write=False)
    return tail


def _tail_matrix(Ls, masses, Zs, steps):
    P = np.zeros((len(Zs), steps))
    for row, (L, mass, Z) in enumerate(zip(Ls, masses, Zs)):
        if Z and L and mass > 0:
            P[row, :Z] = _tail_for(int(L), float(mass), int(Z))
    return P


def _group_coded_load(Kg, T, cap, P):
    """Per-step expected coded load for one coded scheme given ``P`` of shape (Kg, steps)."""
    pmf = queue_distribution(P)
    table = _step_table(Kg, T, cap)
    return table @ pmf


def _hybrid_coded(config: SystemConfig, mass: float, M1: int, N1: int) -> np.ndarray:
    K, M = config.K, config.M
    steps = config.Z_max
    if N1 <= M or steps == 0:
        return np.zeros(steps)
    L = N1 - M1
    T = HybridPlacement(M1, N1).T(K, M)
    P = _tail_matrix([L] * K, [mass] * K, config.Z, steps)
    return _group_coded_load(K, T, N1 - M, P)


def group_coded_load(config: SystemConfig, pop: PopularityMatrix, members, x_mask, Mg: int) -> np.ndarray:
    """Per-step expected coded load of one SBS group running its own coded scheme.

    ``x_mask`` selects the group's coded contents (``N_g`` of them).  Returns
    zeros when ``N_g <= M_g`` (nothing to code).
    """
    steps = config.Z_max
    x_mask = np.asarray(x_mask, dtype=bool)
    Ng = int(x_mask.sum())
    if Ng <= Mg or steps == 0:
        return np.zeros(steps)
    Kg = len(members)
    if (Kg * Mg) % Ng:
        raise ValueError(f"T_g = {Kg}*{Mg}/{Ng} is not an integer")
    masses = pop.p[x_mask][:, list(members)].sum(axis=0)
    Zs = [config.Z[c] for c in members]
    P = _tail_matrix([Ng] * Kg, masses, Zs, steps)
    return _group_coded_load(Kg, Kg * Mg // Ng, Ng - Mg, P)


def _hetero_coded(config: SystemConfig, pop: PopularityMatrix, pl: HeteroPlacement) -> list:
    return [group_coded_load(config, pop, members, pl.X[:, g], pl.Mg[g])
            for g, members in enumerate(pl.groups)]


def expected_coded_load(config: SystemConfig, pop: PopularityMatrix, placement):
    """Expected coded load ``r1`` and its per-step breakdown.

    For a :class:`HeteroPlacement` the per-step vector is summed over groups.
    """
    if isinstance(placement, HeteroPlacement):
        per_group = _hetero_coded(config, pop, placement)
        per_step = np.sum(per_group, axis=0) if per_group else np.zeros(config.Z_max)
        return float(per_step.sum()), per_step
    mass = float(pop.sorted_probs[placement.M1:placement.N1].sum())
    per_step = _hybrid_coded(config, mass, placement.M1, placement.N1)
    return float(per_step.sum()), per_step


def _miss_prob(p, Z):
    # 1 - (1 - p)^Z without cancellation for small p
    p = np.asarray(p, dtype=float)
    with np.errstate(divide="ignore"):
        return -np.expm1(Z * np.log1p(-p))


def expected_uncoded_load(config: SystemConfig, pop: PopularityMatrix, placement) -> float:
    """Expected number of distinct uncached contents requested in a slot."""
    if isinstance(placement, HeteroPlacement):
        coded_here = (placement.X.astype(int) @ placement.S.T.astype(int)) > 0
        exposed = np.where(placement.Y | coded_here, 0.0, pop.p)
        Z = np.array(config.Z, dtype=float)
        with np.errstate(divide="ignore"):
            log_none = (Z[None, :] * np.log1p(-exposed)).sum(axis=1)
        return float(-np.expm1(log_none).sum())
    tail = pop.sorted_probs[placement.N1:]
    return float(_miss_prob(tail, config.total_users).sum())


def total_load(config: SystemConfig, pop: PopularityMatrix, placement) -> LoadReport:
    """Expected total load ``r = r1 + r2`` (units of ``F``)."""
    if isinstance(placement, HeteroPlacement):
        per_group = _hetero_coded(config, pop, placement)
        per_step = np.sum(per_group, axis=0) if per_group else np.zeros(config.Z_max)
        r2 = expected_uncoded_load(config, pop, placement)
        return LoadReport(float(per_step.sum()), r2, per_step, tuple(per_group))
    r1, per_step = expected_coded_load(config, pop, placement)
    r2 = expected_uncoded_load(config, pop, placement)
    return LoadReport(r1, r2, per_step)
