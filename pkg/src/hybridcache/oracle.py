"""Brute-force references for tiny instances.

Nothing here shares code with :mod:`hybridcache.analysis` or
:mod:`hybridcache.simulator`; the tests compare the two sides.  Rational
arithmetic is used wherever the inputs allow (floats convert exactly).
"""
from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from math import comb, prod

import numpy as np

from .model import HeteroPlacement, HybridPlacement, InstanceTooLarge, PopularityMatrix, SystemConfig

__all__ = [
    "ExactDistribution",
    "exact_distinct_distribution",
    "exact_queue_distribution",
    "exact_expected_load",
]

MAX_SEQUENCES = 10**7
MAX_OUTCOMES = 10**6
MAX_QUEUES = 20


@dataclass(frozen=True)
class ExactDistribution:
    """Probabilities of integer outcomes, as exact fractions."""

    probs: dict

    def __getitem__(self, k):
        return self.probs.get(k, Fraction(0))

    def as_array(self, size: int) -> np.ndarray:
        return np.array([float(self[k]) for k in range(size)])

    @property
    def total(self) -> Fraction:
        return sum(self.probs.values(), Fraction(0))

    def mean(self) -> Fraction:
        return sum((k * p for k, p in self.probs.items()), Fraction(0))


def _frac(x) -> Fraction:
    return x if isinstance(x, Fraction) else Fraction(x)


def exact_distinct_distribution(p_coded, Z: int) -> ExactDistribution:
    """Distribution of the number of distinct coded contents among ``Z`` i.i.d. requests.

    ``p_coded[n]`` is the request probability of coded content ``n``; the
    remaining mass ``1 - sum(p_coded)`` goes to contents that are not coded.
    Every request sequence is enumerated.
    """
    probs = [_frac(x) for x in p_coded]
    other = 1 - sum(probs, Fraction(0))
    symbols = [(n, p) for n, p in enumerate(probs) if p > 0]
    if other > 0:
        symbols.append((None, other))
    if Z and len(symbols) ** Z > MAX_SEQUENCES:
        raise InstanceTooLarge(f"{len(symbols)}^{Z} request sequences exceed {MAX_SEQUENCES}")
    tally = defaultdict(Fraction)
    for seq in product(symbols, repeat=Z):
        weight = prod((p for _, p in seq), start=Fraction(1))
        tally[len({n for n, _ in seq if n is not None})] += weight
    return ExactDistribution(dict(tally))


def exact_queue_distribution(P) -> ExactDistribution:
    """Number of successes among independent Bernoulli(``P[c]``) indicators, by polynomial convolution."""
    P = [_frac(x) for x in P]
    if len(P) > MAX_QUEUES:
        raise InstanceTooLarge(f"K={len(P)} exceeds {MAX_QUEUES}")
    poly = [Fraction(1)]
    for pc in P:
        nxt = [Fraction(0)] * (len(poly) + 1)
        for k, a in enumerate(poly):
            nxt[k] += a * (1 - pc)
            nxt[k + 1] += a * pc
        poly = nxt
    return ExactDistribution({k: a for k, a in enumerate(poly) if a != 0})


def _classify(config: SystemConfig, pop: PopularityMatrix, placement):
    """``kind[c][n]`` is 'L', 'U', or a coded group index, plus per-group (members, T, cap)."""
    N, K, M = config.N, config.K, config.M
    kind = [["U"] * N for _ in range(K)]
    if isinstance(placement, HybridPlacement):
        col = [float(x) for x in pop.p[:, 0]]
        ranked = sorted(range(N), key=lambda n: (-col[n], n))
        groups = []
        for c in range(K):
            for n in ranked[: placement.M1]:
                kind[c][n] = "L"
            if placement.N1 > M:
                for n in ranked[placement.M1 : placement.N1]:
                    kind[c][n] = 0
        if placement.N1 > M:
            T = K * (M - placement.M1) // (placement.N1 - placement.M1)
            groups.append((tuple(range(K)), T, placement.N1 - M))
        return kind, groups
    groups = []
    for g, members in enumerate(placement.groups):
        Ng = int(placement.X[:, g].sum())
        groups.append((members, len(members) * placement.Mg[g] // Ng, Ng - placement.Mg[g]))
    for c in range(K):
        for n in range(N):
            if placement.Y[n, c]:
                kind[c][n] = "L"
                continue
            for g, members in enumerate(placement.groups):
                if c in members and placement.X[n, g]:
                    kind[c][n] = g
                    break
    return kind, groups


def exact_expected_load(config: SystemConfig, pop: PopularityMatrix, placement) -> Fraction:
    """Exact expectation of one slot's shared-link load (units of ``F``).

    Each SBS's ``N^Z_c`` demand vectors are enumerated and summarised by the
    distinct coded contents it queues per group and the uncoded contents it
    asks for; SBS summaries are then combined over every joint outcome.
    """
    N, K = config.N, config.K
    if prod(N ** z for z in config.Z) > MAX_OUTCOMES:
        raise InstanceTooLarge(f"joint demand outcomes exceed {MAX_OUTCOMES}")
    kind, groups = _classify(config, pop, placement)
    per_sbs = []
    for c in range(K):
        col = [_frac(float(x)) for x in pop.p[:, c]]
        summary = defaultdict(Fraction)
        for demand in product(range(N), repeat=config.Z[c]):
            weight = prod((col[n] for n in demand), start=Fraction(1))
            if weight == 0:
                continue
            coded = tuple(len({n for n in demand if kind[c][n] == g}) for g in range(len(groups)))
            uncoded = frozenset(n for n in demand if kind[c][n] == "U")
            summary[(coded, uncoded)] += weight
        per_sbs.append(list(summary.items()))

    expected = Fraction(0)
    for outcome in product(*per_sbs):
        weight = prod((w for _, w in outcome), start=Fraction(1))
        load = Fraction(len(frozenset().union(*(u for (_, u), _ in outcome))))
        for g, (members, T, cap) in enumerate(groups):
            lengths = [outcome[c][0][0][g] for c in members]
            Kg = len(members)
            for i in range(1, max(lengths, default=0) + 1):
                k = sum(1 for n in lengths if n >= i)
                load += min(Fraction(comb(Kg, T + 1) - comb(Kg - k, T + 1), comb(Kg, T)), cap)
        expected += weight * load
    return expected
