"""Domain types for the MBS -> SBS shared-link caching model.

Contents and SBSs are indexed from zero throughout the package.  A
homogeneous :class:`HybridPlacement` refers to popularity *ranks*, so
``M1 = 3`` means "the three most popular contents", whatever their
indices in the popularity matrix.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence, Union

import numpy as np

__all__ = [
    "PROB_TOL",
    "InstanceTooLarge",
    "SystemConfig",
    "PopularityMatrix",
    "HybridPlacement",
    "HeteroPlacement",
    "LoadReport",
    "DemandMatrix",
    "zipf_popularity",
    "validate",
]

PROB_TOL = 1e-9


class InstanceTooLarge(ValueError):
    """An exhaustive search or enumeration would exceed its exact-mode bound."""


def _frozen(a, dtype=float):
    arr = np.array(a, dtype=dtype)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class SystemConfig:
    """Topology and capacities.

    Parameters
    ----------
    K : int
        Number of SBSs.
    N : int
        Library size (contents).
    M : int
        Cache capacity of every SBS, in whole contents.
    Z : sequence of int
        Number of users (requests per slot) at each SBS.
    F : float
        Content size in bits.  Loads are reported in units of ``F``.
    """

    K: int
    N: int
    M: int
    Z: tuple
    F: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "Z", tuple(int(z) for z in self.Z))
        if self.K < 1:
            raise ValueError(f"K must be >= 1, got {self.K}")
        if self.N < 1:
            raise ValueError(f"N must be >= 1, got {self.N}")
        if not 0 <= self.M <= self.N:
            raise ValueError(f"M must lie in [0, N={self.N}], got {self.M}")
        if len(self.Z) != self.K:
            raise ValueError(f"Z has length {len(self.Z)}, expected K={self.K}")
        if any(z < 0 for z in self.Z):
            raise ValueError("user counts Z must be non-negative")
        if not self.F > 0:
            raise ValueError(f"F must be positive, got {self.F}")

    @property
    def Z_max(self) -> int:
        return max(self.Z)

    @property
    def total_users(self) -> int:
        return sum(self.Z)


@dataclass(frozen=True, eq=False)
class PopularityMatrix:
    """Request probabilities ``p[n, c]`` of content ``n`` at SBS ``c``."""

    p: np.ndarray

    def __post_init__(self):
        p = np.array(self.p, dtype=float)
        if p.ndim != 2:
            raise ValueError("popularity matrix must be 2-D (N x K)")
        if np.any(p < 0) or np.any(p > 1):
            raise ValueError("popularity entries must lie in [0, 1]")
        sums = p.sum(axis=0)
        if np.any(np.abs(sums - 1.0) > PROB_TOL):
            raise ValueError(f"popularity columns must sum to 1, got {sums}")
        p.setflags(write=False)
        object.__setattr__(self, "p", p)

    @classmethod
    def homogeneous(cls, probs, K: int) -> "PopularityMatrix":
        probs = np.asarray(probs, dtype=float)
        return cls(np.repeat(probs[:, None], K, axis=1))

    @property
    def N(self) -> int:
        return self.p.shape[0]

    @property
    def K(self) -> int:
        return self.p.shape[1]

    @property
    def is_homogeneous(self) -> bool:
        return bool(np.all(self.p == self.p[:, :1]))

    @property
    def order(self) -> np.ndarray:
        """Content indices from most to least popular (ties by index).

        Only meaningful for homogeneous matrices; uses the first column.
        """
        return np.argsort(-self.p[:, 0], kind="stable")

    @property
    def sorted_probs(self) -> np.ndarray:
        """Non-increasing popularity vector of a homogeneous matrix."""
        return self.p[self.order, 0]


@dataclass(frozen=True)
class HybridPlacement:
    """Three-group placement: ``M1`` full copies, ``N1 - M1`` coded, rest uncached."""

    M1: int
    N1: int

    def replication(self, K: int, M: int):
        """Subfile replication degree ``T = K (M - M1) / (N1 - M1)``.

        Returned as a :class:`fractions.Fraction`; ``None`` when ``N1 == M1``.
        """
        if self.N1 <= self.M1:
            return None
        return Fraction(K * (M - self.M1), self.N1 - self.M1)

    def T(self, K: int, M: int) -> int:
        t = self.replication(K, M)
        if t is None or t.denominator != 1:
            raise ValueError(f"placement {self} has no integer T for K={K}, M={M}")
        return int(t)

    def is_coded(self, M: int) -> bool:
        return self.N1 > M


@dataclass(frozen=True, eq=False)
class HeteroPlacement:
    """Per-SBS uncoded caches plus one coded scheme per SBS group.

    Parameters
    ----------
    groups : sequence of sequences of int
        The cover; each group lists its member SBSs.
    X : array-like of bool, shape (N, G)
        ``X[n, g]`` is set when content ``n`` takes part in group ``g``'s coded scheme.
    Y : array-like of bool, shape (N, K)
        ``Y[n, c]`` is set when content ``n`` is cached whole at SBS ``c``.
    Mg : sequence of int
        Per-group coded cache share.
    """

    groups: tuple
    X: np.ndarray
    Y: np.ndarray
    Mg: tuple

    def __post_init__(self):
        groups = tuple(tuple(sorted(int(c) for c in g)) for g in self.groups)
        object.__setattr__(self, "groups", groups)
        X = np.array(self.X, dtype=bool)
        if X.size == 0:
            X = X.reshape(np.shape(self.Y)[0], len(groups))
        object.__setattr__(self, "X", _frozen(X, bool))
        object.__setattr__(self, "Y", _frozen(self.Y, bool))
        object.__setattr__(self, "Mg", tuple(int(m) for m in self.Mg))

    @property
    def K(self) -> int:
        return self.Y.shape[1]

    @property
    def S(self) -> np.ndarray:
        """Membership indicators, shape (K, G)."""
        S = np.zeros((self.K, len(self.groups)), dtype=bool)
        for g, members in enumerate(self.groups):
            for c in members:
                if 0 <= c < self.K:
                    S[c, g] = True
        return S

    @property
    def Ng(self) -> np.ndarray:
        return self.X.sum(axis=0)

    @property
    def Kg(self) -> np.ndarray:
        return np.array([len(g) for g in self.groups], dtype=int)

    @property
    def M1c(self) -> np.ndarray:
        return self.Y.sum(axis=0)

    def replication(self, g: int):
        if self.Ng[g] == 0:
            return None
        return Fraction(int(self.Kg[g]) * self.Mg[g], int(self.Ng[g]))

    def Tg(self, g: int) -> int:
        t = self.replication(g)
        if t is None or t.denominator != 1:
            raise ValueError(f"group {g} has no integer T")
        return int(t)

    def encoding(self) -> tuple:
        """Canonical tuple used for deterministic tie-breaking."""
        return (
            self.groups,
            self.Mg,
            tuple(map(tuple, self.X.T.astype(int))),
            tuple(map(tuple, self.Y.T.astype(int))),
        )

    def __eq__(self, other):
        if not isinstance(other, HeteroPlacement):
            return NotImplemented
        return self.encoding() == other.encoding()

    def __hash__(self):
        return hash(self.encoding())


Placement = Union[HybridPlacement, HeteroPlacement]


@dataclass(frozen=True)
class LoadReport:
    """Expected shared-link load in units of ``F``."""

    r1: float
    r2: float
    per_step: np.ndarray = field(repr=False)
    per_group: tuple = field(default=(), repr=False)

    @property
    def r(self) -> float:
        return self.r1 + self.r2

    def bits(self, F: float) -> float:
        return self.r * F


@dataclass(frozen=True, eq=False)
class DemandMatrix:
    """Requested content indices, one array per SBS (duplicates allowed)."""

    rows: tuple

    def __post_init__(self):
        object.__setattr__(self, "rows", tuple(_frozen(r, np.int64) for r in self.rows))

    @property
    def K(self) -> int:
        return len(self.rows)

    def __eq__(self, other):
        if not isinstance(other, DemandMatrix):
            return NotImplemented
        return len(self.rows) == len(other.rows) and all(
            np.array_equal(a, b) for a, b in zip(self.rows, other.rows)
        )


def zipf_popularity(N: int, alpha: float, K: int = 1) -> PopularityMatrix:
    """Zipf popularity ``p_n = n^-alpha / sum_j j^-alpha``, identical at every SBS."""
    if N < 1:
        raise ValueError("N must be >= 1")
    if alpha < 0:
        raise ValueError("alpha must be non-negative")
    w = np.arange(1, N + 1, dtype=float) ** -float(alpha)
    return PopularityMatrix.homogeneous(w / w.sum(), K)


def validate(config: SystemConfig, pop: PopularityMatrix, placement: Placement) -> list:
    """Return the list of violated constraints (empty when the placement is valid)."""
    out = []
    if pop.p.shape != (config.N, config.K):
        out.append(f"popularity shape {pop.p.shape} != (N, K) = ({config.N}, {config.K})")
    if isinstance(placement, HybridPlacement):
        out.extend(_validate_hybrid(config, pop, placement))
    elif isinstance(placement, HeteroPlacement):
        out.extend(_validate_hetero(config, placement))
    else:
        out.append(f"unknown placement type {type(placement).__name__}")
    return out


def _validate_hybrid(config, pop, pl):
    K, N, M = config.K, config.N, config.M
    out = []
    if not pop.is_homogeneous:
        out.append("hybrid placement requires homogeneous popularity")
    if not (0 <= pl.M1 <= M <= pl.N1 <= N):
        out.append(f"bounds: need 0 <= M1 <= M <= N1 <= N, got M1={pl.M1}, M={M}, N1={pl.N1}, N={N}")
        return out
    if pl.N1 == M:
        if pl.M1 != M:
            out.append("N1=M requires M1=M")
    else:
        t = pl.replication(K, M)
        if t.denominator != 1 or t < 1:
            out.append(f"T = K(M-M1)/(N1-M1) = {t} is not a positive integer")
    return out


def _validate_hetero(config, pl):
    K, N, M = config.K, config.N, config.M
    out = []
    G = len(pl.groups)
    if pl.Y.shape != (N, K):
        out.append(f"Y shape {pl.Y.shape} != (N, K) = ({N}, {K})")
        return out
    if pl.X.shape != (N, G):
        out.append(f"X shape {pl.X.shape} != (N, |G|) = ({N}, {G})")
        return out
    if len(pl.Mg) != G:
        out.append(f"Mg has {len(pl.Mg)} entries for {G} groups")
        return out
    covered = set()
    for g, members in enumerate(pl.groups):
        if len(set(members)) != len(members):
            out.append(f"group {g}: duplicate members")
        if any(not 0 <= c < K for c in members):
            out.append(f"group {g}: SBS index out of range")
        if len(set(members)) < 2:
            out.append(f"group {g}: needs at least 2 SBSs")
        covered.update(members)
    # an empty cover is the pure-uncoded placement; the budget check below forces M_1c = M
    if G and covered != set(range(K)):
        out.append(f"cover: SBSs {sorted(set(range(K)) - covered)} are in no group")
    if len(set(pl.groups)) != G:
        out.append("cover: repeated group")
    Ng = pl.Ng
    for g in range(G):
        mg = pl.Mg[g]
        if not 1 <= mg <= M:
            out.append(f"group {g}: need 1 <= M_g <= M, got M_g={mg}")
        if not mg < Ng[g] <= N:
            out.append(f"group {g}: need M_g < N_g <= N, got M_g={mg}, N_g={Ng[g]}")
            continue
        t = pl.replication(g)
        if t.denominator != 1 or t < 1:
            out.append(f"group {g}: T_g = K_g M_g / N_g = {t} is not a positive integer")
    budget = pl.M1c + pl.S.astype(int) @ np.array(pl.Mg, dtype=int)
    for c in range(K):
        if budget[c] != M:
            out.append(f"cache budget: SBS {c} uses M_1c + sum_g M_g = {budget[c]} != M = {M}")
    return out
