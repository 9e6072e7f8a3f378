"""Monte Carlo delivery-phase simulator and a bit-level XOR codec check.

Every slot draws its demands from its own ``SeedSequence(seed, spawn_key=(slot,))``
substream, so a run's first ``n`` slots do not depend on how many slots are
requested, and parallel runs reproduce serial runs exactly.
"""
from __future__ import annotations

import csv
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from itertools import combinations
from math import comb

import numpy as np

from .analysis import step_load_table
from .model import (
    DemandMatrix,
    HeteroPlacement,
    HybridPlacement,
    PopularityMatrix,
    SystemConfig,
)

__all__ = [
    "LOCAL",
    "UNCODED",
    "SlotOutcome",
    "SimulationReport",
    "routing",
    "sample_demands",
    "run_slot",
    "simulate",
    "write_trace",
    "coded_delivery",
    "codec_verify",
]

LOCAL = -1
UNCODED = -2


@dataclass(frozen=True)
class _Delivery:
    route: np.ndarray  # (N, K): LOCAL, UNCODED or coded group index
    members: tuple  # per group, member SBSs
    tables: tuple  # per group, coded_step_load for k = 0..K_g


def routing(config: SystemConfig, pop: PopularityMatrix | None, placement) -> _Delivery:
    """Where each (content, SBS) request goes: local hit, a coded group, or the uncoded broadcast.

    For a hybrid placement ``pop`` supplies the popularity order; with
    ``pop=None`` content indices are taken to be popularity ranks.
    """
    N, K, M = config.N, config.K, config.M
    route = np.full((N, K), UNCODED, dtype=np.int64)
    if isinstance(placement, HybridPlacement):
        order = np.arange(N) if pop is None else pop.order
        route[order[: placement.M1]] = LOCAL
        if placement.N1 > M:
            route[order[placement.M1 : placement.N1]] = 0
            T = placement.T(K, M)
            return _Delivery(route, (tuple(range(K)),), (step_load_table(K, T, placement.N1, M),))
        return _Delivery(route, (), ())
    S = placement.S
    Ng = placement.Ng
    # lowest-indexed matching group wins; iterate in reverse so it is written last
    for g in reversed(range(len(placement.groups))):
        hit = placement.X[:, g][:, None] & S[:, g][None, :]
        route[hit] = g
    route[placement.Y] = LOCAL
    tables = tuple(
        step_load_table(len(m), placement.Tg(g), int(Ng[g]), placement.Mg[g])
        for g, m in enumerate(placement.groups)
    )
    return _Delivery(route, placement.groups, tables)


@dataclass(frozen=True, eq=False)
class SlotOutcome:
    """Delivery record of one slot.  Loads are in units of ``F``."""

    demands: DemandMatrix
    local_hits: int
    queues: tuple  # queues[g][member] -> tuple of distinct coded contents, first-arrival order
    occupancy: tuple  # occupancy[g] -> tuple of non-empty queue counts per step
    uncoded: tuple  # distinct uncoded contents broadcast
    r1: float

    @property
    def distinct(self) -> tuple:
        return tuple(tuple(len(q) for q in qs) for qs in self.queues)

    @property
    def steps(self) -> int:
        return max((len(o) for o in self.occupancy), default=0)

    @property
    def r2(self) -> float:
        return float(len(self.uncoded))

    @property
    def r(self) -> float:
        return self.r1 + self.r2


@dataclass(frozen=True, eq=False)
class SimulationReport:
    slots: int
    r1: np.ndarray = field(repr=False)
    r2: np.ndarray = field(repr=False)
    steps: np.ndarray = field(repr=False)
    local_hits: np.ndarray = field(repr=False)

    @property
    def r(self) -> np.ndarray:
        return self.r1 + self.r2

    @staticmethod
    def _se(x):
        return float(np.std(x, ddof=1) / np.sqrt(len(x))) if len(x) > 1 else float("nan")

    @property
    def mean_r1(self) -> float:
        return float(self.r1.mean())

    @property
    def mean_r2(self) -> float:
        return float(self.r2.mean())

    @property
    def mean_r(self) -> float:
        return float(self.r.mean())

    @property
    def se_r1(self) -> float:
        return self._se(self.r1)

    @property
    def se_r2(self) -> float:
        return self._se(self.r2)

    @property
    def se_r(self) -> float:
        return self._se(self.r)


def _slot_rng(seed: int, slot: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(slot,)))


def _cdfs(pop: PopularityMatrix) -> np.ndarray:
    return np.cumsum(pop.p, axis=0)


def _draw(cdf: np.ndarray, Z, rng: np.random.Generator) -> np.ndarray:
    """All demands of one slot, SBS-major, as one flat array."""
    u = rng.random(int(sum(Z)))
    out = np.empty(len(u), dtype=np.int64)
    start = 0
    for c, z in enumerate(Z):
        col = cdf[:, c]
        out[start : start + z] = np.searchsorted(col, u[start : start + z] * col[-1], side="right")
        start += z
    return out


def sample_demands(pop: PopularityMatrix, config: SystemConfig, seed=0) -> DemandMatrix:
    """Draw ``Z_c`` i.i.d. requests at every SBS from its popularity column.

    ``seed`` is an int (slot-0 substream of that seed) or a ``numpy`` Generator.
    """
    rng = seed if isinstance(seed, np.random.Generator) else _slot_rng(int(seed), 0)
    flat = _draw(_cdfs(pop), config.Z, rng)
    bounds = np.cumsum((0,) + config.Z)
    return DemandMatrix(tuple(flat[bounds[c] : bounds[c + 1]] for c in range(config.K)))


def run_slot(demands: DemandMatrix, placement, config: SystemConfig, pop=None) -> SlotOutcome:
    """Serve one slot: local hits, per-SBS deduplicated coded queues, one broadcast per uncoded content."""
    dl = placement if isinstance(placement, _Delivery) else routing(config, pop, placement)
    G = len(dl.members)
    queues = [[[] for _ in m] for m in dl.members]
    pos = [{c: i for i, c in enumerate(m)} for m in dl.members]
    local = 0
    uncoded = []
    for c, row in enumerate(demands.rows):
        for d in row.tolist():
            g = int(dl.route[d, c])
            if g == LOCAL:
                local += 1
            elif g == UNCODED:
                if d not in uncoded:
                    uncoded.append(d)
            else:
                q = queues[g][pos[g][c]]
                if d not in q:
                    q.append(d)
    occupancy = []
    r1 = 0.0
    for g in range(G):
        lengths = [len(q) for q in queues[g]]
        occ = tuple(sum(1 for n in lengths if n >= i) for i in range(1, max(lengths, default=0) + 1))
        occupancy.append(occ)
        for k in occ:
            r1 += float(dl.tables[g][k])
    return SlotOutcome(
        demands=demands,
        local_hits=local,
        queues=tuple(tuple(tuple(q) for q in qs) for qs in queues),
        occupancy=tuple(occupancy),
        uncoded=tuple(uncoded),
        r1=r1,
    )


def _evaluate_batch(D: np.ndarray, labels: np.ndarray, dl: _Delivery, K: int, N: int):
    """Vectorised :func:`run_slot` over a (slots, users) demand array."""
    S = D.shape[0]
    route = dl.route[D, labels[None, :]]
    local = (route == LOCAL).sum(axis=1)

    unc = np.sort(np.where(route == UNCODED, D, -1), axis=1)
    first = np.ones_like(unc, dtype=bool)
    first[:, 1:] = unc[:, 1:] != unc[:, :-1]
    r2 = ((unc >= 0) & first).sum(axis=1).astype(float)

    G = len(dl.members)
    r1 = np.zeros(S)
    steps = np.zeros(S, dtype=np.int64)
    if G:
        key = np.sort(np.where(route >= 0, (route * K + labels[None, :]) * N + D, -1), axis=1)
        new = np.ones_like(key, dtype=bool)
        new[:, 1:] = key[:, 1:] != key[:, :-1]
        valid = (key >= 0) & new
        rows = np.broadcast_to(np.arange(S)[:, None], key.shape)[valid]
        slot_gc = rows * (G * K) + key[valid] // N
        l = np.bincount(slot_gc, minlength=S * G * K).reshape(S, G, K)
        for g, members in enumerate(dl.members):
            lg = l[:, g, list(members)]
            top = int(lg.max(initial=0))
            if top == 0:
                continue
            occ = (lg[:, :, None] >= np.arange(1, top + 1)[None, None, :]).sum(axis=1)
            # add steps one at a time so a slot's sum never depends on its batch
            for i in range(top):
                r1 += dl.tables[g][occ[:, i]]
            steps = np.maximum(steps, lg.max(axis=1))
    return r1, r2, steps, local


def _run_chunk(slot_ids, seed, cdf, Z, labels, dl, K, N):
    D = np.stack([_draw(cdf, Z, _slot_rng(seed, s)) for s in slot_ids]) if len(slot_ids) else np.zeros((0, len(labels)), np.int64)
    return _evaluate_batch(D, labels, dl, K, N)


def simulate(
    config: SystemConfig,
    pop: PopularityMatrix,
    placement,
    slots: int = 2000,
    seed: int = 0,
    threads: int = 1,
    chunk: int = 250,
) -> SimulationReport:
    """Average the per-slot shared-link load over ``slots`` independent slots."""
    if slots < 1:
        raise ValueError("slots must be >= 1")
    dl = routing(config, pop, placement)
    cdf = _cdfs(pop)
    labels = np.repeat(np.arange(config.K), config.Z)
    ids = [range(a, min(a + chunk, slots)) for a in range(0, slots, chunk)]
    args = (seed, cdf, config.Z, labels, dl, config.K, config.N)
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            parts = list(ex.map(lambda s: _run_chunk(s, *args), ids))
    else:
        parts = [_run_chunk(s, *args) for s in ids]
    r1, r2, steps, local = (np.concatenate(x) for x in zip(*parts))
    return SimulationReport(slots=slots, r1=r1, r2=r2, steps=steps, local_hits=local)


def write_trace(report: SimulationReport, path) -> None:
    """One CSV row per slot: slot, r1, r2, r, steps, local_hits."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["slot", "r1", "r2", "r", "steps", "local_hits"])
        for s in range(report.slots):
            w.writerow([s, repr(float(report.r1[s])), repr(float(report.r2[s])),
                        repr(float(report.r[s])), int(report.steps[s]), int(report.local_hits[s])])


# --- bit-level codec ---------------------------------------------------------


def _normalise_demands(K, demands):
    if len(demands) != K:
        raise ValueError(f"expected {K} demand entries, got {len(demands)}")
    out = []
    for c, d in enumerate(demands):
        if d is None:
            out.append(None)
        elif isinstance(d, (int, np.integer)):
            out.append(int(d))
        else:
            distinct = set(int(x) for x in d)
            if len(distinct) > 1:
                raise ValueError(f"SBS {c} requests {len(distinct)} distinct contents; one is allowed per step")
            out.append(distinct.pop() if distinct else None)
    return out


def coded_delivery(K: int, T: int, demands, subfile_bytes: int = 4, seed: int = 0):
    """Run the subfile placement and XOR delivery for one step at the bit level.

    Returns ``(recovered, library, messages)`` where ``recovered[c]`` is SBS
    ``c``'s reconstruction of its request (``None`` if it has none),
    ``library`` the original contents and ``messages`` maps each served
    (T+1)-subset to its XOR payload.
    """
    if not 1 <= T <= K - 1:
        raise ValueError(f"need 1 <= T <= K-1, got T={T}, K={K}")
    want = _normalise_demands(K, demands)
    n_contents = max((d for d in want if d is not None), default=-1) + 1
    subsets = list(combinations(range(K), T))
    index = {s: i for i, s in enumerate(subsets)}
    rng = np.random.default_rng(seed)
    library = rng.integers(0, 256, size=(n_contents, len(subsets), subfile_bytes), dtype=np.uint8)
    # SBS c stores subfile s of every content iff c is in s
    cache = {c: {(n, s): library[n, index[s]] for n in range(n_contents) for s in subsets if c in s}
             for c in range(K)}

    messages = {}
    for group in combinations(range(K), T + 1):
        users = [c for c in group if want[c] is not None]
        if not users:
            continue
        payload = np.zeros(subfile_bytes, dtype=np.uint8)
        for c in users:
            rest = tuple(x for x in group if x != c)
            payload ^= library[want[c], index[rest]]
        messages[group] = payload

    recovered = []
    for c in range(K):
        if want[c] is None:
            recovered.append(None)
            continue
        parts = np.zeros((len(subsets), subfile_bytes), dtype=np.uint8)
        for s in subsets:
            if c in s:
                parts[index[s]] = cache[c][(want[c], s)]
                continue
            group = tuple(sorted(s + (c,)))
            piece = messages[group].copy()
            for other in group:
                if other == c or want[other] is None:
                    continue
                rest = tuple(x for x in group if x != other)
                piece ^= cache[c][(want[other], rest)]
            parts[index[s]] = piece
        recovered.append(parts)
    return recovered, library, messages


def codec_verify(K: int, T: int, demands, subfile_bytes: int = 4, seed: int = 0) -> bool:
    """True iff every requesting SBS decodes its content bit-exactly and the
    number of XOR messages equals ``C(K, T+1) - C(K-k, T+1)``."""
    if K > 8:
        raise ValueError("codec_verify supports K <= 8")
    recovered, library, messages = coded_delivery(K, T, demands, subfile_bytes, seed)
    want = _normalise_demands(K, demands)
    k = sum(d is not None for d in want)
    if len(messages) != comb(K, T + 1) - comb(K - k, T + 1):
        return False
    return all(rec is None or np.array_equal(rec, library[d]) for rec, d in zip(recovered, want))
