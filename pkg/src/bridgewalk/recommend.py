"""Edge recommendation: ROV, greedy search and random-strategy baselines."""

from __future__ import annotations

import copy
import time
from dataclasses import dataclass, field

import numpy as np

from .exceptions import DataError
from .graph import EndorsementGraph, Partition
from .incremental import commit_edge, delta_rwc, delta_rwc_matrix, make_update
from .rwc import RwcContext, recompute_rwc
from .validation import check_positive_int

MODES = ("ROV", "ROV-AP", "GREEDY", "RANDOM-STRATEGY")
STRATEGIES = ("high->high", "high->nonhigh", "nonhigh->high", "nonhigh->nonhigh")
SCOPES = ("all", "cross-side")


@dataclass
class EdgeCandidate:
    source: int
    target: int
    delta: float
    p_accept: float | None = None
    expected_decrease: float | None = None

    @property
    def decrease(self) -> float:
        return -self.delta

    @property
    def edge(self) -> tuple[int, int]:
        return self.source, self.target

    def to_dict(self, graph: EndorsementGraph | None = None) -> dict:
        out = {"source": self.source, "target": self.target}
        if graph is not None:
            out["source_label"] = graph.label(self.source)
            out["target_label"] = graph.label(self.target)
        out["delta"] = self.delta
        out["decrease"] = self.decrease
        if self.p_accept is not None:
            out["p_accept"] = self.p_accept
            out["expected_decrease"] = self.expected_decrease
        return out


@dataclass
class RecommendationSet:
    edges: list
    mode: str
    rwc_before: float
    rwc_after_if_all_accepted: float
    candidate_evaluations: int
    wall_ms: float
    exhausted: bool = False
    info: dict = field(default_factory=dict)

    @property
    def edge_list(self) -> list[tuple[int, int]]:
        return [c.edge for c in self.edges]

    @property
    def total_decrease(self) -> float:
        return self.rwc_before - self.rwc_after_if_all_accepted

    def to_dict(self, graph: EndorsementGraph | None = None, meta: bool = True) -> dict:
        out = {
            "mode": self.mode,
            "edges": [c.to_dict(graph) for c in self.edges],
            "rwc_before": self.rwc_before,
            "rwc_after_if_all_accepted": self.rwc_after_if_all_accepted,
            "candidate_evaluations": self.candidate_evaluations,
            "exhausted": self.exhausted,
        }
        out.update(self.info)
        if meta:
            out["wall_ms"] = self.wall_ms
        return out


def _check_ctx(ctx: RwcContext, graph: EndorsementGraph, partition: Partition) -> None:
    if graph is not ctx.graph and graph != ctx.graph:
        raise DataError("graph does not match the context's graph")
    if partition is not ctx.partition:
        same = (np.array_equal(partition.in_x, ctx.partition.in_x)
                and partition.x_star == ctx.partition.x_star
                and partition.y_star == ctx.partition.y_star)
        if not same:
            raise DataError("partition does not match the context's partition")


def rov_candidates(graph: EndorsementGraph, partition: Partition) -> list[tuple[int, int]]:
    """Both directions of every ``X* x Y*`` pair, minus edges already present."""
    out = []
    for u in partition.x_star:
        for v in partition.y_star:
            for edge in ((u, v), (v, u)):
                if not graph.has_edge(*edge):
                    out.append(edge)
    return out


def score_candidates(ctx: RwcContext, graph: EndorsementGraph, edges) -> list[EdgeCandidate]:
    return [EdgeCandidate(a, b, delta_rwc(ctx, make_update(ctx, graph, (a, b)))) for a, b in edges]


def rank_by_decrease(cands: list[EdgeCandidate], k: int) -> tuple[list[EdgeCandidate], bool]:
    """Top ``k`` candidates with positive decrease; ties by ``(source, target)``."""
    useful = [c for c in cands if c.decrease > 0]
    useful.sort(key=lambda c: (-c.decrease, c.source, c.target))
    return useful[:k], len(useful) < k


def rwc_with_edges(ctx: RwcContext, edges) -> float:
    graph = ctx.graph
    for a, b in edges:
        graph = graph.with_edge(a, b)
    return recompute_rwc(graph, ctx.partition, ctx.alpha)


def rov(ctx: RwcContext, graph: EndorsementGraph, partition: Partition, k: int) -> RecommendationSet:
    """Recommend up to ``k`` edges between the high-degree sets.

    Every candidate is scored independently against the current graph and
    the ``k`` largest decreases are returned.  Candidates that would raise
    the score are dropped; ``exhausted`` is set when fewer than ``k`` remain.
    """
    k = check_positive_int(k, "k")
    _check_ctx(ctx, graph, partition)
    start = time.perf_counter()
    cands = score_candidates(ctx, graph, rov_candidates(graph, partition))
    top, exhausted = rank_by_decrease(cands, k)
    wall = (time.perf_counter() - start) * 1e3
    after = rwc_with_edges(ctx, [c.edge for c in top]) if top else ctx.rwc_value
    return RecommendationSet(top, "ROV", ctx.rwc_value, after, len(cands), wall, exhausted)


def _scope_blocks(partition: Partition, scope: str):
    if scope == "all":
        everything = np.arange(partition.n_vertices)
        return [(everything, everything)]
    if scope == "cross-side":
        x, y = partition.x_vertices, partition.y_vertices
        return [(x, y), (y, x)]
    raise ValueError(f"scope must be one of {SCOPES}, got {scope!r}")


def greedy(ctx: RwcContext, graph: EndorsementGraph, partition: Partition, k: int,
           candidate_scope: str = "all") -> RecommendationSet:
    """Pick ``k`` edges one at a time, each the best against the current graph.

    Works on a private copy of ``ctx``; the caller's context is left intact.
    Each round scores every absent edge in scope (vectorised over all pairs),
    commits the most negative delta and continues.  Stops early when no
    candidate lowers the score.
    """
    k = check_positive_int(k, "k")
    _check_ctx(ctx, graph, partition)
    blocks = _scope_blocks(partition, candidate_scope)
    start = time.perf_counter()
    work = copy.deepcopy(ctx)
    chosen: list[EdgeCandidate] = []
    evaluations = 0
    exhausted = False
    for _ in range(k):
        best = None
        for sources, targets in blocks:
            deltas = delta_rwc_matrix(work, sources, targets)
            valid = ~np.isnan(deltas)
            evaluations += int(valid.sum())
            if not valid.any():
                continue
            low = np.nanmin(deltas)
            rows, cols = np.nonzero(deltas == low)
            pairs = sorted(zip(sources[rows].tolist(), targets[cols].tolist()))
            cand = (low, pairs[0])
            if best is None or cand < best:
                best = cand
        if best is None or best[0] >= 0:
            exhausted = True
            break
        upd = make_update(work, work.graph, best[1])
        delta = delta_rwc(work, upd)
        commit_edge(work, work.graph, upd)
        chosen.append(EdgeCandidate(upd.source, upd.target, delta))
    wall = (time.perf_counter() - start) * 1e3
    after = rwc_with_edges(ctx, [c.edge for c in chosen]) if chosen else ctx.rwc_value
    return RecommendationSet(chosen, "GREEDY", ctx.rwc_value, after, evaluations, wall, exhausted,
                             info={"scope": candidate_scope})


@dataclass
class StrategyTrajectory:
    strategy: str
    seed: int
    rwc_before: float
    values: list
    edges: list
    exhausted: bool = False

    @property
    def final(self) -> float:
        return self.values[-1] if self.values else self.rwc_before

    def to_rows(self, graph: EndorsementGraph | None = None):
        label = graph.label if graph is not None else str
        yield {"step": 0, "source": "", "target": "", "rwc": self.rwc_before}
        for i, ((a, b), val) in enumerate(zip(self.edges, self.values), start=1):
            yield {"step": i, "source": label(a), "target": label(b), "rwc": val}


def strategy_pools(partition: Partition, strategy: str):
    """``(source pool, target pool)`` boolean masks for a strategy name."""
    if strategy not in STRATEGIES:
        raise ValueError(f"strategy must be one of {STRATEGIES}, got {strategy!r}")
    high = np.zeros(partition.n_vertices, dtype=bool)
    high[list(partition.x_star) + list(partition.y_star)] = True
    src_name, dst_name = strategy.split("->")
    src = high if src_name == "high" else ~high
    dst = high if dst_name == "high" else ~high
    return src, dst


def strategy_candidates(graph: EndorsementGraph, partition: Partition, strategy: str) -> np.ndarray:
    """All absent cross-side edges allowed by ``strategy``, sorted by id pair."""
    src, dst = strategy_pools(partition, strategy)
    in_x = partition.in_x
    blocks = []
    for src_side in (in_x, ~in_x):
        s = np.flatnonzero(src & src_side)
        t = np.flatnonzero(dst & ~src_side)
        if s.size and t.size:
            ss, tt = np.meshgrid(s, t, indexing="ij")
            blocks.append(np.column_stack([ss.ravel(), tt.ravel()]))
    if not blocks:
        return np.zeros((0, 2), dtype=np.int64)
    pairs = np.concatenate(blocks)
    adj = graph.adjacency_matrix("csr")
    present = np.asarray(adj[pairs[:, 0], pairs[:, 1]]).ravel() > 0
    pairs = pairs[~present]
    return pairs[np.lexsort((pairs[:, 1], pairs[:, 0]))]


def random_strategy(ctx: RwcContext, graph: EndorsementGraph, partition: Partition,
                    strategy: str, n_edges: int, seed: int = 0) -> StrategyTrajectory:
    """Add ``n_edges`` random cross-side edges from a strategy's pools, one by one.

    Edges are drawn uniformly without replacement from the absent pairs of
    the pool product and committed sequentially on a private copy of
    ``ctx``; the score after each commit is recorded.
    """
    n_edges = check_positive_int(n_edges, "n_edges")
    _check_ctx(ctx, graph, partition)
    pool = strategy_candidates(graph, partition, strategy)
    if len(pool) == 0:
        raise DataError(f"strategy {strategy} has an empty candidate pool")
    rng = np.random.default_rng(seed)
    picks = pool[rng.permutation(len(pool))[:n_edges]]
    work = copy.deepcopy(ctx)
    values, edges = [], []
    for a, b in picks.tolist():
        upd = make_update(work, work.graph, (a, b))
        commit_edge(work, work.graph, upd)
        values.append(work.rwc_value)
        edges.append((a, b))
    return StrategyTrajectory(strategy, seed, ctx.rwc_value, values, edges,
                              exhausted=len(edges) < n_edges)
