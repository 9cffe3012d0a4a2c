"""User polarity, edge-acceptance probabilities and link-prediction evaluation.

Polarity compares how quickly a random walk from a user reaches the
high-degree vertices of each side.  Vertices close to ``X*`` end up near
``-1``, vertices close to ``Y*`` near ``+1``.  Acceptance probabilities are
bucketed by the polarity of the content producer (row) and of the consumer
(column).
"""

from __future__ import annotations

import json
import math
import os
import time
from dataclasses import dataclass
from collections.abc import Callable, Iterable

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import splu
from sklearn.base import BaseEstimator
from sklearn.metrics import roc_auc_score
from sklearn.utils.validation import check_is_fitted

from .exceptions import DataError, NumericalError, ParseError
from .graph import SIDE_X, SIDE_Y, EndorsementGraph, Partition
from .recommend import RecommendationSet, rov_candidates, rwc_with_edges, score_candidates
from .rwc import RwcContext
from .topk import threshold_topk
from .validation import check_positive_int

MODEL_FORMAT_VERSION = 1


# --------------------------------------------------------------------------
# hitting times and polarity

def _absorbing_safe_set(graph: EndorsementGraph, targets: np.ndarray) -> np.ndarray:
    """Vertices from which the target set is hit with probability one.

    Dangling vertices teleport uniformly over this set, so it is computed as
    a fixpoint: start from everything that can reach a target or a dangling
    vertex, then repeatedly drop vertices with an edge into a dropped vertex.
    """
    n = graph.n_vertices
    adj = graph.adjacency_matrix("csr")
    rev = adj.T.tocsr()
    is_target = np.zeros(n, dtype=bool)
    is_target[targets] = True
    seeds = is_target | (graph.out_degree == 0)
    good = seeds.copy()
    stack = list(np.flatnonzero(seeds))
    while stack:
        w = stack.pop()
        for u in rev.indices[rev.indptr[w]:rev.indptr[w + 1]]:
            if not good[u]:
                good[u] = True
                stack.append(u)
    # propagate "can fall into a bad vertex before hitting a target" backwards
    bad = ~good
    stack = list(np.flatnonzero(bad))
    while stack:
        w = stack.pop()
        for u in rev.indices[rev.indptr[w]:rev.indptr[w + 1]]:
            if good[u] and not is_target[u]:
                good[u] = False
                stack.append(u)
    return good


def hitting_times(graph: EndorsementGraph, partition: Partition, target) -> np.ndarray:
    """Expected number of steps to reach a set of vertices.

    The walk follows endorsement edges uniformly; dangling vertices jump
    uniformly over all vertices (restricted to those that hit the target with
    probability one).  Vertices that may never hit the target get the
    sentinel ``n**2``.

    :param target: ``"X"`` (meaning ``X*``), ``"Y"`` (``Y*``) or explicit ids.
    """
    if graph.n_vertices == 0:
        raise DataError("empty graph")
    if isinstance(target, str):
        if target not in (SIDE_X, SIDE_Y):
            raise ValueError(f"target must be 'X', 'Y' or vertex ids, got {target!r}")
        targets = np.array(partition.x_star if target == SIDE_X else partition.y_star, dtype=np.int64)
    else:
        targets = np.asarray(list(target), dtype=np.int64)
    if targets.size == 0:
        raise DataError("empty target set")
    n = graph.n_vertices
    sentinel = float(n) ** 2
    good = _absorbing_safe_set(graph, targets)
    n_good = int(good.sum())
    is_target = np.zeros(n, dtype=bool)
    is_target[targets] = True
    free = np.flatnonzero(good & ~is_target)
    out = np.full(n, sentinel)
    out[targets] = 0.0
    if free.size == 0:
        return out

    pos = np.full(n, -1)
    pos[free] = np.arange(free.size)
    edges = graph.edge_array()
    keep = (pos[edges[:, 0]] >= 0) & (pos[edges[:, 1]] >= 0) if len(edges) else np.zeros(0, bool)
    src, dst = edges[keep, 0], edges[keep, 1]
    vals = 1.0 / graph.out_degree[src]
    q = sp.csc_matrix((vals, (pos[src], pos[dst])), shape=(free.size, free.size))
    system = sp.csc_matrix(sp.identity(free.size) - q)
    # teleport rows: (1/n_good) * 1^T restricted to free states, handled as a rank-one term
    tele = (graph.out_degree[free] == 0).astype(float)
    try:
        lu = splu(system)
        l1 = lu.solve(np.ones(free.size))
        l2 = lu.solve(tele)
    except RuntimeError as exc:
        raise NumericalError(f"hitting-time system is singular: {exc}") from exc
    denom = n_good - l2.sum()
    if denom <= 0:
        raise NumericalError("hitting-time teleport correction is degenerate")
    s = l1.sum() / denom
    sol = l1 + s * l2
    if not np.all(np.isfinite(sol)):
        raise NumericalError("non-finite hitting times")
    out[free] = sol
    return out


def _strict_rank_fraction(values: np.ndarray) -> np.ndarray:
    n = len(values)
    if n < 2:
        return np.zeros(n)
    below = np.searchsorted(np.sort(values), values, side="left")
    return below / (n - 1)


@dataclass(frozen=True)
class PolarityTable:
    polarity: np.ndarray
    hit_x: np.ndarray
    hit_y: np.ndarray
    rank_x: np.ndarray
    rank_y: np.ndarray

    def __len__(self):
        return len(self.polarity)


def polarity(graph: EndorsementGraph, partition: Partition) -> PolarityTable:
    """Rank-based polarity in ``[-1, 1]`` for every vertex.

    ``rank_x[u]`` is the fraction of the other vertices whose hitting time to
    ``X*`` is strictly smaller than ``u``'s; polarity is
    ``rank_x - rank_y``.
    """
    hit_x = hitting_times(graph, partition, SIDE_X)
    hit_y = hitting_times(graph, partition, SIDE_Y)
    rank_x = _strict_rank_fraction(hit_x)
    rank_y = _strict_rank_fraction(hit_y)
    return PolarityTable(rank_x - rank_y, hit_x, hit_y, rank_x, rank_y)


# --------------------------------------------------------------------------
# acceptance model

@dataclass(frozen=True)
class Interaction:
    """``follower`` saw ``content_count`` items from ``followee`` and endorsed some."""

    followee: int
    follower: int
    content_count: int
    endorsement_count: int


def load_interactions(source, graph: EndorsementGraph) -> list[Interaction]:
    """Read ``followee<TAB>follower<TAB>content_count<TAB>endorsement_count`` lines."""
    owned = isinstance(source, (str, os.PathLike))
    stream = open(source, encoding="utf-8") if owned else source
    records = []
    try:
        for lineno, raw in enumerate(stream, start=1):
            line = raw.rstrip("\r\n")
            if not line.strip() or line.lstrip().startswith("#"):
                continue
            fields = line.split("\t")
            if len(fields) != 4:
                raise ParseError("expected 4 tab-separated fields", lineno)
            try:
                u, v = graph.index(fields[0]), graph.index(fields[1])
            except KeyError as exc:
                raise ParseError(f"unknown user {exc.args[0]!r}", lineno) from None
            try:
                content, endorsed = int(fields[2]), int(fields[3])
            except ValueError:
                raise ParseError("counts must be integers", lineno) from None
            records.append(Interaction(u, v, content, endorsed))
    finally:
        if owned:
            stream.close()
    return records


def save_interactions(records: Iterable[Interaction], graph: EndorsementGraph, target) -> None:
    owned = isinstance(target, (str, os.PathLike))
    stream = open(target, "w", encoding="utf-8") if owned else target
    try:
        for r in records:
            stream.write(f"{graph.label(r.followee)}\t{graph.label(r.follower)}\t"
                         f"{r.content_count}\t{r.endorsement_count}\n")
    finally:
        if owned:
            stream.close()


def bucket_of(values, n_buckets: int) -> np.ndarray:
    """Equal-width bucket index of polarity values in ``[-1, 1]``."""
    values = np.asarray(values, dtype=float)
    # compare against the stored edges so a value equal to an edge lands above it
    edges = np.linspace(-1.0, 1.0, n_buckets + 1)
    idx = np.searchsorted(edges, values, side="right") - 1
    return np.clip(idx, 0, n_buckets - 1)


class AcceptanceModel(BaseEstimator):
    """Bucketed probability that a user endorses content of another user.

    ``exposed_[i, j]`` counts items produced by users in polarity bucket
    ``i`` and seen by users in bucket ``j``; ``endorsed_`` counts the
    endorsements among them.  ``p_ = (endorsed + 1) / (exposed + 2)``.

    Parameters
    ----------
    n_buckets : int, default=10
        Number of equal-width buckets over ``[-1, 1]``.
    """

    def __init__(self, n_buckets: int = 10):
        self.n_buckets = n_buckets

    def fit(self, interactions: Iterable[Interaction], polarities: PolarityTable):
        nb = check_positive_int(self.n_buckets, "n_buckets")
        pol = polarities.polarity
        exposed = np.zeros((nb, nb))
        endorsed = np.zeros((nb, nb))
        for rec in interactions:
            for user in (rec.followee, rec.follower):
                if not 0 <= user < len(pol):
                    raise DataError(f"unknown user id {user}")
            if rec.content_count < 0 or rec.endorsement_count < 0:
                raise DataError(f"negative count in {rec}")
            if rec.endorsement_count > rec.content_count:
                raise DataError(f"endorsements exceed exposures in {rec}")
            i, j = bucket_of([pol[rec.followee], pol[rec.follower]], nb)
            exposed[i, j] += rec.content_count
            endorsed[i, j] += rec.endorsement_count
        return self._set_counts(exposed, endorsed)

    def fit_counts(self, exposed, endorsed):
        """Fit directly from producer-by-consumer count matrices."""
        exposed = np.asarray(exposed, dtype=float)
        endorsed = np.asarray(endorsed, dtype=float)
        nb = check_positive_int(self.n_buckets, "n_buckets")
        if exposed.shape != (nb, nb) or endorsed.shape != (nb, nb):
            raise DataError(f"count matrices must be {nb}x{nb}")
        if np.any(endorsed > exposed) or np.any(endorsed < 0):
            raise DataError("endorsed counts must lie in [0, exposed]")
        return self._set_counts(exposed, endorsed)

    def _set_counts(self, exposed, endorsed):
        self.exposed_ = exposed
        self.endorsed_ = endorsed
        self.bucket_edges_ = np.linspace(-1.0, 1.0, self.n_buckets + 1)
        self.p_ = (endorsed + 1.0) / (exposed + 2.0)
        return self

    def cell_probability(self, producer_polarity, consumer_polarity):
        check_is_fitted(self, "p_")
        return self.p_[bucket_of(producer_polarity, self.n_buckets),
                       bucket_of(consumer_polarity, self.n_buckets)]

    def predict_edge(self, polarities: PolarityTable, u: int, v: int) -> float:
        """Probability that ``u`` accepts (endorses) ``v``."""
        pol = polarities.polarity
        return float(self.cell_probability(pol[v], pol[u]))

    def predict_pairs(self, polarities: PolarityTable, pairs) -> np.ndarray:
        pairs = np.asarray(pairs, dtype=np.int64).reshape(-1, 2)
        pol = polarities.polarity
        return self.cell_probability(pol[pairs[:, 1]], pol[pairs[:, 0]])

    def as_scorer(self, polarities: PolarityTable) -> Callable:
        return lambda graph, pairs: self.predict_pairs(polarities, pairs)

    def to_dict(self) -> dict:
        check_is_fitted(self, "p_")
        return {
            "format": "bridgewalk-acceptance-model",
            "version": MODEL_FORMAT_VERSION,
            "n_buckets": self.n_buckets,
            "bucket_edges": self.bucket_edges_.tolist(),
            "exposed": self.exposed_.tolist(),
            "endorsed": self.endorsed_.tolist(),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "AcceptanceModel":
        if data.get("version") != MODEL_FORMAT_VERSION:
            raise DataError(f"unsupported model version {data.get('version')!r}")
        model = cls(n_buckets=int(data["n_buckets"]))
        model.fit_counts(data["exposed"], data["endorsed"])
        if not np.allclose(model.bucket_edges_, data["bucket_edges"]):
            raise DataError("bucket edges do not match an equal-width split of [-1, 1]")
        return model

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_dict(), fh, indent=2)

    @classmethod
    def load(cls, path) -> "AcceptanceModel":
        with open(path, encoding="utf-8") as fh:
            try:
                data = json.load(fh)
            except json.JSONDecodeError as exc:
                raise DataError(f"model file is not valid JSON: {exc}") from None
        return cls.from_dict(data)


def fit_acceptance(interactions, polarities: PolarityTable, n_buckets: int = 10) -> AcceptanceModel:
    return AcceptanceModel(n_buckets).fit(interactions, polarities)


def predict_edge(model: AcceptanceModel, polarities: PolarityTable, u: int, v: int) -> float:
    return model.predict_edge(polarities, u, v)


def synthetic_interactions(polarities: PolarityTable, p_true, exposures_per_cell: int,
                           seed: int = 0, content_per_record: int = 100) -> list[Interaction]:
    """Interaction records drawn from known per-cell probabilities.

    Every (producer bucket, consumer bucket) cell present among the users
    receives ``exposures_per_cell`` exposures split into records of
    ``content_per_record`` items between random users of those buckets.
    """
    p_true = np.asarray(p_true, dtype=float)
    nb = p_true.shape[0]
    rng = np.random.default_rng(seed)
    buckets = bucket_of(polarities.polarity, nb)
    members = [np.flatnonzero(buckets == i) for i in range(nb)]
    records = []
    for i in range(nb):
        for j in range(nb):
            if members[i].size == 0 or members[j].size == 0:
                continue
            remaining = exposures_per_cell
            while remaining > 0:
                c = min(content_per_record, remaining)
                remaining -= c
                u = int(rng.choice(members[i]))
                v = int(rng.choice(members[j]))
                records.append(Interaction(u, v, c, int(rng.binomial(c, p_true[i, j]))))
    return records


def synthetic_acceptance_graph(polarities: PolarityTable, p_true, density: float,
                               seed: int = 0) -> EndorsementGraph:
    """Graph whose edge ``u -> v`` appears with probability ``density * p(v-bucket, u-bucket)``."""
    p_true = np.asarray(p_true, dtype=float)
    nb = p_true.shape[0]
    b = bucket_of(polarities.polarity, nb)
    n = len(b)
    rng = np.random.default_rng(seed)
    prob = density * p_true[b[None, :], b[:, None]]
    draw = rng.random((n, n)) < prob
    np.fill_diagonal(draw, False)
    rows, cols = np.nonzero(draw)
    return EndorsementGraph(n, zip(rows.tolist(), cols.tolist()))


# --------------------------------------------------------------------------
# link prediction baseline and AUC

def adamic_adar(graph: EndorsementGraph, u: int, v: int, sym: sp.csr_matrix | None = None) -> float:
    """Adamic-Adar index of ``u`` and ``v`` on the symmetrized graph."""
    if sym is None:
        sym = graph.symmetrized()
    nu = set(sym.indices[sym.indptr[u]:sym.indptr[u + 1]].tolist())
    nv = set(sym.indices[sym.indptr[v]:sym.indptr[v + 1]].tolist())
    score = 0.0
    for w in sorted(nu & nv):
        deg = sym.indptr[w + 1] - sym.indptr[w]
        if deg > 1:
            score += 1.0 / math.log(deg)
    return score


def adamic_adar_scores(graph: EndorsementGraph, pairs) -> np.ndarray:
    sym = graph.symmetrized()
    pairs = np.asarray(pairs, dtype=np.int64).reshape(-1, 2)
    return np.array([adamic_adar(graph, int(u), int(v), sym) for u, v in pairs])


@dataclass
class AucResult:
    median: float
    per_repeat: list

    def to_dict(self):
        return {"median_auc": self.median, "per_repeat": self.per_repeat}


def _sample_negatives(graph: EndorsementGraph, count: int, rng, exclude=frozenset()) -> np.ndarray:
    n = graph.n_vertices
    if n * (n - 1) - graph.n_edges < count:
        raise DataError("not enough absent pairs to sample negatives")
    chosen: dict[tuple[int, int], None] = {}
    attempts = 0
    while len(chosen) < count:
        attempts += 1
        if attempts > 1000:
            raise DataError("could not sample enough negative pairs")
        batch = rng.integers(0, n, size=(2 * (count - len(chosen)) + 16, 2))
        for u, v in batch.tolist():
            if u != v and not graph.has_edge(u, v) and (u, v) not in exclude and (u, v) not in chosen:
                chosen[(u, v)] = None
                if len(chosen) == count:
                    break
    return np.array(list(chosen), dtype=np.int64).reshape(-1, 2)


def auc_eval(scorer: Callable, graph: EndorsementGraph, pos_fraction: float = 0.1,
             neg_fraction: float = 1.0, repeats: int = 100, seed: int = 0,
             max_pairs: int = 1000, holdout: bool = True) -> AucResult:
    """Median ROC AUC of ``scorer`` over repeated edge/non-edge samples.

    Each repeat samples ``min(max_pairs, ceil(pos_fraction * m))`` existing
    edges as positives and ``ceil(neg_fraction * n_pos)`` absent ordered pairs
    as negatives.  With ``holdout`` the positives are removed from the graph
    handed to ``scorer(graph, pairs)``.
    """
    repeats = check_positive_int(repeats, "repeats")
    if graph.n_edges < 100:
        raise DataError("AUC evaluation needs at least 100 edges")
    if not 0 < pos_fraction <= 1 or neg_fraction <= 0:
        raise DataError("pos_fraction must lie in (0, 1] and neg_fraction be positive")
    rng = np.random.default_rng(seed)
    edges = graph.edge_array()
    n_pos = min(max_pairs, int(math.ceil(pos_fraction * len(edges))))
    n_neg = int(math.ceil(neg_fraction * n_pos))
    aucs = []
    for _ in range(repeats):
        pos = edges[rng.choice(len(edges), size=n_pos, replace=False)]
        neg = _sample_negatives(graph, n_neg, rng)
        scored_graph = graph
        if holdout:
            drop = set(map(tuple, pos.tolist()))
            scored_graph = EndorsementGraph(graph.n_vertices,
                                            (e for e in graph.edges() if e not in drop), graph.labels)
        s_pos = np.asarray(scorer(scored_graph, pos), dtype=float)
        s_neg = np.asarray(scorer(scored_graph, neg), dtype=float)
        y = np.r_[np.ones(len(s_pos)), np.zeros(len(s_neg))]
        aucs.append(float(roc_auc_score(y, np.r_[s_pos, s_neg])))
    return AucResult(float(np.median(aucs)), aucs)


# --------------------------------------------------------------------------
# ROV weighted by acceptance probability

def rov_ap(ctx: RwcContext, graph: EndorsementGraph, partition: Partition, model: AcceptanceModel,
           k: int, polarities: PolarityTable | None = None) -> RecommendationSet:
    """Top ``k`` high-degree cross edges by ``p_accept * decrease``.

    The ROV candidates that lower the score are ranked twice, by decrease and
    by acceptance probability, and merged with the threshold algorithm.
    """
    k = check_positive_int(k, "k")
    check_is_fitted(model, "p_")
    start = time.perf_counter()
    if polarities is None:
        polarities = polarity(graph, partition)
    cands = score_candidates(ctx, graph, rov_candidates(graph, partition))
    useful = sorted((c for c in cands if c.decrease > 0), key=lambda c: (c.source, c.target))
    top = []
    accesses = 0
    if useful:
        decrease = np.array([c.decrease for c in useful])
        p = model.predict_pairs(polarities, [c.edge for c in useful])
        for c, pa in zip(useful, p):
            c.p_accept = float(pa)
            c.expected_decrease = float(pa * c.decrease)
        res = threshold_topk(decrease, p, k)
        top = [useful[i] for i in res.indices]
        accesses = res.sorted_accesses
    wall = (time.perf_counter() - start) * 1e3
    after = rwc_with_edges(ctx, [c.edge for c in top]) if top else ctx.rwc_value
    return RecommendationSet(top, "ROV-AP", ctx.rwc_value, after, len(cands), wall,
                             exhausted=len(top) < k, info={"sorted_accesses": accesses})
