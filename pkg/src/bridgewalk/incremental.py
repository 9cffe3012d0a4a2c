"""Incremental RWC under single edge insertions.

Adding ``a -> b`` only touches column ``a`` of the transition matrix:
``P' = P - z u^T`` with ``u`` the basis vector at ``a``.  Hence
``M' = M + alpha z u^T`` and the new inverse follows from Sherman-Morrison,
so the score change costs a few matrix-vector products instead of a solve.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .exceptions import DataError, NumericalError, SingularUpdateError, StaleUpdateError
from .graph import SIDE_X, SIDE_Y, EndorsementGraph
from .rwc import RwcContext, _sparse_transition
from .validation import check_vertex

logger = logging.getLogger(__name__)

SINGULAR_EPS = 1e-12
REFRESH_EVERY = 500
DRIFT_CHECK_EVERY = 100
DRIFT_TOL = 1e-6


@dataclass(frozen=True)
class RankOneUpdate:
    """Column patch for adding ``source -> target``.

    ``z_x``/``z_y`` are dense; ``support`` lists the rows where either is
    nonzero.  ``source_degree`` is the source's out-degree when the update
    was built and guards against committing a stale update.
    """

    source: int
    target: int
    z_x: np.ndarray
    z_y: np.ndarray
    support_x: np.ndarray
    support_y: np.ndarray
    source_degree: int
    source_was_dangling: bool

    @property
    def u_vec(self) -> np.ndarray:
        u = np.zeros(len(self.z_x))
        u[self.source] = 1.0
        return u

    def z(self, side: str) -> np.ndarray:
        return self.z_x if side == SIDE_X else self.z_y

    def support(self, side: str) -> np.ndarray:
        return self.support_x if side == SIDE_X else self.support_y


def make_update(ctx: RwcContext, graph: EndorsementGraph, edge: tuple[int, int]) -> RankOneUpdate:
    """Build the rank-one patch for adding ``edge`` to ``graph``.

    For a source with ``q`` out-neighbours ``z`` holds ``1/(q(q+1))`` on each
    neighbour and ``-1/(q+1)`` on the target; for a dangling source it is the
    restart vector minus the target's basis vector.
    """
    a, b = edge
    a = check_vertex(graph, a, "source")
    b = check_vertex(graph, b, "target")
    if a == b:
        raise DataError(f"self-loop ({a}, {b}) is not a valid edge")
    if graph.has_edge(a, b):
        raise DataError(f"edge ({a}, {b}) already present")
    q = int(graph.out_degree[a])
    if q != ctx.out_degree[a]:
        raise StaleUpdateError(f"graph and context disagree on out-degree of {a}")

    zs, supports = [], []
    for side in (SIDE_X, SIDE_Y):
        old = ctx.column(side, a)
        new = np.zeros(ctx.n)
        if q:
            new[list(graph.successors(a))] = 1.0 / (q + 1)
        new[b] = 1.0 / (q + 1)
        if abs(new.sum() - 1.0) > 1e-12:
            raise NumericalError(f"patched column of {a} does not sum to 1")
        # (old - v) / (q + 1) == old - new, in both the dangling and regular case
        z = old - new
        zs.append(z)
        supports.append(np.flatnonzero(z))
    return RankOneUpdate(a, b, zs[0], zs[1], supports[0], supports[1], q, q == 0)


def _inverse_times_z(inv: np.ndarray, z: np.ndarray, support: np.ndarray) -> np.ndarray:
    return inv[:, support] @ z[support]


def _side_term(ctx: RwcContext, upd: RankOneUpdate, side: str):
    inv = ctx.inverse(side)
    y = ctx.y_x if side == SIDE_X else ctx.y_y
    mz = _inverse_times_z(inv, upd.z(side), upd.support(side))
    denom = 1.0 + ctx.alpha * mz[upd.source]
    if abs(denom) < SINGULAR_EPS:
        raise SingularUpdateError(f"Sherman-Morrison denominator {denom:.3e} for edge "
                                  f"({upd.source}, {upd.target}) on side {side}")
    # (M^-1 z)(u^T M^-1) e, grouped so only vectors are formed; u^T M^-1 e = y[a]
    return mz, denom, ctx.alpha * mz * y[upd.source] / denom


def delta_rwc(ctx: RwcContext, upd: RankOneUpdate) -> float:
    """``RWC(G') - RWC(G)`` for the edge in ``upd``; negative is a decrease."""
    if ctx.backend != "dense":
        raise NumericalError("delta_rwc needs the dense backend")
    _, _, corr_x = _side_term(ctx, upd, SIDE_X)
    _, _, corr_y = _side_term(ctx, upd, SIDE_Y)
    cd = ctx.c_diff
    return float((1 - ctx.alpha) * (-(cd @ corr_x) + cd @ corr_y))


def edge_delta(ctx: RwcContext, edge: tuple[int, int]) -> float:
    """Shortcut for ``delta_rwc(ctx, make_update(ctx, ctx.graph, edge))``."""
    return delta_rwc(ctx, make_update(ctx, ctx.graph, edge))


def commit_edge(ctx: RwcContext, graph: EndorsementGraph, upd: RankOneUpdate):
    """Add the edge to the graph and patch the context in place.

    Both inverses are updated with Sherman-Morrison, the cached score moves
    by the delta.  Every :data:`DRIFT_CHECK_EVERY` commits the inverses are
    probed and refactorised if drift exceeds :data:`DRIFT_TOL`; every
    :data:`REFRESH_EVERY` commits they are refactorised unconditionally.

    :returns: ``(ctx, new_graph)``.
    :raises StaleUpdateError: if ``upd`` was built for a different graph state.
    """
    if ctx.backend != "dense":
        raise NumericalError("commit_edge needs the dense backend")
    if graph is not ctx.graph:
        raise StaleUpdateError("graph is not the one this context tracks")
    a, b = upd.source, upd.target
    if graph.has_edge(a, b):
        raise StaleUpdateError(f"edge ({a}, {b}) is already present")
    if graph.out_degree[a] != upd.source_degree or ctx.out_degree[a] != upd.source_degree:
        raise StaleUpdateError(f"out-degree of {a} changed since the update was built "
                               f"({upd.source_degree} -> {int(graph.out_degree[a])})")

    terms = {side: _side_term(ctx, upd, side) for side in (SIDE_X, SIDE_Y)}
    cd = ctx.c_diff
    delta = float((1 - ctx.alpha) * (-(cd @ terms[SIDE_X][2]) + cd @ terms[SIDE_Y][2]))

    for side in (SIDE_X, SIDE_Y):
        mz, denom, corr = terms[side]
        inv = ctx.inverse(side)
        row = inv[a, :].copy()
        inv -= np.outer((ctx.alpha / denom) * mz, row)
        if side == SIDE_X:
            ctx.y_x = ctx.y_x - corr
        else:
            ctx.y_y = ctx.y_y - corr

    new_graph = graph.with_edge(a, b)
    ctx.graph = new_graph
    ctx.p_base = _sparse_transition(new_graph)
    ctx.out_degree = np.array(new_graph.out_degree)
    ctx.dangling = ctx.out_degree == 0
    ctx.rwc_value += delta
    ctx.commits += 1
    ctx.commits_since_refresh += 1
    ctx._pagerank.clear()

    if ctx.commits_since_refresh >= REFRESH_EVERY:
        ctx.factorize()
    elif ctx.commits_since_refresh % DRIFT_CHECK_EVERY == 0:
        drift = ctx.inverse_residual()
        if drift > DRIFT_TOL:
            logger.info("inverse drift %.2e after %d commits, refactorising", drift, ctx.commits)
            ctx.factorize()
    return ctx, new_graph


def add_edge(ctx: RwcContext, edge: tuple[int, int]) -> float:
    """Commit ``edge`` to the context's own graph and return the new score."""
    upd = make_update(ctx, ctx.graph, edge)
    commit_edge(ctx, ctx.graph, upd)
    return ctx.rwc_value


def delta_rwc_matrix(ctx: RwcContext, sources=None, targets=None) -> np.ndarray:
    """Score changes for every ``sources x targets`` pair at once.

    Uses ``M^{-1} z = (M^{-1} p_a - M^{-1}[:, b]) / (q_a + 1)`` where ``p_a`` is
    the current column of ``a``, so every entry is O(1) once ``c^T M^{-1}``,
    ``P^T M^{-T} c`` and ``diag(M^{-1} P)`` are known.  Entries for existing
    edges and self-pairs are ``nan``.
    """
    if ctx.backend != "dense":
        raise NumericalError("delta_rwc_matrix needs the dense backend")
    n = ctx.n
    sources = np.arange(n) if sources is None else np.asarray(sources, dtype=np.int64)
    targets = np.arange(n) if targets is None else np.asarray(targets, dtype=np.int64)
    scale = 1.0 / (ctx.out_degree[sources] + 1.0)
    alpha = ctx.alpha
    total = np.zeros((len(sources), len(targets)))
    for side, sign in ((SIDE_X, -1.0), (SIDE_Y, 1.0)):
        inv = ctx.inverse(side)
        y = ctx.y_x if side == SIDE_X else ctx.y_y
        p = ctx.transition_matrix(side)
        g = ctx.c_diff @ inv
        gp = p.T @ g
        diag = np.asarray(p.T.multiply(inv).sum(axis=1)).ravel()
        num = (gp[sources][:, None] - g[targets][None, :]) * scale[:, None]
        mz_a = (diag[sources][:, None] - inv[np.ix_(sources, targets)]) * scale[:, None]
        denom = 1.0 + alpha * mz_a
        if np.any(np.abs(denom) < SINGULAR_EPS):
            raise SingularUpdateError("Sherman-Morrison denominator vanished in batch evaluation")
        total += sign * alpha * num * y[sources][:, None] / denom
    total *= 1 - alpha
    invalid = sources[:, None] == targets[None, :]
    adj = ctx.graph.adjacency_matrix("csr")
    invalid |= adj[sources][:, targets].toarray() > 0
    total[invalid] = np.nan
    return total
