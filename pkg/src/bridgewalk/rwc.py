"""Random-walk controversy (RWC) score.

Two restarting random walks are run on the endorsement graph, one restarting
uniformly on side X and one on side Y.  ``P`` is column-stochastic: column
``a`` spreads the mass of vertex ``a`` evenly over the vertices ``a``
endorses.  Dangling columns are replaced by the walk's own restart vector, so
``P_x`` and ``P_y`` differ only there.  With ``M = I - alpha * P``::

    r = (1 - alpha) * M^{-1} e
    RWC = (c_x - c_y)^T (r_x - r_y)

where ``c_x``/``c_y`` indicate the frozen high in-degree sets.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .exceptions import ConvergenceError, NumericalError
from .graph import SIDE_X, SIDE_Y, EndorsementGraph, Partition
from .validation import check_alpha, check_backend, check_graph_partition

DEFAULT_ALPHA = 0.85
DEFAULT_TOL = 1e-10
DEFAULT_MAX_ITER = 100_000
DENSE_THRESHOLD = 5000


@dataclass(frozen=True)
class PageRankVector:
    values: np.ndarray
    side: str
    residual: float = 0.0
    iterations: int = 0


class RwcContext:
    """Restart/indicator vectors, transition matrices and (dense) inverses.

    The sparse part of the transition matrix is shared by both walks and kept
    in CSC format with dangling columns left empty; :meth:`transition_matrix`
    materialises ``P_x`` or ``P_y``.  With the dense backend ``m_x_inv`` and
    ``m_y_inv`` hold ``(I - alpha P)^{-1}`` and are kept current by
    :func:`bridgewalk.incremental.commit_edge`.
    """

    def __init__(self, graph: EndorsementGraph, partition: Partition, alpha: float,
                 backend: str, tol: float = DEFAULT_TOL, max_iter: int = DEFAULT_MAX_ITER):
        self.graph = graph
        self.partition = partition
        self.alpha = alpha
        self.backend = backend
        self.tol = tol
        self.max_iter = max_iter
        n = graph.n_vertices
        self.n = n

        in_x = partition.in_x
        self.e_x = in_x / in_x.sum()
        self.e_y = (~in_x) / (~in_x).sum()
        self.c_x = np.zeros(n)
        self.c_x[list(partition.x_star)] = 1.0
        self.c_y = np.zeros(n)
        self.c_y[list(partition.y_star)] = 1.0

        self.p_base = _sparse_transition(graph)
        self.dangling = graph.out_degree == 0
        self.out_degree = np.array(graph.out_degree)

        self.m_x_inv = None
        self.m_y_inv = None
        self.y_x = None  # M_x^{-1} e_x
        self.y_y = None
        self.rwc_value = None
        self.commits = 0
        self.commits_since_refresh = 0
        self._pagerank = {}

    @property
    def c_diff(self) -> np.ndarray:
        return self.c_x - self.c_y

    def restart(self, side: str) -> np.ndarray:
        return self.e_x if side == SIDE_X else self.e_y

    def inverse(self, side: str) -> np.ndarray:
        if self.m_x_inv is None:
            raise NumericalError("inverse matrices are only available with the dense backend")
        return self.m_x_inv if side == SIDE_X else self.m_y_inv

    def transition_matrix(self, side: str) -> sp.csc_matrix:
        """``P_x`` or ``P_y`` as a CSC matrix (dangling columns filled in)."""
        e = self.restart(side)
        d = np.flatnonzero(self.dangling)
        support = np.flatnonzero(e)
        rows = np.tile(support, len(d))
        cols = np.repeat(d, len(support))
        vals = np.tile(e[support], len(d))
        fill = sp.csc_matrix((vals, (rows, cols)), shape=(self.n, self.n))
        return sp.csc_matrix(self.p_base + fill)

    def column(self, side: str, a: int) -> np.ndarray:
        """Dense copy of column ``a`` of ``P_x``/``P_y``."""
        if self.dangling[a]:
            return self.restart(side).copy()
        col = np.zeros(self.n)
        lo, hi = self.p_base.indptr[a], self.p_base.indptr[a + 1]
        col[self.p_base.indices[lo:hi]] = self.p_base.data[lo:hi]
        return col

    def apply(self, side: str, r: np.ndarray) -> np.ndarray:
        """``P_side @ r`` without materialising the dangling columns."""
        return self.p_base @ r + self.restart(side) * r[self.dangling].sum()

    def factorize(self) -> None:
        """(Re)compute both dense inverses and the cached score from scratch."""
        eye = np.eye(self.n)
        for side in (SIDE_X, SIDE_Y):
            m = eye - self.alpha * self.transition_matrix(side).toarray()
            try:
                inv = np.linalg.inv(m)
            except np.linalg.LinAlgError as exc:
                raise NumericalError(f"I - alpha P_{side.lower()} is singular") from exc
            if not np.all(np.isfinite(inv)):
                raise NumericalError(f"non-finite inverse for side {side}")
            if side == SIDE_X:
                self.m_x_inv = inv
            else:
                self.m_y_inv = inv
        self.y_x = self.m_x_inv @ self.e_x
        self.y_y = self.m_y_inv @ self.e_y
        self.rwc_value = float((1 - self.alpha) * self.c_diff @ (self.y_x - self.y_y))
        self.commits_since_refresh = 0
        self._pagerank.clear()

    def inverse_residual(self, n_probes: int = 3, seed: int = 0) -> float:
        """Max-norm of ``M^{-1} M x - x`` over random probes, both sides."""
        rng = np.random.default_rng(seed)
        worst = 0.0
        for side in (SIDE_X, SIDE_Y):
            inv = self.inverse(side)
            for _ in range(n_probes):
                x = rng.standard_normal(self.n)
                mx = x - self.alpha * self.apply(side, x)
                worst = max(worst, float(np.abs(inv @ mx - x).max()))
        return worst

    def __repr__(self):
        return (f"RwcContext(n={self.n}, alpha={self.alpha}, backend={self.backend!r}, "
                f"|X*|={len(self.partition.x_star)}, |Y*|={len(self.partition.y_star)})")


def _sparse_transition(graph: EndorsementGraph) -> sp.csc_matrix:
    n = graph.n_vertices
    if graph.n_edges == 0:
        return sp.csc_matrix((n, n))
    e = graph.edge_array()
    src, dst = e[:, 0], e[:, 1]
    vals = 1.0 / graph.out_degree[src]
    return sp.csc_matrix((vals, (dst, src)), shape=(n, n))


def resolve_backend(backend: str, n: int, dense_threshold: int = DENSE_THRESHOLD) -> str:
    check_backend(backend)
    if backend == "auto":
        return "dense" if n <= dense_threshold else "power"
    return backend


def build_context(graph: EndorsementGraph, partition: Partition, alpha: float = DEFAULT_ALPHA,
                  backend: str = "auto", *, tol: float = DEFAULT_TOL,
                  max_iter: int = DEFAULT_MAX_ITER,
                  dense_threshold: int = DENSE_THRESHOLD) -> RwcContext:
    """Assemble an :class:`RwcContext`; the dense backend inverts both ``M`` once."""
    alpha = check_alpha(alpha)
    check_graph_partition(graph, partition)
    backend = resolve_backend(backend, graph.n_vertices, dense_threshold)
    ctx = RwcContext(graph, partition, alpha, backend, tol=tol, max_iter=max_iter)
    if backend == "dense":
        ctx.factorize()
    return ctx


def personalized_pagerank(ctx: RwcContext, side: str) -> PageRankVector:
    """Stationary vector of the walk restarting on ``side``.

    The power backend iterates ``r <- alpha P r + (1 - alpha) e`` from
    ``r = e`` until the L1 change drops below ``ctx.tol``.
    """
    if side not in (SIDE_X, SIDE_Y):
        raise ValueError(f"side must be 'X' or 'Y', got {side!r}")
    if side in ctx._pagerank:
        return ctx._pagerank[side]
    e = ctx.restart(side)
    if ctx.backend == "dense":
        y = ctx.y_x if side == SIDE_X else ctx.y_y
        pr = PageRankVector((1 - ctx.alpha) * y, side)
    else:
        pr = _power_iteration(ctx, side, e)
    ctx._pagerank[side] = pr
    return pr


def _power_iteration(ctx: RwcContext, side: str, e: np.ndarray) -> PageRankVector:
    alpha = ctx.alpha
    r = e.copy()
    residual = np.inf
    for it in range(1, ctx.max_iter + 1):
        nxt = alpha * ctx.apply(side, r) + (1 - alpha) * e
        residual = float(np.abs(nxt - r).sum())
        r = nxt
        if residual < ctx.tol:
            return PageRankVector(r, side, residual, it)
    raise ConvergenceError(f"power iteration for side {side} did not converge in "
                           f"{ctx.max_iter} iterations", residual)


def rwc(ctx: RwcContext, method: str = "pagerank") -> float:
    """RWC score of the context's graph.

    ``method="pagerank"`` evaluates ``(c_x - c_y)^T (r_x - r_y)`` from the
    two PageRank vectors; ``method="inverse"`` uses the dense inverses
    directly (dense backend only).  Both give the same value.
    """
    if method == "pagerank":
        r_x = personalized_pagerank(ctx, SIDE_X).values
        r_y = personalized_pagerank(ctx, SIDE_Y).values
        return float(ctx.c_x @ r_x + ctx.c_y @ r_y - ctx.c_y @ r_x - ctx.c_x @ r_y)
    if method == "inverse":
        inv_x, inv_y = ctx.inverse(SIDE_X), ctx.inverse(SIDE_Y)
        return float((1 - ctx.alpha) * ctx.c_diff @ (inv_x @ ctx.e_x - inv_y @ ctx.e_y))
    raise ValueError(f"unknown method {method!r}")


def rwc_of(graph: EndorsementGraph, partition: Partition, alpha: float = DEFAULT_ALPHA,
           backend: str = "auto") -> float:
    """Convenience: build a fresh context and score it."""
    return rwc(build_context(graph, partition, alpha, backend))


def recompute_rwc(graph: EndorsementGraph, partition: Partition, alpha: float) -> float:
    """Score ``graph`` from scratch with two sparse LU solves.

    This is the full-recompute reference used to check and time the
    incremental path; it never touches a cached inverse.
    """
    from scipy.sparse.linalg import splu

    ctx = RwcContext(graph, partition, check_alpha(alpha), "dense")
    eye = sp.identity(ctx.n, format="csc")
    total = 0.0
    for side, sign in ((SIDE_X, 1.0), (SIDE_Y, -1.0)):
        m = sp.csc_matrix(eye - alpha * ctx.transition_matrix(side))
        r = (1 - alpha) * splu(m).solve(ctx.restart(side))
        total += sign * float(ctx.c_diff @ r)
    return total
