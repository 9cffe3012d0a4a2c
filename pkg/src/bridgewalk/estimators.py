"""Estimator-style wrappers so the scorer and recommenders compose with sklearn tooling.

``fit`` takes an :class:`~bridgewalk.graph.EndorsementGraph` and a
:class:`~bridgewalk.graph.Partition` in place of ``X`` and ``y``.
"""

from __future__ import annotations

from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .acceptance import AcceptanceModel, rov_ap
from .graph import SIDE_X, SIDE_Y
from .incremental import edge_delta
from .recommend import SCOPES, STRATEGIES, greedy, random_strategy, rov
from .rwc import DEFAULT_ALPHA, DEFAULT_MAX_ITER, DEFAULT_TOL, build_context, personalized_pagerank, rwc
from .validation import check_alpha, check_backend, check_positive_int

RECOMMENDER_MODES = ("rov", "rov-ap", "greedy", "strategy")


class RandomWalkControversy(BaseEstimator):
    """RWC scorer.

    Parameters
    ----------
    alpha : float, default=0.85
        Continuation probability of the walks (restart is ``1 - alpha``).
    backend : {"auto", "dense", "power"}, default="auto"
    tol, max_iter :
        Power-iteration stopping rule.
    """

    def __init__(self, alpha=DEFAULT_ALPHA, backend="auto", tol=DEFAULT_TOL, max_iter=DEFAULT_MAX_ITER):
        self.alpha = alpha
        self.backend = backend
        self.tol = tol
        self.max_iter = max_iter

    def fit(self, graph, partition):
        check_alpha(self.alpha)
        check_backend(self.backend)
        self.context_ = build_context(graph, partition, self.alpha, self.backend,
                                      tol=self.tol, max_iter=self.max_iter)
        self.rwc_ = rwc(self.context_)
        self.n_vertices_ = graph.n_vertices
        return self

    def score(self, graph=None, partition=None):
        """RWC of the fitted graph, or of ``graph``/``partition`` when given."""
        if graph is not None:
            return rwc(build_context(graph, partition, self.alpha, self.backend,
                                     tol=self.tol, max_iter=self.max_iter))
        check_is_fitted(self, "rwc_")
        return self.rwc_

    def pagerank(self, side=SIDE_X):
        check_is_fitted(self, "context_")
        return personalized_pagerank(self.context_, side).values

    def transform(self, graph=None, partition=None):
        """Per-vertex ``r_x - r_y``; summed against ``c_x - c_y`` this gives the score."""
        ctx = self.context_ if graph is None else build_context(graph, partition, self.alpha, self.backend)
        return (personalized_pagerank(ctx, SIDE_X).values - personalized_pagerank(ctx, SIDE_Y).values)

    def delta(self, edge):
        """Score change if ``edge`` were added (dense backend)."""
        check_is_fitted(self, "context_")
        return edge_delta(self.context_, edge)


class EdgeRecommender(BaseEstimator):
    """Recommend cross-side edges that lower the RWC score.

    Parameters
    ----------
    k : int, default=5
        Number of edges to recommend (or to add, for ``mode="strategy"``).
    mode : {"rov", "rov-ap", "greedy", "strategy"}, default="rov"
    alpha : float, default=0.85
    scope : {"all", "cross-side"}, default="all"
        Candidate set for greedy search.
    strategy : str, default="high->high"
        Random strategy used with ``mode="strategy"``.
    acceptance_model : AcceptanceModel, optional
        Required for ``mode="rov-ap"``.
    seed : int, default=0
    """

    def __init__(self, k=5, mode="rov", alpha=DEFAULT_ALPHA, scope="all", strategy="high->high",
                 acceptance_model=None, seed=0):
        self.k = k
        self.mode = mode
        self.alpha = alpha
        self.scope = scope
        self.strategy = strategy
        self.acceptance_model = acceptance_model
        self.seed = seed

    def _validate(self):
        check_positive_int(self.k, "k")
        check_alpha(self.alpha)
        if self.mode not in RECOMMENDER_MODES:
            raise ValueError(f"mode must be one of {RECOMMENDER_MODES}, got {self.mode!r}")
        if self.scope not in SCOPES:
            raise ValueError(f"scope must be one of {SCOPES}, got {self.scope!r}")
        if self.mode == "strategy" and self.strategy not in STRATEGIES:
            raise ValueError(f"strategy must be one of {STRATEGIES}, got {self.strategy!r}")
        if self.mode == "rov-ap" and not isinstance(self.acceptance_model, AcceptanceModel):
            raise ValueError("mode 'rov-ap' needs a fitted acceptance_model")

    def fit(self, graph, partition, polarities=None):
        self._validate()
        ctx = build_context(graph, partition, self.alpha, "dense")
        self.context_ = ctx
        if self.mode == "rov":
            self.recommendations_ = rov(ctx, graph, partition, self.k)
        elif self.mode == "rov-ap":
            self.recommendations_ = rov_ap(ctx, graph, partition, self.acceptance_model, self.k,
                                           polarities)
        elif self.mode == "greedy":
            self.recommendations_ = greedy(ctx, graph, partition, self.k, self.scope)
        else:
            self.trajectory_ = random_strategy(ctx, graph, partition, self.strategy, self.k, self.seed)
            self.recommendations_ = None
        return self

    def predict(self):
        """Recommended (or, for strategies, added) edges as ``(source, target)`` pairs."""
        check_is_fitted(self, "context_")
        if self.mode == "strategy":
            return list(self.trajectory_.edges)
        return self.recommendations_.edge_list
