import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from bridgewalk import EdgeRecommender, RandomWalkControversy
from bridgewalk.acceptance import AcceptanceModel
from bridgewalk.recommend import rov
from bridgewalk.rwc import build_context, rwc_of


def test_scorer_params_and_clone():
    est = RandomWalkControversy(alpha=0.5, backend="power")
    assert est.get_params()["alpha"] == 0.5
    twin = clone(est).set_params(alpha=0.7)
    assert twin.alpha == 0.7 and est.alpha == 0.5


def test_scorer_fit_score_transform(planted_small):
    g, p = planted_small
    est = RandomWalkControversy(backend="dense").fit(g, p)
    assert est.score() == pytest.approx(rwc_of(g, p, 0.85), abs=1e-12)
    cd = np.zeros(g.n_vertices)
    cd[list(p.x_star)] = 1
    cd[list(p.y_star)] = -1
    assert cd @ est.transform() == pytest.approx(est.score(), abs=1e-12)
    assert est.pagerank("Y").sum() == pytest.approx(1.0)
    edge = next((u, v) for u in range(g.n_vertices) for v in range(g.n_vertices)
                if u != v and not g.has_edge(u, v))
    assert est.delta(edge) == pytest.approx(rwc_of(g.with_edge(*edge), p, 0.85) - est.score(),
                                            abs=1e-10)


def test_scorer_unfitted_and_invalid(planted_small):
    with pytest.raises(NotFittedError):
        RandomWalkControversy().score()
    with pytest.raises(ValueError):
        RandomWalkControversy(alpha=1.2).fit(*planted_small)


def test_recommender_modes(planted_small):
    g, p = planted_small
    ctx = build_context(g, p, 0.85, "dense")
    assert EdgeRecommender(k=3).fit(g, p).predict() == rov(ctx, g, p, 3).edge_list
    assert len(EdgeRecommender(k=2, mode="greedy").fit(g, p).predict()) == 2
    strat = EdgeRecommender(k=4, mode="strategy", strategy="nonhigh->high", seed=1).fit(g, p)
    assert len(strat.predict()) == 4
    flat = AcceptanceModel().fit_counts(np.zeros((10, 10)), np.zeros((10, 10)))
    ap = EdgeRecommender(k=3, mode="rov-ap", acceptance_model=flat).fit(g, p)
    assert ap.predict() == rov(ctx, g, p, 3).edge_list


@pytest.mark.parametrize("params", [{"mode": "best"}, {"mode": "rov-ap"}, {"k": 0},
                                    {"scope": "local"}, {"mode": "strategy", "strategy": "x"}])
def test_recommender_rejects_bad_params(params, planted_small):
    with pytest.raises(ValueError):
        EdgeRecommender(**params).fit(*planted_small)


def test_recommender_clone_keeps_params():
    est = EdgeRecommender(k=7, mode="greedy", scope="cross-side")
    assert clone(est).get_params() == est.get_params()
