import itertools

import numpy as np
import pytest

from bridgewalk.exceptions import DataError
from bridgewalk.graph import generate_planted_partition, generate_two_star, two_star_roles
from bridgewalk.recommend import (STRATEGIES, greedy, random_strategy, rov, rov_candidates,
                                  strategy_candidates)
from bridgewalk.rwc import build_context, recompute_rwc


def test_rov_two_star_offers_both_hub_edges(two_star10):
    g, p = two_star10
    ctx = build_context(g, p, 0.85, "dense")
    rec = rov(ctx, g, p, 5)
    roles = two_star_roles(10)
    assert set(rec.edge_list) == {(roles["a"], roles["c"]), (roles["c"], roles["a"])}
    assert rec.exhausted and rec.candidate_evaluations == 2
    assert rec.edges[0].decrease == pytest.approx(rec.edges[1].decrease, abs=1e-12)
    assert rec.edge_list[0] < rec.edge_list[1]


def _brute_force_rov(g, p, k):
    base = recompute_rwc(g, p, 0.85)
    scored = []
    for edge in rov_candidates(g, p):
        dec = base - recompute_rwc(g.with_edge(*edge), p, 0.85)
        if dec > 0:
            scored.append((-dec, edge))
    scored.sort()
    return scored[:k]


@pytest.mark.parametrize("seed", range(5))
def test_rov_matches_brute_force(seed):
    g, p = generate_planted_partition(40, 0.08, 0.01, 0.1, seed=seed, k1=4, k2=4)
    ctx = build_context(g, p, 0.85, "dense")
    rec = rov(ctx, g, p, 5)
    expected = _brute_force_rov(g, p, 5)
    assert rec.edge_list == [e for _, e in expected]
    for cand, (neg_dec, _) in zip(rec.edges, expected):
        assert cand.decrease == pytest.approx(-neg_dec, abs=1e-9)
    assert rec.candidate_evaluations <= 2 * 4 * 4


def test_rov_edges_are_cross_side_and_absent(planted_small):
    g, p = planted_small
    ctx = build_context(g, p, 0.85, "dense")
    rec = rov(ctx, g, p, 10)
    for a, b in rec.edge_list:
        assert p.in_x[a] != p.in_x[b] and not g.has_edge(a, b)
        assert a in p.x_star + p.y_star and b in p.x_star + p.y_star
    assert rec.rwc_after_if_all_accepted == pytest.approx(
        recompute_rwc(_with(g, rec.edge_list), p, 0.85), abs=1e-12)


def _with(g, edges):
    for e in edges:
        g = g.with_edge(*e)
    return g


def test_rov_rejects_mismatched_graph(planted_small, two_star10):
    g, p = planted_small
    ctx = build_context(g, p, 0.85, "dense")
    with pytest.raises(DataError):
        rov(ctx, *two_star10, 3)
    with pytest.raises(ValueError):
        rov(ctx, g, p, 0)


def test_greedy_two_star_first_pick_is_hub_pair(two_star10):
    g, p = two_star10
    ctx = build_context(g, p, 0.85, "dense")
    rec = greedy(ctx, g, p, 1)
    roles = two_star_roles(10)
    assert rec.edge_list[0] in {(roles["a"], roles["c"]), (roles["c"], roles["a"])}
    assert rec.candidate_evaluations == 20 * 19 - g.n_edges


def test_greedy_matches_exhaustive_single_step():
    g, p = generate_planted_partition(12, 0.2, 0.05, 0.1, seed=3, k1=2, k2=2)
    ctx = build_context(g, p, 0.85, "dense")
    base = ctx.rwc_value
    best = min((recompute_rwc(g.with_edge(a, b), p, 0.85) - base, (a, b))
               for a, b in itertools.permutations(range(g.n_vertices), 2) if not g.has_edge(a, b))
    rec = greedy(ctx, g, p, 1)
    assert rec.edge_list == [best[1]]
    assert rec.edges[0].delta == pytest.approx(best[0], abs=1e-10)


def test_greedy_sequence_distinct_and_not_worse_than_rov(planted_small):
    g, p = planted_small
    ctx = build_context(g, p, 0.85, "dense")
    for k in (1, 3):
        gr = greedy(ctx, g, p, k)
        assert len(set(gr.edge_list)) == len(gr.edge_list) == k
        assert gr.rwc_after_if_all_accepted <= rov(ctx, g, p, k).rwc_after_if_all_accepted + 1e-12
    assert ctx.commits == 0 and ctx.graph is g


def test_greedy_cross_side_scope(planted_small):
    g, p = planted_small
    ctx = build_context(g, p, 0.85, "dense")
    rec = greedy(ctx, g, p, 2, candidate_scope="cross-side")
    assert all(p.in_x[a] != p.in_x[b] for a, b in rec.edge_list)
    with pytest.raises(ValueError):
        greedy(ctx, g, p, 1, candidate_scope="nearby")


@pytest.mark.parametrize("strategy", STRATEGIES)
def test_strategy_trajectory(strategy, planted_small):
    g, p = planted_small
    ctx = build_context(g, p, 0.85, "dense")
    t1 = random_strategy(ctx, g, p, strategy, 8, seed=4)
    t2 = random_strategy(ctx, g, p, strategy, 8, seed=4)
    assert t1.edges == t2.edges and t1.values == t2.values
    assert len(t1.values) == 8 and not t1.exhausted
    assert t1.final == pytest.approx(recompute_rwc(_with(g, t1.edges), p, 0.85), abs=1e-9)
    high = set(p.x_star + p.y_star)
    src_high, dst_high = (s == "high" for s in strategy.split("->"))
    for a, b in t1.edges:
        assert (a in high) == src_high and (b in high) == dst_high
        assert p.in_x[a] != p.in_x[b]
    rows = list(t1.to_rows(g))
    assert rows[0]["step"] == 0 and len(rows) == 9


def test_strategy_exhausts_small_pool(two_star10):
    g, p = two_star10
    ctx = build_context(g, p, 0.85, "dense")
    assert len(strategy_candidates(g, p, "high->high")) == 2
    t = random_strategy(ctx, g, p, "high->high", 5)
    assert t.exhausted and len(t.edges) == 2
    with pytest.raises(ValueError):
        random_strategy(ctx, g, p, "hub->hub", 1)


def test_high_to_high_lowers_score_most(planted_500):
    g, p = planted_500
    ctx = build_context(g, p, 0.85, "dense")
    finals = {s: np.mean([random_strategy(ctx, g, p, s, 20, seed=i).final for i in range(3)])
              for s in STRATEGIES}
    assert min(finals, key=finals.get) == "high->high"
