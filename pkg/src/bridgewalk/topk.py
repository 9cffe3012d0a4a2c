"""Threshold algorithm for top-k retrieval over two ranked lists."""

from __future__ import annotations

import heapq
from dataclasses import dataclass

import numpy as np


@dataclass
class TopKResult:
    indices: list
    scores: list
    sorted_accesses: int
    items_seen: int
    depth: int


def _descending(scores: np.ndarray) -> np.ndarray:
    # stable sort on -score keeps ties in index order
    return np.argsort(-scores, kind="stable")


def threshold_topk(score_a, score_b, k: int) -> TopKResult:
    """Top ``k`` items by ``score_a * score_b``; both scores must be non-negative.

    Both lists are read in parallel by sorted access; every newly seen item is
    completed by random access.  Reading stops once the k-th best aggregate
    strictly exceeds the product of the last scores read from each list,
    which no unseen item can beat (product is monotone on non-negative
    inputs).  Ties in the aggregate are broken by ascending item index, the
    same order a full sort produces.
    """
    a = np.asarray(score_a, dtype=float)
    b = np.asarray(score_b, dtype=float)
    if a.shape != b.shape or a.ndim != 1:
        raise ValueError("score lists must be 1-d and of equal length")
    if np.any(a < 0) or np.any(b < 0):
        raise ValueError("product aggregation requires non-negative scores")
    if k < 1:
        raise ValueError("k must be positive")
    n = len(a)
    order_a, order_b = _descending(a), _descending(b)
    seen = np.zeros(n, dtype=bool)
    heap: list[tuple[float, int]] = []  # (score, -index): heap[0] is the worst kept item
    depth = 0
    for depth in range(1, n + 1):
        for i in (order_a[depth - 1], order_b[depth - 1]):
            if seen[i]:
                continue
            seen[i] = True
            entry = (a[i] * b[i], -int(i))
            if len(heap) < k:
                heapq.heappush(heap, entry)
            elif entry > heap[0]:
                heapq.heapreplace(heap, entry)
        threshold = a[order_a[depth - 1]] * b[order_b[depth - 1]]
        if len(heap) == k and heap[0][0] > threshold:
            break
    best = sorted(heap, key=lambda e: (-e[0], -e[1]))
    return TopKResult([-e[1] for e in best], [e[0] for e in best], 2 * depth,
                      int(seen.sum()), depth)


def brute_force_topk(score_a, score_b, k: int) -> list[int]:
    """Reference ranking: full sort by product, ties by index."""
    prod = np.asarray(score_a, dtype=float) * np.asarray(score_b, dtype=float)
    return [int(i) for i in _descending(prod)[:k]]
