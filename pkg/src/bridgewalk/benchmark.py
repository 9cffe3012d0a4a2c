"""Wall-clock comparison of incremental and full RWC recomputation."""

from __future__ import annotations

import time

import numpy as np

from .exceptions import DataError, NumericalError
from .graph import EndorsementGraph, Partition
from .incremental import delta_rwc, make_update
from .rwc import DEFAULT_ALPHA, build_context, recompute_rwc
from .validation import check_positive_int

EQUIVALENCE_TOL = 1e-8


def sample_absent_edges(graph: EndorsementGraph, count: int, seed: int = 0) -> list[tuple[int, int]]:
    rng = np.random.default_rng(seed)
    n = graph.n_vertices
    out: dict[tuple[int, int], None] = {}
    for _ in range(1000):
        for u, v in rng.integers(0, n, size=(2 * count, 2)).tolist():
            if u != v and not graph.has_edge(u, v):
                out.setdefault((u, v))
                if len(out) == count:
                    return list(out)
    raise DataError("graph too dense to sample absent edges")


def benchmark_incremental(graph: EndorsementGraph, partition: Partition, n_probes: int = 50,
                          alpha: float = DEFAULT_ALPHA, seed: int = 0,
                          time_budget_s: float = 600.0) -> dict:
    """Time ``delta_rwc`` against a from-scratch recomputation on the same edges.

    The full path rescoring ``G + e`` with sparse LU solves is what the
    incremental path replaces.  Raises :class:`NumericalError` when any
    probe's two results differ by more than ``1e-8``.
    """
    n_probes = check_positive_int(n_probes, "n_probes")
    t0 = time.perf_counter()
    ctx = build_context(graph, partition, alpha, "dense")
    build_ms = (time.perf_counter() - t0) * 1e3
    base = ctx.rwc_value
    inc_ms, full_ms, diffs = [], [], []
    deadline = time.perf_counter() + time_budget_s
    for edge in sample_absent_edges(graph, n_probes, seed):
        if time.perf_counter() > deadline:
            break
        t = time.perf_counter()
        delta = delta_rwc(ctx, make_update(ctx, graph, edge))
        inc_ms.append((time.perf_counter() - t) * 1e3)

        augmented = graph.with_edge(*edge)
        t = time.perf_counter()
        full = recompute_rwc(augmented, partition, alpha) - base
        full_ms.append((time.perf_counter() - t) * 1e3)
        diffs.append(abs(delta - full))
    if not inc_ms:
        raise DataError("time budget exhausted before the first probe")
    report = {
        "n": graph.n_vertices,
        "m": graph.n_edges,
        "alpha": alpha,
        "probes": len(inc_ms),
        "build_ms": build_ms,
        "incremental_ms": float(np.median(inc_ms)),
        "full_ms": float(np.median(full_ms)),
        "max_abs_diff": float(max(diffs)),
    }
    report["speedup"] = report["full_ms"] / report["incremental_ms"]
    if report["max_abs_diff"] > EQUIVALENCE_TOL:
        raise NumericalError(f"incremental and full scores disagree by {report['max_abs_diff']:.3e}")
    return report
