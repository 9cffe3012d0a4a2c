"""Closed-form RWC scores for the two-star graph.

Two disjoint in-stars of ``n`` vertices; ``a`` and ``c`` are the hubs of side X
and Y, ``b`` and ``d`` leaves.  After adding one of four cross edges the RWC
score (``k1 = k2 = 1``, hubs as the high-degree sets) is a rational function
of ``n`` and ``alpha``.  The hub-to-hub edge ``a -> c`` gives the lowest
score as ``n`` grows.
"""

from __future__ import annotations

from dataclasses import dataclass

from .validation import check_alpha, check_positive_int

EDGE_KINDS = ("a->c", "a->d", "b->c", "b->d")


@dataclass(frozen=True)
class StarCaseScore:
    edge_kind: str
    n: int
    alpha: float
    value: float


def _check_kind(edge_kind: str) -> str:
    kind = edge_kind.replace("→", "->").replace(" ", "")
    if kind not in EDGE_KINDS:
        raise ValueError(f"edge_kind must be one of {EDGE_KINDS}, got {edge_kind!r}")
    return kind


def _common(n, a):
    # score contribution shared by a->c, a->d and b->d
    return (a * n - a + 1) / ((a + 1) * n - a)


def star_score(edge_kind: str, n: int, alpha: float) -> float:
    """RWC of ``two_star(n)`` plus the edge named by ``edge_kind``."""
    kind = _check_kind(edge_kind)
    n = check_positive_int(n, "n", minimum=2)
    a = check_alpha(alpha)
    if kind == "a->c":
        return ((-a**2 + a) * n + (a - 1) ** 2) / ((a**2 + a + 1) * n - a**2) + _common(n, a)
    if kind == "a->d":
        num = (-a**3 + a) * n + a**3 - a**2 - a + 1
        den = (a**3 + a**2 + a + 1) * n - a**3
        return num / den + _common(n, a)
    if kind == "b->c":
        return (2 * a * n - 3 * a + 2) / ((a + 1) * n - a)
    return _common(n, a) + (2 * a * n - 3 * a - a**2 + 2) / (2 * (a + 1) * n + a**2 - 2 * a)


def star_score_limit(edge_kind: str, alpha: float) -> float:
    """Limit of :func:`star_score` as ``n`` goes to infinity."""
    kind = _check_kind(edge_kind)
    a = check_alpha(alpha, allow_one=True)
    if kind == "a->c":
        return (-a**2 + a) / (a**2 + a + 1) + a / (a + 1)
    if kind == "a->d":
        return (-a**3 + a) / (a**3 + a**2 + a + 1) + a / (a + 1)
    if kind == "b->c":
        return 2 * a / (a + 1)
    return a / (a + 1) + 2 * a / (2 * (a + 1))


@dataclass
class TheoremReport:
    alpha: float
    n: int
    scores: dict
    limits: dict
    holds_finite: bool
    holds_limit: bool
    ties_finite: list
    ties_limit: list

    def __str__(self):
        rows = [f"alpha={self.alpha} n={self.n}"]
        for kind in EDGE_KINDS:
            rows.append(f"  s[{kind}] = {self.scores[kind]:.12g}   limit = {self.limits[kind]:.12g}")
        return "\n".join(rows)


def verify_theorem1(alpha: float, n_large: int = 100_000, *, atol: float = 1e-12) -> TheoremReport:
    """Check that the hub-to-hub edge is (weakly) best, at ``n_large`` and in the limit.

    Raises :class:`AssertionError` with all four values when the ordering fails.
    Kinds whose value equals ``s[a->c]`` within ``atol`` are listed as ties.
    """
    alpha = check_alpha(alpha)
    n_large = check_positive_int(n_large, "n_large", minimum=1000)
    scores = {k: star_score(k, n_large, alpha) for k in EDGE_KINDS}
    limits = {k: star_score_limit(k, alpha) for k in EDGE_KINDS}
    others = EDGE_KINDS[1:]
    holds_finite = all(scores["a->c"] <= scores[k] + atol for k in others)
    holds_limit = all(limits["a->c"] <= limits[k] + atol for k in others)
    report = TheoremReport(
        alpha, n_large, scores, limits, holds_finite, holds_limit,
        ties_finite=[k for k in others if abs(scores[k] - scores["a->c"]) <= atol],
        ties_limit=[k for k in others if abs(limits[k] - limits["a->c"]) <= atol],
    )
    if not (holds_finite and holds_limit):
        raise AssertionError(f"hub-to-hub ordering violated\n{report}")
    return report
