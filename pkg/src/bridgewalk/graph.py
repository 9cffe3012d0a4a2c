"""Endorsement graphs, side partitions, file formats and synthetic generators.

An edge ``u -> v`` means that ``u`` endorses (e.g. retweets) ``v``.  Graphs are
simple: self-loops are dropped on load and parallel edges are collapsed.
"""

from __future__ import annotations

import io
import logging
import os
from collections import deque
from collections.abc import Iterable, Sequence

import numpy as np
import scipy.sparse as sp

from .exceptions import DataError, ParseError

logger = logging.getLogger(__name__)

SIDE_X = "X"
SIDE_Y = "Y"


class EndorsementGraph:
    """Directed simple graph over dense vertex ids ``0..n-1``.

    Instances are treated as immutable; :meth:`with_edge` returns a copy.

    :param n_vertices: number of vertices.
    :param edges: iterable of ``(source, target)`` id pairs.
    :param labels: optional sequence of unique string labels, one per vertex.
    """

    def __init__(self, n_vertices: int, edges: Iterable[tuple[int, int]] = (),
                 labels: Sequence[str] | None = None):
        if n_vertices < 0:
            raise DataError("vertex count must be non-negative")
        self.n_vertices = int(n_vertices)
        if labels is not None:
            labels = tuple(str(lab) for lab in labels)
            if len(labels) != self.n_vertices:
                raise DataError(f"expected {self.n_vertices} labels, got {len(labels)}")
            if len(set(labels)) != len(labels):
                raise DataError("vertex labels must be unique")
        self.labels = labels
        self._index = None if labels is None else {lab: i for i, lab in enumerate(labels)}

        adjacency: list[list[int]] = [[] for _ in range(self.n_vertices)]
        edge_set = set()
        for u, v in edges:
            u, v = int(u), int(v)
            if not (0 <= u < self.n_vertices and 0 <= v < self.n_vertices):
                raise DataError(f"edge ({u}, {v}) references a vertex outside 0..{self.n_vertices - 1}")
            if u == v:
                raise DataError(f"self-loop at vertex {u}")
            if (u, v) in edge_set:
                raise DataError(f"duplicate edge ({u}, {v})")
            edge_set.add((u, v))
            adjacency[u].append(v)
        self._edges = frozenset(edge_set)
        self.out_adjacency = tuple(tuple(nbrs) for nbrs in adjacency)
        self.out_degree = np.array([len(nbrs) for nbrs in adjacency], dtype=np.int64)
        in_degree = np.zeros(self.n_vertices, dtype=np.int64)
        for nbrs in adjacency:
            in_degree[list(nbrs)] += 1
        self.in_degree = in_degree
        self.out_degree.setflags(write=False)
        self.in_degree.setflags(write=False)
        self.dropped_self_loops = 0
        self.dropped_duplicates = 0

    @property
    def n_edges(self) -> int:
        return len(self._edges)

    def __repr__(self):
        return f"EndorsementGraph(n_vertices={self.n_vertices}, n_edges={self.n_edges})"

    def __eq__(self, other):
        if not isinstance(other, EndorsementGraph):
            return NotImplemented
        return (self.n_vertices == other.n_vertices and self._edges == other._edges
                and self.labels == other.labels)

    def __hash__(self):
        return hash((self.n_vertices, self._edges, self.labels))

    def has_edge(self, u: int, v: int) -> bool:
        return (u, v) in self._edges

    def edges(self):
        """Yield edges grouped by source id, in insertion order per source."""
        for u, nbrs in enumerate(self.out_adjacency):
            for v in nbrs:
                yield u, v

    def edge_array(self) -> np.ndarray:
        """Edges as an ``(m, 2)`` integer array, in :meth:`edges` order."""
        arr = np.fromiter((x for e in self.edges() for x in e), dtype=np.int64,
                          count=2 * self.n_edges)
        return arr.reshape(-1, 2)

    def successors(self, u: int) -> tuple[int, ...]:
        return self.out_adjacency[u]

    def label(self, u: int) -> str:
        return str(u) if self.labels is None else self.labels[u]

    def index(self, label: str) -> int:
        if self._index is None:
            try:
                idx = int(label)
            except ValueError:
                raise KeyError(label) from None
            if not 0 <= idx < self.n_vertices:
                raise KeyError(label)
            return idx
        return self._index[label]

    def with_edge(self, u: int, v: int) -> "EndorsementGraph":
        """Return a copy of the graph with the edge ``u -> v`` appended."""
        if self.has_edge(u, v):
            raise DataError(f"edge ({u}, {v}) already present")
        return EndorsementGraph(self.n_vertices, [*self.edges(), (u, v)], self.labels)

    def adjacency_matrix(self, fmt: str = "csr") -> sp.spmatrix:
        """Sparse 0/1 matrix with ``A[u, v] = 1`` for every edge ``u -> v``."""
        if self.n_edges:
            e = self.edge_array()
            rows, cols = e[:, 0], e[:, 1]
        else:
            rows = cols = np.zeros(0, dtype=np.int64)
        data = np.ones(len(rows))
        a = sp.coo_matrix((data, (rows, cols)), shape=(self.n_vertices, self.n_vertices))
        return a.asformat(fmt)

    def symmetrized(self) -> sp.csr_matrix:
        """Undirected 0/1 adjacency (``A`` or ``A.T``), as CSR."""
        a = self.adjacency_matrix("csr")
        s = ((a + a.T) > 0).astype(np.float64)
        return sp.csr_matrix(s)


class Partition:
    """Two-sided split of the vertex set plus the frozen high in-degree sets.

    ``x_star`` and ``y_star`` hold the ``k1`` (``k2``) highest in-degree
    vertices of each side, sorted by in-degree descending and then by
    ascending id.  They are computed once and never change afterwards, even
    when edges are later added to the graph.
    """

    def __init__(self, in_x: Sequence[bool], x_star: Sequence[int], y_star: Sequence[int],
                 k1: int, k2: int):
        self.in_x = np.asarray(in_x, dtype=bool).copy()
        self.in_x.setflags(write=False)
        self.x_star = tuple(int(v) for v in x_star)
        self.y_star = tuple(int(v) for v in y_star)
        self.k1 = int(k1)
        self.k2 = int(k2)
        if any(not self.in_x[v] for v in self.x_star):
            raise DataError("x_star contains a vertex outside side X")
        if any(self.in_x[v] for v in self.y_star):
            raise DataError("y_star contains a vertex outside side Y")

    @classmethod
    def from_sides(cls, graph: EndorsementGraph, in_x: Sequence[bool], k1: int = 10,
                   k2: int = 10) -> "Partition":
        in_x = np.asarray(in_x, dtype=bool)
        if in_x.shape != (graph.n_vertices,):
            raise DataError(f"side vector has shape {in_x.shape}, expected ({graph.n_vertices},)")
        if k1 < 1 or k2 < 1:
            raise DataError("k1 and k2 must be positive")
        x_star = top_in_degree(graph, np.flatnonzero(in_x), k1)
        y_star = top_in_degree(graph, np.flatnonzero(~in_x), k2)
        return cls(in_x, x_star, y_star, k1, k2)

    @property
    def n_vertices(self) -> int:
        return len(self.in_x)

    @property
    def x_vertices(self) -> np.ndarray:
        return np.flatnonzero(self.in_x)

    @property
    def y_vertices(self) -> np.ndarray:
        return np.flatnonzero(~self.in_x)

    def side(self, v: int) -> str:
        return SIDE_X if self.in_x[v] else SIDE_Y

    def swapped(self) -> "Partition":
        """Mirror image with the roles of X and Y exchanged."""
        return Partition(~self.in_x, self.y_star, self.x_star, self.k2, self.k1)

    def __repr__(self):
        return (f"Partition(|X|={int(self.in_x.sum())}, |Y|={int((~self.in_x).sum())}, "
                f"x_star={list(self.x_star)}, y_star={list(self.y_star)})")


def top_in_degree(graph: EndorsementGraph, vertices, k: int) -> list[int]:
    """The ``k`` vertices with largest in-degree, ties by ascending id."""
    vertices = np.asarray(vertices, dtype=np.int64)
    if vertices.size == 0:
        return []
    order = np.lexsort((vertices, -graph.in_degree[vertices]))
    return [int(v) for v in vertices[order[:k]]]


# --------------------------------------------------------------------------
# file formats

def _open_text(source, mode="r"):
    if isinstance(source, (str, os.PathLike)):
        return open(source, mode, encoding="utf-8", newline="" if "w" in mode else None), True
    return source, False


def _fields(line: str) -> list[str]:
    fields = line.split("\t")
    if len(fields) == 1:
        fields = line.split()
    return [f.strip() for f in fields]


def load_graph(source, fmt: str = "tsv") -> EndorsementGraph:
    """Read a ``source<TAB>target`` edge list.

    Vertex ids are assigned in order of first appearance.  Lines starting with
    ``#`` and blank lines are ignored.  A line with a single label declares
    a vertex without edges.  Self-loops are dropped with a warning
    and repeated edges collapsed.  The counts end up in
    ``graph.dropped_self_loops`` and ``graph.dropped_duplicates``.

    :param source: path or text stream.
    :raises ParseError: on a malformed line or an input without any vertex.
    """
    if fmt != "tsv":
        raise DataError(f"unsupported graph format {fmt!r}")
    stream, owned = _open_text(source)
    try:
        index: dict[str, int] = {}
        edges: dict[tuple[int, int], None] = {}
        self_loops = duplicates = 0
        for lineno, raw in enumerate(stream, start=1):
            line = raw.rstrip("\r\n")
            if not line.strip() or line.lstrip().startswith("#"):
                continue
            fields = _fields(line)
            if len(fields) == 1 and fields[0]:
                index.setdefault(fields[0], len(index))
                continue
            if len(fields) != 2 or not all(fields):
                raise ParseError(f"expected 'source<TAB>target', got {line!r}", lineno)
            u, v = (index.setdefault(lab, len(index)) for lab in fields)
            if u == v:
                self_loops += 1
                continue
            if (u, v) in edges:
                duplicates += 1
                continue
            edges[(u, v)] = None
    finally:
        if owned:
            stream.close()
    if not index:
        raise ParseError("empty edge list")
    if self_loops:
        logger.warning("dropped %d self-loop(s)", self_loops)
    graph = EndorsementGraph(len(index), edges, labels=list(index))
    graph.dropped_self_loops = self_loops
    graph.dropped_duplicates = duplicates
    return graph


def save_graph(graph: EndorsementGraph, target) -> None:
    stream, owned = _open_text(target, "w")
    try:
        for u, v in graph.edges():
            stream.write(f"{graph.label(u)}\t{graph.label(v)}\n")
        isolated = (graph.in_degree == 0) & (graph.out_degree == 0)
        for v in np.flatnonzero(isolated):
            stream.write(f"{graph.label(int(v))}\n")
    finally:
        if owned:
            stream.close()


def load_partition(source, graph: EndorsementGraph, k1: int = 10, k2: int = 10) -> Partition:
    """Read ``vertex<TAB>X|Y`` lines and build a :class:`Partition`.

    Every vertex of ``graph`` must be assigned exactly once.
    """
    stream, owned = _open_text(source)
    side: dict[int, bool] = {}
    try:
        for lineno, raw in enumerate(stream, start=1):
            line = raw.rstrip("\r\n")
            if not line.strip() or line.lstrip().startswith("#"):
                continue
            fields = _fields(line)
            if len(fields) != 2:
                raise ParseError(f"expected 'vertex<TAB>side', got {line!r}", lineno)
            label, tag = fields
            try:
                v = graph.index(label)
            except KeyError:
                raise ParseError(f"unknown vertex {label!r}", lineno) from None
            if tag not in (SIDE_X, SIDE_Y):
                raise ParseError(f"unknown side tag {tag!r} for vertex {label!r}", lineno)
            if v in side:
                raise ParseError(f"duplicate assignment for vertex {label!r}", lineno)
            side[v] = tag == SIDE_X
    finally:
        if owned:
            stream.close()
    missing = [graph.label(v) for v in range(graph.n_vertices) if v not in side]
    if missing:
        shown = ", ".join(repr(m) for m in missing[:5])
        raise DataError(f"{len(missing)} vertex/vertices without a side, e.g. {shown}")
    in_x = np.array([side[v] for v in range(graph.n_vertices)], dtype=bool)
    return Partition.from_sides(graph, in_x, k1, k2)


def save_partition(graph: EndorsementGraph, partition: Partition, target) -> None:
    stream, owned = _open_text(target, "w")
    try:
        for v in range(graph.n_vertices):
            stream.write(f"{graph.label(v)}\t{partition.side(v)}\n")
    finally:
        if owned:
            stream.close()


def _dot_id(label: str) -> str:
    return '"' + label.replace("\\", "\\\\").replace('"', '\\"') + '"'


def write_dot(graph: EndorsementGraph, partition: Partition, target,
              added_edges: Iterable[tuple[int, int]] = ()) -> None:
    """Graphviz export: vertices colored by side, ``added_edges`` in bold red.

    Added edges may or may not already be present in ``graph``.
    """
    added = list(dict.fromkeys((int(u), int(v)) for u, v in added_edges))
    added_set = set(added)
    stars = set(partition.x_star) | set(partition.y_star)
    stream, owned = _open_text(target, "w")
    try:
        stream.write("digraph endorsement {\n")
        for v in range(graph.n_vertices):
            color = "steelblue" if partition.in_x[v] else "darkorange"
            shape = "doublecircle" if v in stars else "circle"
            stream.write(f"  {_dot_id(graph.label(v))} [side={partition.side(v)}, "
                         f"color={color}, style=filled, shape={shape}];\n")
        for u, v in graph.edges():
            if (u, v) not in added_set:
                stream.write(f"  {_dot_id(graph.label(u))} -> {_dot_id(graph.label(v))};\n")
        for u, v in added:
            stream.write(f"  {_dot_id(graph.label(u))} -> {_dot_id(graph.label(v))} "
                         f"[color=red, penwidth=3, added=true];\n")
        stream.write("}\n")
    finally:
        if owned:
            stream.close()


def graph_from_text(text: str) -> EndorsementGraph:
    return load_graph(io.StringIO(text))


# --------------------------------------------------------------------------
# partitioning

def _weak_components(sym: sp.csr_matrix) -> np.ndarray:
    from scipy.sparse.csgraph import connected_components
    _, labels = connected_components(sym, directed=False)
    return labels


def spectral_bisect(graph: EndorsementGraph, seed: int = 0) -> np.ndarray:
    """Two-way split from the sign of the Fiedler vector.

    Works on the symmetrized adjacency of the largest weakly connected
    component; other vertices take the majority side of their already
    assigned neighbours (side X when no neighbour is assigned or on a tie).

    :returns: boolean array, ``True`` for side X.
    """
    n = graph.n_vertices
    if n < 2:
        raise DataError("spectral bisection needs at least two vertices")
    sym = graph.symmetrized()
    comp = _weak_components(sym)
    sizes = np.bincount(comp)
    main = np.flatnonzero(comp == np.argmax(sizes))
    in_x = np.zeros(n, dtype=bool)
    assigned = np.zeros(n, dtype=bool)

    if len(main) == 1:
        in_x[main] = True
    else:
        sub = sym[main][:, main]
        deg = np.asarray(sub.sum(axis=1)).ravel()
        lap = sp.diags(deg) - sub
        if len(main) <= 2000:
            _, vecs = np.linalg.eigh(lap.toarray())
            fiedler = vecs[:, 1]
        else:
            from scipy.sparse.linalg import eigsh
            rng = np.random.default_rng(seed)
            v0 = rng.standard_normal(len(main))
            _, vecs = eigsh(lap.asfptype(), k=2, sigma=-1e-6, which="LM", v0=v0)
            fiedler = vecs[:, 1]
        # sign normalisation makes the output independent of the solver's sign choice
        pivot = np.flatnonzero(np.abs(fiedler) > 1e-12)
        if pivot.size and fiedler[pivot[0]] > 0:
            fiedler = -fiedler
        side = fiedler <= 0
        if side.all() or not side.any():
            side = fiedler <= np.median(fiedler)
            if side.all():
                side[np.argmax(fiedler)] = False
        in_x[main] = side
    assigned[main] = True

    if not assigned.all():
        queue = deque(int(v) for v in np.flatnonzero(assigned))
        while queue:
            u = queue.popleft()
            for w in sym.indices[sym.indptr[u]:sym.indptr[u + 1]]:
                if assigned[w]:
                    continue
                nbrs = sym.indices[sym.indptr[w]:sym.indptr[w + 1]]
                done = nbrs[assigned[nbrs]]
                n_x = int(in_x[done].sum())
                in_x[w] = n_x * 2 >= len(done)
                assigned[w] = True
                queue.append(int(w))
        in_x[~assigned] = True
    if in_x.all():
        in_x[n - 1] = False
    return in_x


# --------------------------------------------------------------------------
# generators

def generate_two_star(n: int) -> tuple[EndorsementGraph, Partition]:
    """Two disjoint in-stars of ``n`` vertices each.

    Vertex ``0`` is hub ``a`` of side X with leaves ``1..n-1``; vertex ``n``
    is hub ``c`` of side Y with leaves ``n+1..2n-1``.  Every leaf endorses its
    hub, so both hubs are dangling.  ``k1 = k2 = 1`` with the hubs as the
    high-degree sets.
    """
    if n < 2:
        raise DataError("a star needs at least two vertices")
    labels = ["a"] + [f"b{i}" for i in range(1, n)] + ["c"] + [f"d{i}" for i in range(1, n)]
    edges = [(leaf, 0) for leaf in range(1, n)] + [(n + leaf, n) for leaf in range(1, n)]
    graph = EndorsementGraph(2 * n, edges, labels)
    in_x = np.arange(2 * n) < n
    return graph, Partition.from_sides(graph, in_x, 1, 1)


def two_star_roles(n: int) -> dict[str, int]:
    """Vertex ids of the canonical roles ``a``, ``b``, ``c``, ``d``."""
    return {"a": 0, "b": 1, "c": n, "d": n + 1}


def generate_planted_partition(n_per_side: int, p_in: float, p_cross: float,
                               hub_fraction: float = 0.02, seed: int = 0,
                               k1: int = 10, k2: int = 10) -> tuple[EndorsementGraph, Partition]:
    """Two-community endorsement graph with popular hubs on each side.

    Side X holds ids ``0..n_per_side-1`` and side Y the rest; the first
    ``ceil(hub_fraction * n_per_side)`` ids of each side are hubs.  Within a
    side, ``u -> v`` is drawn independently with probability
    ``p_in * w[v] / mean(w)`` (capped at 1), where hubs carry weight such that
    they attract half of the within-side endorsements.  Every ordered
    cross-side pair is an edge with probability ``p_cross``.
    """
    if n_per_side < 2:
        raise DataError("n_per_side must be at least 2")
    if not 0.0 <= p_cross <= p_in <= 1.0:
        raise DataError("need 0 <= p_cross <= p_in <= 1")
    if not 0.0 < hub_fraction < 1.0:
        raise DataError("hub_fraction must lie in (0, 1)")
    n = n_per_side
    n_hubs = max(1, int(np.ceil(hub_fraction * n)))
    if n_hubs >= n:
        raise DataError("hub_fraction leaves no ordinary vertices")
    rng = np.random.default_rng(seed)

    weight = np.ones(n)
    weight[:n_hubs] = (n - n_hubs) / n_hubs
    prob_in = np.minimum(1.0, p_in * weight / weight.mean())

    blocks = []
    for offset in (0, n):
        draw = rng.random((n, n)) < prob_in[None, :]
        np.fill_diagonal(draw, False)
        r, c = np.nonzero(draw)
        blocks.append(np.column_stack([r + offset, c + offset]))
    for src_off, dst_off in ((0, n), (n, 0)):
        r, c = np.nonzero(rng.random((n, n)) < p_cross)
        blocks.append(np.column_stack([r + src_off, c + dst_off]))
    edges = np.concatenate(blocks)
    edges = edges[np.lexsort((edges[:, 1], edges[:, 0]))]
    graph = EndorsementGraph(2 * n, map(tuple, edges.tolist()))
    in_x = np.arange(2 * n) < n
    return graph, Partition.from_sides(graph, in_x, k1, k2)
