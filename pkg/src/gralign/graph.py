"""Undirected simple graph with contiguous integer node ids and a label table.

Edge-list text format: UTF-8, '#' starts a comment line, whitespace-separated
tokens, first two tokens per line are node names, extra tokens are ignored.
"""

import io
import warnings
from typing import Iterable, Iterator

import numpy as np

from .errors import ParameterError, ParseError

__all__ = ["Graph", "parse_edge_list", "serialize_edge_list"]


class Graph:
    """Immutable undirected simple graph.

    Node ids are exactly 0..n-1. `edges` is a canonical (m, 2) int64 array
    with u < v per row, rows sorted lexicographically. `labels` maps each id
    to a distinct external name.
    """

    __slots__ = ("n", "edges", "labels", "_indptr", "_indices", "_eids", "_edge_keys")

    def __init__(self, n: int, edges: np.ndarray, labels: tuple[str, ...] | None = None):
        edges = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
        if n < 0:
            raise ParameterError("node count must be non-negative")
        if edges.size:
            if edges.min() < 0 or edges.max() >= n:
                raise ParameterError("edge endpoint outside 0..n-1")
            if (edges[:, 0] == edges[:, 1]).any():
                raise ParameterError("self-loops are not allowed")
            lo = np.minimum(edges[:, 0], edges[:, 1])
            hi = np.maximum(edges[:, 0], edges[:, 1])
            edges = np.stack([lo, hi], axis=1)
            order = np.lexsort((edges[:, 1], edges[:, 0]))
            edges = edges[order]
            if len(edges) > 1 and (edges[1:] == edges[:-1]).all(axis=1).any():
                raise ParameterError("duplicate edges are not allowed")
        if labels is None:
            labels = tuple(str(i) for i in range(n))
        else:
            labels = tuple(labels)
            if len(labels) != n:
                raise ParameterError("label table size must equal node count")
            if len(set(labels)) != n:
                raise ParameterError("labels must be distinct")
        self.n = int(n)
        self.edges = edges
        self.edges.setflags(write=False)
        self.labels = labels
        self._indptr = None
        self._indices = None
        self._eids = None
        self._edge_keys = None

    # -- structural queries -------------------------------------------------

    @property
    def m(self) -> int:
        return len(self.edges)

    def _build_csr(self) -> None:
        n, edges = self.n, self.edges
        m = len(edges)
        src = np.concatenate([edges[:, 0], edges[:, 1]])
        dst = np.concatenate([edges[:, 1], edges[:, 0]])
        eid = np.concatenate([np.arange(m), np.arange(m)])
        order = np.lexsort((dst, src))
        indices = dst[order]
        eids = eid[order]
        deg = np.bincount(src, minlength=n)
        indptr = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(deg, out=indptr[1:])
        for a in (indptr, indices, eids):
            a.setflags(write=False)
        self._indptr, self._indices, self._eids = indptr, indices, eids

    @property
    def indptr(self) -> np.ndarray:
        if self._indptr is None:
            self._build_csr()
        return self._indptr

    @property
    def indices(self) -> np.ndarray:
        if self._indices is None:
            self._build_csr()
        return self._indices

    @property
    def edge_ids(self) -> np.ndarray:
        """Edge id per adjacency slot, aligned with `indices`."""
        if self._eids is None:
            self._build_csr()
        return self._eids

    def neighbors(self, u: int) -> np.ndarray:
        """Sorted neighbor ids of u (read-only view)."""
        return self.indices[self.indptr[u]:self.indptr[u + 1]]

    def degree(self, u: int | None = None):
        if u is None:
            return np.diff(self.indptr)
        return int(self.indptr[u + 1] - self.indptr[u])

    def edge_key_set(self) -> frozenset:
        """Set of packed u*n+v keys (u<v) for O(1) edge membership."""
        if self._edge_keys is None:
            keys = self.edges[:, 0] * self.n + self.edges[:, 1]
            self._edge_keys = frozenset(keys.tolist())
        return self._edge_keys

    def has_edge(self, u: int, v: int) -> bool:
        if u == v:
            return False
        if u > v:
            u, v = v, u
        return u * self.n + v in self.edge_key_set()

    def relabel_ids(self, perm: np.ndarray) -> "Graph":
        """New graph with node i renamed to perm[i]; labels follow their node."""
        perm = np.asarray(perm, dtype=np.int64)
        new_labels = [""] * self.n
        for i in range(self.n):
            new_labels[perm[i]] = self.labels[i]
        return Graph(self.n, perm[self.edges], tuple(new_labels))

    def validate(self) -> None:
        """Assert the full set of structural invariants (used by tests)."""
        assert self.edges.shape[1] == 2
        assert (self.edges[:, 0] < self.edges[:, 1]).all()
        if len(self.edges) > 1:
            keys = self.edges[:, 0] * self.n + self.edges[:, 1]
            assert (np.diff(keys) > 0).all(), "edges not sorted/unique"
        deg = self.degree()
        assert deg.sum() == 2 * self.m
        for u in range(self.n):
            nb = self.neighbors(u)
            assert (np.diff(nb) > 0).all() if len(nb) > 1 else True
        assert len(self.labels) == self.n
        assert len(set(self.labels)) == self.n

    def __eq__(self, other) -> bool:
        if not isinstance(other, Graph):
            return NotImplemented
        return (
            self.n == other.n
            and self.labels == other.labels
            and self.edges.shape == other.edges.shape
            and bool((self.edges == other.edges).all())
        )

    def __hash__(self):
        return hash((self.n, self.labels, self.edges.tobytes()))

    def __repr__(self):
        return f"Graph(n={self.n}, m={self.m})"


def _iter_lines(text) -> Iterator[str]:
    if isinstance(text, str):
        return iter(io.StringIO(text))
    if hasattr(text, "read"):
        return iter(text)
    return iter(text)  # iterable of lines


def parse_edge_list(text: str | io.TextIOBase | Iterable[str]) -> Graph:
    """Parse edge-list text into a Graph.

    Node names get ids in first-appearance order. Duplicate edges are
    collapsed and self-loops dropped (each with a warning). A line with a
    single token is a ParseError; input with no edges at all is too.
    """
    ids: dict[str, int] = {}
    edges: list[tuple[int, int]] = []
    seen: set[tuple[int, int]] = set()
    self_loops = 0
    duplicates = 0
    for lineno, raw in enumerate(_iter_lines(text), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        tokens = line.split()
        if len(tokens) < 2:
            raise ParseError("expected two node names, found one token", line=lineno)
        a, b = tokens[0], tokens[1]
        if a == b:
            # dropping the edge may drop the name too: the format cannot
            # express isolated nodes, so a loop-only name never gets an id
            self_loops += 1
            continue
        for name in (a, b):
            if name not in ids:
                ids[name] = len(ids)
        u, v = ids[a], ids[b]
        if u > v:
            u, v = v, u
        if (u, v) in seen:
            duplicates += 1
            continue
        seen.add((u, v))
        edges.append((u, v))
    if not edges:
        raise ParseError("no edges in input")
    if self_loops:
        warnings.warn(f"dropped {self_loops} self-loop(s)", stacklevel=2)
    if duplicates:
        warnings.warn(f"collapsed {duplicates} duplicate edge(s)", stacklevel=2)
    labels = tuple(sorted(ids, key=ids.get))
    return Graph(len(ids), np.array(edges, dtype=np.int64), labels)


def serialize_edge_list(g: Graph) -> str:
    """Serialize a Graph to edge-list text, one edge per line.

    Endpoints within a line and the lines themselves are ordered by label so
    the output is a pure function of the label-edge set: parse followed by
    serialize reproduces the bytes regardless of how ids were assigned.
    """
    lines = []
    for u, v in g.edges:
        a, b = g.labels[u], g.labels[v]
        if b < a:
            a, b = b, a
        lines.append(f"{a} {b}\n")
    lines.sort()
    return "".join(lines)
