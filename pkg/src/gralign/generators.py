"""Synthetic network generators and the edge-rewiring noise model.

All randomness is drawn from numpy Generators seeded explicitly; a single
master seed is split into per-task seeds with `derive_seed` (SHA-256 based,
stable across platforms and processes).
"""

import hashlib
from dataclasses import dataclass, field

import numpy as np

from .errors import GralignError, ParameterError
from .graph import Graph

__all__ = ["NoisePair", "generate_geo", "generate_sf", "rewire", "derive_seed"]


def derive_seed(master_seed: int, *parts) -> int:
    """Derive a child seed from a master seed and a sequence of key parts."""
    key = ":".join([str(master_seed), *[str(p) for p in parts]]).encode()
    return int.from_bytes(hashlib.sha256(key).digest()[:8], "little") >> 1


@dataclass
class NoisePair:
    """An original network, its rewired counterpart, and the known mapping."""

    original: Graph
    noisy: Graph
    noise_pct: int
    true_mapping: np.ndarray = field(repr=False)
    seed: int = 0


def _check_size(n: int, m: int, min_n: int) -> None:
    if n < min_n:
        raise ParameterError(f"need at least {min_n} nodes, got {n}")
    max_m = n * (n - 1) // 2
    if not 1 <= m <= max_m:
        raise ParameterError(f"edge count {m} outside 1..{max_m} for n={n}")


def generate_geo(n: int, m: int, seed: int) -> Graph:
    """Geometric random graph: n points in the 3D unit cube, edges are the
    m closest pairs by Euclidean distance (ties broken by pair id order)."""
    _check_size(n, m, min_n=2)
    rng = np.random.default_rng(seed)
    pts = rng.random((n, 3))
    iu, iv = np.triu_indices(n, k=1)
    d2 = ((pts[iu] - pts[iv]) ** 2).sum(axis=1)
    order = np.argsort(d2, kind="stable")[:m]
    edges = np.stack([iu[order], iv[order]], axis=1)
    return Graph(n, edges)


def generate_sf(n: int, m: int, seed: int) -> Graph:
    """Scale-free network: preferential attachment with k = round(m/n) links
    per node from a k-node seed clique, then uniform edge additions/removals
    until exactly m edges."""
    _check_size(n, m, min_n=3)
    rng = np.random.default_rng(seed)
    k = max(1, round(m / n))
    edges: list[tuple[int, int]] = []
    keys: set[int] = set()

    def add_edge(u: int, v: int) -> None:
        if u > v:
            u, v = v, u
        edges.append((u, v))
        keys.add(u * n + v)

    for i in range(k):
        for j in range(i + 1, k):
            add_edge(i, j)
    # each endpoint appears once per incident edge; sampling from this list
    # is sampling proportional to degree
    repeated = [u for e in edges for u in e]
    for i in range(k, n):
        if not repeated:
            targets = list(rng.choice(i, size=min(k, i), replace=False))
        else:
            targets = []
            chosen = set()
            while len(targets) < min(k, i):
                t = repeated[rng.integers(len(repeated))]
                if t not in chosen:
                    chosen.add(t)
                    targets.append(t)
        for t in targets:
            add_edge(i, t)
            repeated.append(i)
            repeated.append(t)

    edge_arr = np.array(edges, dtype=np.int64)
    if len(edge_arr) > m:
        drop = rng.choice(len(edge_arr), size=len(edge_arr) - m, replace=False)
        mask = np.ones(len(edge_arr), dtype=bool)
        mask[drop] = False
        edge_arr = edge_arr[mask]
    elif len(edge_arr) < m:
        extra = _sample_non_edges(rng, n, keys, m - len(edge_arr))
        edge_arr = np.concatenate([edge_arr, extra], axis=0)
    return Graph(n, edge_arr)


def _sample_non_edges(rng: np.random.Generator, n: int, existing: set[int], count: int) -> np.ndarray:
    """Sample `count` distinct non-edges uniformly; `existing` holds u*n+v keys."""
    max_m = n * (n - 1) // 2
    free = max_m - len(existing)
    if count > free:
        raise GralignError("non-edge pool exhausted")
    picked: list[tuple[int, int]] = []
    taken: set[int] = set()
    attempts = 0
    limit = 100 * count + 10_000
    while len(picked) < count and attempts < limit:
        attempts += 1
        u = int(rng.integers(n))
        v = int(rng.integers(n))
        if u == v:
            continue
        if u > v:
            u, v = v, u
        key = u * n + v
        if key in existing or key in taken:
            continue
        taken.add(key)
        picked.append((u, v))
    if len(picked) < count:
        # dense graph: rejection stalls, enumerate the complement instead
        iu, iv = np.triu_indices(n, k=1)
        all_keys = iu * n + iv
        blocked = np.fromiter(existing | taken, dtype=np.int64, count=len(existing) + len(taken))
        mask = ~np.isin(all_keys, blocked)
        pool = np.flatnonzero(mask)
        more = rng.choice(pool, size=count - len(picked), replace=False)
        picked.extend(zip(iu[more].tolist(), iv[more].tolist()))
    return np.array(picked, dtype=np.int64)


def rewire(g: Graph, noise_pct: int, seed: int, degree_preserving: bool = False) -> NoisePair:
    """Rewire ceil(noise_pct/100 * m) edges of g, keeping node and edge counts.

    Default model: remove that many edges uniformly without replacement, then
    add the same number uniformly among the then-current non-edges. The
    degree-preserving variant uses double-edge swaps instead (sensitivity
    studies only; the benchmark uses the default).
    """
    if not 0 <= noise_pct <= 100:
        raise ParameterError(f"noise_pct {noise_pct} outside 0..100")
    rng = np.random.default_rng(seed)
    n, m = g.n, g.m
    n_rewire = -(-noise_pct * m // 100)  # ceil
    if n_rewire == 0:
        noisy = Graph(n, g.edges, g.labels)
    elif degree_preserving:
        noisy = _double_edge_swaps(rng, g, n_rewire)
    else:
        drop = rng.choice(m, size=n_rewire, replace=False)
        mask = np.ones(m, dtype=bool)
        mask[drop] = False
        kept = g.edges[mask]
        keys = set((kept[:, 0] * n + kept[:, 1]).tolist())
        added = _sample_non_edges(rng, n, keys, n_rewire)
        noisy = Graph(n, np.concatenate([kept, added], axis=0), g.labels)
    return NoisePair(
        original=g,
        noisy=noisy,
        noise_pct=int(noise_pct),
        true_mapping=np.arange(n, dtype=np.int64),
        seed=int(seed),
    )


def _double_edge_swaps(rng: np.random.Generator, g: Graph, n_rewire: int) -> Graph:
    """Degree-preserving rewiring: each successful swap replaces two edges."""
    n = g.n
    edges = [tuple(e) for e in g.edges.tolist()]
    keys = set(u * n + v for u, v in edges)
    target_swaps = -(-n_rewire // 2)
    swaps = 0
    attempts = 0
    limit = 200 * target_swaps + 10_000
    while swaps < target_swaps and attempts < limit:
        attempts += 1
        i = int(rng.integers(len(edges)))
        j = int(rng.integers(len(edges)))
        if i == j:
            continue
        a, b = edges[i]
        c, d = edges[j]
        if len({a, b, c, d}) < 4:
            continue
        # rewire to (a,d), (c,b)
        p1 = (a, d) if a < d else (d, a)
        p2 = (c, b) if c < b else (b, c)
        k1 = p1[0] * n + p1[1]
        k2 = p2[0] * n + p2[1]
        if k1 in keys or k2 in keys or k1 == k2:
            continue
        keys.discard(a * n + b)
        keys.discard(c * n + d)
        keys.add(k1)
        keys.add(k2)
        edges[i] = p1
        edges[j] = p2
        swaps += 1
    if swaps < target_swaps:
        raise GralignError("degree-preserving rewiring stalled; graph too constrained")
    return Graph(n, np.array(edges, dtype=np.int64), g.labels)
