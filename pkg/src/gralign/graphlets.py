"""Graphlet degree vectors over the 15 automorphism orbits of 2-4-node
graphlets.

Two independent counters:

* `count_orbits` — production counter. Degrees and the two 3-node orbits are
  counted directly; the eleven 4-node orbits come from per-node combinatorial
  equations over triangle/common-neighbor statistics plus one explicit
  enumeration of complete 4-node subgraphs, so most orbits are inferred
  rather than enumerated. The hot loop is JIT-compiled.
* `brute_force_orbits` — testing oracle. Enumerates every connected induced
  subgraph on 2-4 nodes (ESU enumeration, each subgraph visited exactly once)
  and classifies it against the canonical graphlet list by isomorphism.

Orbit numbering is the standard one: orbit 0 = degree (edge), orbits 1-2 the
3-path, orbit 3 the triangle, orbits 4-14 the six 4-node graphlets in
canonical order (path, star, cycle, tailed triangle, diamond, complete).
"""

import itertools

import numpy as np
from numba import njit

from .errors import ParseError
from .graph import Graph

__all__ = [
    "N_ORBITS",
    "count_orbits",
    "brute_force_orbits",
    "write_gdv_file",
    "read_gdv_file",
]

N_ORBITS = 15

# canonical 2-4-node graphlets, in the standard order G0..G8
_GRAPHLET_DEFS: list[tuple[int, tuple[tuple[int, int], ...]]] = [
    (2, ((0, 1),)),
    (3, ((0, 1), (1, 2))),
    (3, ((0, 1), (0, 2), (1, 2))),
    (4, ((0, 1), (1, 2), (2, 3))),
    (4, ((0, 1), (0, 2), (0, 3))),
    (4, ((0, 1), (1, 2), (2, 3), (0, 3))),
    (4, ((0, 1), (0, 2), (1, 2), (0, 3))),
    (4, ((0, 1), (0, 2), (0, 3), (1, 2), (1, 3))),
    (4, ((0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3))),
]


def _automorphism_orbit_ids() -> list[list[int]]:
    """Per graphlet, the global orbit id of each of its nodes.

    Orbits are derived from scratch: a node class is an equivalence class
    under the graphlet's automorphism group. Within a graphlet, classes are
    numbered by ascending node degree, which reproduces the standard global
    numbering 0..14 for 2-4-node graphlets.
    """
    out = []
    next_id = 0
    for k, edges in _GRAPHLET_DEFS:
        eset = {frozenset(e) for e in edges}
        parent = list(range(k))

        def find(a):
            while parent[a] != a:
                parent[a] = parent[parent[a]]
                a = parent[a]
            return a

        for perm in itertools.permutations(range(k)):
            if all(frozenset((perm[a], perm[b])) in eset for a, b in edges):
                for i in range(k):
                    ra, rb = find(i), find(perm[i])
                    if ra != rb:
                        parent[ra] = rb
        deg = [sum(1 for e in eset if i in e) for i in range(k)]
        roots = sorted({find(i) for i in range(k)}, key=lambda r: deg[r])
        orbit_of_root = {r: next_id + j for j, r in enumerate(roots)}
        out.append([orbit_of_root[find(i)] for i in range(k)])
        next_id += len(roots)
    assert next_id == N_ORBITS
    return out


_ORBIT_IDS = _automorphism_orbit_ids()

_PAIRS3 = ((0, 1), (0, 2), (1, 2))
_PAIRS4 = ((0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3))


def _classify_by_isomorphism(k: int, edges: tuple[tuple[int, int], ...]):
    """Map each node position of the given k-node graph to its global orbit,
    via an explicit isomorphism onto one of the canonical graphlets."""
    for gi, (gk, gedges) in enumerate(_GRAPHLET_DEFS):
        if gk != k or len(gedges) != len(edges):
            continue
        geset = {frozenset(e) for e in gedges}
        for perm in itertools.permutations(range(k)):
            if all(frozenset((perm[a], perm[b])) in geset for a, b in edges):
                return tuple(_ORBIT_IDS[gi][perm[i]] for i in range(k))
    return None


def _connected(k: int, edges) -> bool:
    seen = {0}
    frontier = [0]
    adj = {i: set() for i in range(k)}
    for a, b in edges:
        adj[a].add(b)
        adj[b].add(a)
    while frontier:
        a = frontier.pop()
        for b in adj[a]:
            if b not in seen:
                seen.add(b)
                frontier.append(b)
    return len(seen) == k


def _mask_table(k: int, pairs) -> list:
    table = []
    for mask in range(1 << len(pairs)):
        edges = tuple(p for i, p in enumerate(pairs) if mask >> i & 1)
        if _connected(k, edges):
            table.append(_classify_by_isomorphism(k, edges))
        else:
            table.append(None)
    return table


_TABLE3 = _mask_table(3, _PAIRS3)
_TABLE4 = _mask_table(4, _PAIRS4)


def brute_force_orbits(g: Graph) -> np.ndarray:
    """Exact per-node orbit counts by explicit enumeration of all connected
    induced subgraphs on 2-4 nodes. Intended for graphs up to ~200 nodes."""
    n = g.n
    adj = [set(g.neighbors(u).tolist()) for u in range(n)]
    counts = np.zeros((n, N_ORBITS), dtype=np.int64)

    def visit(sub: tuple):
        if len(sub) == 2:
            a, b = sub
            counts[a, 0] += 1
            counts[b, 0] += 1
        elif len(sub) == 3:
            a, b, c = sorted(sub)
            mask = (b in adj[a]) | (c in adj[a]) << 1 | (c in adj[b]) << 2
            orbits = _TABLE3[mask]
            counts[a, orbits[0]] += 1
            counts[b, orbits[1]] += 1
            counts[c, orbits[2]] += 1
        else:
            s = sorted(sub)
            mask = 0
            for i, (p, q) in enumerate(_PAIRS4):
                if s[q] in adj[s[p]]:
                    mask |= 1 << i
            orbits = _TABLE4[mask]
            for node, orb in zip(s, orbits):
                counts[node, orb] += 1

    # ESU: every connected induced subgraph of sizes 2..4 is reached once
    def extend(sub: tuple, ext: set, closed: set, v: int):
        if len(sub) >= 2:
            visit(sub)
        if len(sub) == 4:
            return
        ext = set(ext)
        while ext:
            w = ext.pop()
            excl = {u for u in adj[w] if u > v and u not in closed}
            extend(sub + (w,), ext | excl, closed | {w} | adj[w], v)

    for v in range(n):
        ext0 = {u for u in adj[v] if u > v}
        extend((v,), ext0, {v} | adj[v], v)
    return counts


@njit(cache=True, inline="always")
def _adjacent(indptr, indices, u, v):
    lo, hi = indptr[u], indptr[u + 1]
    while lo < hi:
        mid = (lo + hi) >> 1
        w = indices[mid]
        if w == v:
            return True
        if w < v:
            lo = mid + 1
        else:
            hi = mid
    return False


@njit(cache=True)
def _orbit_kernel(n, indptr, indices, eids, eu, ev, deg):
    m = eu.shape[0]
    orbits = np.zeros((n, 15), dtype=np.int64)

    # triangles over each edge
    tri = np.zeros(m, dtype=np.int64)
    for e in range(m):
        x, y = eu[e], ev[e]
        xi, yi = indptr[x], indptr[y]
        xe, ye = indptr[x + 1], indptr[y + 1]
        while xi < xe and yi < ye:
            a, b = indices[xi], indices[yi]
            if a == b:
                tri[e] += 1
                xi += 1
                yi += 1
            elif a < b:
                xi += 1
            else:
                yi += 1

    # complete 4-node subgraphs per node, enumerated over ordered triples
    k4 = np.zeros(n, dtype=np.int64)
    maxdeg = 0
    for x in range(n):
        if deg[x] > maxdeg:
            maxdeg = deg[x]
    buf = np.empty(maxdeg, dtype=np.int64)
    for x in range(n):
        for ix in range(indptr[x], indptr[x + 1]):
            y = indices[ix]
            if y >= x:
                break
            nb = 0
            for iy in range(indptr[y], indptr[y + 1]):
                z = indices[iy]
                if z >= y:
                    break
                if _adjacent(indptr, indices, x, z):
                    buf[nb] = z
                    nb += 1
            for i in range(nb):
                z = buf[i]
                for j in range(i + 1, nb):
                    zz = buf[j]
                    if _adjacent(indptr, indices, z, zz):
                        k4[x] += 1
                        k4[y] += 1
                        k4[z] += 1
                        k4[zz] += 1

    # per-node equation system for the remaining 4-node orbits
    common = np.zeros(n, dtype=np.int64)
    touched = np.empty(n, dtype=np.int64)
    for x in range(n):
        ntouched = 0
        orbits[x, 0] = deg[x]
        f_12_14 = 0
        f_10_13 = 0
        f_13_14 = 0
        f_11_13 = 0
        f_7_11 = 0
        f_5_8 = 0
        f_6_9 = 0
        f_9_12 = 0
        f_4_8 = 0
        f_8_12 = 0

        for ix1 in range(indptr[x], indptr[x + 1]):
            y = indices[ix1]
            ey = eids[ix1]
            for iy in range(indptr[y], indptr[y + 1]):
                z = indices[iy]
                ez = eids[iy]
                if z == x:
                    continue
                if _adjacent(indptr, indices, x, z):
                    if z < y:
                        f_12_14 += tri[ez] - 1
                        f_10_13 += (deg[y] - 1 - tri[ez]) + (deg[z] - 1 - tri[ez])
                else:
                    if common[z] == 0:
                        touched[ntouched] = z
                        ntouched += 1
                    common[z] += 1
            for ix2 in range(ix1 + 1, indptr[x + 1]):
                z = indices[ix2]
                ez = eids[ix2]
                if _adjacent(indptr, indices, y, z):
                    orbits[x, 3] += 1
                    f_13_14 += (tri[ey] - 1) + (tri[ez] - 1)
                    f_11_13 += (deg[x] - 1 - tri[ey]) + (deg[x] - 1 - tri[ez])
                else:
                    orbits[x, 2] += 1
                    f_7_11 += (deg[x] - 1 - tri[ey] - 1) + (deg[x] - 1 - tri[ez] - 1)
                    f_5_8 += (deg[y] - 1 - tri[ey]) + (deg[z] - 1 - tri[ez])

        for ix1 in range(indptr[x], indptr[x + 1]):
            y = indices[ix1]
            ey = eids[ix1]
            for iy in range(indptr[y], indptr[y + 1]):
                z = indices[iy]
                ez = eids[iy]
                if z == x:
                    continue
                if not _adjacent(indptr, indices, x, z):
                    orbits[x, 1] += 1
                    f_6_9 += deg[y] - 1 - tri[ey] - 1
                    f_9_12 += tri[ez]
                    f_4_8 += deg[z] - 1 - tri[ez]
                    f_8_12 += common[z] - 1

        o14 = k4[x]
        orbits[x, 14] = o14
        orbits[x, 13] = (f_13_14 - 6 * o14) // 2
        orbits[x, 12] = f_12_14 - 3 * o14
        orbits[x, 11] = (f_11_13 - f_13_14 + 6 * o14) // 2
        orbits[x, 10] = f_10_13 - f_13_14 + 6 * o14
        orbits[x, 9] = (f_9_12 - 2 * f_12_14 + 6 * o14) // 2
        orbits[x, 8] = (f_8_12 - 2 * f_12_14 + 6 * o14) // 2
        orbits[x, 7] = (f_13_14 + f_7_11 - f_11_13 - 6 * o14) // 6
        orbits[x, 6] = (2 * f_12_14 + f_6_9 - f_9_12 - 6 * o14) // 2
        orbits[x, 5] = 2 * f_12_14 + f_5_8 - f_8_12 - 6 * o14
        orbits[x, 4] = 2 * f_12_14 + f_4_8 - f_8_12 - 6 * o14

        for t in range(ntouched):
            common[touched[t]] = 0

    return orbits


def count_orbits(g: Graph) -> np.ndarray:
    """Exact GDV matrix (n x 15, int64) for all nodes of g.

    First call in a process JIT-compiles the kernel; subsequent calls run at
    native speed, single-threaded.
    """
    deg = g.degree().astype(np.int64)
    return _orbit_kernel(
        g.n, g.indptr, g.indices, g.edge_ids, g.edges[:, 0], g.edges[:, 1], deg
    )


def write_gdv_file(g: Graph, gdv: np.ndarray) -> str:
    """One line per node, "label c0 c1 ... c14", nodes in id order."""
    lines = []
    for i in range(g.n):
        lines.append(g.labels[i] + " " + " ".join(str(c) for c in gdv[i]) + "\n")
    return "".join(lines)


def read_gdv_file(text: str) -> tuple[tuple[str, ...], np.ndarray]:
    """Parse a GDV file back into (labels, n x 15 count matrix)."""
    labels = []
    rows = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        tokens = line.split()
        if len(tokens) != 1 + N_ORBITS:
            raise ParseError(
                f"expected label plus {N_ORBITS} counts, got {len(tokens)} tokens",
                line=lineno,
            )
        try:
            counts = [int(t) for t in tokens[1:]]
        except ValueError as exc:
            raise ParseError(f"non-integer orbit count: {exc}", line=lineno) from None
        if any(c < 0 for c in counts):
            raise ParseError("negative orbit count", line=lineno)
        labels.append(tokens[0])
        rows.append(counts)
    if not rows:
        raise ParseError("no GDV rows in input")
    if len(set(labels)) != len(labels):
        raise ParseError("duplicate node labels in GDV file")
    return tuple(labels), np.array(rows, dtype=np.int64)
