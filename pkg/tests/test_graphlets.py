import itertools

import numpy as np
import pytest

from gralign import Graph, ParseError, parse_edge_list
from gralign.graphlets import (
    N_ORBITS,
    brute_force_orbits,
    count_orbits,
    read_gdv_file,
    write_gdv_file,
)


def er_graph(n, p, seed):
    rng = np.random.default_rng(seed)
    iu, iv = np.triu_indices(n, k=1)
    mask = rng.random(len(iu)) < p
    return Graph(n, np.stack([iu[mask], iv[mask]], 1))


def gdv_row(**orbits):
    row = [0] * N_ORBITS
    for k, v in orbits.items():
        row[int(k[1:])] = v
    return row


@pytest.mark.parametrize("counter", [count_orbits, brute_force_orbits])
def test_triangle(counter):
    g = Graph(3, [(0, 1), (0, 2), (1, 2)])
    expected = np.array([gdv_row(o0=2, o3=1)] * 3)
    assert (counter(g) == expected).all()


@pytest.mark.parametrize("counter", [count_orbits, brute_force_orbits])
def test_three_path(counter):
    g = Graph(3, [(0, 1), (1, 2)])
    out = counter(g)
    assert out[0].tolist() == gdv_row(o0=1, o1=1)
    assert out[1].tolist() == gdv_row(o0=2, o2=1)
    assert out[2].tolist() == gdv_row(o0=1, o1=1)


@pytest.mark.parametrize("counter", [count_orbits, brute_force_orbits])
def test_four_cycle(counter):
    g = Graph(4, [(0, 1), (1, 2), (2, 3), (0, 3)])
    expected = np.array([gdv_row(o0=2, o1=2, o2=1, o8=1)] * 4)
    assert (counter(g) == expected).all()


@pytest.mark.parametrize("counter", [count_orbits, brute_force_orbits])
def test_complete_four(counter):
    g = Graph(4, [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)])
    expected = np.array([gdv_row(o0=3, o3=3, o14=1)] * 4)
    assert (counter(g) == expected).all()


@pytest.mark.parametrize("counter", [count_orbits, brute_force_orbits])
def test_star_with_four_leaves(counter):
    g = Graph(5, [(0, 1), (0, 2), (0, 3), (0, 4)])
    out = counter(g)
    assert out[0][7] == 4  # C(4,3) claws centered here
    assert out[0][6] == 0
    assert (out[1:, 6] == 3).all()
    assert (out[1:, 7] == 0).all()


def test_empty_graph_all_zero():
    g = Graph(5, np.empty((0, 2), dtype=np.int64))
    assert (brute_force_orbits(g) == 0).all()
    assert (count_orbits(g) == 0).all()


def test_oracle_equivalence_random_graphs():
    for seed, (n, p) in enumerate(itertools.product((10, 20, 30), (0.1, 0.2, 0.4))):
        g = er_graph(n, p, seed)
        assert (count_orbits(g) == brute_force_orbits(g)).all(), (n, p)


def test_degree_and_neighbor_pair_identities():
    for seed in range(3):
        g = er_graph(40, 0.2, seed=seed + 100)
        gdv = count_orbits(g)
        deg = g.degree()
        assert (gdv[:, 0] == deg).all()
        assert (gdv[:, 2] + gdv[:, 3] == deg * (deg - 1) // 2).all()


def test_graph_level_triangle_and_k4_sums():
    g = er_graph(25, 0.4, seed=5)
    gdv = count_orbits(g)
    triangles = 0
    k4s = 0
    for sub in itertools.combinations(range(g.n), 3):
        if all(g.has_edge(a, b) for a, b in itertools.combinations(sub, 2)):
            triangles += 1
    for sub in itertools.combinations(range(g.n), 4):
        if all(g.has_edge(a, b) for a, b in itertools.combinations(sub, 2)):
            k4s += 1
    assert gdv[:, 3].sum() == 3 * triangles
    assert gdv[:, 14].sum() == 4 * k4s


def test_isomorphism_invariance_under_relabeling():
    g = er_graph(30, 0.25, seed=9)
    perm = np.random.default_rng(1).permutation(g.n)
    h = g.relabel_ids(perm)
    gdv_g = count_orbits(g)
    gdv_h = count_orbits(h)
    assert (gdv_h[perm] == gdv_g).all()


def test_counts_fit_in_int64_columns():
    g = er_graph(60, 0.5, seed=2)
    assert count_orbits(g).dtype == np.int64


def test_gdv_file_round_trip():
    g = parse_edge_list("a b\nb c\nc a\nc d")
    gdv = count_orbits(g)
    text = write_gdv_file(g, gdv)
    labels, parsed = read_gdv_file(text)
    assert labels == g.labels
    assert (parsed == gdv).all()
    first = text.splitlines()[0].split()
    assert first[0] == "a" and len(first) == 1 + N_ORBITS


def test_gdv_file_errors():
    with pytest.raises(ParseError, match="line 1"):
        read_gdv_file("a 1 2 3\n")
    with pytest.raises(ParseError, match="line 2"):
        read_gdv_file("a " + " ".join(["1"] * 15) + "\nb " + " ".join(["1"] * 14) + " x\n")
    with pytest.raises(ParseError):
        read_gdv_file("")
