"""Graph and tree primitives: certificates, skew, generation, formats."""

from __future__ import annotations

from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from skewtree.graphs import (EmbeddingCertificate, Graph, RootedTree, Skew,
                             UnreachableSkewError, generate_tree, skew_of,
                             validate_embedding)

PROPERTY_SETTINGS = settings(max_examples=120, deadline=None)


def path_tree(n: int) -> RootedTree:
    return RootedTree(n, 0, [-1] + list(range(n - 1)))


def star_tree(leaves: int) -> RootedTree:
    return RootedTree(leaves + 1, 0, [-1] + [0] * leaves)


@st.composite
def pruefer_trees(draw: st.DrawFn) -> RootedTree:
    n = draw(st.integers(min_value=2, max_value=40))
    if n == 2:
        return path_tree(2)
    seq = draw(st.lists(st.integers(0, n - 1), min_size=n - 2,
                        max_size=n - 2))
    degree = [1] * n
    for v in seq:
        degree[v] += 1
    parent = [-2] * n
    leaves = sorted(v for v in range(n) if degree[v] == 1)
    import heapq
    heap = list(leaves)
    heapq.heapify(heap)
    for v in seq:
        leaf = heapq.heappop(heap)
        parent[leaf] = v
        degree[v] -= 1
        if degree[v] == 1:
            heapq.heappush(heap, v)
    u = heapq.heappop(heap)
    w = heapq.heappop(heap)
    parent[u] = w
    # orient all edges toward root w by BFS
    adj = [[] for _ in range(n)]
    for v in range(n):
        if parent[v] >= 0:
            adj[v].append(parent[v])
            adj[parent[v]].append(v)
    out = [-1] * n
    seen = {w}
    frontier = [w]
    while frontier:
        nxt = []
        for x in frontier:
            for y in adj[x]:
                if y not in seen:
                    seen.add(y)
                    out[y] = x
                    nxt.append(y)
        frontier = nxt
    return RootedTree(n, w, out)


class TestGraph:
    def test_rejects_self_loop(self):
        with pytest.raises(ValueError):
            Graph(3, [(0, 0)])

    def test_adjacency_symmetric_and_degree(self):
        g = Graph(4, [(0, 1), (1, 2), (2, 3)])
        assert g.degree(1) == 2
        for u in range(4):
            for v in range(4):
                assert (v in g.neighbours(u)) == (u in g.neighbours(v))

    def test_render_parse_roundtrip(self):
        g = Graph(5, [(0, 1), (1, 2), (3, 4)])
        h = Graph.parse(g.render())
        assert h.n == g.n
        assert sorted(h.edges()) == sorted(g.edges())


class TestRootedTree:
    def test_colouring_proper_and_root_colour(self):
        t = path_tree(6)
        assert t.colour[t.root] == 1
        for u, v in t.edges():
            assert t.colour[u] != t.colour[v]

    def test_rejects_malformed_parent(self):
        with pytest.raises(ValueError):
            RootedTree(4, 0, [-1, 0, 1])

    def test_rejects_cycle(self):
        with pytest.raises(ValueError):
            RootedTree(3, 0, [-1, 2, 1])

    def test_json_roundtrip(self):
        t = generate_tree(17, "random", Fraction(1, 2), seed=5)
        u = RootedTree.from_json(t.to_json())
        assert (u.n, u.root, tuple(u.parent)) == (t.n, t.root,
                                                  tuple(t.parent))

    @given(pruefer_trees())
    @PROPERTY_SETTINGS
    def test_random_trees_connected_properly_coloured(self, t):
        assert len(t.edges()) == t.n - 1
        assert all(t.colour[u] != t.colour[v] for u, v in t.edges())
        assert len(t.bfs_order()) == t.n


class TestValidateEmbedding:
    def test_identity_into_own_edge_set(self):
        t = path_tree(3)
        host = Graph(3, [(0, 1), (1, 2), (0, 2)])
        cert = EmbeddingCertificate((0, 1, 2), ("id",) * 3)
        assert validate_embedding(cert, t, host)

    def test_rejects_non_injective_map(self):
        t = path_tree(3)
        host = Graph(3, [(0, 1), (1, 2), (0, 2)])
        cert = EmbeddingCertificate((0, 1, 0), ("id",) * 3)
        assert not validate_embedding(cert, t, host)

    def test_rejects_missing_edge(self):
        t = path_tree(3)
        host = Graph(4, [(0, 1), (2, 3)])
        cert = EmbeddingCertificate((0, 1, 3), ("id",) * 3)
        assert not validate_embedding(cert, t, host)

    @given(pruefer_trees(), st.integers(0, 2**31))
    @settings(max_examples=60, deadline=None)
    def test_agrees_with_naive_check(self, t, seed):
        import random
        rng = random.Random(seed)
        n_host = t.n + rng.randint(0, 3)
        edges = {(u, v) for u in range(n_host) for v in range(u + 1, n_host)
                 if rng.random() < 0.5}
        host = Graph(n_host, edges)
        mapping = rng.sample(range(n_host), t.n)
        cert = EmbeddingCertificate(tuple(mapping), ("rnd",) * t.n)
        naive = (len(set(mapping)) == t.n
                 and all((min(mapping[u], mapping[v]),
                          max(mapping[u], mapping[v])) in edges
                         for u, v in t.edges()))
        assert validate_embedding(cert, t, host) == naive


class TestSkew:
    def test_single_edge(self):
        assert skew_of(path_tree(2)) == Fraction(1, 2)

    def test_star(self):
        assert skew_of(star_tree(7)) == Fraction(1, 8)

    def test_skew_type_range(self):
        with pytest.raises(ValueError):
            Skew(Fraction(3, 4))
        assert Skew(Fraction(1, 3)).ratio == Fraction(1, 3)

    @given(pruefer_trees())
    @PROPERTY_SETTINGS
    def test_matches_brute_class_count(self, t):
        small = min(sum(1 for v in range(t.n) if t.colour[v] == c)
                    for c in (1, 2))
        assert skew_of(t) == Fraction(small, t.n)


class TestGenerateTree:
    def test_path_shape(self):
        t = generate_tree(8, "path", Fraction(1, 2))
        assert sorted(len(t.class_vertices(c)) for c in (1, 2)) == [4, 4]
        assert max(t.degree(v) for v in range(8)) == 2

    def test_star_shape(self):
        t = generate_tree(8, "star", Fraction(1, 8))
        assert sorted(t.degree(v) for v in range(8)) == [1] * 7 + [7]

    def test_random_reproducible_and_capped(self):
        a = generate_tree(30, "random", Fraction(1, 3), seed=42)
        b = generate_tree(30, "random", Fraction(1, 3), seed=42)
        assert tuple(a.parent) == tuple(b.parent)
        assert skew_of(a) <= Fraction(1, 3)

    def test_unreachable_skew(self):
        with pytest.raises(UnreachableSkewError):
            generate_tree(8, "path", Fraction(1, 4))

    @given(st.sampled_from(["path", "star", "caterpillar", "random"]),
           st.integers(4, 60), st.integers(0, 999))
    @settings(max_examples=100, deadline=None)
    def test_cap_respected_when_constructible(self, shape, n, seed):
        cap = Fraction(1, 2)
        t = generate_tree(n, shape, cap, seed=seed)
        assert t.n == n
        assert skew_of(t) <= cap
        assert all(t.colour[u] != t.colour[v] for u, v in t.edges())


class TestCertificate:
    def test_json_roundtrip(self):
        cert = EmbeddingCertificate((3, 1, 4), ("a", "b", "c"))
        back = EmbeddingCertificate.from_json(cert.to_json())
        assert back == cert
