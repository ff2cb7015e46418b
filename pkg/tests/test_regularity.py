"""Density, regularity verdicts, typical vertices, pair embedding."""

from __future__ import annotations

import random
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from skewtree.clusters import synthesize_lks
from skewtree.graphs import Graph, RootedTree, generate_tree, \
    validate_embedding
from skewtree.regularity import (BudgetExceededError, EmbeddingFailure,
                                 Pair, PreconditionError, check_slicing,
                                 density, embed_in_pair, is_regular,
                                 rsqrt_up, typical_vertices,
                                 ultratypical_vertices)

PROPERTY_SETTINGS = settings(max_examples=60, deadline=None)


def complete_pair(a: int, b: int) -> Pair:
    g = Graph(a + b, [(i, a + j) for i in range(a) for j in range(b)])
    return Pair(g, tuple(range(a)), tuple(range(a, a + b)))


def random_pair(a: int, b: int, p: float, seed: int) -> Pair:
    rng = np.random.default_rng(seed)
    blk = np.argwhere(rng.random((a, b)) < p)
    g = Graph(a + b, [(int(u), int(v) + a) for u, v in blk])
    return Pair(g, tuple(range(a)), tuple(range(a, a + b)))


class TestDensity:
    def test_complete(self):
        assert density(complete_pair(3, 4)) == 1

    def test_empty(self):
        g = Graph(5, [])
        assert density(Pair(g, (0, 1), (2, 3, 4))) == 0

    def test_single_edge(self):
        g = Graph(4, [(0, 2)])
        assert density(Pair(g, (0, 1), (2, 3))) == Fraction(1, 4)

    def test_pair_rejects_overlap(self):
        g = Graph(3, [])
        with pytest.raises(ValueError):
            Pair(g, (0, 1), (1, 2))

    @given(st.integers(0, 10**6))
    @PROPERTY_SETTINGS
    def test_weighted_average_identity(self, seed):
        rng = random.Random(seed)
        p = random_pair(12, 9, 0.4, seed)
        cut = rng.randint(1, 11)
        xa, xb = p.X[:cut], p.X[cut:]
        pa, pb = Pair(p.host, xa, p.Y), Pair(p.host, xb, p.Y)
        total = density(pa) * len(xa) + density(pb) * len(xb)
        assert total == density(p) * len(p.X)


class TestIsRegular:
    def test_complete_pair_regular(self):
        v = is_regular(complete_pair(8, 8), Fraction(1, 10), "exhaustive")
        assert v.regular

    def test_half_graph_blocks_irregular(self):
        # complete X1-Y1 quarter, empty elsewhere: overall density 1/4,
        # the empty quarter (X2, Y2) gaps by exactly 1/4 > eps is false,
        # so test at eps strictly below the gap
        g = Graph(16, [(i, 8 + j) for i in range(4) for j in range(4)])
        p = Pair(g, tuple(range(8)), tuple(range(8, 16)))
        v = is_regular(p, Fraction(1, 5), "exhaustive")
        assert not v.regular
        xs, ys, gap = v.witness
        assert gap > Fraction(1, 5)
        assert abs(density(Pair(g, xs, ys)) - density(p)) == gap

    def test_random_half_density_sampled_regular(self):
        p = random_pair(64, 64, 0.5, 1)
        v = is_regular(p, Fraction(1, 4), ("sampled", 1, 2000))
        assert v.regular

    def test_exhaustive_budget_cap(self):
        with pytest.raises(BudgetExceededError):
            is_regular(random_pair(17, 20, 0.5, 0), Fraction(1, 4),
                       "exhaustive")

    @given(st.integers(0, 10**6))
    @PROPERTY_SETTINGS
    def test_witness_soundness(self, seed):
        rng = random.Random(seed)
        p = random_pair(rng.randint(2, 8), rng.randint(2, 12),
                        rng.random(), seed)
        eps = Fraction(rng.randint(1, 9), 10)
        v = is_regular(p, eps, "exhaustive")
        if not v.regular:
            xs, ys, gap = v.witness
            assert len(xs) >= eps * len(p.X)
            assert len(ys) >= eps * len(p.Y)
            assert abs(density(Pair(p.host, xs, ys)) - density(p)) > eps
            assert gap > eps


class TestCheckSlicing:
    def test_full_slice(self):
        p = random_pair(14, 14, 0.5, 3)
        assert check_slicing(p, p.X, p.Y, Fraction(1), Fraction(1, 4),
                             "exhaustive")

    def test_complete_pair_any_slice(self):
        p = complete_pair(12, 12)
        assert check_slicing(p, p.X[:6], p.Y[:7], Fraction(1, 2),
                             Fraction(1, 4))

    def test_random_slices_of_half_density_pair(self):
        p = random_pair(64, 64, 0.5, 7)
        rng = random.Random(7)
        for _ in range(200):
            xp = rng.sample(p.X, 32)
            yp = rng.sample(p.Y, 32)
            assert check_slicing(p, xp, yp, Fraction(1, 2), Fraction(1, 4),
                                 ("sampled", 11, 300))


class TestTypicalVertices:
    def test_complete_pair_all_typical(self):
        p = complete_pair(6, 6)
        assert typical_vertices(p, p.Y, Fraction(1, 4)) == set(p.X)

    def test_isolated_vertex_excluded(self):
        g = Graph(6, [(i, 3 + j) for i in range(2) for j in range(3)])
        p = Pair(g, (0, 1, 2), (3, 4, 5))
        typ = typical_vertices(p, p.Y, Fraction(1, 4))
        assert 2 not in typ and {0, 1} <= typ

    @given(st.integers(0, 10**6))
    @PROPERTY_SETTINGS
    def test_atypical_bound_under_exhaustive_regularity(self, seed):
        rng = random.Random(seed)
        p = random_pair(rng.randint(4, 12), rng.randint(4, 12),
                        rng.random(), seed)
        eps = Fraction(rng.randint(2, 6), 12)
        m = max(1, -int(-eps * len(p.Y)))
        yp = tuple(rng.sample(p.Y, rng.randint(m, len(p.Y))))
        if is_regular(p, eps, "exhaustive").regular:
            atypical = len(set(p.X) - typical_vertices(p, yp, eps))
            assert atypical <= eps * len(p.X)


class TestUltratypicalVertices:
    def test_complete_blocks_all_ultratypical(self):
        g = Graph(9, [(i, j) for i in range(9) for j in range(i + 1, 9)
                      if i // 3 != j // 3])
        clusters = [(0, 1, 2), (3, 4, 5), (6, 7, 8)]
        for j in range(3):
            assert (ultratypical_vertices(g, clusters, j, Fraction(1, 9))
                    == set(clusters[j]))

    def test_single_cluster_vacuous(self):
        g = Graph(4, [])
        assert (ultratypical_vertices(g, [(0, 1, 2, 3)], 0, Fraction(1, 4))
                == {0, 1, 2, 3})

    def test_synthetic_model_count_bound(self):
        plan = [[Fraction(0)] * 6 for _ in range(6)]
        for i in range(4):
            for j in range(i + 1, 6):
                plan[i][j] = plan[j][i] = Fraction(1, 2)
        g = synthesize_lks(4, 2, 300, Fraction(1, 3), plan, 0,
                           epsilon=Fraction(1, 25))
        for j, cl in enumerate(g.clusters):
            ultra = ultratypical_vertices(g.host, g.clusters, j,
                                          Fraction(1, 25))
            assert len(ultra) >= Fraction(4, 5) * len(cl)

    def test_rsqrt_up_is_upper_bound(self):
        for num in range(1, 30):
            x = Fraction(num, 29)
            q = rsqrt_up(x)
            assert q * q >= x


class TestEmbedInPair:
    EPS, ALPHA, D = Fraction(1, 24), Fraction(4, 25), Fraction(1, 2)

    @staticmethod
    def classes(t: RootedTree):
        f1 = [v for v in range(t.n) if t.colour[v] == t.colour[t.root]]
        f2 = [v for v in range(t.n) if t.colour[v] != t.colour[t.root]]
        return f1, f2

    def test_p4_into_complete_pair(self):
        p = complete_pair(60, 60)
        t = RootedTree(4, 0, [-1, 0, 1, 2])
        f1, f2 = self.classes(t)
        cert = embed_in_pair(t, f1, f2, p, p.X, p.Y, {},
                             Fraction(1, 12), Fraction(1, 4), Fraction(1))
        assert validate_embedding(cert, t, p.host)

    def test_star_with_prescribed_center(self):
        p = complete_pair(72, 72)
        t = RootedTree(6, 0, [-1] + [0] * 5)
        f1, f2 = self.classes(t)
        cert = embed_in_pair(t, f1, f2, p, p.X, p.Y, {0: p.X[3]},
                             Fraction(1, 12), Fraction(1, 4), Fraction(1))
        assert cert.map[0] == p.X[3]
        assert validate_embedding(cert, t, p.host)

    def test_rejects_prescribed_pair_with_common_neighbour(self):
        p = complete_pair(40, 40)
        t = RootedTree(3, 0, [-1, 0, 1])
        with pytest.raises(PreconditionError):
            # both endpoints of P3 share the middle vertex
            embed_in_pair(t, [0, 2], [1], p, p.X, p.Y,
                          {0: p.X[0], 2: p.X[1]}, Fraction(1, 12),
                          Fraction(1, 4), Fraction(1))

    def test_random_pair_harness(self):
        ok = 0
        for trial in range(50):
            p = random_pair(200, 200, 0.5, trial)
            rng = random.Random(trial)
            t = generate_tree(rng.randint(2, 8), "random", Fraction(1, 2),
                              seed=trial)
            f1, f2 = self.classes(t)
            r_map = {}
            for v in f1[:rng.randint(0, 2)]:
                if all(set(t.neighbours(v)).isdisjoint(t.neighbours(u))
                       for u in r_map):
                    r_map[v] = p.X[len(r_map)]
            try:
                cert = embed_in_pair(t, f1, f2, p, p.X, p.Y, r_map,
                                     self.EPS, self.ALPHA, self.D)
            except (EmbeddingFailure, PreconditionError):
                continue
            assert validate_embedding(cert, t, p.host)
            assert all(cert.map[v] in set(p.X) for v in f1)
            assert all(cert.map[v] in set(p.Y) for v in f2)
            ok += 1
        assert ok >= 49
