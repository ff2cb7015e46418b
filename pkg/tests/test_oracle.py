"""Ground-truth searches, extremal pairs, scans, Ramsey checks."""

from __future__ import annotations

import itertools
import json
import random
from fractions import Fraction

import pytest

from skewtree.graphs import Graph, RootedTree
from skewtree.oracle import (BudgetExceededError, all_trees, bistar_check,
                             brute_force_embed, conjecture_scan,
                             gen_extremal, gen_tight_tree, host_signatures,
                             pigeonhole_colour, ramsey_check,
                             second_search_embed, tree_canonical)
from skewtree.regularity import PreconditionError


def path_tree(n: int) -> RootedTree:
    return RootedTree(n, 0, [-1] + list(range(n - 1)))


def complete(n: int) -> Graph:
    return Graph(n, itertools.combinations(range(n), 2))


class TestBruteForceEmbed:
    def test_p3_into_k3(self):
        assert brute_force_embed(path_tree(3), complete(3)) is not None

    def test_claw_into_c4(self):
        c4 = Graph(4, [(0, 1), (1, 2), (2, 3), (0, 3)])
        claw = RootedTree(4, 0, [-1, 0, 0, 0])
        assert brute_force_embed(claw, c4) is None

    def test_every_small_tree_into_k7(self):
        k7 = complete(7)
        for t in all_trees(7):
            assert brute_force_embed(t, k7) is not None

    def test_budget_raises(self):
        with pytest.raises(BudgetExceededError):
            brute_force_embed(path_tree(8), gen_extremal(7, Fraction(1, 2)),
                              budget=5)

    @pytest.mark.parametrize("seed", range(40))
    def test_agrees_with_independent_search(self, seed):
        rng = random.Random(seed)
        n = rng.randint(3, 8)
        edges = [(u, v) for u in range(n) for v in range(u + 1, n)
                 if rng.random() < 0.4]
        g = Graph(n, edges)
        trees = all_trees(min(n, 6))
        t = trees[rng.randrange(len(trees))]
        a = brute_force_embed(t, g)
        b = second_search_embed(t, g)
        assert (a is None) == (b is None)


class TestExtremal:
    def test_k7_half_degree_profile(self):
        g = gen_extremal(7, Fraction(1, 2))
        assert g.n == 8
        degs = sorted(g.degree(v) for v in range(8))
        # clique side: floor(r(k+1)) - 1 = 3 vertices of degree k
        assert degs == [3, 3, 3, 3, 3, 7, 7, 7]

    def test_k7_half_has_no_p8(self):
        g = gen_extremal(7, Fraction(1, 2))
        assert brute_force_embed(path_tree(8), g) is None
        assert brute_force_embed(path_tree(7), g) is not None

    def test_k9_third_has_no_p6(self):
        g = gen_extremal(9, Fraction(1, 3))
        assert g.n == 10
        assert sum(1 for v in range(10) if g.degree(v) == 9) == 2
        assert brute_force_embed(path_tree(6), g) is None

    def test_degenerate_skew_rejected(self):
        with pytest.raises(PreconditionError):
            gen_extremal(7, Fraction(1, 8))

    def test_copies_are_disjoint(self):
        g = gen_extremal(7, Fraction(1, 2), copies=3)
        assert g.n == 24
        assert all(u // 8 == v // 8 for u, v in g.edges())


class TestTightTree:
    def test_k7_half_is_p8(self):
        t = gen_tight_tree(7, Fraction(1, 2))
        assert t.n == 8
        assert max(t.degree(v) for v in range(8)) == 2

    def test_k9_third_broom(self):
        t = gen_tight_tree(9, Fraction(1, 3))
        assert t.n == 10
        assert sorted(t.degree(v) for v in range(10))[-1] == 5
        small = min(sum(1 for c in t.colour if c == 1),
                    sum(1 for c in t.colour if c == 2))
        assert small == 3

    def test_infeasible_parameters_rejected(self):
        with pytest.raises(PreconditionError):
            gen_tight_tree(9, Fraction(3, 5))

    @pytest.mark.parametrize("k,r", [(7, Fraction(1, 2)),
                                     (9, Fraction(1, 3)),
                                     (11, Fraction(1, 2))])
    def test_tight_tree_misses_extremal_host(self, k, r):
        t = gen_tight_tree(k, r)
        assert brute_force_embed(t, gen_extremal(k, r)) is None


class TestEnumeration:
    def test_tree_counts_up_to_7(self):
        per_order = [0] * 8
        for t in all_trees(7):
            per_order[t.n] += 1
        assert per_order[1:] == [1, 1, 1, 2, 3, 6, 11]

    def test_canonical_code_invariant_under_relabelling(self):
        a = RootedTree(5, 0, [-1, 0, 1, 2, 3])
        b = RootedTree(5, 2, [1, 2, -1, 2, 3])
        star = RootedTree(5, 0, [-1, 0, 0, 0, 0])
        assert tree_canonical(a) == tree_canonical(b)
        assert tree_canonical(a) != tree_canonical(star)

    @pytest.mark.parametrize("n,classes", [(1, 1), (2, 2), (3, 4), (4, 11)])
    def test_host_signature_counts(self, n, classes):
        assert len(host_signatures(n)) == classes


class TestConjectureScan:
    def test_exhaustive_small(self):
        report = conjecture_scan(4, Fraction(1, 2), 5, ("exhaustive",))
        assert report.counterexamples == []
        assert report.instances_tried > 0
        assert report.hypothesis_skipped > 0
        assert set(report.subscan) == {"paths", "diameter_le_5"}

    def test_random_mode(self):
        report = conjecture_scan(6, Fraction(1, 3), 9, ("random", 7, 300))
        assert report.counterexamples == []
        assert (report.instances_tried + report.hypothesis_skipped) == 300

    def test_exhaustive_cap(self):
        with pytest.raises(PreconditionError):
            conjecture_scan(4, Fraction(1, 2), 11, ("exhaustive",))

    def test_report_json(self):
        report = conjecture_scan(3, Fraction(1, 2), 4, ("exhaustive",))
        blob = json.loads(report.to_json())
        assert blob["parameters"]["k"] == 3
        assert blob["counterexamples"] == []


class TestBistar:
    @pytest.mark.parametrize("k", (7, 9))
    def test_bistar_missing_from_skewed_host(self, k):
        assert bistar_check(k)

    def test_even_k_rejected(self):
        with pytest.raises(PreconditionError):
            bistar_check(8)

    def test_bistar_fits_balanced_host(self):
        # same bistar, host K_{4,4}: both centres fit on opposite sides
        bistar = RootedTree(8, 0, [-1, 0, 0, 0, 0, 1, 1, 1])
        k44 = Graph(8, [(i, 4 + j) for i in range(4) for j in range(4)])
        assert brute_force_embed(bistar, k44) is not None


class TestRamsey:
    def test_p4_p4_forced_at_5(self):
        verdict = ramsey_check([path_tree(4), path_tree(4)], 5)
        assert verdict.forced
        assert verdict.colourings_checked == 2 ** 10

    def test_p4_p4_open_at_4(self):
        verdict = ramsey_check([path_tree(4), path_tree(4)], 4)
        assert not verdict.forced
        assert verdict.witness is not None

    def test_single_tree_reduces_to_embedding(self):
        assert ramsey_check([path_tree(3)], 3).forced
        assert not ramsey_check([path_tree(5)], 4).forced

    def test_budget_guard(self):
        with pytest.raises(BudgetExceededError):
            ramsey_check([path_tree(3)] * 3, 8, budget=10**6)

    def test_pigeonhole_share(self):
        n, m = 6, 2
        rng = random.Random(1)
        colouring = {(u, v): rng.randrange(m)
                     for u in range(n) for v in range(u + 1, n)}
        for v in range(n):
            c = pigeonhole_colour(n, colouring, v, m)
            share = sum(1 for u in range(n) if u != v
                        and colouring[(min(u, v), max(u, v))] == c)
            assert share * m >= n - 1
