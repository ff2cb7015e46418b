"""Fine partitions of trees and the anchored-forest conversion."""

from __future__ import annotations

from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from skewtree.graphs import RootedTree, generate_tree
from skewtree.treeparts import (SEED_BOUND_FACTOR, FinePartition,
                                fine_partition, partition_stats,
                                small_class_colour, to_anchored_forests,
                                verify_fine_partition)

PROPERTY_SETTINGS = settings(max_examples=80, deadline=None)

random_cases = st.tuples(st.integers(8, 120), st.integers(0, 500),
                         st.sampled_from([4, 16, 64]))


def path_tree(n: int) -> RootedTree:
    return RootedTree(n, 0, [-1] + list(range(n - 1)))


class TestFinePartition:
    def test_path_quarter_ell(self):
        t = path_tree(33)
        k = t.k
        ell = -(-k // 4)
        fp = fine_partition(t, ell)
        assert verify_fine_partition(t, fp) == []
        bound = Fraction(SEED_BOUND_FACTOR * k, ell)
        assert max(len(fp.W_A), len(fp.W_B)) <= bound
        assert all(len(c) <= ell for c in fp.D_A + fp.D_B)

    def test_star_center_is_seed(self):
        t = RootedTree(13, 0, [-1] + [0] * 12)
        fp = fine_partition(t, 4)
        assert verify_fine_partition(t, fp) == []
        assert 0 in fp.seeds()
        for comp in fp.D_A + fp.D_B:
            assert 0 not in comp

    @given(random_cases)
    @PROPERTY_SETTINGS
    def test_random_sweep(self, case):
        n, seed, ell = case
        t = generate_tree(n, "random", Fraction(1, 2), seed=seed)
        if not 1 <= ell < t.k:
            return
        fp = fine_partition(t, ell)
        assert verify_fine_partition(t, fp) == []

    @given(random_cases)
    @PROPERTY_SETTINGS
    def test_structural_identities(self, case):
        n, seed, ell = case
        t = generate_tree(n, "random", Fraction(1, 2), seed=seed)
        if not 1 <= ell < t.k:
            return
        fp = fine_partition(t, ell)
        total = sum(len(c) for c in fp.D_A + fp.D_B)
        assert total + len(fp.W_A) + len(fp.W_B) == n
        colours_a = {t.colour[v] for v in fp.W_A}
        colours_b = {t.colour[v] for v in fp.W_B}
        assert len(colours_a) <= 1 and len(colours_b) <= 1
        if colours_a and colours_b:
            assert colours_a != colours_b
        small = small_class_colour(t)
        stats = partition_stats(fp, t)
        t1_minus_wb = sum(1 for v in range(n)
                          if t.colour[v] == small and v not in fp.W_B)
        assert stats["a2"] + stats["b1"] == t1_minus_wb
        assert stats["r_tilde"] == Fraction(t1_minus_wb, t.k)

    def test_deterministic(self):
        t = generate_tree(90, "random", Fraction(1, 2), seed=11)
        assert fine_partition(t, 16) == fine_partition(t, 16)


class TestVerifier:
    def test_oversized_component_flagged(self):
        t = path_tree(40)
        fp = fine_partition(t, 16)
        comps = sorted(fp.D_A + fp.D_B, key=len)
        merged = tuple(sorted(comps[-1] + comps[-2]))
        # merging two components breaks several items; item 5 (size cap)
        # must be among them because the merge exceeds ell
        assert len(merged) > fp.ell
        tampered = FinePartition(fp.W_A, fp.W_B,
                                 (merged,) + tuple(comps[:-2]), (),
                                 fp.ell)
        ids = {v.item for v in verify_fine_partition(t, tampered)}
        assert 5 in ids

    def test_seed_stolen_from_component(self):
        t = path_tree(40)
        fp = fine_partition(t, 4)
        comp = max(fp.D_A + fp.D_B, key=len)
        v = comp[len(comp) // 2]
        tampered = FinePartition(tuple(sorted(set(fp.W_A) | {v})), fp.W_B,
                                 tuple(c for c in fp.D_A if c != comp)
                                 + ((tuple(x for x in comp if x != v),)
                                    if comp in fp.D_A else ()),
                                 tuple(c for c in fp.D_B if c != comp)
                                 + ((tuple(x for x in comp if x != v),)
                                    if comp in fp.D_B else ()),
                                 fp.ell)
        assert verify_fine_partition(t, tampered) != []

    def test_close_seeds_flagged(self):
        # P8 with a three-vertex component flanked by seeds at distance
        # four: the seed-neighbour distance item must fire
        t = path_tree(8)
        fp = FinePartition((0, 4), (), ((1, 2, 3), (5, 6, 7)), (), 3)
        ids = {v.item for v in verify_fine_partition(t, fp)}
        assert 9 in ids


class TestAnchoredForests:
    def test_path_component_count_arithmetic(self):
        t = path_tree(8)
        fp = fine_partition(t, 3)
        fa, fb = to_anchored_forests(fp, t)
        covered = (sum(len(c) for c in fa.components) + len(fa.deferred)
                   + sum(len(c) for c in fb.components) + len(fb.deferred))
        assert covered == 8 - len(fp.W_A) - len(fp.W_B)

    def test_single_component_single_anchor(self):
        t = path_tree(5)
        fp = FinePartition((0,), (), ((1, 2, 3, 4),), (), 4)
        assert verify_fine_partition(t, fp) == []
        fa, fb = to_anchored_forests(fp, t)
        assert len(fa.components) == 1
        assert fa.anchors == (0,)
        assert fb.components == ()

    @given(st.integers(0, 300))
    @settings(max_examples=40, deadline=None)
    def test_stats_agree_with_independent_count(self, seed):
        t = generate_tree(100, "random", Fraction(1, 2), seed=seed)
        fp = fine_partition(t, 16)
        stats = partition_stats(fp, t)
        small = small_class_colour(t)
        a2 = sum(1 for c in fp.D_A for v in c if t.colour[v] == small)
        b1 = sum(1 for c in fp.D_B for v in c if t.colour[v] == small)
        a2 += sum(1 for v in fp.W_A if t.colour[v] == small)
        assert stats["a2"] == a2 and stats["b1"] == b1

    def test_attachment_contract(self):
        t = generate_tree(120, "random", Fraction(1, 2), seed=7)
        fp = fine_partition(t, 16)
        fa, fb = to_anchored_forests(fp, t)
        for forest in (fa, fb):
            for comp, att in zip(forest.components, forest.attachments):
                anchors = {a for a, _ in att}
                assert 1 <= len(anchors) <= 2
                assert all(v in comp for _, v in att)
                assert 2 <= len(comp) <= forest.tau


class TestJson:
    def test_roundtrip(self):
        t = generate_tree(60, "random", Fraction(1, 2), seed=3)
        fp = fine_partition(t, 8)
        assert FinePartition.from_json(fp.to_json()) == fp
