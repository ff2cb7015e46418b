"""Matching search, alternating reachability, configuration witnesses."""

from __future__ import annotations

from dataclasses import replace
from fractions import Fraction

import pytest

from skewtree.clusters import ClusterGraph
from skewtree.configs import (ConfigWitness, NoConfigurationError, TreeStats,
                              _config_inequalities, alternating_reachability,
                              find_configuration, low_degree_s,
                              matching_max_cover, verify_witness)
from skewtree.fixtures import random_cluster_instance
from skewtree.regularity import PreconditionError

ETA = Fraction(1, 10)


def cg_of(m_l: int, m_s: int, l_size: int, r: Fraction,
          dens: dict[tuple[int, int], Fraction]) -> ClusterGraph:
    s_size = l_size * (r.denominator - r.numerator) // r.numerator
    families = ("L",) * m_l + ("S",) * m_s
    sizes = (l_size,) * m_l + (s_size,) * m_s
    return ClusterGraph(families, sizes, dens, r)


def brute_min_uncovered(cg: ClusterGraph, thr: Fraction) -> int:
    """Exact minimum of uncovered low-degree S-clusters over all matchings."""
    s0 = sorted(low_degree_s(cg, thr))
    l_ids = sorted(cg.L)
    pos = {l: i for i, l in enumerate(l_ids)}

    def best(i: int, used: int) -> int:
        if i == len(s0):
            return 0
        top = best(i + 1, used)
        for l in cg.neighbours(s0[i]):
            if l in pos and not used >> pos[l] & 1:
                top = max(top, 1 + best(i + 1, used | 1 << pos[l]))
        return top

    return len(s0) - best(0, 0)


def naive_reachable(cg: ClusterGraph, M, S0) -> set[int]:
    """Alternating-path closure by explicit path enumeration."""
    partner = {}
    for u, v in M:
        partner[u] = v
        partner[v] = u
    reach: set[int] = set()
    paths = [(s,) for s in S0]
    for _ in range(len(M) + 1):
        grown = []
        for p in paths:
            for l in cg.neighbours(p[-1]):
                if l in set(cg.L) and l in partner and l not in p:
                    reach |= {l, partner[l]}
                    grown.append(p + (l, partner[l]))
        paths = grown
    return reach


class TestMatchingMaxCover:
    def test_no_cross_edges_gives_empty_matching(self):
        cg = cg_of(3, 1, 12, Fraction(1, 3), {(0, 1): Fraction(1, 2),
                                              (1, 2): Fraction(1, 2)})
        assert matching_max_cover(cg, Fraction(5)) == ()

    def test_single_low_degree_pair_chosen(self):
        cg = cg_of(2, 2, 12, Fraction(1, 3), {(0, 2): Fraction(1, 4),
                                              (1, 3): Fraction(1)})
        assert matching_max_cover(cg, Fraction(6)) == ((0, 2),)

    @pytest.mark.parametrize("seed", range(30))
    def test_uncovered_count_is_exhaustive_minimum(self, seed):
        cg, stats, eta = random_cluster_instance(seed, max_clusters=10)
        thr = (stats.r_tilde + cg.r * eta / 2) * stats.k
        m = matching_max_cover(cg, thr)
        covered = {s for _, s in m}
        uncovered = sum(1 for z in low_degree_s(cg, thr)
                        if z not in covered)
        assert uncovered == brute_min_uncovered(cg, thr)


class TestAlternatingReachability:
    def test_empty_s0(self):
        cg = cg_of(2, 2, 12, Fraction(1, 3), {(0, 2): Fraction(1, 2),
                                              (1, 3): Fraction(1, 2)})
        m = ((0, 2), (1, 3))
        a, b, l_a, l_b, s_a, s_b = alternating_reachability(cg, m, ())
        assert b == () and set(a) == {0, 1, 2, 3}
        assert set(l_a) == {0, 1} and set(s_a) == {2, 3}

    def test_single_exchange_step(self):
        cg = cg_of(1, 2, 12, Fraction(1, 3), {(0, 1): Fraction(1, 4),
                                              (0, 2): Fraction(1, 2)})
        a, b, l_a, l_b, s_a, s_b = alternating_reachability(cg, ((0, 2),),
                                                            (1,))
        assert set(b) == {0, 2} and a == ()
        assert l_b == (0,) and s_b == (2,)

    @pytest.mark.parametrize("seed", range(30))
    def test_matches_naive_path_enumeration(self, seed):
        cg, stats, eta = random_cluster_instance(seed, max_clusters=10)
        thr = (stats.r_tilde + cg.r * eta / 2) * stats.k
        m = matching_max_cover(cg, thr)
        covered = {v for e in m for v in e}
        s0 = tuple(z for z in low_degree_s(cg, thr) if z not in covered)
        _, b, *_ = alternating_reachability(cg, m, s0)
        assert set(b) == naive_reachable(cg, m, s0)


class TestTreeStats:
    def test_rejects_negative_count(self):
        with pytest.raises(PreconditionError):
            TreeStats(-1, 2, 1, 0, Fraction(1, 2))

    def test_rejects_skew_out_of_range(self):
        with pytest.raises(PreconditionError):
            TreeStats(1, 2, 1, 0, Fraction(2, 3))

    def test_rejects_non_integer_k(self):
        with pytest.raises(PreconditionError):
            TreeStats(1, 2, 1, 0, Fraction(2, 5))

    def test_k_property(self):
        assert TreeStats(1, 2, 4, 5, Fraction(1, 3)).k == 18


class TestFindConfiguration:
    def test_all_l_graph_certifies_c(self):
        dens = {(i, j): Fraction(1, 2) for i in range(4)
                for j in range(i + 1, 4)}
        cg = cg_of(4, 0, 40, Fraction(1, 3), dens)
        stats = TreeStats(0, 0, 18, 36, Fraction(1, 3))
        w = find_configuration(cg, stats, ETA)
        assert w.config == "C"
        assert cg.pair_density(w.X, w.Y) > 0
        assert verify_witness(cg, stats, w, ETA)

    def test_dense_s_column_certifies_a(self):
        cg = cg_of(2, 2, 20, Fraction(1, 3), {(0, 2): Fraction(1),
                                              (1, 3): Fraction(1)})
        stats = TreeStats(36, 18, 0, 0, Fraction(1, 3))
        w = find_configuration(cg, stats, ETA)
        assert w.config == "A" and (w.X, w.Y) == (0, 2)
        assert verify_witness(cg, stats, w, ETA)

    def test_exhaustion_reports_counterexample_candidate(self):
        cg = cg_of(2, 2, 12, Fraction(1, 3), {(0, 1): Fraction(1, 2),
                                              (0, 2): Fraction(1, 2),
                                              (0, 3): Fraction(1, 2),
                                              (1, 2): Fraction(1, 2)})
        stats = TreeStats(0, 18, 0, 36, Fraction(1, 3))
        with pytest.raises(NoConfigurationError) as exc:
            find_configuration(cg, stats, ETA)
        report = exc.value.report
        assert report["stats"]["k"] == 54
        assert set(report) >= {"M", "S_0", "S_1", "degbar"}

    def test_rejects_tree_skew_above_model_skew(self):
        cg = cg_of(2, 2, 20, Fraction(1, 3), {(0, 2): Fraction(1)})
        with pytest.raises(PreconditionError):
            find_configuration(cg, TreeStats(0, 2, 0, 3, Fraction(2, 5)),
                               ETA)

    @pytest.mark.parametrize("seed", range(40))
    def test_random_sweep_found_and_verified(self, seed):
        cg, stats, eta = random_cluster_instance(seed)
        w = find_configuration(cg, stats, eta)
        assert verify_witness(cg, stats, w, eta)

    def test_deterministic(self):
        cg, stats, eta = random_cluster_instance(7)
        a = find_configuration(cg, stats, eta)
        b = find_configuration(cg, stats, eta)
        assert a == b and a.to_json() == b.to_json()


class TestVerifyWitness:
    def test_non_adjacent_pair_rejected(self):
        cg = cg_of(2, 2, 20, Fraction(1, 3), {(0, 2): Fraction(1),
                                              (1, 3): Fraction(1)})
        stats = TreeStats(36, 18, 0, 0, Fraction(1, 3))
        w = find_configuration(cg, stats, ETA)
        assert not verify_witness(cg, stats, replace(w, Y=3), ETA)

    def test_config_d_matching_endpoint_condition(self):
        # X sees both endpoints of the matching edge (1, 2); every other
        # configuration-D inequality holds, isolated via the empty-M probe
        cg = cg_of(2, 2, 12, Fraction(1, 3), {(0, 1): Fraction(1, 2),
                                              (0, 2): Fraction(1, 2),
                                              (0, 3): Fraction(1, 2),
                                              (1, 2): Fraction(1, 2)})
        stats = TreeStats(10, 5, 0, 0, Fraction(1, 3))
        m = ((1, 2),)
        probe = _config_inequalities(cg, stats, ETA, "D", 0, 3,
                                     (2,), (3,), ())
        assert probe is not None
        w = ConfigWitness("D", 0, 3, m, (2,), (3,), (), tuple(probe))
        assert not verify_witness(cg, stats, w, ETA)

    def test_tampered_inequality_set_is_recomputed(self):
        cg, stats, eta = random_cluster_instance(11)
        w = find_configuration(cg, stats, eta)
        assert verify_witness(cg, stats, replace(w, inequalities=()), eta)
        assert not verify_witness(cg, stats, replace(w, S_1=()), eta) \
            or w.S_1 == ()

    def test_json_roundtrip(self):
        cg, stats, eta = random_cluster_instance(3)
        w = find_configuration(cg, stats, eta)
        assert ConfigWitness.from_json(w.to_json()) == w
