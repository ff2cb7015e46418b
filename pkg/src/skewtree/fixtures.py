"""Hand-built end-to-end fixtures, one per degree configuration.

Each fixture combines a synthesized cluster model (three L-clusters of
100 vertices, two S-clusters of 150, skew 2/5, all positive pair
densities exactly 1/2), a 61-vertex tree with a hand-laid fine
partition, and a hand-certified configuration witness.  The density
plans are engineered so the embedding engine takes a different route
per case:

  A: the shrub forest goes through the matching pair,
  B: the whole forest goes through L-clusters (no S-cluster adjacency),
  C: the forest goes through the high-degree S-cluster, with the
     B-side reservation made first,
  D: the forest goes through L-neighbours of the primary cluster and
     every matching edge has a zero-density side.

The witnesses are hand-built rather than searched for: the finder's
A-first priority would certify configuration A on these dense plans,
while each fixture is meant to exercise its own case script.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import random

from skewtree.clusters import ClusterGraph, SkewLksGraph, synthesize_lks
from skewtree.configs import (ConfigWitness, TreeStats,
                              _config_inequalities, verify_witness)
from skewtree.graphs import RootedTree
from skewtree.treeparts import FinePartition, verify_fine_partition

__all__ = ["CaseFixture", "build_case_fixture", "CASES",
           "random_cluster_instance"]

CASES = ("A", "B", "C", "D")

M_L, M_S = 3, 2
L_SIZE = 100
R_PRIME = Fraction(2, 5)
K = 60
ETA = Fraction(1, 10)
EPSILON = Fraction(1, 24)
D_MIN = Fraction(1, 2)
DELTA = Fraction(1, 10)

# positive cluster pairs per case; every listed pair has density 1/2
_PLANS = {
    "A": ((0, 1), (0, 3), (1, 2), (2, 3), (2, 4)),
    "B": ((0, 1), (0, 2), (1, 2), (2, 3), (2, 4)),
    "C": ((0, 1), (0, 4), (1, 2), (2, 3), (2, 4)),
    "D": ((0, 1), (0, 2), (1, 2), (2, 3), (2, 4)),
}


@dataclass(frozen=True)
class CaseFixture:
    case: str
    g: SkewLksGraph
    tree: RootedTree
    fp: FinePartition
    witness: ConfigWitness
    delta: Fraction


class _TreeBuilder:
    """Grow a rooted tree by parent links; vertex ids are allocation order."""

    def __init__(self):
        self.parent = [-1]

    def add(self, p: int) -> int:
        self.parent.append(p)
        return len(self.parent) - 1

    def tree(self) -> RootedTree:
        return RootedTree(len(self.parent), 0, self.parent)


def _balanced_shrub(tb: _TreeBuilder, seed: int) -> tuple[int, ...]:
    """Size-4 shrub: stem, two small children, one prunable big leaf."""
    v = tb.add(seed)
    u1 = tb.add(v)
    u2 = tb.add(v)
    x = tb.add(u1)
    return (v, u1, u2, x)


def _skewed_shrub(tb: _TreeBuilder, seed: int,
                  big_tail: int) -> tuple[int, ...]:
    """Stem, one small child, big_tail grandchildren on the big side."""
    v = tb.add(seed)
    u = tb.add(v)
    return (v, u) + tuple(tb.add(u) for _ in range(big_tail))


def _star_shrub(tb: _TreeBuilder, seed: int, leaves: int) -> tuple[int, ...]:
    """Small hub with big leaves, hanging off a big-side seed."""
    hub = tb.add(seed)
    return (hub,) + tuple(tb.add(hub) for _ in range(leaves))


def _case_tree(case: str) -> tuple[RootedTree, FinePartition]:
    """61-vertex tree: root seed (big side), one small seed, shrubs.

    Small colour class has exactly 20 vertices in every case, so the
    tree skew is 20/60 = 1/3 against the model skew 2/5.
    """
    tb = _TreeBuilder()
    a = tb.add(0)
    d_a, d_b = [], []
    if case in ("A", "C"):
        # a1=6, a2=7 (seed included), b1=13, b2=35
        d_a = [_balanced_shrub(tb, a) for _ in range(3)]
        d_b = [_star_shrub(tb, 0, 3) for _ in range(8)]
        d_b += [_star_shrub(tb, 0, 2) for _ in range(5)]
    elif case == "B":
        # a1=28 > 2*a2=16 strictly; b1=12
        d_a = [_skewed_shrub(tb, a, 3) for _ in range(7)]
        d_b = [_star_shrub(tb, 0, 1) for _ in range(12)]
    else:
        # a1=28 = 2*a2 exactly; b1=6 within the case-D bound 10
        d_a = [_skewed_shrub(tb, a, 1) for _ in range(11)]
        d_a += [_skewed_shrub(tb, a, 2) for _ in range(2)]
        d_b = [_star_shrub(tb, 0, 2) for _ in range(6)]
    tree = tb.tree()
    fp = FinePartition((a,), (0,), tuple(d_a), tuple(d_b), 5)
    violations = verify_fine_partition(tree, fp)
    assert not violations, violations
    assert tree.n == 61, tree.n
    return tree, fp


def _density_plan(case: str) -> list[list[Fraction]]:
    n_cl = M_L + M_S
    plan = [[Fraction(0)] * n_cl for _ in range(n_cl)]
    for i, j in _PLANS[case]:
        plan[i][j] = plan[j][i] = Fraction(1, 2)
    return plan


def _case_witness(case: str, g: SkewLksGraph,
                  stats: TreeStats) -> ConfigWitness:
    cg = g.cluster_graph()
    m = ((2, 3),)
    s_1 = tuple(z for z in cg.S
                if cg.degbar(z) >= (stats.r_tilde + cg.r * ETA) * stats.k
                and z != 3)
    ineqs = _config_inequalities(cg, stats, ETA, case, 0, 1, (3,), s_1, m)
    assert ineqs is not None, f"case {case} inequalities fail"
    w = ConfigWitness(case, 0, 1, m, (3,), s_1, (), tuple(ineqs))
    assert verify_witness(cg, stats, w, ETA)
    return w


def random_cluster_instance(
        seed: int, max_clusters: int = 24,
) -> tuple[ClusterGraph, TreeStats, Fraction]:
    """Seeded cluster-level instance meeting the configuration hypothesis.

    Returns (cluster graph, tree stats, eta).  The cluster graph
    satisfies the six model properties at cluster level: family ratio,
    uniform sizes, exact cross-family size ratio, densities 0 or >= d,
    no S-S edges, and average L-degree >= (1+eta)k where k is derived
    from the realized degrees.  Tree stats satisfy a2+b1 = rt*k with
    rt <= r.
    """
    rng = random.Random(seed)
    eta = Fraction(1, 10)
    r = rng.choice((Fraction(1, 3), Fraction(2, 5), Fraction(1, 4),
                    Fraction(3, 7)))
    m_s = rng.randint(2, max(2, min(8, (max_clusters - 2) // 2)))
    m_l_min = -((-m_s * (1 + eta).numerator) // (1 + eta).denominator)
    m_l = rng.randint(m_l_min, max(m_l_min, max_clusters - m_s))
    scale = rng.randint(8, 30)
    l_size = r.numerator * scale
    s_size = (r.denominator - r.numerator) * scale
    n_cl = m_l + m_s
    families = ("L",) * m_l + ("S",) * m_s
    sizes = (l_size,) * m_l + (s_size,) * m_s
    d = rng.choice((Fraction(1, 2), Fraction(1, 4)))
    dens = [[Fraction(0)] * n_cl for _ in range(n_cl)]

    def put(i, j, value):
        dens[i][j] = dens[j][i] = value

    for i in range(m_l):
        for j in range(i + 1, n_cl):
            if rng.random() < 0.5:
                put(i, j, d * rng.randint(1, 2))
    for i in range(m_l):
        # every L-cluster needs k >= 1/r so that rt*k can hit 1
        floor_deg = (1 + eta) / r
        while sum(dens[i][j] * sizes[j] for j in range(n_cl)) < floor_deg:
            j = rng.randrange(m_l, n_cl)
            put(i, j, min(Fraction(1), dens[i][j] + d))
    dmap = {(i, j): dens[i][j] for i in range(n_cl)
            for j in range(i + 1, n_cl) if dens[i][j] > 0}
    cg = ClusterGraph(families, sizes, dmap, r)
    k = min(int(cg.degbar(i) / (1 + eta)) for i in range(m_l))
    assert int(r * k) >= 1, (k, r)
    rt_k = rng.randint(1, int(r * k))
    rt = Fraction(rt_k, k)
    a2 = rng.randint(0, rt_k)
    b1 = rt_k - a2
    a1 = rng.randint(0, k - rt_k)
    b2 = k - rt_k - a1
    return cg, TreeStats(a1, a2, b1, b2, rt), eta


def build_case_fixture(case: str, seed: int) -> CaseFixture:
    """Deterministic per (case, seed); the tree and witness never vary."""
    if case not in CASES:
        raise ValueError(f"unknown case {case!r}")
    g = synthesize_lks(M_L, M_S, L_SIZE, R_PRIME, _density_plan(case),
                       seed, k=K, eta=ETA, epsilon=EPSILON, d=D_MIN)
    tree, fp = _case_tree(case)
    stats = TreeStats.from_partition(fp, tree)
    return CaseFixture(case, g, tree, fp, _case_witness(case, g, stats),
                       DELTA)
