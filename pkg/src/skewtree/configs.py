"""Configuration search on the cluster graph.

Given the cluster graph of the model and the arithmetic profile of a
partitioned tree, find a matching M in the L/S bipartite part and an
adjacent cluster pair (X, Y) certifying one of four degree
configurations A-D.  Every inequality in the certificate is exact; a
verifier recomputes the whole certificate from scratch.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction

from skewtree.clusters import ClusterGraph
from skewtree.regularity import PreconditionError
from skewtree.treeparts import FinePartition, partition_stats

CONFIGS = ("A", "B", "C", "D")


@dataclass(frozen=True)
class TreeStats:
    """Class-intersection counts of a fine partition and the tree skew.

    a1/a2 count shrub vertices anchored on the small side (a2 on the
    small colour class itself, W-seeds included), b1/b2 those anchored
    on the large side.  r_tilde * k = a2 + b1 exactly.
    """

    a1: int
    a2: int
    b1: int
    b2: int
    r_tilde: Fraction

    def __post_init__(self):
        object.__setattr__(self, "r_tilde", Fraction(self.r_tilde))
        if min(self.a1, self.a2, self.b1, self.b2) < 0:
            raise PreconditionError("negative count in tree stats")
        if not 0 < self.r_tilde <= Fraction(1, 2):
            raise PreconditionError(f"r_tilde {self.r_tilde} outside (0,1/2]")
        k = Fraction(self.a2 + self.b1) / self.r_tilde
        if k.denominator != 1 or k <= 0:
            raise PreconditionError(
                f"(a2+b1)/r_tilde = {k} is not a positive integer")

    @property
    def k(self) -> int:
        return int(Fraction(self.a2 + self.b1) / self.r_tilde)

    @classmethod
    def from_partition(cls, fp: FinePartition, tree) -> "TreeStats":
        s = partition_stats(fp, tree)
        return cls(s["a1"], s["a2"], s["b1"], s["b2"], s["r_tilde"])


@dataclass(frozen=True)
class ConfigWitness:
    """A certified configuration: matching, pair, and inequality ledger."""

    config: str
    X: int
    Y: int
    M: tuple[tuple[int, int], ...]
    S_M: tuple[int, ...]
    S_1: tuple[int, ...]
    S_0: tuple[int, ...]
    inequalities: tuple[tuple[str, Fraction, Fraction], ...]
    metadata: dict = field(default_factory=dict, compare=False)

    def to_json(self) -> str:
        return json.dumps({
            "config": self.config,
            "X": self.X,
            "Y": self.Y,
            "M": [list(e) for e in self.M],
            "S_M": list(self.S_M),
            "S_1": list(self.S_1),
            "S_0": list(self.S_0),
            "inequalities": [{"name": n, "lhs": str(l), "rhs": str(r)}
                             for n, l, r in self.inequalities],
            "metadata": {k: v for k, v in self.metadata.items()},
        })

    @classmethod
    def from_json(cls, text: str) -> "ConfigWitness":
        d = json.loads(text)
        return cls(d["config"], d["X"], d["Y"],
                   tuple(tuple(e) for e in d["M"]),
                   tuple(d["S_M"]), tuple(d["S_1"]), tuple(d["S_0"]),
                   tuple((q["name"], Fraction(q["lhs"]), Fraction(q["rhs"]))
                         for q in d["inequalities"]),
                   d.get("metadata", {}))


class NoConfigurationError(RuntimeError):
    """Exhaustive scan found no configuration; carries the scan report."""

    def __init__(self, report: dict):
        super().__init__("no configuration found; counterexample candidate")
        self.report = report


def low_degree_s(cg: ClusterGraph, threshold: Fraction) -> tuple[int, ...]:
    """S-clusters with average degree below the threshold."""
    return tuple(z for z in cg.S if cg.degbar(z) < threshold)


def _max_matching_size(edges: list[tuple[int, int]],
                       left: set[int], blocked: set[int]) -> int:
    """Kuhn's algorithm on the given edge list, skipping blocked vertices."""
    adj: dict[int, list[int]] = {}
    for u, v in edges:
        if u in blocked or v in blocked:
            continue
        a, b = (u, v) if u in left else (v, u)
        adj.setdefault(a, []).append(b)
    match: dict[int, int] = {}

    def try_augment(a, seen):
        for b in adj.get(a, []):
            if b in seen:
                continue
            seen.add(b)
            if b not in match or try_augment(match[b], seen):
                match[b] = a
                return True
        return False

    return sum(try_augment(a, set()) for a in sorted(adj))


def matching_max_cover(cg: ClusterGraph,
                       threshold: Fraction) -> tuple[tuple[int, int], ...]:
    """Matching covering as many low-degree S-clusters as possible.

    Only edges into low-degree S-clusters matter for the objective, so
    the result is a maximum matching of H[L, S0]; among those, the
    lexicographically smallest edge set, fixed greedily.
    """
    threshold = Fraction(threshold)
    s0 = set(low_degree_s(cg, threshold))
    edges = [(l, s) for l, s in
             ((min(e), max(e)) for e in cg.edges())
             if l in set(cg.L) and s in s0]
    edges = sorted((l, s) for l, s in edges)
    left = set(cg.L)
    target = _max_matching_size(edges, left, set())
    chosen: list[tuple[int, int]] = []
    blocked: set[int] = set()
    for e in edges:
        if e[0] in blocked or e[1] in blocked:
            continue
        rest = _max_matching_size(edges, left, blocked | set(e))
        if len(chosen) + 1 + rest == target:
            chosen.append(e)
            blocked |= set(e)
        if len(chosen) == target:
            break
    return tuple(chosen)


def alternating_reachability(cg: ClusterGraph, M, S0):
    """Alternating-path closure from the low-degree S-clusters.

    A cluster is reachable when some path starts in S0, walks a graph
    edge into a matched L-cluster, follows the matching edge to its
    S-partner, and repeats.  Returns (A_side, B_side, L_A, L_B, S_A,
    S_B) where B_side holds the reachable matched clusters and A_side
    the rest of V(M).
    """
    M = tuple(tuple(e) for e in M)
    partner = {}
    for u, v in M:
        partner[u] = v
        partner[v] = u
    matched = set(partner)
    s0 = set(S0)
    b_side: set[int] = set()
    frontier = sorted(s0)
    seen_s = set(frontier)
    while frontier:
        nxt = []
        for s in frontier:
            for l in cg.neighbours(s):
                if l not in set(cg.L) or l not in matched:
                    continue
                if l in b_side:
                    continue
                b_side.add(l)
                p = partner[l]
                b_side.add(p)
                if p not in seen_s:
                    seen_s.add(p)
                    nxt.append(p)
        frontier = sorted(nxt)
    a_side = matched - b_side
    l_b = {x for x in b_side if x in set(cg.L)}
    l_a = set(cg.L) - l_b
    s_b = b_side - l_b
    s_a = {x for x in matched if x in set(cg.S)} - s_b
    return (tuple(sorted(a_side)), tuple(sorted(b_side)),
            tuple(sorted(l_a)), tuple(sorted(l_b)),
            tuple(sorted(s_a)), tuple(sorted(s_b)))


def _config_inequalities(cg: ClusterGraph, stats: TreeStats,
                         eta: Fraction, config: str, x: int, y: int,
                         s_m, s_1, M) -> list | None:
    """Inequality ledger for (config, X, Y), or None if any fails."""
    rt = stats.r_tilde
    rp = cg.r
    k = stats.k
    L = set(cg.L)
    out = []

    def need(name, lhs, rhs, strict=False):
        out.append((name, Fraction(lhs), Fraction(rhs)))
        return lhs > rhs if strict else lhs >= rhs

    if config == "A":
        if not need("A.degX", cg.degbar(x, set(s_1) | set(s_m)),
                    stats.a2 * (1 - rt) / rt + eta * k / 4):
            return None
        if not need("A.degY", cg.degbar(y, L), rt * k + eta * k / 4):
            return None
    elif config == "B":
        if not need("B.skew", rt * stats.a1, (1 - rt) * stats.a2,
                    strict=True):
            return None
        if not need("B.degX", cg.degbar(x, set(s_1) | set(s_m) | L),
                    k + eta * k / 4):
            return None
        if not need("B.degY", cg.degbar(y, L), rt * k + eta * rp * k / 4):
            return None
    elif config == "C":
        if not need("C.skew", (1 - rt) * stats.a2, rt * stats.a1):
            return None
        if not need("C.degX", cg.degbar(x, set(s_1) | set(s_m) | L),
                    k + eta * k / 4):
            return None
        if not need("C.degY", cg.degbar(y, L),
                    stats.b1 + eta * rp * k / 4):
            return None
    elif config == "D":
        if not need("D.skew", rt * stats.a1, (1 - rt) * stats.a2):
            return None
        if not need("D.b1", rt * rt * k / (1 - rt), stats.b1):
            return None
        if not need("D.degX", cg.degbar(x, set(s_m) | L),
                    k + eta * k / 4):
            return None
        if not need("D.degY", cg.degbar(y, L), stats.b1 + eta * k / 4):
            return None
        for c, d in M:
            if cg.pair_density(x, c) > 0 and cg.pair_density(x, d) > 0:
                return None
        out.append(("D.no-full-matching-edge", Fraction(1), Fraction(1)))
    else:
        raise ValueError(f"unknown configuration {config!r}")
    return out


def find_configuration(cg: ClusterGraph, stats: TreeStats,
                       eta) -> ConfigWitness:
    """Scan for a configuration A > B > C > D over ordered cluster pairs.

    The matching is fixed first; pairs are scanned lexicographically
    per configuration.  Exhaustion raises NoConfigurationError with a
    counterexample-candidate report.
    """
    eta = Fraction(eta)
    rt, rp, k = stats.r_tilde, cg.r, stats.k
    if rt > rp:
        raise PreconditionError(f"r_tilde {rt} exceeds model skew {rp}")
    thr_s0 = (rt + rp * eta / 2) * k
    thr_s1 = (rt + rp * eta) * k
    s0 = low_degree_s(cg, thr_s0)
    M = matching_max_cover(cg, thr_s0)
    s_m = tuple(sorted(e[1] for e in M))
    s_1 = tuple(z for z in cg.S
                if cg.degbar(z) >= thr_s1 and z not in set(s_m))
    band = tuple(z for z in cg.S
                 if thr_s0 <= cg.degbar(z) < thr_s1 and z not in set(s_m))
    _assert_exchange_optimality(cg, M, s0, thr_s0)
    pairs = []
    for i, j in cg.edges():
        pairs.append((i, j))
        pairs.append((j, i))
    pairs.sort()
    for config in CONFIGS:
        for x, y in pairs:
            ineqs = _config_inequalities(cg, stats, eta, config, x, y,
                                         s_m, s_1, M)
            if ineqs is not None:
                return ConfigWitness(
                    config, x, y, M, s_m, s_1, s0, tuple(ineqs),
                    metadata={"band_clusters": list(band),
                              "matching_objective":
                                  "max low-degree-S coverage, lex-min"})
    raise NoConfigurationError({
        "stats": {"a1": stats.a1, "a2": stats.a2, "b1": stats.b1,
                  "b2": stats.b2, "r_tilde": str(rt), "k": k},
        "eta": str(eta),
        "M": [list(e) for e in M],
        "S_0": list(s0),
        "S_1": list(s_1),
        "degbar": {c: str(cg.degbar(c)) for c in range(cg.n_clusters)},
    })


def _assert_exchange_optimality(cg: ClusterGraph, M, s0, thr_s0):
    """Exchange-argument consequences of matching optimality.

    Every reachable matched S-cluster must be low degree, and no
    L-cluster outside the reachable side may touch an uncovered or
    reachable low-degree S-cluster; violations indicate a matching bug.
    """
    covered = {v for e in M for v in e}
    uncovered = [z for z in s0 if z not in covered]
    _, _, l_a, _, _, s_b = alternating_reachability(cg, M, uncovered)
    for z in s_b:
        assert cg.degbar(z) < thr_s0, (
            f"reachable matched S-cluster {z} is not low degree")
    bad_targets = set(uncovered) | set(s_b)
    for l in l_a:
        for z in bad_targets:
            assert cg.pair_density(l, z) == 0, (
                f"edge between far-side L-cluster {l} and {z}")


def verify_witness(cg: ClusterGraph, stats: TreeStats, w: ConfigWitness,
                   eta) -> bool:
    """Recompute the full certificate from scratch; exact arithmetic."""
    eta = Fraction(eta)
    try:
        rt, rp, k = stats.r_tilde, cg.r, stats.k
    except PreconditionError:
        return False
    if w.config not in CONFIGS:
        return False
    n_cl = cg.n_clusters
    if not (0 <= w.X < n_cl and 0 <= w.Y < n_cl):
        return False
    if cg.pair_density(w.X, w.Y) == 0:
        return False
    L, S = set(cg.L), set(cg.S)
    seen: set[int] = set()
    for e in w.M:
        if len(e) != 2:
            return False
        l, s = min(e), max(e)
        if l not in L or s not in S or cg.pair_density(l, s) == 0:
            return False
        if seen & set(e):
            return False
        seen |= set(e)
    s_m = tuple(sorted(max(e) for e in w.M))
    if tuple(sorted(w.S_M)) != s_m:
        return False
    thr_s1 = (rt + rp * eta) * k
    s_1 = tuple(sorted(z for z in S
                       if cg.degbar(z) >= thr_s1 and z not in set(s_m)))
    if tuple(sorted(w.S_1)) != s_1:
        return False
    ineqs = _config_inequalities(cg, stats, eta, w.config, w.X, w.Y,
                                 s_m, s_1, w.M)
    return ineqs is not None
