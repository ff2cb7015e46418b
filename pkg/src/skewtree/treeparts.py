"""Fine partitions of rooted trees and the anchored forests they induce.

A fine partition cuts a tree into two small seed sets W_A, W_B and two
families of small subtrees D_A, D_B obeying nine structural properties.
The constructor peels overweight subtrees bottom-up and then repairs the
seed-neighbour properties by promoting vertices; the verifier is the
source of truth.

Side convention: the smaller colour class is called the small side; W_A
is the seed set inside the small side and W_B the one inside the big
side.  Components whose seed-neighbours lie in W_A form D_A, the rest
form D_B.  Distances between seeds then have the right parity
automatically.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from typing import NamedTuple

from skewtree.graphs import RootedTree
from skewtree.regularity import PreconditionError

__all__ = [
    "FinePartition",
    "AnchoredForest",
    "Violation",
    "fine_partition",
    "verify_fine_partition",
    "to_anchored_forests",
    "partition_stats",
    "small_class_colour",
    "ContractError",
]

SEED_BOUND_FACTOR = 336


class ContractError(AssertionError):
    """A constructed object fails its own verifier; carries violations."""

    def __init__(self, violations):
        super().__init__(f"contract violations: {violations}")
        self.violations = violations


class Violation(NamedTuple):
    item: int
    witness: object


@dataclass(frozen=True)
class FinePartition:
    W_A: tuple[int, ...]
    W_B: tuple[int, ...]
    D_A: tuple[tuple[int, ...], ...]
    D_B: tuple[tuple[int, ...], ...]
    ell: int

    def seeds(self) -> set[int]:
        return set(self.W_A) | set(self.W_B)

    def to_json(self) -> str:
        return json.dumps({"WA": list(self.W_A), "WB": list(self.W_B),
                           "DA": [list(c) for c in self.D_A],
                           "DB": [list(c) for c in self.D_B],
                           "ell": self.ell})

    @classmethod
    def from_json(cls, text: str) -> "FinePartition":
        d = json.loads(text)
        return cls(tuple(d["WA"]), tuple(d["WB"]),
                   tuple(tuple(c) for c in d["DA"]),
                   tuple(tuple(c) for c in d["DB"]), d["ell"])


@dataclass(frozen=True)
class AnchoredForest:
    """Components plus the seeds they attach to.

    components excludes singletons, which are listed in deferred and get
    embedded greedily at the very end.  attachments[i] lists the
    (anchor, component-vertex) edges of component i.
    """

    side: str
    components: tuple[tuple[int, ...], ...]
    anchors: tuple[int, ...]
    attachments: tuple[tuple[tuple[int, int], ...], ...]
    tau: int
    deferred: tuple[int, ...]


def small_class_colour(tree: RootedTree) -> int:
    """Colour id (1 or 2) of the smaller colour class; ties pick 1."""
    c1 = sum(1 for c in tree.colour if c == 1)
    return 1 if c1 <= tree.n - c1 else 2


def _bfs_dist(tree: RootedTree, start: int) -> list[int]:
    dist = [-1] * tree.n
    dist[start] = 0
    queue = [start]
    for v in queue:
        for u in tree.neighbours(v):
            if dist[u] < 0:
                dist[u] = dist[v] + 1
                queue.append(u)
    return dist


def _components_of(tree: RootedTree, seeds: set[int]):
    """Connected components of T - seeds with their seed-neighbour sets."""
    seen = set(seeds)
    out = []
    for v0 in range(tree.n):
        if v0 in seen:
            continue
        comp = [v0]
        seen.add(v0)
        att = set()
        for v in comp:
            for u in tree.neighbours(v):
                if u in seeds:
                    att.add(u)
                elif u not in seen:
                    seen.add(u)
                    comp.append(u)
        out.append((sorted(comp), sorted(att)))
    return out


def _is_bad(tree: RootedTree, att: list[int]) -> bool:
    if len(att) <= 1:
        return False
    if len(att) > 2:
        return True
    s1, s2 = att
    if tree.colour[s1] != tree.colour[s2]:
        return True
    return tree.distance(s1, s2) < 6


def _steiner_interior(tree: RootedTree, att: list[int]) -> set[int]:
    """Vertices on paths between the attachment seeds, seeds excluded."""
    out: set[int] = set()
    base = att[0]
    for other in att[1:]:
        out.update(tree.path(base, other)[1:-1])
    if len(att) > 2:
        for i in range(1, len(att)):
            for j in range(i + 1, len(att)):
                out.update(tree.path(att[i], att[j])[1:-1])
    return out


def _repair_promotions(tree: RootedTree, att: list[int]) -> set[int]:
    """Vertices to promote to seeds so the component becomes legal."""
    if len(att) == 2 and tree.colour[att[0]] == tree.colour[att[1]]:
        pth = tree.path(att[0], att[1])
        dist = len(pth) - 1  # even: same colour class
        if dist >= 12:
            # split at even offsets >= 6; the final gap stays in [6, 10]
            cuts = set()
            pos = 6
            while dist - pos >= 6:
                cuts.add(pth[pos])
                pos += 6
            return cuts
    return _steiner_interior(tree, att)


def fine_partition(tree: RootedTree, ell: int) -> FinePartition:
    """Build a verified ell-fine partition; deterministic per tree."""
    if not (1 <= ell < tree.k):
        raise PreconditionError(f"need 1 <= ell < k, got ell={ell} k={tree.k}")
    seeds: set[int] = set()
    res = [0] * tree.n
    for v in reversed(tree.bfs_order()):
        r = 1 + sum(res[c] for c in tree.children(v))
        if r > ell and v != tree.root:
            seeds.add(v)
            res[v] = 0
        else:
            res[v] = r
    seeds.add(tree.root)

    while True:
        comps = _components_of(tree, seeds)
        bad = [att for _, att in comps if _is_bad(tree, att)]
        if not bad:
            break
        for att in bad:
            seeds.update(_repair_promotions(tree, att))

    small = small_class_colour(tree)
    w_a = tuple(sorted(v for v in seeds if tree.colour[v] == small))
    w_b = tuple(sorted(v for v in seeds if tree.colour[v] != small))
    d_a, d_b = [], []
    for comp, att in comps:
        side_a = all(tree.colour[s] == small for s in att)
        (d_a if side_a else d_b).append(tuple(comp))
    fp = FinePartition(w_a, w_b, tuple(d_a), tuple(d_b), ell)
    violations = verify_fine_partition(tree, fp)
    if violations:
        raise ContractError(violations)
    return fp


def verify_fine_partition(tree: RootedTree,
                          fp: FinePartition) -> list[Violation]:
    """Check all nine defining properties; empty list means valid."""
    out: list[Violation] = []
    wa, wb = set(fp.W_A), set(fp.W_B)
    comps = list(fp.D_A) + list(fp.D_B)
    seeds = wa | wb

    # 1: the seed sets and component vertex sets partition V(T), and every
    # listed component really is a connected subtree
    blocks = [wa, wb] + [set(c) for c in comps]
    tally: dict[int, int] = {}
    for b in blocks:
        for v in b:
            tally[v] = tally.get(v, 0) + 1
    missing = [v for v in range(tree.n) if v not in tally]
    doubled = [v for v, c in tally.items() if c > 1]
    alien = [v for v in tally if not (0 <= v < tree.n)]
    if missing or doubled or alien:
        out.append(Violation(1, {"missing": missing, "repeated": doubled,
                                 "out_of_range": alien}))
    else:
        for comp in comps:
            cs = set(comp)
            reach = {comp[0]}
            stack = [comp[0]]
            while stack:
                v = stack.pop()
                for u in tree.neighbours(v):
                    if u in cs and u not in reach:
                        reach.add(u)
                        stack.append(u)
            if reach != cs:
                out.append(Violation(1, {"disconnected_component": comp}))
                break

    # 2: root is a seed
    if tree.root not in seeds:
        out.append(Violation(2, {"root": tree.root}))

    # 3: seed sets small
    bound = Fraction(SEED_BOUND_FACTOR * tree.k, fp.ell)
    if max(len(wa), len(wb)) > bound:
        out.append(Violation(3, {"W_A": len(wa), "W_B": len(wb),
                                 "bound": bound}))

    # 4: seed distances odd exactly across sides
    slist = sorted(seeds)
    dist_from = {w: _bfs_dist(tree, w) for w in slist}
    for i, w1 in enumerate(slist):
        for w2 in slist[i + 1:]:
            odd = dist_from[w1][w2] % 2 == 1
            cross = (w1 in wa) != (w2 in wa)
            if odd != cross:
                out.append(Violation(4, {"pair": (w1, w2)}))

    # 5: component sizes
    for comp in comps:
        if len(comp) > fp.ell:
            out.append(Violation(5, {"component": comp, "size": len(comp)}))

    # 6: D_A avoids N(W_B) and vice versa
    n_wa = set().union(*(tree.neighbours(w) for w in wa)) if wa else set()
    n_wb = set().union(*(tree.neighbours(w) for w in wb)) if wb else set()
    for comp in fp.D_A:
        hit = set(comp) & n_wb
        if hit:
            out.append(Violation(6, {"component": comp,
                                     "touches_N_W_B": sorted(hit)}))
    for comp in fp.D_B:
        hit = set(comp) & n_wa
        if hit:
            out.append(Violation(6, {"component": comp,
                                     "touches_N_W_A": sorted(hit)}))

    # 7, 8, 9: outside neighbourhoods are seeds, at most two of them,
    # and two seed-neighbours lie at distance >= 6
    for comp in comps:
        cs = set(comp)
        outside = set()
        for v in comp:
            outside |= tree.neighbours(v) - cs
        if not outside <= seeds:
            out.append(Violation(7, {"component": comp,
                                     "non_seed": sorted(outside - seeds)}))
        snbrs = sorted(outside & seeds)
        if len(snbrs) > 2:
            out.append(Violation(8, {"component": comp, "seeds": snbrs}))
        elif len(snbrs) == 2:
            dist = dist_from[snbrs[0]][snbrs[1]]
            if dist < 6:
                out.append(Violation(9, {"component": comp,
                                         "seeds": snbrs, "dist": dist}))
    return out


def to_anchored_forests(fp: FinePartition,
                        tree: RootedTree) -> tuple[AnchoredForest,
                                                   AnchoredForest]:
    """Split the partition into the A-side and B-side anchored forests.

    Singleton components become deferred greedy leaves.  Raises
    ContractError when the anchored-forest contract would be violated.
    """
    if verify_fine_partition(tree, fp):
        raise PreconditionError("fine partition does not verify")

    def build(side: str, comps, anchor_pool: set[int]) -> AnchoredForest:
        keep, deferred, atts = [], [], []
        for comp in comps:
            cs = set(comp)
            pairs = []
            for v in comp:
                for w in tree.neighbours(v) - cs:
                    if w in anchor_pool:
                        pairs.append((w, v))
            if len(comp) == 1:
                deferred.extend(comp)
                continue
            keep.append(tuple(comp))
            atts.append(tuple(sorted(pairs)))
        anchors = sorted({a for pairs in atts for a, _ in pairs})
        for pairs, comp in zip(atts, keep):
            uniq = sorted({a for a, _ in pairs})
            if not 1 <= len(uniq) <= 2:
                raise ContractError([("anchors", comp, uniq)])
            if len(uniq) == 2 and tree.distance(uniq[0], uniq[1]) < 4:
                raise ContractError([("anchor-distance", comp, uniq)])
        return AnchoredForest(side, tuple(keep), tuple(anchors),
                              tuple(atts), fp.ell, tuple(sorted(deferred)))

    f_a = build("A", fp.D_A, set(fp.W_A))
    f_b = build("B", fp.D_B, set(fp.W_B))
    return f_a, f_b


def partition_stats(fp: FinePartition, tree: RootedTree) -> dict:
    """Exact colour-class counts of the partition's pieces.

    a2/b1 count the small-class content on the A/B side (the seed set
    W_A counts towards a2, so a2 + b1 equals the small class minus W_B's
    share exactly); a1/b2 are the big-class counterparts.
    """
    small = small_class_colour(tree)
    da = [v for comp in fp.D_A for v in comp]
    db = [v for comp in fp.D_B for v in comp]
    a2 = len(fp.W_A) + sum(1 for v in da if tree.colour[v] == small)
    a1 = sum(1 for v in da if tree.colour[v] != small)
    b1 = sum(1 for v in db if tree.colour[v] == small)
    b2 = len(fp.W_B) + sum(1 for v in db if tree.colour[v] != small)
    small_total = sum(1 for c in tree.colour if c == small)
    r_tilde = Fraction(small_total - sum(1 for w in fp.W_B
                                         if tree.colour[w] == small), tree.k)
    return {"a1": a1, "a2": a2, "b1": b1, "b2": b2, "r_tilde": r_tilde}
