"""Independent ground truth for the embedding pipeline.

Brute-force subtree embedding with a second, independently-coded search
for cross-checks, the extremal construction with its tight tree, small
scale conjecture scanning, and the bistar/Ramsey checks.  Everything
here is exhaustive or seeded-random and makes no use of the regularity
machinery, so it can arbitrate its results.
"""

from __future__ import annotations

import itertools
import json
import time
from dataclasses import dataclass, field
from fractions import Fraction
from math import floor

import numpy as np

from skewtree.graphs import (EmbeddingCertificate, Graph, RootedTree,
                             validate_embedding)
from skewtree.regularity import PreconditionError

__all__ = [
    "BudgetExceededError",
    "ScanReport",
    "RamseyVerdict",
    "brute_force_embed",
    "second_search_embed",
    "gen_extremal",
    "gen_tight_tree",
    "conjecture_scan",
    "bistar_check",
    "ramsey_check",
    "pigeonhole_colour",
    "all_trees",
    "tree_canonical",
    "host_signatures",
]


class BudgetExceededError(RuntimeError):
    """Search hit its node cap; distinct from a completed 'no embedding'."""


def brute_force_embed(T: RootedTree, G: Graph,
                      budget: int = 10**7) -> EmbeddingCertificate | None:
    """Complete backtracking search for T inside G, BFS vertex order.

    Candidates for each non-root vertex are neighbours of the parent's
    image; host vertices of degree below the pattern degree are pruned,
    and unused twin vertices (equal neighbourhoods up to each other) are
    tried only once per step.  Returns a certificate, or None when the
    exhaustive search finishes empty.  Deterministic; raises
    BudgetExceededError past the node cap.
    """
    if T.n > G.n:
        return None
    order = T.bfs_order()
    par_pos = {v: T.parent[v] for v in order}
    tdeg = [T.degree(v) for v in range(T.n)]
    twins: list[list[int]] = [[] for _ in range(G.n)]
    for h in range(G.n):
        nh = G.neighbours(h)
        for h2 in range(h):
            if nh - {h2} == G.neighbours(h2) - {h}:
                twins[h].append(h2)
    image: dict[int, int] = {}
    used: set[int] = set()
    nodes = 0

    def place(i: int) -> bool:
        nonlocal nodes
        if i == len(order):
            return True
        v = order[i]
        if v == T.root:
            cands = range(G.n)
        else:
            cands = sorted(G.neighbours(image[par_pos[v]]))
        for h in cands:
            if h in used or G.degree(h) < tdeg[v]:
                continue
            if any(h2 not in used for h2 in twins[h]):
                continue
            nodes += 1
            if nodes > budget:
                raise BudgetExceededError(f"node cap {budget} exceeded")
            image[v] = h
            used.add(h)
            if place(i + 1):
                return True
            used.discard(h)
            del image[v]
        return False

    if not place(0):
        return None
    cert = EmbeddingCertificate(tuple(image[v] for v in range(T.n)),
                                ("oracle",) * T.n)
    assert validate_embedding(cert, T, G)
    return cert


def second_search_embed(T: RootedTree, G: Graph,
                        budget: int = 10**7) -> EmbeddingCertificate | None:
    """Independent re-implementation: reversed DFS order, no pruning.

    Exists to arbitrate brute_force_embed; shares no order or pruning
    logic with it, so a pruning bug cannot produce a matching error.
    """
    if T.n > G.n:
        return None
    order: list[int] = []
    stack = [T.root]
    while stack:
        v = stack.pop()
        order.append(v)
        stack.extend(T.children(v))
    image: dict[int, int] = {}
    nodes = 0

    def place(i: int) -> bool:
        nonlocal nodes
        if i == len(order):
            return True
        v = order[i]
        for h in range(G.n - 1, -1, -1):
            if h in image.values():
                continue
            p = T.parent[v]
            if p != -1 and not G.has_edge(image[p], h):
                continue
            nodes += 1
            if nodes > budget:
                raise BudgetExceededError(f"node cap {budget} exceeded")
            image[v] = h
            if place(i + 1):
                return True
            del image[v]
        return False

    if not place(0):
        return None
    cert = EmbeddingCertificate(tuple(image[v] for v in range(T.n)),
                                ("oracle2",) * T.n)
    assert validate_embedding(cert, T, G)
    return cert


def gen_extremal(k: int, r, copies: int = 1) -> Graph:
    """Disjoint blocks: clique, independent set, complete bipartite join.

    Each block has k+1 vertices: a clique of size floor(r(k+1))-1 fully
    joined to an independent set on the rest.  Clique-side vertices have
    degree exactly k.
    """
    r = Fraction(r)
    q = floor(r * (k + 1))
    if q < 2:
        raise PreconditionError(f"floor(r(k+1)) = {q} < 2: degenerate block")
    if copies < 1:
        raise PreconditionError("need at least one block")
    block = k + 1
    edges = []
    for c in range(copies):
        off = c * block
        clique = range(off, off + q - 1)
        rest = range(off + q - 1, off + block)
        edges.extend((u, v) for u in clique for v in clique if u < v)
        edges.extend((u, v) for u in clique for v in rest)
    g = Graph(copies * block, edges)
    for c in range(copies):
        for u in range(c * block, c * block + q - 1):
            assert g.degree(u) == k
    return g


def gen_tight_tree(k: int, r) -> RootedTree:
    """Broom on k+1 vertices: path of 2*floor(r(k+1)), star at one end.

    The smaller colour class has exactly floor(r(k+1)) vertices, one
    more than the extremal block's clique, which is why the block cannot
    contain it.
    """
    r = Fraction(r)
    q = floor(r * (k + 1))
    path_len = 2 * q
    if path_len > k + 1:
        raise PreconditionError(
            f"path on {path_len} vertices exceeds order {k + 1}")
    parent = [-1] + list(range(path_len - 1))
    centre = path_len - 1
    parent.extend([centre] * (k + 1 - path_len))
    t = RootedTree(k + 1, 0, parent)
    small = min(sum(1 for c in t.colour if c == 1),
                sum(1 for c in t.colour if c == 2))
    assert small == q, (small, q)
    return t


def _ahu_code(neigh: dict[int, list[int]], root: int) -> str:
    """Canonical string of a rooted tree (sorted-subtree encoding)."""
    def code(v: int, p: int) -> str:
        subs = sorted(code(u, v) for u in neigh[v] if u != p)
        return "(" + "".join(subs) + ")"
    return code(root, -1)


def tree_canonical(t: RootedTree) -> str:
    """Isomorphism-invariant code: sorted-subtree string at the centroid."""
    neigh = {v: sorted(t.neighbours(v)) for v in range(t.n)}
    if t.n == 1:
        return "()"
    # centroid(s) via repeated leaf stripping
    deg = {v: len(neigh[v]) for v in neigh}
    alive = set(neigh)
    layer = [v for v in alive if deg[v] <= 1]
    while len(alive) > 2:
        nxt = []
        for v in layer:
            alive.discard(v)
            for u in neigh[v]:
                if u in alive:
                    deg[u] -= 1
                    if deg[u] == 1:
                        nxt.append(u)
        layer = nxt
    return min(_ahu_code(neigh, c) for c in alive)


def all_trees(n_max: int) -> list[RootedTree]:
    """One representative per isomorphism class, orders 1..n_max.

    Enumerated from Pruefer sequences and deduplicated by the canonical
    subtree code.
    """
    out: list[RootedTree] = []
    seen: set[tuple[int, str]] = set()
    for n in range(1, n_max + 1):
        if n == 1:
            out.append(RootedTree(1, 0, [-1]))
            continue
        if n == 2:
            out.append(RootedTree(2, 0, [-1, 0]))
            continue
        for seq in itertools.product(range(n), repeat=n - 2):
            edges = _pruefer_edges(n, seq)
            parent = _edges_to_parent(n, edges, 0)
            t = RootedTree(n, 0, parent)
            key = (n, tree_canonical(t))
            if key not in seen:
                seen.add(key)
                out.append(t)
    return out


def _pruefer_edges(n: int, seq) -> list[tuple[int, int]]:
    degree = [1] * n
    for x in seq:
        degree[x] += 1
    edges = []
    leaves = sorted(v for v in range(n) if degree[v] == 1)
    seq = list(seq)
    for x in seq:
        leaf = leaves.pop(0)
        edges.append((leaf, x))
        degree[x] -= 1
        if degree[x] == 1:
            import bisect
            bisect.insort(leaves, x)
    edges.append((leaves[0], leaves[1]))
    return edges


def _edges_to_parent(n: int, edges, root: int) -> list[int]:
    neigh: dict[int, list[int]] = {v: [] for v in range(n)}
    for u, v in edges:
        neigh[u].append(v)
        neigh[v].append(u)
    parent = [-2] * n
    parent[root] = -1
    queue = [root]
    for v in queue:
        for u in neigh[v]:
            if parent[u] == -2:
                parent[u] = v
                queue.append(u)
    return parent


def _popcount_u32(a: np.ndarray) -> np.ndarray:
    b = a.view(np.uint8).reshape(a.shape + (4,))
    table = np.array([bin(i).count("1") for i in range(256)], dtype=np.uint8)
    return table[b].sum(axis=-1).astype(np.int64)


def host_signatures(n: int) -> dict[int, int]:
    """Edge-mask -> refinement signature for every graph on n vertices.

    Signature: two rounds of neighbour-colour refinement seeded by
    degrees, sharpened with per-vertex triangle counts.  Equal signature
    does not certify isomorphism; the scans use it only to thin the host
    list, which the spec of the canonizer allows.
    """
    pairs = list(itertools.combinations(range(n), 2))
    m = len(pairs)
    masks = np.arange(1 << m, dtype=np.uint32)
    bits = [(masks >> e) & 1 for e in range(m)]
    colours = []
    for v in range(n):
        deg = np.zeros(len(masks), dtype=np.int64)
        for e, (a, b) in enumerate(pairs):
            if v in (a, b):
                deg += bits[e]
        colours.append(deg)
    tri = [np.zeros(len(masks), dtype=np.int64) for _ in range(n)]
    eidx = {p: i for i, p in enumerate(pairs)}
    for a, b, c in itertools.combinations(range(n), 3):
        t = bits[eidx[(a, b)]] * bits[eidx[(a, c)]] * bits[eidx[(b, c)]]
        tri[a] += t
        tri[b] += t
        tri[c] += t
    colours = [col * (n + 1) + tr for col, tr in zip(colours, tri)]
    for _ in range(2):
        sums = [np.zeros(len(masks), dtype=np.int64) for _ in range(n)]
        for e, (a, b) in enumerate(pairs):
            sums[a] += bits[e] * (colours[b] * 2 + 1)
            sums[b] += bits[e] * (colours[a] * 2 + 1)
        colours = [col * 100003 + s for col, s in zip(colours, sums)]
    stacked = np.sort(np.stack(colours, axis=1), axis=1)
    sig: dict[int, int] = {}
    seen: set[bytes] = set()
    for mask in range(len(masks)):
        key = stacked[mask].tobytes()
        if key not in seen:
            seen.add(key)
            sig[mask] = hash(key)
    return sig


def _mask_graph(n: int, mask: int) -> Graph:
    pairs = list(itertools.combinations(range(n), 2))
    return Graph(n, [p for e, p in enumerate(pairs) if (mask >> e) & 1])


@dataclass
class ScanReport:
    """Outcome of a conjecture scan; counterexamples are double-checked."""

    parameters: dict
    instances_tried: int = 0
    hypothesis_skipped: int = 0
    counterexamples: list = field(default_factory=list)
    subscan: dict = field(default_factory=dict)
    runtime_seconds: float = 0.0

    def to_json(self) -> str:
        return json.dumps({
            "parameters": self.parameters,
            "instances_tried": self.instances_tried,
            "hypothesis_skipped": self.hypothesis_skipped,
            "counterexamples": self.counterexamples,
            "subscan": self.subscan,
            "runtime_seconds": round(self.runtime_seconds, 3),
        })


def _is_path(t: RootedTree) -> bool:
    return all(t.degree(v) <= 2 for v in range(t.n))


def _diameter(t: RootedTree) -> int:
    def far(s):
        dist = {s: 0}
        queue = [s]
        for v in queue:
            for u in t.neighbours(v):
                if u not in dist:
                    dist[u] = dist[v] + 1
                    queue.append(u)
        v = max(dist, key=lambda x: (dist[x], -x))
        return v, dist[v]
    a, _ = far(0)
    _, d = far(a)
    return d


def scan_trees(k: int, r) -> list[RootedTree]:
    """Trees of order <= k+1 whose smaller colour class is <= r(k+1)."""
    r = Fraction(r)
    out = []
    for t in all_trees(k + 1):
        c1 = sum(1 for c in t.colour if c == 1)
        if min(c1, t.n - c1) <= r * (k + 1):
            out.append(t)
    return out


def _meets_hypothesis(g: Graph, k: int, r: Fraction) -> bool:
    return sum(1 for v in range(g.n) if g.degree(v) >= k) >= r * g.n


def conjecture_scan(k: int, r, n: int, mode) -> ScanReport:
    """Scan hosts meeting the degree hypothesis for non-embeddable trees.

    mode is ("exhaustive",) with n <= 10 or ("random", seed, trials).
    Paths and diameter-at-most-5 trees are tallied separately, since
    those sub-cases are known to hold in general; any counterexample is
    re-verified by the independent second search before being reported.
    """
    r = Fraction(r)
    start = time.monotonic()
    trees = scan_trees(k, r)
    groups = {"paths": [i for i, t in enumerate(trees) if _is_path(t)],
              "diameter_le_5": [i for i, t in enumerate(trees)
                                if _diameter(t) <= 5]}
    report = ScanReport({"k": k, "r": str(r), "n": n, "mode": list(mode),
                         "trees": len(trees)})
    report.subscan = {name: {"trees": len(ix), "counterexamples": 0}
                      for name, ix in groups.items()}

    def hosts():
        if mode[0] == "exhaustive":
            if n > 10:
                raise PreconditionError("exhaustive scan needs n <= 10")
            for mask in sorted(host_signatures(n)):
                yield _mask_graph(n, mask)
        elif mode[0] == "random":
            _, seed, trials = mode
            rng = np.random.default_rng(seed)
            pairs = list(itertools.combinations(range(n), 2))
            for _ in range(trials):
                draw = rng.random(len(pairs)) < 0.5
                yield Graph(n, [p for p, b in zip(pairs, draw) if b])
        else:
            raise PreconditionError(f"unknown scan mode {mode[0]!r}")

    for g in hosts():
        if not _meets_hypothesis(g, k, r):
            report.hypothesis_skipped += 1
            continue
        report.instances_tried += 1
        for i, t in enumerate(trees):
            if brute_force_embed(t, g) is not None:
                continue
            if second_search_embed(t, g) is not None:
                raise AssertionError(
                    "search disagreement: pruned search missed an embedding")
            report.counterexamples.append(
                {"host": g.render(), "tree": t.to_json()})
            for name, ix in groups.items():
                if i in ix:
                    report.subscan[name]["counterexamples"] += 1
    report.runtime_seconds = time.monotonic() - start
    return report


def bistar_check(k: int) -> bool:
    """No bistar with two (k-1)/2-leaf centres inside K_{(k-1)/2, k}.

    The host satisfies the degree-hypothesis arithmetic yet misses the
    bistar, which is what breaks the naive strengthening the source
    section discusses; expected true for odd k >= 7.
    """
    if k % 2 == 0 or k < 7:
        raise PreconditionError("bistar check needs odd k >= 7")
    h = (k - 1) // 2
    host = Graph(h + k, [(i, h + j) for i in range(h) for j in range(k)])
    # bistar: two adjacent centres, h leaves each; order 2h+2 = k+1
    parent = [-1, 0] + [0] * h + [1] * h
    bistar = RootedTree(2 * h + 2, 0, parent)
    return brute_force_embed(bistar, host) is None


def pigeonhole_colour(n: int, colouring: dict, v: int, m: int) -> int:
    """Colour holding at least a 1/m share of v's edges in K_n.

    The standalone pigeonhole step of the Ramsey argument; ties go to
    the smallest colour id.
    """
    counts = [0] * m
    for u in range(n):
        if u != v:
            counts[colouring[(min(u, v), max(u, v))]] += 1
    best = max(range(m), key=lambda c: (counts[c], -c))
    assert counts[best] * m >= n - 1
    return best


@dataclass(frozen=True)
class RamseyVerdict:
    forced: bool
    witness: dict | None
    colourings_checked: int


def ramsey_check(trees, n: int, budget: int = 10**8) -> RamseyVerdict:
    """Does every m-colouring of K_n contain some tree in its colour?

    Exhaustive over all m^C(n,2) edge colourings with a node budget;
    non-forced verdicts carry the witness colouring.
    """
    trees = list(trees)
    m = len(trees)
    if m == 1:
        host = Graph(n, itertools.combinations(range(n), 2))
        found = brute_force_embed(trees[0], host) is not None
        return RamseyVerdict(found, None if found else {}, 1)
    pairs = list(itertools.combinations(range(n), 2))
    total = m ** len(pairs)
    if total > budget:
        raise BudgetExceededError(
            f"{total} colourings exceed the budget {budget}")
    checked = 0
    for assignment in itertools.product(range(m), repeat=len(pairs)):
        checked += 1
        hit = False
        for c, t in enumerate(trees):
            g = Graph(n, [p for p, col in zip(pairs, assignment) if col == c])
            if brute_force_embed(t, g) is not None:
                hit = True
                break
        if not hit:
            witness = {f"{u},{v}": col
                       for (u, v), col in zip(pairs, assignment)}
            return RamseyVerdict(False, witness, checked)
    return RamseyVerdict(True, None, checked)
