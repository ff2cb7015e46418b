"""Exact graph and tree primitives shared by every other module.

Vertices are dense 0-based integers.  All ratios are `fractions.Fraction`;
floats never enter any decision.  Graphs and trees are immutable after
construction, so they are safe to share between threads and across
repeated deterministic runs.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Optional, Sequence

import numpy as np

__all__ = [
    "Graph",
    "RootedTree",
    "Skew",
    "EmbeddingCertificate",
    "validate_embedding",
    "skew_of",
    "generate_tree",
    "UnreachableSkewError",
]


class UnreachableSkewError(ValueError):
    """No tree of the requested shape satisfies the skew cap."""


class Graph:
    """Undirected simple graph with exact adjacency.

    Backed by a symmetric boolean matrix plus per-vertex neighbour sets.
    No self-loops.
    """

    __slots__ = ("n", "_adj", "_nbrs", "labels", "_m")

    def __init__(self, n: int, edges: Iterable[tuple[int, int]],
                 labels: Optional[Sequence] = None):
        if n < 0:
            raise ValueError("vertex count must be non-negative")
        adj = np.zeros((n, n), dtype=bool)
        for u, v in edges:
            if u == v:
                raise ValueError(f"self-loop at {u}")
            if not (0 <= u < n and 0 <= v < n):
                raise ValueError(f"edge ({u},{v}) out of range")
            adj[u, v] = True
            adj[v, u] = True
        self.n = n
        self._adj = adj
        self._adj.setflags(write=False)
        self._nbrs = tuple(frozenset(np.flatnonzero(adj[v]).tolist())
                           for v in range(n))
        self.labels = tuple(labels) if labels is not None else None
        self._m = int(adj.sum()) // 2

    @property
    def m(self) -> int:
        return self._m

    @property
    def adjacency(self) -> np.ndarray:
        return self._adj

    def has_edge(self, u: int, v: int) -> bool:
        return bool(self._adj[u, v])

    def neighbours(self, v: int) -> frozenset[int]:
        return self._nbrs[v]

    def degree(self, v: int) -> int:
        return len(self._nbrs[v])

    def edges(self) -> list[tuple[int, int]]:
        us, vs = np.nonzero(np.triu(self._adj))
        return list(zip(us.tolist(), vs.tolist()))

    def cross_edge_count(self, xs: Sequence[int], ys: Sequence[int]) -> int:
        """Number of edges with one end in xs and the other in ys.

        xs and ys must be disjoint.
        """
        sub = self._adj[np.asarray(list(xs), dtype=int)[:, None],
                        np.asarray(list(ys), dtype=int)[None, :]]
        return int(sub.sum())

    def __eq__(self, other) -> bool:
        if not isinstance(other, Graph):
            return NotImplemented
        return (self.n == other.n
                and bool(np.array_equal(self._adj, other._adj))
                and self.labels == other.labels)

    def __hash__(self):
        return hash((self.n, self._m, self._nbrs))

    def __repr__(self) -> str:
        return f"Graph(n={self.n}, m={self._m})"

    # -- serialization: edge list, header "n m", one "u v" per line --

    def render(self) -> str:
        lines = [f"{self.n} {self._m}"]
        lines.extend(f"{u} {v}" for u, v in self.edges())
        return "\n".join(lines) + "\n"

    @classmethod
    def parse(cls, text: str) -> "Graph":
        rows = [ln for ln in (s.strip() for s in text.splitlines()) if ln]
        if not rows:
            raise ValueError("empty graph file")
        try:
            n, m = (int(t) for t in rows[0].split())
        except Exception as exc:
            raise ValueError(f"bad header line {rows[0]!r}") from exc
        edges = []
        for ln in rows[1:]:
            parts = ln.split()
            if len(parts) != 2:
                raise ValueError(f"bad edge line {ln!r}")
            edges.append((int(parts[0]), int(parts[1])))
        if len(edges) != m:
            raise ValueError(f"header promises {m} edges, found {len(edges)}")
        return cls(n, edges)


class RootedTree:
    """Tree with a root, a parent array, and its proper 2-colouring.

    colour[v] in {1, 2}; the root has colour 1 and parent -1.
    k = n - 1 is the edge count.
    """

    __slots__ = ("n", "root", "parent", "colour", "_children", "_nbrs")

    def __init__(self, n: int, root: int, parent: Sequence[int],
                 colour: Optional[Sequence[int]] = None):
        if n < 1:
            raise ValueError("tree must be nonempty")
        if not (0 <= root < n):
            raise ValueError("root out of range")
        parent = tuple(parent)
        if len(parent) != n or parent[root] != -1:
            raise ValueError("parent array malformed")
        children: list[list[int]] = [[] for _ in range(n)]
        for v in range(n):
            if v == root:
                continue
            p = parent[v]
            if not (0 <= p < n):
                raise ValueError(f"parent of {v} out of range")
            children[p].append(v)
        # connectivity: every vertex must reach the root
        depth = [-1] * n
        depth[root] = 0
        order = [root]
        for v in order:
            for c in children[v]:
                depth[c] = depth[v] + 1
                order.append(c)
        if len(order) != n:
            raise ValueError("parent array is not a connected tree")
        derived = tuple(1 + depth[v] % 2 for v in range(n))
        if colour is not None:
            colour = tuple(colour)
            if colour != derived and colour != tuple(3 - c for c in derived):
                raise ValueError("colouring is not the proper 2-colouring")
        else:
            colour = derived
        self.n = n
        self.root = root
        self.parent = parent
        self.colour = colour
        self._children = tuple(tuple(c) for c in children)
        nbrs = [set(c) for c in children]
        for v in range(n):
            if v != root:
                nbrs[v].add(parent[v])
        self._nbrs = tuple(frozenset(s) for s in nbrs)

    @property
    def k(self) -> int:
        return self.n - 1

    def children(self, v: int) -> tuple[int, ...]:
        return self._children[v]

    def neighbours(self, v: int) -> frozenset[int]:
        return self._nbrs[v]

    def degree(self, v: int) -> int:
        return len(self._nbrs[v])

    def edges(self) -> list[tuple[int, int]]:
        return [(self.parent[v], v) for v in range(self.n) if v != self.root]

    def bfs_order(self, start: Optional[int] = None) -> list[int]:
        start = self.root if start is None else start
        seen = {start}
        order = [start]
        for v in order:
            for u in sorted(self._nbrs[v]):
                if u not in seen:
                    seen.add(u)
                    order.append(u)
        return order

    def class_vertices(self, c: int) -> list[int]:
        return [v for v in range(self.n) if self.colour[v] == c]

    def distance(self, u: int, v: int) -> int:
        """Tree distance via root paths."""
        pu, pv = self._root_path(u), self._root_path(v)
        su = set(pu)
        for i, w in enumerate(pv):
            if w in su:
                return pu.index(w) + i
        raise AssertionError("disconnected tree")

    def path(self, u: int, v: int) -> list[int]:
        pu, pv = self._root_path(u), self._root_path(v)
        su = set(pu)
        for i, w in enumerate(pv):
            if w in su:
                return pu[:pu.index(w) + 1] + pv[:i][::-1]
        raise AssertionError("disconnected tree")

    def _root_path(self, v: int) -> list[int]:
        out = [v]
        while out[-1] != self.root:
            out.append(self.parent[out[-1]])
        return out

    def as_graph(self) -> Graph:
        return Graph(self.n, self.edges())

    def __eq__(self, other) -> bool:
        if not isinstance(other, RootedTree):
            return NotImplemented
        return (self.n, self.root, self.parent, self.colour) == \
               (other.n, other.root, other.parent, other.colour)

    def __hash__(self):
        return hash((self.n, self.root, self.parent, self.colour))

    def __repr__(self) -> str:
        return f"RootedTree(n={self.n}, root={self.root})"

    def to_json(self) -> str:
        return json.dumps({"n": self.n, "root": self.root,
                           "parent": list(self.parent),
                           "colour": list(self.colour)})

    @classmethod
    def from_json(cls, text: str) -> "RootedTree":
        d = json.loads(text)
        return cls(d["n"], d["root"], d["parent"], d.get("colour"))


@dataclass(frozen=True)
class Skew:
    """Exact skew ratio in (0, 1/2]."""

    ratio: Fraction

    def __post_init__(self):
        if not (0 < self.ratio <= Fraction(1, 2)):
            raise ValueError(f"skew {self.ratio} outside (0, 1/2]")


@dataclass(frozen=True)
class EmbeddingCertificate:
    """Injective homomorphism pattern -> host with per-vertex provenance."""

    map: tuple[int, ...]
    provenance: tuple[str, ...] = field(default=())

    def __post_init__(self):
        if self.provenance and len(self.provenance) != len(self.map):
            raise ValueError("provenance length mismatch")

    def image(self) -> set[int]:
        return set(self.map)

    def to_json(self) -> str:
        return json.dumps({"map": list(self.map),
                           "provenance": list(self.provenance)})

    @classmethod
    def from_json(cls, text: str) -> "EmbeddingCertificate":
        d = json.loads(text)
        return cls(tuple(d["map"]), tuple(d.get("provenance", ())))


def validate_embedding(cert: EmbeddingCertificate, pattern: RootedTree,
                       host: Graph) -> bool:
    """True iff cert.map is injective and edge-preserving on all of pattern."""
    m = cert.map
    if len(m) != pattern.n:
        return False
    if any(not (0 <= x < host.n) for x in m):
        return False
    if len(set(m)) != pattern.n:
        return False
    return all(host.has_edge(m[u], m[v]) for u, v in pattern.edges())


def skew_of(tree: RootedTree) -> Fraction:
    """Smaller colour class size over total vertex count, exact."""
    c1 = sum(1 for c in tree.colour if c == 1)
    return Fraction(min(c1, tree.n - c1), tree.n)


def _path_parents(n: int) -> list[int]:
    return [-1] + list(range(n - 1))


def _min_skew(shape: str, n: int) -> Fraction:
    if shape == "path":
        return Fraction(n // 2, n)
    if shape == "star":
        return Fraction(1, n)
    # caterpillar and random can both degenerate to a star
    return Fraction(1, n)


def generate_tree(n: int, shape: str, skew_cap: Fraction,
                  seed: int = 0) -> RootedTree:
    """Deterministic tree generator used by the test corpus.

    shape is one of "path", "star", "caterpillar", "random"; the random
    shape is reproducible given seed.  The result's smaller colour class
    has size <= skew_cap * n.
    """
    skew_cap = Fraction(skew_cap)
    if n < 2:
        raise ValueError("n >= 2 required")
    if _min_skew(shape, n) > skew_cap:
        raise UnreachableSkewError(
            f"no {shape} tree on {n} vertices has skew <= {skew_cap}")

    if shape == "path":
        return RootedTree(n, 0, _path_parents(n))
    if shape == "star":
        return RootedTree(n, 0, [-1] + [0] * (n - 1))
    if shape == "caterpillar":
        return _caterpillar(n, skew_cap, seed)
    if shape == "random":
        return _random_tree(n, skew_cap, seed)
    raise ValueError(f"unknown shape {shape!r}")


def _caterpillar(n: int, skew_cap: Fraction, seed: int) -> RootedTree:
    """Spine plus leaves; spine length chosen to respect the cap.

    Spine vertices alternate classes; every leaf joins the class opposite
    to its spine vertex.  The smaller class is minimised by hanging all
    leaves on one class's spine vertices, so a valid spine length always
    exists when the cap is achievable.
    """
    rng = random.Random(seed)
    for spine in range(min(n, 2 * int(skew_cap * n) + 1), 0, -1):
        parent = _path_parents(spine) + [0] * (n - spine)
        even_spine = list(range(0, spine, 2))
        # leaves hang off even-position spine vertices (class 1), so the
        # leaves themselves all land in class 2
        for i in range(n - spine):
            parent[spine + i] = even_spine[rng.randrange(len(even_spine))]
        t = RootedTree(n, 0, parent)
        if skew_of(t) <= skew_cap:
            return t
    raise UnreachableSkewError(
        f"no caterpillar on {n} vertices reaches skew <= {skew_cap}")


def _random_tree(n: int, skew_cap: Fraction, seed: int) -> RootedTree:
    """Random attachment with class-aware bias to respect the cap.

    Each new vertex picks a parent uniformly from the allowed class; the
    allowed class shrinks to "class 1 only" (children then land in class
    2) whenever class 1 is about to outgrow the cap.
    """
    rng = random.Random(seed)
    cap_count = int(skew_cap * n)  # floor: class-1 size must stay <= this
    parent = [-1] * n
    colour = [0] * n
    colour[0] = 1
    ones = [0]
    twos: list[int] = []
    n1 = 1
    for v in range(1, n):
        # a parent in class 2 spawns a class-1 child; forbid that exactly
        # when class 1 has hit the cap
        pool = ones if (n1 >= cap_count or not twos) else ones + twos
        p = pool[rng.randrange(len(pool))]
        parent[v] = p
        colour[v] = 3 - colour[p]
        if colour[v] == 1:
            ones.append(v)
            n1 += 1
        else:
            twos.append(v)
    t = RootedTree(n, 0, parent)
    if skew_of(t) > skew_cap:
        raise UnreachableSkewError(
            f"random tree generation failed cap {skew_cap} (seed {seed})")
    return t
