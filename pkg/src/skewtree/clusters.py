"""Skewed cluster model: L/S clusters over a host graph.

A host graph together with two families of equal-size clusters.  The
model records exact pair densities, evaluates average degrees into
cluster sets (degbar) with rational arithmetic, validates the six
defining properties, and can be produced two ways: a synthetic
generator that realizes a density plan exactly, and a heuristic
decomposition pipeline that reduces an arbitrary dense graph to the
model (erasing low-degree vertices, refining a vertex partition until
sampled regularity holds, erasing bad edges, and subdividing into
uniform clusters at a rational skew s/t).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from math import floor

import numpy as np

from skewtree.graphs import Graph
from skewtree.regularity import (
    Pair,
    PreconditionError,
    density,
    is_regular,
    rsqrt_up,
    ultratypical_vertices,
)
from skewtree.treeparts import Violation

REFINE_ROUNDS = 20


class PartitionFailureError(RuntimeError):
    """The heuristic decomposition missed its target; carries a ledger."""

    def __init__(self, message: str, ledger: dict | None = None):
        super().__init__(message)
        self.ledger = ledger or {}


class ClusterGraph:
    """Weighted cluster graph: families, sizes, and exact pair densities.

    Densities are symmetric rationals; an edge is a pair of positive
    density.  For a cross-family edge the identity
    r * degbar(L, {S}) = (1-r) * degbar(S, {L}) holds because sizes
    satisfy r|S| = (1-r)|L|.
    """

    def __init__(self, families, sizes, densities, r):
        self.families = tuple(families)
        self.sizes = tuple(int(s) for s in sizes)
        self.r = Fraction(r)
        n_cl = len(self.families)
        if len(self.sizes) != n_cl:
            raise ValueError("families and sizes length mismatch")
        if any(f not in ("L", "S") for f in self.families):
            raise ValueError("family tags must be 'L' or 'S'")
        dens = {}
        for (i, j), val in dict(densities).items():
            if not (0 <= i < n_cl and 0 <= j < n_cl and i != j):
                raise ValueError(f"unknown cluster pair ({i},{j})")
            val = Fraction(val)
            key = (min(i, j), max(i, j))
            if dens.setdefault(key, val) != val:
                raise ValueError(f"asymmetric density at {key}")
            if not 0 <= val <= 1:
                raise ValueError(f"density {val} outside [0,1]")
        self._dens = {k: v for k, v in dens.items() if v > 0}
        self.degbar_into = lru_cache(maxsize=None)(self._degbar_into)

    @property
    def n_clusters(self) -> int:
        return len(self.families)

    @property
    def L(self) -> tuple[int, ...]:
        return tuple(i for i, f in enumerate(self.families) if f == "L")

    @property
    def S(self) -> tuple[int, ...]:
        return tuple(i for i, f in enumerate(self.families) if f == "S")

    def pair_density(self, i: int, j: int) -> Fraction:
        if not (0 <= i < self.n_clusters and 0 <= j < self.n_clusters):
            raise KeyError(f"unknown cluster id in ({i},{j})")
        return self._dens.get((min(i, j), max(i, j)), Fraction(0))

    def edges(self) -> list[tuple[int, int]]:
        return sorted(self._dens)

    def neighbours(self, i: int) -> tuple[int, ...]:
        if not 0 <= i < self.n_clusters:
            raise KeyError(f"unknown cluster id {i}")
        return tuple(j for j in range(self.n_clusters)
                     if j != i and self.pair_density(i, j) > 0)

    def _degbar_into(self, c: int, targets: frozenset[int]) -> Fraction:
        return sum((self.pair_density(c, j) * self.sizes[j]
                    for j in sorted(targets) if j != c), Fraction(0))

    def degbar(self, c: int, targets=None) -> Fraction:
        """Average degree of cluster c into the union of target clusters."""
        if not 0 <= c < self.n_clusters:
            raise KeyError(f"unknown cluster id {c}")
        if targets is None:
            targets = range(self.n_clusters)
        targets = frozenset(int(t) for t in targets)
        for t in targets:
            if not 0 <= t < self.n_clusters:
                raise KeyError(f"unknown cluster id {t}")
        return self.degbar_into(c, targets)


def degbar(cg: ClusterGraph, c: int, targets=None) -> Fraction:
    """Module-level alias for ClusterGraph.degbar."""
    return cg.degbar(c, targets)


@dataclass(frozen=True)
class SkewLksGraph:
    """Host graph with L/S cluster structure and model parameters.

    params holds k (count), eta, epsilon, d, r (rationals).  Vertices
    outside every cluster form the garbage set and are excluded from
    all cluster operations.
    """

    host: Graph
    L_clusters: tuple[tuple[int, ...], ...]
    S_clusters: tuple[tuple[int, ...], ...]
    params: dict
    ledger: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        for key in ("k", "eta", "epsilon", "d", "r"):
            if key not in self.params:
                raise ValueError(f"missing parameter {key!r}")
        seen: set[int] = set()
        for c in self.L_clusters + self.S_clusters:
            if not c:
                raise ValueError("empty cluster")
            if seen & set(c):
                raise ValueError("overlapping clusters")
            seen |= set(c)
        if any(not 0 <= v < self.host.n for v in seen):
            raise ValueError("cluster vertex outside host")

    @property
    def clusters(self) -> tuple[tuple[int, ...], ...]:
        return self.L_clusters + self.S_clusters

    @property
    def m_L(self) -> int:
        return len(self.L_clusters)

    @property
    def m_S(self) -> int:
        return len(self.S_clusters)

    def garbage(self) -> tuple[int, ...]:
        covered = {v for c in self.clusters for v in c}
        return tuple(v for v in range(self.host.n) if v not in covered)

    def cluster_graph(self) -> ClusterGraph:
        """Exact cluster graph computed from host edge counts."""
        cl = self.clusters
        fams = ["L"] * self.m_L + ["S"] * self.m_S
        dens = {}
        for i in range(len(cl)):
            for j in range(i + 1, len(cl)):
                e = self.host.cross_edge_count(cl[i], cl[j])
                if e:
                    dens[(i, j)] = Fraction(e, len(cl[i]) * len(cl[j]))
        return ClusterGraph(fams, [len(c) for c in cl], dens,
                            self.params["r"])

    def to_json(self) -> str:
        return json.dumps({
            "host": self.host.render(),
            "L_clusters": [list(c) for c in self.L_clusters],
            "S_clusters": [list(c) for c in self.S_clusters],
            "params": {k: str(v) for k, v in self.params.items()},
        })

    @classmethod
    def from_json(cls, text: str) -> "SkewLksGraph":
        data = json.loads(text)
        params = {k: (int(v) if k == "k" else Fraction(v))
                  for k, v in data["params"].items()}
        return cls(Graph.parse(data["host"]),
                   tuple(tuple(c) for c in data["L_clusters"]),
                   tuple(tuple(c) for c in data["S_clusters"]),
                   params)


def validate_lks(g: SkewLksGraph, regularity_budget) -> list[Violation]:
    """Check the six defining properties; empty list means valid.

    1. m_L >= (1+eta) m_S.
    2. Uniform cluster sizes within each family.
    3. r|S_j| = (1-r)|L_i| for every cross-family pair.
    4. Every L-L and L-S pair is eps-regular with density 0 or >= d.
    5. No edges inside clusters, none between S-clusters.
    6. Average host degree of each L-cluster >= (1+eta)k.
    """
    out: list[Violation] = []
    p = g.params
    eta, eps, d, r, k = (Fraction(p["eta"]), Fraction(p["epsilon"]),
                         Fraction(p["d"]), Fraction(p["r"]), int(p["k"]))
    if g.m_L < (1 + eta) * g.m_S:
        out.append(Violation(1, (g.m_L, g.m_S)))
    for fam, cls_ in (("L", g.L_clusters), ("S", g.S_clusters)):
        sizes = {len(c) for c in cls_}
        if len(sizes) > 1:
            out.append(Violation(2, (fam, sorted(sizes))))
    if g.L_clusters and g.S_clusters:
        lsz, ssz = len(g.L_clusters[0]), len(g.S_clusters[0])
        if r * ssz != (1 - r) * lsz:
            out.append(Violation(3, (lsz, ssz)))
    for li, lc in enumerate(g.L_clusters):
        for j, other in enumerate(g.clusters):
            if j <= li:
                continue
            pij = Pair(g.host, lc, other)
            dij = density(pij)
            if dij == 0:
                continue
            if dij < d:
                out.append(Violation(4, (li, j, str(dij))))
                continue
            if eps >= 1:
                # every pair is vacuously eps-regular
                continue
            verdict = is_regular(pij, eps, regularity_budget)
            if not verdict.regular:
                out.append(Violation(4, (li, j, verdict.witness)))
    adj = g.host.adjacency
    for i, c in enumerate(g.clusters):
        block = adj[np.ix_(c, c)]
        if block.any():
            u, v = np.argwhere(block)[0]
            out.append(Violation(5, (i, int(c[u]), int(c[v]))))
    for i in range(g.m_L, len(g.clusters)):
        for j in range(i + 1, len(g.clusters)):
            ci, cj = g.clusters[i], g.clusters[j]
            if g.host.cross_edge_count(ci, cj):
                out.append(Violation(5, (i, j)))
    for li, lc in enumerate(g.L_clusters):
        total = sum(g.host.degree(v) for v in lc)
        if Fraction(total, len(lc)) < (1 + eta) * k:
            out.append(Violation(6, (li, str(Fraction(total, len(lc))))))
    return out


def synthesize_lks(m_L: int, m_S: int, cluster_size: int, r,
                   density_plan, seed: int, k: int | None = None,
                   eta=None, epsilon=None, d=None) -> SkewLksGraph:
    """Realize a density plan exactly by seeded random bipartite blocks.

    density_plan is an (m_L+m_S)^2 symmetric matrix of rationals with
    zero diagonal and zero S-S block.  Each planned density must give
    an integer edge count for its block; the edges are then sampled
    uniformly, so the realized pair densities match the plan exactly
    and degbar values match it in expectation cluster by cluster.
    """
    r = Fraction(r)
    if not 0 < r <= Fraction(1, 2):
        raise PreconditionError(f"skew {r} outside (0, 1/2]")
    n_cl = m_L + m_S
    plan = [[Fraction(x) for x in row] for row in density_plan]
    if len(plan) != n_cl or any(len(row) != n_cl for row in plan):
        raise PreconditionError("density plan has wrong shape")
    s_size_frac = (1 - r) / r * cluster_size
    if s_size_frac.denominator != 1:
        raise PreconditionError(
            f"S-cluster size (1-r)/r * {cluster_size} = {s_size_frac} "
            "is not an integer")
    s_size = int(s_size_frac)
    sizes = [cluster_size] * m_L + [s_size] * m_S
    positive = []
    for i in range(n_cl):
        if plan[i][i] != 0:
            raise PreconditionError(f"nonzero diagonal at {i}")
        for j in range(i + 1, n_cl):
            pij = plan[i][j]
            if pij != plan[j][i]:
                raise PreconditionError(f"plan asymmetric at ({i},{j})")
            if not 0 <= pij <= 1:
                raise PreconditionError(f"density {pij} outside [0,1]")
            if i >= m_L and j >= m_L and pij != 0:
                raise PreconditionError(f"S-S density at ({i},{j})")
            if pij > 0:
                positive.append(pij)
    if eta is None:
        eta = Fraction(1, 10)
    eta = Fraction(eta)
    if m_S and m_L < (1 + eta) * m_S:
        raise PreconditionError(
            f"m_L={m_L} < (1+{eta})*{m_S}: family balance infeasible")
    if d is None:
        d = min(positive) if positive else Fraction(1, 2)
    d = Fraction(d)
    if any(x < d for x in positive):
        raise PreconditionError("plan density below d and above 0")
    if epsilon is None:
        # extreme-selection regularity is noisy on small clusters;
        # 1/3 passes reliably from size 40 upward at density 1/2
        epsilon = Fraction(1, 3)
    if k is None:
        min_deg = min((sum(plan[i][j] * sizes[j] for j in range(n_cl))
                       for i in range(m_L)), default=Fraction(0))
        k = max(1, floor(min_deg / (1 + eta)))
    offsets = np.cumsum([0] + sizes)
    members = [tuple(range(offsets[i], offsets[i + 1]))
               for i in range(n_cl)]
    rng = np.random.default_rng(seed)
    edges: list[tuple[int, int]] = []
    for i in range(n_cl):
        for j in range(i + 1, n_cl):
            pij = plan[i][j]
            if pij == 0:
                continue
            total = sizes[i] * sizes[j]
            count = pij * total
            if count.denominator != 1:
                raise PreconditionError(
                    f"plan density {pij} at ({i},{j}) needs a fractional "
                    f"edge count {count}")
            picks = rng.choice(total, size=int(count), replace=False)
            for idx in sorted(int(x) for x in picks):
                a, b = divmod(idx, sizes[j])
                edges.append((members[i][a], members[j][b]))
    host = Graph(int(offsets[-1]), edges)
    params = {"k": int(k), "eta": eta, "epsilon": Fraction(epsilon),
              "d": d, "r": r}
    return SkewLksGraph(host, tuple(members[:m_L]),
                        tuple(members[m_L:]), params)


def cluster_size_bounds(cg: ClusterGraph, n: int) -> list[dict]:
    """Per-cluster upper bounds |L| <= n/N and |S| <= n/(rN) with margins."""
    n_cl = cg.n_clusters
    report = []
    for i in range(n_cl):
        if cg.families[i] == "L":
            bound = Fraction(n, n_cl)
        else:
            bound = Fraction(n, 1) / (cg.r * n_cl)
        report.append({"cluster": i, "family": cg.families[i],
                       "size": cg.sizes[i], "bound": bound,
                       "margin": bound - cg.sizes[i],
                       "ok": cg.sizes[i] <= bound})
    return report


def ultratypical_degree_check(g: SkewLksGraph, v: int, targets,
                              epsilon) -> bool:
    """deg(v, union of targets) >= degbar(C, targets) - 2 sqrt(eps) n / r.

    C is the cluster containing v; v must be ultratypical within the
    cluster partition at the given epsilon.
    """
    epsilon = Fraction(epsilon)
    clusters = g.clusters
    home = next((i for i, c in enumerate(clusters) if v in c), None)
    if home is None:
        raise PreconditionError(f"vertex {v} is not in any cluster")
    if v not in ultratypical_vertices(g.host, clusters, home, epsilon):
        raise PreconditionError(f"vertex {v} is not ultratypical")
    targets = sorted(set(int(t) for t in targets))
    cg = g.cluster_graph()
    target_vs = [u for t in targets for u in clusters[t]]
    deg = sum(1 for u in target_vs if g.host.has_edge(v, u))
    n_model = sum(len(c) for c in clusters)
    slack = 2 * rsqrt_up(epsilon) * Fraction(n_model) / Fraction(g.params["r"])
    return deg >= cg.degbar(home, targets) - slack


def _rational_skew(r: Fraction, eta: Fraction, q: Fraction):
    """Minimal-denominator s/t with r <= s/t <= r(1 + eta*rho*q/12)."""
    if r == Fraction(1, 2):
        return Fraction(1, 2), 1, 2
    rho = Fraction(1, 2) - r
    hi = r * (1 + eta * rho * q / 12)
    t_cap = floor(12 / (eta * rho * q * r))
    for t in range(2, t_cap + 1):
        s = -(-r.numerator * t // r.denominator)
        if r <= Fraction(s, t) <= hi:
            return Fraction(s, t), s, t
    raise PartitionFailureError(
        f"no rational skew s/t with t <= {t_cap} inside "
        f"[{r}, {hi}]")


def _refine_partition(host: Graph, verts: list[int], p_size: int,
                      epsilon: Fraction, seed: int):
    """Witness-driven refinement toward pairwise sampled regularity.

    Starts from degree-sorted chunks and splits parts along irregular
    witnesses for up to REFINE_ROUNDS rounds.  Returns the parts,
    leftover vertices, and the list of pairs still irregular.
    """
    # group by connected component first so initial chunks do not
    # straddle obviously unrelated regions; ties then go by degree
    comp = {}
    for v in sorted(verts):
        if v in comp:
            continue
        comp[v] = v
        stack = [v]
        while stack:
            u = stack.pop()
            for w in host.neighbours(u):
                if w not in comp:
                    comp[w] = v
                    stack.append(w)
    order = sorted(verts, key=lambda v: (comp[v], -host.degree(v), v))
    parts = [order[i:i + p_size] for i in range(0, len(order), p_size)]
    rest: list[int] = []
    if parts and len(parts[-1]) < 2:
        rest = parts.pop()
    budget = ("sampled", seed, 40)
    floor_size = 2
    cache: dict[tuple, object] = {}

    def verdict_of(a: list[int], b: list[int]):
        key = (tuple(a), tuple(b))
        if key not in cache:
            cache[key] = is_regular(Pair(host, key[0], key[1]),
                                    epsilon, budget)
        return cache[key]

    def irregular_pairs(ps):
        bad = []
        for i in range(len(ps)):
            for j in range(i + 1, len(ps)):
                verdict = verdict_of(ps[i], ps[j])
                if not verdict.regular:
                    bad.append((i, j, verdict.witness))
        return bad

    def merge_twins(ps):
        # fuse parts with matching density profiles and no mutual edges
        # to spare; keeps pairwise regularity on homogeneous inputs
        changed = True
        while changed:
            changed = False
            for i in range(len(ps)):
                for j in range(i + 1, len(ps)):
                    dij = density(Pair(host, tuple(ps[i]), tuple(ps[j])))
                    if not (dij <= epsilon / 4 or dij >= 1 - epsilon / 4):
                        continue
                    twin = all(
                        abs(density(Pair(host, tuple(ps[i]), tuple(c)))
                            - density(Pair(host, tuple(ps[j]), tuple(c))))
                        <= epsilon / 4
                        for t_, c in enumerate(ps) if t_ not in (i, j))
                    if twin and dij <= epsilon / 4:
                        ps[i] = sorted(ps[i] + ps[j])
                        del ps[j]
                        changed = True
                        break
                if changed:
                    break
        return ps

    def finish(ps):
        # merged parts may have very different sizes (an S-side set is
        # naturally (1-r)/r times an L-side set); re-chunk everything to
        # one uniform size u, discarding only dwarf parts
        ps = merge_twins(ps)
        big = max(len(p) for p in ps)
        u = min(len(p) for p in ps if 4 * len(p) >= big)
        out = []
        for p in ps:
            if len(p) < u:
                rest.extend(p)
                continue
            for c in range(len(p) // u):
                out.append(p[c * u:(c + 1) * u])
            rest.extend(p[(len(p) // u) * u:])
        return out, rest, irregular_pairs(out)

    for round_no in range(REFINE_ROUNDS):
        if round_no and round_no % 5 == 0:
            parts = merge_twins(parts)
        bad = irregular_pairs(parts)
        if not bad:
            return finish(parts)
        splits: dict[int, set[int]] = {}
        for i, j, witness in bad:
            wx, wy, _gap = witness
            # split a side only if the witness separates two genuinely
            # different density regimes inside that part; cut along the
            # degree midline into the opposite part for a clean split
            for a, b, wit in ((i, j, wx), (j, i, wy)):
                if a in splits:
                    continue
                inner = sorted(set(parts[a]) & set(wit))
                outer = sorted(set(parts[a]) - set(wit))
                if not inner or not outer:
                    continue
                d_in = density(Pair(host, tuple(inner), tuple(parts[b])))
                d_out = density(Pair(host, tuple(outer), tuple(parts[b])))
                if abs(d_in - d_out) <= epsilon / 2:
                    continue
                mid = (d_in + d_out) / 2 * len(parts[b])
                high = {v for v in parts[a]
                        if sum(1 for u in parts[b]
                               if host.has_edge(v, u)) >= mid}
                if high and len(high) < len(parts[a]):
                    splits[a] = high
        if not splits:
            return finish(parts)
        new_parts: list[list[int]] = []
        for idx, part in enumerate(parts):
            if idx in splits:
                pieces = [sorted(set(part) & splits[idx]),
                          sorted(set(part) - splits[idx])]
            else:
                pieces = [list(part)]
            for piece in pieces:
                if len(piece) < floor_size:
                    rest.extend(piece)
                elif piece:
                    new_parts.append(piece)
        parts = new_parts
    return finish(parts)


def build_skew_lks(G: Graph, k: int, eta, r_target, epsilon,
                   d) -> SkewLksGraph:
    """Heuristic decomposition of a dense graph into the cluster model.

    Pipeline: erase a small low-degree fringe, refine a vertex
    partition until sampled regularity holds, erase edges inside
    parts, in irregular pairs, and in low-density pairs, classify
    parts as L or S by average degree, subdivide into uniform
    clusters at the rational skew s/t, drop leftovers to the garbage
    set, and erase S-S edges.  Every erasure is tracked in the
    returned model's ledger.
    """
    eta, r_target = Fraction(eta), Fraction(r_target)
    epsilon, d = Fraction(epsilon), Fraction(d)
    n = G.n
    q = Fraction(k, n)
    high = [v for v in range(n) if G.degree(v) >= (1 + eta) * k]
    if len(high) < r_target * n:
        raise PreconditionError(
            f"only {len(high)} vertices of degree >= (1+eta)k; "
            f"need {r_target * n}")
    r_prime, s, t = _rational_skew(r_target, eta, q)

    low = sorted((v for v in range(n) if G.degree(v) < (1 + eta) * k),
                 key=lambda v: (G.degree(v), v))
    n_erase = floor(eta * q * n / 2)
    erased = set(low[:n_erase])
    keep = [v for v in range(n) if v not in erased]
    n_prime = len(keep)

    n_parts = max(4, min(16, n_prime // max(1, 4 * s * (t - s))))
    p_size = n_prime // n_parts
    parts, rest, still_bad = _refine_partition(G, keep, p_size, epsilon,
                                               seed=0)
    ledger = {"erased_low_degree": len(erased),
              "irregular_pairs_left": len(still_bad)}

    bad_keys = {(i, j) for i, j, _ in still_bad}
    erased_irregular = sum(G.cross_edge_count(parts[i], parts[j])
                           for i, j in bad_keys)
    ledger["edges_erased_irregular"] = erased_irregular
    if erased_irregular > epsilon * n_prime * n_prime:
        raise PartitionFailureError(
            "irregular-pair erasures exceed the eps n'^2 budget", ledger)

    def pair_alive(i: int, j: int) -> bool:
        if (min(i, j), max(i, j)) in bad_keys:
            return False
        pij = Pair(G, tuple(parts[i]), tuple(parts[j]))
        return density(pij) >= d

    alive = {}
    for i in range(len(parts)):
        for j in range(i + 1, len(parts)):
            alive[(i, j)] = pair_alive(i, j)

    def part_avg_degree(i: int) -> Fraction:
        total = 0
        for j in range(len(parts)):
            if j == i:
                continue
            key = (min(i, j), max(i, j))
            if alive.get(key):
                total += G.cross_edge_count(parts[i], parts[j])
        return Fraction(total, len(parts[i]))

    l_sets = [i for i in range(len(parts))
              if part_avg_degree(i) >= (1 + eta * q / 4) * k]
    s_sets = [i for i in range(len(parts)) if i not in l_sets]

    p_min = min((len(parts[i]) for i in range(len(parts))), default=0)
    w = p_min // (s * (t - s))
    if w < 1:
        raise PartitionFailureError(
            f"parts too small to subdivide at skew {s}/{t}", ledger)
    c_L, c_S = s * w, (t - s) * w

    L_clusters: list[tuple[int, ...]] = []
    S_clusters: list[tuple[int, ...]] = []
    garbage = set(erased) | set(rest)
    set_of_cluster: dict[int, int] = {}
    for i in l_sets:
        vs = sorted(parts[i])
        for c in range(t - s):
            chunk = tuple(vs[c * c_L:(c + 1) * c_L])
            set_of_cluster[len(L_clusters) + len(S_clusters)] = i
            L_clusters.append(chunk)
        garbage |= set(vs[(t - s) * c_L:])
    for i in s_sets:
        vs = sorted(parts[i])
        for c in range(s):
            chunk = tuple(vs[c * c_S:(c + 1) * c_S])
            set_of_cluster[len(L_clusters) + len(S_clusters)] = i
            S_clusters.append(chunk)
        garbage |= set(vs[s * c_S:])
    ledger["garbage"] = len(garbage)

    m_L, m_S = len(L_clusters), len(S_clusters)
    if m_S and Fraction(m_L) < (1 + eta * q / 100) * (m_L + m_S) / 2:
        raise PartitionFailureError(
            f"m_L={m_L} misses (1+eta q/100)(m_L+m_S)/2 with m_S={m_S}",
            ledger)

    covered = sorted(v for c in L_clusters + S_clusters for v in c)
    relabel = {v: i for i, v in enumerate(covered)}
    all_clusters = L_clusters + S_clusters
    cl_idx = {}
    for i, c in enumerate(all_clusters):
        for v in c:
            cl_idx[v] = i
    edges = []
    for u, v in G.edges():
        if u not in cl_idx or v not in cl_idx:
            continue
        iu, iv = cl_idx[u], cl_idx[v]
        if iu == iv or set_of_cluster[iu] == set_of_cluster[iv]:
            continue
        if iu >= m_L and iv >= m_L:
            continue
        si, sj = set_of_cluster[iu], set_of_cluster[iv]
        key = (min(si, sj), max(si, sj))
        if not alive.get(key):
            continue
        edges.append((relabel[u], relabel[v]))
    host = Graph(len(covered), edges)
    new_L = tuple(tuple(relabel[v] for v in c) for c in L_clusters)
    new_S = tuple(tuple(relabel[v] for v in c) for c in S_clusters)
    params = {"k": int(k), "eta": eta * q / 100,
              "epsilon": t * epsilon, "d": d / 2, "r": r_prime}
    return SkewLksGraph(host, new_L, new_S, params, ledger=ledger)
