"""Density, epsilon-regularity, typical vertices, and pair embedding.

Everything is exact rational arithmetic.  Regularity testing is exhaustive
for small sides (complete by the extreme-selection argument: for a fixed
X', the extreme densities over Y' of each size are attained by taking the
highest/lowest-degree vertices) and witness-sampling above that.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from math import isqrt
from typing import Optional, Sequence

import numpy as np

from skewtree.graphs import EmbeddingCertificate, Graph, RootedTree

__all__ = [
    "Pair",
    "RegularityVerdict",
    "density",
    "is_regular",
    "check_slicing",
    "typical_vertices",
    "ultratypical_vertices",
    "embed_in_pair",
    "rsqrt_up",
    "BudgetExceededError",
    "PreconditionError",
    "EmbeddingFailure",
    "EXHAUSTIVE_SIDE_CAP",
]

EXHAUSTIVE_SIDE_CAP = 16

_GRID = 1 << 16


class BudgetExceededError(RuntimeError):
    """Exhaustive check requested beyond the supported side size."""


class PreconditionError(ValueError):
    """An operation's stated precondition fails; carries an exact ledger."""

    def __init__(self, message: str, ledger: Optional[list] = None):
        super().__init__(message)
        self.ledger = ledger or []


class EmbeddingFailure(RuntimeError):
    """Greedy embedding got stuck; details identify the failing step."""

    def __init__(self, message: str, **details):
        super().__init__(message)
        self.details = details


def rsqrt_up(x: Fraction) -> Fraction:
    """Minimal q on the denominator-2^16 grid with q*q >= x, exact."""
    x = Fraction(x)
    if x < 0:
        raise ValueError("negative argument")
    # minimal integer a with (a/2^16)^2 >= x  <=>  a^2 >= x * 2^32
    num = x.numerator * _GRID * _GRID
    a = isqrt((num + x.denominator - 1) // x.denominator)
    while Fraction(a, _GRID) ** 2 < x:
        a += 1
    while a > 0 and Fraction(a - 1, _GRID) ** 2 >= x:
        a -= 1
    return Fraction(a, _GRID)


@dataclass(frozen=True)
class Pair:
    """Two disjoint nonempty vertex sets in a host graph."""

    host: Graph
    X: tuple[int, ...]
    Y: tuple[int, ...]

    def __post_init__(self):
        if not self.X or not self.Y:
            raise ValueError("both sides must be nonempty")
        if set(self.X) & set(self.Y):
            raise ValueError("sides must be disjoint")


@dataclass(frozen=True)
class RegularityVerdict:
    epsilon: Fraction
    regular: bool
    witness: Optional[tuple[tuple[int, ...], tuple[int, ...], Fraction]]
    method: tuple

    def __post_init__(self):
        if not self.regular and self.witness is None:
            raise ValueError("irregular verdict requires a witness")


def density(p: Pair) -> Fraction:
    return Fraction(p.host.cross_edge_count(p.X, p.Y),
                    len(p.X) * len(p.Y))


def _ceil_frac(f: Fraction) -> int:
    return -((-f.numerator) // f.denominator)


def _deg_into(host: Graph, vs: Sequence[int], target: Sequence[int]) -> np.ndarray:
    """Degree of each v in vs into target, as an int vector."""
    sub = host.adjacency[np.asarray(list(vs), dtype=int)[:, None],
                         np.asarray(list(target), dtype=int)[None, :]]
    return sub.sum(axis=1)


def _extreme_gap(degs: np.ndarray, nfixed: int, m_min: int, d: Fraction,
                 eps: Fraction):
    """Largest |density - d| over extreme selections of every size >= m_min.

    degs: degrees of candidate vertices into the fixed subset of size nfixed.
    Returns (selection index list, gap) for the first size whose extreme
    selection beats eps, or None.
    """
    order_desc = np.lexsort((np.arange(len(degs)), -degs))
    sorted_desc = degs[order_desc]
    csum = np.cumsum(sorted_desc)
    total = int(csum[-1])
    for m in range(max(m_min, 1), len(degs) + 1):
        top = Fraction(int(csum[m - 1]), nfixed * m)
        if top - d > eps:
            return order_desc[:m].tolist(), top - d
        bottom_sum = total - (int(csum[len(degs) - m - 1])
                              if m < len(degs) else 0)
        bottom = Fraction(bottom_sum, nfixed * m)
        if d - bottom > eps:
            return order_desc[len(degs) - m:].tolist(), d - bottom
    return None


def _witness_for_subset(p: Pair, xsub: Sequence[int], d: Fraction,
                        eps: Fraction, m_min_y: int):
    degs = _deg_into(p.host, p.Y, xsub)
    hit = _extreme_gap(degs, len(xsub), m_min_y, d, eps)
    if hit is None:
        return None
    idxs, gap = hit
    ysub = tuple(sorted(p.Y[i] for i in idxs))
    return (tuple(sorted(xsub)), ysub, gap)


def is_regular(p: Pair, epsilon: Fraction, budget) -> RegularityVerdict:
    """Two-sided epsilon-regularity verdict with an exact witness.

    budget is "exhaustive" (exact, min side <= 16) or a tuple
    ("sampled", seed, trials).  Sampled verdicts are one-sided: an
    irregular verdict always carries a valid witness; a regular verdict
    only means no witness was found.
    """
    epsilon = Fraction(epsilon)
    if not (0 < epsilon < 1):
        raise PreconditionError(f"epsilon {epsilon} outside (0,1)")
    d = density(p)
    swap = len(p.Y) < len(p.X)
    small, large = (p.Y, p.X) if swap else (p.X, p.Y)
    m_min_small = _ceil_frac(epsilon * len(small))
    m_min_large = _ceil_frac(epsilon * len(large))
    q = Pair(p.host, small, large)

    def orient(w):
        if w is None:
            return None
        xs, ys, gap = w
        return (ys, xs, gap) if swap else (xs, ys, gap)

    if budget == "exhaustive":
        if len(small) > EXHAUSTIVE_SIDE_CAP:
            raise BudgetExceededError(
                f"min side {len(small)} > {EXHAUSTIVE_SIDE_CAP}")
        s = len(small)
        for mask in range(1, 1 << s):
            if mask.bit_count() < m_min_small:
                continue
            xsub = [small[i] for i in range(s) if mask >> i & 1]
            w = _witness_for_subset(q, xsub, d, epsilon, m_min_large)
            if w is not None:
                return RegularityVerdict(epsilon, False, orient(w),
                                         ("exhaustive",))
        return RegularityVerdict(epsilon, True, None, ("exhaustive",))

    kind, seed, trials = budget
    if kind != "sampled":
        raise ValueError(f"unknown budget {budget!r}")
    rng = random.Random(seed)
    sizes = [m_min_small, len(small)]
    for t in range(trials):
        if t < 2:
            sz = sizes[t]
        else:
            sz = rng.randint(m_min_small, len(small))
        xsub = rng.sample(small, sz) if sz < len(small) else list(small)
        w = _witness_for_subset(q, xsub, d, epsilon, m_min_large)
        if w is not None:
            return RegularityVerdict(epsilon, False, orient(w),
                                     ("sampled", seed, trials))
    return RegularityVerdict(epsilon, True, None, ("sampled", seed, trials))


def check_slicing(p: Pair, Xp: Sequence[int], Yp: Sequence[int],
                  alpha: Fraction, epsilon: Fraction,
                  budget=None) -> bool:
    """Property check: a large slice of a regular pair stays regular.

    The slice must pass regularity at max(eps/alpha, 2*eps) and keep
    density >= d - eps.
    """
    alpha, epsilon = Fraction(alpha), Fraction(epsilon)
    if len(Xp) * 1 < alpha * len(p.X) or len(Yp) < alpha * len(p.Y):
        raise PreconditionError("slice smaller than alpha fraction")
    if not set(Xp) <= set(p.X) or not set(Yp) <= set(p.Y):
        raise PreconditionError("slice not contained in the pair")
    sub = Pair(p.host, tuple(Xp), tuple(Yp))
    eps_prime = max(epsilon / alpha, 2 * epsilon)
    if eps_prime >= 1:
        return density(sub) >= density(p) - epsilon
    if budget is None:
        budget = ("exhaustive" if min(len(Xp), len(Yp)) <= EXHAUSTIVE_SIDE_CAP
                  else ("sampled", 0, 500))
    verdict = is_regular(sub, eps_prime, budget)
    return verdict.regular and density(sub) >= density(p) - epsilon


def typical_vertices(p: Pair, Yp: Sequence[int],
                     epsilon: Fraction) -> set[int]:
    """x in X with deg(x, Yp) >= (d(X,Y) - eps) |Yp|, exact."""
    if not Yp:
        raise PreconditionError("Yp must be nonempty")
    if not set(Yp) <= set(p.Y):
        raise PreconditionError("Yp not contained in Y")
    epsilon = Fraction(epsilon)
    d = density(p)
    thresh = (d - epsilon) * len(Yp)
    degs = _deg_into(p.host, p.X, Yp)
    return {x for x, dg in zip(p.X, degs.tolist()) if dg >= thresh}


def ultratypical_vertices(host: Graph, partition: Sequence[Sequence[int]],
                          j: int, epsilon: Fraction) -> set[int]:
    """Vertices of cluster j typical towards all but <= sqrt(eps)*N clusters."""
    epsilon = Fraction(epsilon)
    clusters = [tuple(c) for c in partition]
    n_cl = len(clusters)
    allowance = rsqrt_up(epsilon) * n_cl
    xj = clusters[j]
    bad_count = {x: 0 for x in xj}
    for i, other in enumerate(clusters):
        if i == j or not other:
            continue
        pij = Pair(host, tuple(xj), other)
        typ = typical_vertices(pij, other, epsilon)
        for x in xj:
            if x not in typ:
                bad_count[x] += 1
    return {x for x, b in bad_count.items() if b <= allowance}


def _class_partition(tree: RootedTree, F1, F2):
    f1, f2 = set(F1), set(F2)
    if f1 | f2 != set(range(tree.n)) or f1 & f2:
        raise PreconditionError("F1, F2 must partition the tree's vertices")
    for u, v in tree.edges():
        if (u in f1) == (v in f1):
            raise PreconditionError("F1/F2 is not a proper 2-colouring")
    return f1, f2


def embed_in_pair(tree: RootedTree, F1, F2, p: Pair,
                  Xp: Sequence[int], Yp: Sequence[int],
                  R: dict[int, int], epsilon: Fraction, alpha: Fraction,
                  d: Fraction) -> EmbeddingCertificate:
    """Greedy tree embedding into a regular pair.

    Class F1 lands in Xp, class F2 in Yp, extending the prescribed map R
    (at most two vertices, both in F1, no common tree neighbour).  All
    stated preconditions are checked exactly; violations raise
    PreconditionError, a stuck greedy step raises EmbeddingFailure.
    """
    epsilon, alpha, d = Fraction(epsilon), Fraction(alpha), Fraction(d)
    f1, f2 = _class_partition(tree, F1, F2)
    xp, yp = list(dict.fromkeys(Xp)), list(dict.fromkeys(Yp))
    xset, yset = set(xp), set(yp)
    if not xset <= set(p.X) or not yset <= set(p.Y):
        raise PreconditionError("working sets must lie inside the pair")
    ledger = []

    def req(name, lhs, rhs, strict=True):
        ok = lhs > rhs if strict else lhs >= rhs
        ledger.append((name, lhs, rhs, ok))
        if not ok:
            raise PreconditionError(f"precondition {name}: {lhs} vs {rhs}",
                                    ledger)

    d_pair = density(p)
    req("pair-density > 3*alpha", d_pair, 3 * alpha)
    req("alpha > 2*epsilon", alpha, 2 * epsilon)
    req("eps|X| >= |F1|", epsilon * len(p.X), Fraction(len(f1)), strict=False)
    req("eps|Y| >= |F2|", epsilon * len(p.Y), Fraction(len(f2)), strict=False)
    req("|Xp| > 2(eps/alpha)|X|", Fraction(len(xp)),
        2 * (epsilon / alpha) * len(p.X))
    req("|Yp| > 2(eps/alpha)|Y|", Fraction(len(yp)),
        2 * (epsilon / alpha) * len(p.Y))
    if len(R) > 2:
        raise PreconditionError("at most two prescribed vertices")
    if any(v not in f1 for v in R):
        raise PreconditionError("prescribed vertices must lie in F1")
    if len(set(R.values())) != len(R):
        raise PreconditionError("prescribed images must be distinct")
    if len(R) == 2:
        u, v = sorted(R)
        if tree.neighbours(u) & tree.neighbours(v):
            raise PreconditionError(
                "prescribed vertices must not share a neighbour")
    host = p.host
    for tv, img in R.items():
        if img not in xset:
            raise PreconditionError(f"prescribed image {img} outside Xp")
        dy = len(host.neighbours(img) & yset)
        req(f"deg(R[{tv}],Yp) > 3eps|Y|", Fraction(dy), 3 * epsilon * len(p.Y))

    typ_thresh_x = (d_pair - epsilon) * len(yp)
    typ_thresh_y = (d_pair - epsilon) * len(xp)
    tx = {x for x in xp if len(host.neighbours(x) & yset) >= typ_thresh_x}
    ty = {y for y in yp if len(host.neighbours(y) & xset) >= typ_thresh_y}

    phi: dict[int, int] = dict(R)
    prov: dict[int, str] = {tv: "prescribed" for tv in R}
    used = set(R.values())

    def place(tv: int, candidates, tag: str):
        side_f1 = tv in f1
        opp_free = (yset - used) if side_f1 else (xset - used)
        best = None
        for c in candidates:
            if c in used:
                continue
            key = (len(host.neighbours(c) & opp_free), -c)
            if best is None or key > best[0]:
                best = (key, c)
        if best is None:
            raise EmbeddingFailure(
                f"no free typical candidate for tree vertex {tv}",
                vertex=tv, side="X" if side_f1 else "Y",
                free_x=len(xset - used), free_y=len(yset - used))
        c = best[1]
        phi[tv] = c
        prov[tv] = tag
        used.add(c)
        return c

    def greedy_candidates(tv: int, parent_img: Optional[int]):
        side_f1 = tv in f1
        typ = tx if side_f1 else ty
        base = set(xp) if side_f1 else set(yp)
        pool = (base & typ) - used
        if parent_img is not None:
            pool &= host.neighbours(parent_img)
        return sorted(pool)

    def embed_from(seeds: list[int]):
        order = []
        seen = set(phi)
        frontier = [s for s in seeds if s in phi]
        queue = list(frontier)
        for w in queue:
            for u in sorted(tree.neighbours(w)):
                if u not in seen:
                    seen.add(u)
                    order.append((u, w))
                    queue.append(u)
        for tv, parent in order:
            place(tv, greedy_candidates(tv, phi[parent]), "greedy")

    if len(R) == 2:
        u, v = sorted(R)
        pth = tree.path(u, v)
        m = len(pth) - 1
        # distance is even (same class) and >= 4 (no common neighbour)
        for i in range(1, m - 2):
            place(pth[i], greedy_candidates(pth[i], phi[pth[i - 1]]),
                  "path-greedy")
        u_prime = phi[pth[m - 3]]
        x2 = sorted((host.neighbours(u_prime) & tx & set(xp)) - used)
        y2 = sorted((host.neighbours(phi[v]) & ty & set(yp)) - used)
        found = None
        for x in x2:
            nb = host.neighbours(x)
            for y in y2:
                if y in nb:
                    found = (x, y)
                    break
            if found:
                break
        if found is None:
            raise EmbeddingFailure(
                "no closing edge between candidate sets",
                x_candidates=len(x2), y_candidates=len(y2))
        for tv, img in zip((pth[m - 2], pth[m - 1]), found):
            phi[tv] = img
            prov[tv] = "closure"
            used.add(img)
        embed_from(list(phi))
    elif len(R) == 1:
        embed_from(list(R))
    else:
        start = tree.root
        place(start, greedy_candidates(start, None), "greedy")
        embed_from([start])

    if len(phi) != tree.n:
        raise EmbeddingFailure("tree not fully embedded",
                               missing=tree.n - len(phi))
    return EmbeddingCertificate(tuple(phi[v] for v in range(tree.n)),
                                tuple(prov[v] for v in range(tree.n)))
