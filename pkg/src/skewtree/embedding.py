"""Anchored-forest embedding engines and the four-case master procedure.

Three engines place anchored forests into a skewed LKS host: through
matched L-S cluster pairs, through high-degree cluster sets with a
reservation phase, and through a cluster set whose second colour class
lands outside it.  master_embed seeds the two witness clusters, runs
the case script selected by the configuration witness, finishes the
left-over leaves greedily, and returns a certificate that passes
validate_embedding, with a step-by-step inequality ledger.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from skewtree.clusters import SkewLksGraph
from skewtree.configs import ConfigWitness, TreeStats, verify_witness
from skewtree.graphs import EmbeddingCertificate, RootedTree, validate_embedding
from skewtree.regularity import (EmbeddingFailure, Pair, PreconditionError,
                                 embed_in_pair, is_regular,
                                 ultratypical_vertices)
from skewtree.treeparts import (AnchoredForest, FinePartition,
                                small_class_colour, to_anchored_forests,
                                verify_fine_partition)

__all__ = [
    "EmbedContext",
    "SplitFGH",
    "embed_anchored_matching",
    "embed_anchored_degrees_reserve",
    "embed_anchored_degrees_complete",
    "embed_anchored_degrees_cfg2",
    "split_fgh",
    "master_embed",
]


def _alpha(paper_value: Fraction, d: Fraction) -> Fraction:
    # density > 3*alpha must hold exactly; 8d/25 keeps 3*alpha below the
    # density floor d while leaving the free-fraction requirement honest
    return min(Fraction(paper_value), Fraction(8, 25) * Fraction(d))


@dataclass
class EmbedContext:
    """Mutable state of one master_embed run.

    used is the forbidden set U declared for the current operation (the
    case scripts reassign it between steps); reserved maps a component
    to its reservation cluster and vertex block; phi is the partial
    embedding.  Vertex selection always avoids used, reserved and every
    image, so certificates stay injective even when a declared U is
    smaller than the full occupancy.
    """

    g: SkewLksGraph
    tree: RootedTree
    used: set = field(default_factory=set)
    reserved: dict = field(default_factory=dict)
    phi: dict = field(default_factory=dict)
    provenance: dict = field(default_factory=dict)
    ledger: list = field(default_factory=list)

    def __post_init__(self):
        self.cg = self.g.cluster_graph()
        self.clusters = self.g.clusters
        self.member_sets = [frozenset(c) for c in self.clusters]
        self.cluster_of = {v: i for i, c in enumerate(self.clusters)
                           for v in c}
        self.n_model = sum(len(c) for c in self.clusters)
        self.r = Fraction(self.g.params["r"])
        self.eps = Fraction(self.g.params["epsilon"])
        self.d = Fraction(self.g.params["d"])
        self._ultra = {}

    def members(self, c: int) -> frozenset:
        return self.member_sets[c]

    def image(self) -> set:
        return set(self.phi.values())

    def reserved_flat(self) -> set:
        return {v for _, block in self.reserved.values() for v in block}

    def occupied(self) -> set:
        return self.used | self.reserved_flat() | self.image()

    def free_in(self, c: int, extra=frozenset()) -> set:
        return self.members(c) - self.occupied() - set(extra)

    def ultratypical(self, c: int) -> set:
        if c not in self._ultra:
            self._ultra[c] = ultratypical_vertices(
                self.g.host, self.clusters, c, self.eps)
        return self._ultra[c]

    def typical(self, v: int, c: int) -> bool:
        home = self.cluster_of[v]
        thresh = (self.cg.pair_density(home, c) - self.eps) * len(
            self.members(c))
        return len(self.g.host.neighbours(v) & self.members(c)) >= thresh

    def check(self, step: str, name: str, lhs, rhs, strict=False) -> None:
        lhs, rhs = Fraction(lhs), Fraction(rhs)
        ok = lhs > rhs if strict else lhs >= rhs
        self.ledger.append((step, name, str(lhs), str(rhs), ok))
        if not ok:
            raise PreconditionError(
                f"{step}: {name} fails ({lhs} vs {rhs})", self.ledger[-8:])

    def note(self, step: str, name: str, payload) -> None:
        self.ledger.append((step, name, str(payload), "", True))

    def assert_slack(self, cluster_ids, eta: Fraction, step: str,
                     forbidden: set) -> None:
        """|C \\ forbidden| >= r*eta/8 * |C| for every touched cluster."""
        for c in sorted(set(cluster_ids)):
            left = len(self.members(c) - forbidden)
            self.check(step, f"slack[{c}]", left,
                       self.r * eta / 8 * len(self.members(c)))

    def record(self, tree_v: int, host_v: int, tag: str) -> None:
        if self.phi.get(tree_v) == host_v:
            return
        assert tree_v not in self.phi and host_v not in self.occupied()
        self.phi[tree_v] = host_v
        self.provenance[tree_v] = tag
        assert len(self.used) + len(self.reserved_flat()) + len(self.phi) \
            <= self.g.host.n


def _forest_classes(ctx: EmbedContext, forest: AnchoredForest):
    """(f2_colour, per-component F1/F2 vertex lists).

    F2 is the anchors' colour class; F1 (their neighbours inside the
    components) is the class the propositions place first.
    """
    c2 = ctx.tree.colour[forest.anchors[0]]
    f1s, f2s = [], []
    for comp in forest.components:
        f1s.append([v for v in comp if ctx.tree.colour[v] != c2])
        f2s.append([v for v in comp if ctx.tree.colour[v] == c2])
    return c2, f1s, f2s


def _check_anchors(ctx: EmbedContext, forest: AnchoredForest, A: int,
                   step: str) -> None:
    ultra = ctx.ultratypical(A)
    for a in forest.anchors:
        if a not in ctx.phi:
            raise PreconditionError(f"{step}: anchor {a} not embedded")
        if ctx.phi[a] not in ultra:
            raise PreconditionError(
                f"{step}: anchor image {ctx.phi[a]} not ultratypical in "
                f"cluster {A}")


def _component_tree(ctx: EmbedContext, comp):
    """Component as a RootedTree over local ids plus the id maps."""
    comp = tuple(comp)
    local = {v: i for i, v in enumerate(comp)}
    cs = set(comp)
    root = comp[0]
    parent = [-2] * len(comp)
    parent[local[root]] = -1
    queue = [root]
    for v in queue:
        for u in sorted(ctx.tree.neighbours(v) & cs):
            if parent[local[u]] == -2:
                parent[local[u]] = local[v]
                queue.append(u)
    return RootedTree(len(comp), local[root], parent), local


def _embed_component_pair(ctx: EmbedContext, comp, f1, f2, cx: int, cy: int,
                          prescribed: dict, avoid: set, alpha: Fraction,
                          tag: str, step: str) -> None:
    """Run the pair-embedding lemma on one component and record images.

    prescribed maps component vertices (class F1) to host images in
    cluster cx.  A stuck greedy step is re-raised with a sampled
    regularity report of the failing pair for regression.
    """
    local_tree, local = _component_tree(ctx, comp)
    xp = sorted((ctx.members(cx) - avoid) | set(prescribed.values()))
    yp = sorted(ctx.members(cy) - avoid)
    pair = Pair(ctx.g.host, tuple(ctx.clusters[cx]), tuple(ctx.clusters[cy]))
    try:
        cert = embed_in_pair(
            local_tree, [local[v] for v in f1], [local[v] for v in f2],
            pair, xp, yp, {local[v]: img for v, img in prescribed.items()},
            ctx.eps, alpha, ctx.d)
    except EmbeddingFailure as exc:
        verdict = is_regular(pair, ctx.eps, ("sampled", 0, 200))
        raise EmbeddingFailure(
            f"{step}: stuck embedding component into pair ({cx},{cy}); "
            f"sampled regularity verdict: regular={verdict.regular}",
            pair=(cx, cy), regular=verdict.regular,
            witness=verdict.witness, cause=str(exc))
    for v in comp:
        ctx.record(v, cert.map[local[v]], tag)
    # class-to-cluster contract of the producing proposition
    assert all(ctx.phi[v] in ctx.members(cx) for v in f1)
    assert all(ctx.phi[v] in ctx.members(cy) for v in f2)


def _report_nonultra(ctx: EmbedContext, verts, cluster: int,
                     step: str) -> None:
    # the class-2 ultratypicality promise carries the authors' own
    # margin note: report a typical-but-not-ultratypical image, never fail
    ultra = ctx.ultratypical(cluster)
    bad = [v for v in verts if ctx.phi[v] not in ultra]
    if bad:
        ctx.note(step, "class2-not-ultratypical",
                 {"cluster": cluster, "vertices": bad})


def _pick_prescribed(ctx: EmbedContext, attachments, free_x: set,
                     free_y: set, step: str) -> dict:
    """Images for the anchor-adjacent component vertices.

    Each attachment vertex gets a free neighbour of its anchor's image
    that is typical towards the opposite free side, maximising degree
    into it (ties by lowest id), mirroring the lemma's greedy rule.
    """
    host = ctx.g.host
    chosen: dict = {}
    taken: set = set()
    thresh = 3 * ctx.eps * len(free_y)
    for anchor, v in sorted(attachments):
        pool = (host.neighbours(ctx.phi[anchor]) & free_x) - taken
        best = None
        for cand in pool:
            dy = len(host.neighbours(cand) & free_y)
            if dy <= thresh:
                continue
            key = (dy, -cand)
            if best is None or key > best[0]:
                best = (key, cand)
        if best is None:
            raise PreconditionError(
                f"{step}: no free typical neighbour for attachment "
                f"({anchor}, {v})")
        chosen[v] = best[1]
        taken.add(best[1])
    return chosen


def embed_anchored_matching(ctx: EmbedContext, F: AnchoredForest, A: int,
                            M, eta) -> EmbedContext:
    """Embed F along matched L-S cluster edges.

    F1 lands on the S side of the matching, F2 away from the anchors on
    the L side.  The displayed degree inequality and the running
    inequality of the proof are re-checked exactly after every
    component; the per-pair counting margins gate cluster choice.
    """
    step = "embed-matching"
    eta = Fraction(eta)
    if not F.components:
        return ctx
    r, n = ctx.r, ctx.n_model
    skew = (1 - r) / r
    _check_anchors(ctx, F, A, step)
    _, f1s, f2s = _forest_classes(ctx, F)
    for f1, f2, comp in zip(f1s, f2s, F.components):
        if len(f1) > len(f2):
            raise PreconditionError(
                f"{step}: component {comp} has more class-1 than class-2 "
                "vertices")
    f2_total = sum(len(f) for f in f2s) + len(F.anchors)
    pairs = [(l, s) for l, s in M]
    s_side = [s for _, s in pairs]

    def max_term(forb: set) -> Fraction:
        return sum(max(Fraction(len(forb & ctx.members(s))),
                       skew * len(forb & ctx.members(l)))
                   for l, s in pairs)

    lhs = ctx.cg.degbar(A, s_side)
    ctx.check(step, "degree", lhs,
              skew * f2_total + max_term(ctx.used) + eta * n)

    tilde = {ctx.phi[a] for a in F.anchors}
    done_f2 = len(F.anchors)
    for comp, att, f1, f2 in zip(F.components, F.attachments, f1s, f2s):
        forb = ctx.used | tilde
        ctx.check(step, "running", lhs,
                  skew * (f2_total - done_f2) + max_term(forb) + eta * n)
        anchors_k = sorted({a for a, _ in att})
        imgs = [ctx.phi[a] for a in anchors_k]
        avoid = ctx.occupied() | tilde
        best = None
        for l, s in pairs:
            if not all(ctx.typical(u, s) for u in imgs):
                continue
            mem_s, mem_l = ctx.members(s), ctx.members(l)
            covered = max(Fraction(len(forb & mem_s)),
                          skew * len(forb & mem_l))
            if len(mem_s) - covered < len(f1) + eta * r * len(mem_s) / 2:
                continue
            free_l = mem_l - avoid
            if len(free_l) < len(f2) + eta * r * len(mem_l) / 2:
                continue
            free_s = mem_s - avoid
            try:
                pres = _pick_prescribed(ctx, att, free_s, free_l, step)
            except PreconditionError:
                continue
            slack = min(Fraction(len(free_s), len(mem_s)),
                        Fraction(len(free_l), len(mem_l)))
            key = (slack, (-l, -s))
            if best is None or key > best[0]:
                best = (key, l, s, pres)
        if best is None:
            raise PreconditionError(
                f"{step}: no matched pair clears the counting margins for "
                f"component {comp}", ctx.ledger[-6:])
        _, l, s, pres = best
        avoid_pair = avoid - set(pres.values())
        _embed_component_pair(ctx, comp, f1, f2, s, l, pres, avoid_pair,
                              _alpha(16 * ctx.eps / (eta * r), ctx.d),
                              "matching", step)
        tilde |= {ctx.phi[v] for v in comp}
        done_f2 += len(f2)
        _report_nonultra(ctx, f2, l, step)
        ctx.assert_slack([s, l], eta, step, ctx.used | tilde)
    return ctx


def _choose_reserve_cluster(ctx: EmbedContext, B_set, imgs, need: int,
                            demand: int, eta: Fraction, step: str):
    """Cluster of B_set ready to host N(R) images plus a reservation.

    Every anchor image must see at least `demand` free ultratypical
    vertices; after placing the images and reserving, the cluster must
    keep its r*eta/8 slack.  Maximal free slack wins, ties by id.
    """
    host = ctx.g.host
    occ = ctx.occupied()
    best = None
    for b in sorted(B_set):
        if not all(ctx.typical(u, b) for u in imgs):
            continue
        free = ctx.members(b) - occ
        ultra_free = free & ctx.ultratypical(b)
        if any(len(host.neighbours(u) & ultra_free) < demand for u in imgs):
            continue
        after = len(free) - len(imgs) - need
        if after < ctx.r * eta / 8 * len(ctx.members(b)):
            continue
        key = Fraction(len(free), len(ctx.members(b)))
        if best is None or key > best[0]:
            best = (key, b)
    if best is None:
        raise PreconditionError(
            f"{step}: no cluster in {sorted(B_set)} can host the "
            "attachment images", ctx.ledger[-6:])
    return best[1]


def embed_anchored_degrees_reserve(ctx: EmbedContext, F: AnchoredForest,
                                   A: int, B_set, eta):
    """Place N(R) into B_set and reserve room for the rest of F1.

    Returns (ctx, W) where W maps each component to its reservation
    cluster and vertex block; the blocks also enter ctx.reserved so all
    later vertex selection avoids them.
    """
    step = "degrees-reserve"
    eta = Fraction(eta)
    if not F.components:
        return ctx, {}
    n = ctx.n_model
    _check_anchors(ctx, F, A, step)
    _, f1s, f2s = _forest_classes(ctx, F)
    f1_total = sum(len(f) for f in f1s)
    b_union = set().union(*(ctx.members(b) for b in B_set))
    ctx.check(step, "degree", ctx.cg.degbar(A, sorted(B_set)),
              f1_total + len(b_union & ctx.used) + eta * n)
    host = ctx.g.host
    W: dict = {}
    for comp, att, f1 in zip(F.components, F.attachments, f1s):
        anchors_k = sorted({a for a, _ in att})
        imgs = [ctx.phi[a] for a in anchors_k]
        need = len(set(f1) - {v for _, v in att})
        b = _choose_reserve_cluster(ctx, B_set, imgs, need, len(comp),
                                    eta, step)
        for anchor, v in sorted(att):
            pool = host.neighbours(ctx.phi[anchor]) & ctx.free_in(b) \
                & ctx.ultratypical(b)
            if not pool:
                raise PreconditionError(
                    f"{step}: attachment ({anchor}, {v}) lost its "
                    f"candidates in cluster {b}")
            ctx.record(v, min(pool), "degrees-reserve")
        block = sorted(ctx.free_in(b))[:need]
        ctx.reserved[tuple(comp)] = (b, frozenset(block))
        W[tuple(comp)] = (b, frozenset(block))
        ctx.assert_slack([b], eta, step,
                         ctx.used | ctx.reserved_flat() | ctx.image())
    return ctx, W


def _finish_component(ctx: EmbedContext, comp, att, f1, f2, b: int,
                      tilde_u: set, alpha: Fraction, eta: Fraction,
                      tag: str, step: str, d_pool) -> int:
    """Close one component whose N(R) images already sit in cluster b.

    Picks the partner cluster from d_pool by exact counting margins and
    maximal slack, then runs the pair lemma with the N(R) images
    prescribed.  Returns the chosen partner cluster.
    """
    imgs = [ctx.phi[v] for _, v in sorted(att)]
    avoid = ctx.occupied() | tilde_u
    host = ctx.g.host
    free_b = (ctx.members(b) - avoid) | set(imgs)
    ctx.check(step, f"room[{b}]", len(free_b) - len(imgs),
              len(set(f1) - {v for _, v in att})
              + ctx.r * eta / 8 * len(ctx.members(b)))
    best = None
    for dcl in sorted(d_pool):
        if dcl == b or ctx.cg.pair_density(b, dcl) == 0:
            continue
        if not all(ctx.typical(u, dcl) for u in imgs):
            continue
        free_d = ctx.members(dcl) - avoid
        if any(len(host.neighbours(u) & free_d)
               < len(f2) + ctx.r * eta / 8 * len(ctx.members(dcl))
               for u in imgs):
            continue
        key = Fraction(len(free_d), len(ctx.members(dcl)))
        if best is None or key > best[0]:
            best = (key, dcl)
    if best is None:
        raise PreconditionError(
            f"{step}: no partner cluster for component {comp} rooted in "
            f"cluster {b}", ctx.ledger[-6:])
    dcl = best[1]
    pres = {v: ctx.phi[v] for _, v in att}
    _embed_component_pair(ctx, comp, f1, f2, b, dcl, pres, avoid, alpha,
                          tag, step)
    _report_nonultra(ctx, f2, dcl, step)
    ctx.assert_slack([b, dcl], eta, step, ctx.used | tilde_u | ctx.image()
                     | ctx.reserved_flat())
    return dcl


def embed_anchored_degrees_complete(ctx: EmbedContext, F: AnchoredForest,
                                    W: dict, tilde_U, eta) -> EmbedContext:
    """Finish F after a reservation phase, avoiding used and tilde_U.

    Releases each component's reserved block, then closes the component
    through a partner cluster chosen by the exact margins of the
    'moreover' part of the degree proposition.
    """
    step = "degrees-complete"
    eta = Fraction(eta)
    tilde_u = set(tilde_U)
    if not F.components:
        return ctx
    n = ctx.n_model
    _, f1s, f2s = _forest_classes(ctx, F)
    f1_total = sum(len(f) for f in f1s)
    f2_total = sum(len(f) for f in f2s)
    touched = sorted({W[tuple(c)][0] for c in F.components})
    for b in touched:
        ctx.check(step, f"degree[{b}]", ctx.cg.degbar(b),
                  f1_total + f2_total + len(ctx.used | tilde_u) + eta * n)
    for c in sorted({ctx.cluster_of[v] for v in tilde_u}):
        ctx.check(step, f"tilde-slack[{c}]",
                  len(ctx.members(c) - ctx.used - ctx.reserved_flat()
                      - tilde_u - ctx.image()),
                  ctx.r * eta / 8 * len(ctx.members(c)))
    for comp, att, f1, f2 in zip(F.components, F.attachments, f1s, f2s):
        b, _block = W[tuple(comp)]
        ctx.reserved.pop(tuple(comp), None)
        _finish_component(ctx, comp, att, f1, f2, b, tilde_u,
                          _alpha(32 * ctx.eps / (ctx.r * eta), ctx.d), eta,
                          "degrees-complete", step,
                          range(len(ctx.clusters)))
    return ctx


def embed_anchored_degrees_cfg2(ctx: EmbedContext, F: AnchoredForest,
                                A: int, B_set, eta) -> EmbedContext:
    """Embed F with F1 inside B_set and F2 outside it, no reservation.

    Both displayed inequalities are checked exactly; partner clusters
    come from the outward neighbourhood of the chosen cluster.
    """
    step = "degrees-cfg2"
    eta = Fraction(eta)
    if not F.components:
        return ctx
    n = ctx.n_model
    _check_anchors(ctx, F, A, step)
    _, f1s, f2s = _forest_classes(ctx, F)
    f1_total = sum(len(f) for f in f1s)
    f2_total = sum(len(f) for f in f2s)
    b_union = set().union(*(ctx.members(b) for b in B_set))
    ctx.check(step, "degree-A", ctx.cg.degbar(A, sorted(B_set)),
              f1_total + len(b_union & ctx.used) + eta * n)
    outward = [c for c in range(len(ctx.clusters)) if c not in set(B_set)]
    for b in sorted(B_set):
        ctx.check(step, f"degree-out[{b}]", ctx.cg.degbar(b, outward),
                  f2_total + len(ctx.used) + eta * n)
    host = ctx.g.host
    for comp, att, f1, f2 in zip(F.components, F.attachments, f1s, f2s):
        anchors_k = sorted({a for a, _ in att})
        imgs = [ctx.phi[a] for a in anchors_k]
        b = _choose_reserve_cluster(ctx, B_set, imgs, 0, len(comp), eta,
                                    step)
        for anchor, v in sorted(att):
            pool = host.neighbours(ctx.phi[anchor]) & ctx.free_in(b) \
                & ctx.ultratypical(b)
            if not pool:
                raise PreconditionError(
                    f"{step}: attachment ({anchor}, {v}) lost its "
                    f"candidates in cluster {b}")
            ctx.record(v, min(pool), "degrees-cfg2")
        dcl = _finish_component(
            ctx, comp, att, f1, f2, b, set(),
            _alpha(32 * ctx.eps / (ctx.r * eta), ctx.d), eta,
            "degrees-cfg2", step, outward)
        assert dcl not in set(B_set)
    return ctx


@dataclass(frozen=True)
class SplitFGH:
    """Cap-driven split of a side-A anchored forest.

    F and G are cap-bounded prefixes (H the remainder); F_prime and
    G_prime have the class-1 tree leaves removed so every kept class-1
    vertex retains a class-2 child.  counts holds per-part colour
    totals keyed '<part>1' / '<part>2'.
    """

    F: AnchoredForest
    G: AnchoredForest
    H: AnchoredForest
    F_prime: AnchoredForest
    G_prime: AnchoredForest
    counts: dict


def _subforest(forest: AnchoredForest, idxs) -> AnchoredForest:
    return AnchoredForest(
        forest.side,
        tuple(forest.components[i] for i in idxs),
        tuple(sorted({a for i in idxs
                      for a, _ in forest.attachments[i]})),
        tuple(forest.attachments[i] for i in idxs),
        forest.tau, ())


def _prune_class1_leaves(forest: AnchoredForest, tree: RootedTree,
                         f1_colour: int) -> AnchoredForest:
    comps = []
    for comp in forest.components:
        kept = tuple(v for v in comp
                     if not (tree.colour[v] == f1_colour
                             and tree.degree(v) == 1))
        assert len(kept) >= 2, "pruning must keep the attachment spine"
        comps.append(kept)
    return AnchoredForest(forest.side, tuple(comps), forest.anchors,
                          forest.attachments, forest.tau, ())


def split_fgh(forest: AnchoredForest, tree: RootedTree, f2_colour: int,
              cap_f, cap_g=None, skew_sort: bool = True) -> SplitFGH:
    """Split forest into cap-bounded prefixes F, G and remainder H.

    cap_f (and cap_g when given) bound the running class-2 totals; a
    negative cap gives an empty part.  With skew_sort the components
    are first ordered by class-2-to-class-1 ratio descending.  Prefix
    maximality is asserted: the first component left out of a part
    would overflow its cap.
    """
    cap_f = Fraction(cap_f)
    cap_g = None if cap_g is None else Fraction(cap_g)
    f1c = 3 - f2_colour
    c1 = [sum(1 for v in comp if tree.colour[v] == f1c)
          for comp in forest.components]
    c2 = [len(comp) - a for comp, a in zip(forest.components, c1)]
    order = list(range(len(forest.components)))
    if skew_sort:
        big = 1 + sum(c1)
        order.sort(key=lambda i: (-Fraction(c1[i], c2[i]) if c2[i]
                                  else -big, i))

    def take(start: int, cap):
        total = Fraction(0)
        stop = start
        while stop < len(order) and total + c2[order[stop]] <= cap:
            total += c2[order[stop]]
            stop += 1
        if stop < len(order):
            assert total + c2[order[stop]] > cap, "prefix not maximal"
        return stop

    jf = take(0, cap_f) if cap_f >= 0 else 0
    if cap_g is None:
        jg = len(order)
    else:
        jg = take(jf, cap_g) if cap_g >= 0 else jf
    f_idx, g_idx, h_idx = order[:jf], order[jf:jg], order[jg:]
    F, G, H = (_subforest(forest, ix) for ix in (f_idx, g_idx, h_idx))
    Fp = _prune_class1_leaves(F, tree, f1c)
    Gp = _prune_class1_leaves(G, tree, f1c)
    counts = {}
    for name, idxs in (("F", f_idx), ("G", g_idx), ("H", h_idx)):
        counts[name + "1"] = sum(c1[i] for i in idxs)
        counts[name + "2"] = sum(c2[i] for i in idxs)
    for name, part in (("Fp", Fp), ("Gp", Gp)):
        counts[name + "1"] = sum(
            1 for comp in part.components for v in comp
            if tree.colour[v] == f1c)
        counts[name + "2"] = sum(
            1 for comp in part.components for v in comp
            if tree.colour[v] == f2_colour)
    return SplitFGH(F, G, H, Fp, Gp, counts)


def _connecting_tree(tree: RootedTree, fp: FinePartition):
    """Tree on the seed set whose induced seed edges it contains.

    Extra edges only join the two seed classes, preserving parity.
    Returns (RootedTree over local ids, vertex order) or None when one
    class is empty (seeds then embed independently).
    """
    wa, wb = list(fp.W_A), list(fp.W_B)
    if not wa or not wb:
        return None
    verts = wa + wb
    local = {v: i for i, v in enumerate(verts)}
    vset = set(verts)
    edges = sorted({(min(u, v), max(u, v)) for u in verts
                    for v in tree.neighbours(u) if v in vset})
    parent = list(range(len(verts)))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    adj = {v: [] for v in verts}
    for u, v in edges:
        adj[u].append(v)
        adj[v].append(u)
        parent[find(local[u])] = find(local[v])
    bset = set(wb)
    base = find(local[wa[0]])
    for v in verts:
        if find(local[v]) == base:
            continue
        other = wa[0] if v in bset else wb[0]
        if find(local[other]) == find(local[v]):
            # class-pure component: link through the opposite class hub
            other = wb[0] if v in bset else wa[0]
        adj[v].append(other)
        adj[other].append(v)
        parent[find(local[v])] = find(local[other])
    par = [-2] * len(verts)
    par[local[wa[0]]] = -1
    queue = [wa[0]]
    for v in queue:
        for u in sorted(adj[v]):
            if par[local[u]] == -2:
                par[local[u]] = local[v]
                queue.append(u)
    assert all(p != -2 for p in par), "seed tree not connected"
    return RootedTree(len(verts), local[wa[0]], par), verts


def _anchor_grade(ctx: EmbedContext, c: int) -> frozenset[int]:
    """Ultratypical vertices of c typical toward every dense partner.

    Seeds double as the anchors of every later step, so they are drawn
    from vertices with no atypical pair at all; plain ultratypicality
    allows one, which any downstream cluster choice might need.
    """
    pos = [j for j in range(len(ctx.clusters))
           if j != c and ctx.cg.pair_density(c, j) > 0]
    return frozenset(v for v in ctx.ultratypical(c)
                     if all(ctx.typical(v, j) for j in pos))


def _seed(ctx: EmbedContext, fp: FinePartition, A: int, B: int) -> None:
    """Map W_A and W_B onto anchor-grade vertices of A and B."""
    step = "seed"
    built = _connecting_tree(ctx.tree, fp)
    if built is None:
        for seeds, cl in ((fp.W_A, A), (fp.W_B, B)):
            for w in sorted(seeds):
                pool = ctx.free_in(cl) & _anchor_grade(ctx, cl)
                if not pool:
                    raise PreconditionError(f"{step}: cluster {cl} has no "
                                            "free anchor-grade vertex")
                ctx.record(w, min(pool), "seed")
        return
    aux, verts = built
    local = {v: i for i, v in enumerate(verts)}
    xp = sorted(ctx.free_in(A) & _anchor_grade(ctx, A))
    yp = sorted(ctx.free_in(B) & _anchor_grade(ctx, B))
    pair = Pair(ctx.g.host, tuple(ctx.clusters[A]), tuple(ctx.clusters[B]))
    cert = embed_in_pair(
        aux, [local[v] for v in fp.W_A], [local[v] for v in fp.W_B],
        pair, xp, yp, {}, ctx.eps, _alpha(5 * ctx.eps, ctx.d), ctx.d)
    for v in verts:
        ctx.record(v, cert.map[local[v]], "seed")


def _greedy_leaves(ctx: EmbedContext, step: str) -> None:
    """Place every still-unembedded vertex on a free parent neighbour.

    All remaining vertices must be tree leaves with an embedded
    neighbour; available degree is re-asserted per parent before
    placing (the ultratypical degree bound recomputed at completion).
    """
    tree, host = ctx.tree, ctx.g.host
    pending: dict = {}
    for v in range(tree.n):
        if v in ctx.phi:
            continue
        nbrs = sorted(tree.neighbours(v))
        if len(nbrs) != 1 or nbrs[0] not in ctx.phi:
            raise PreconditionError(
                f"{step}: vertex {v} is not a leaf hanging off an "
                "embedded neighbour")
        pending.setdefault(nbrs[0], []).append(v)
    for parent in sorted(pending):
        img = ctx.phi[parent]
        leaves = sorted(pending[parent])
        free = host.neighbours(img) - ctx.occupied()
        ctx.check(step, f"greedy-degree[{parent}]", len(free), len(leaves))
        for leaf in leaves:
            free = host.neighbours(img) - ctx.occupied()
            ctx.record(leaf, min(free), "greedy")


def master_embed(g: SkewLksGraph, T: RootedTree, fp: FinePartition,
                 w: ConfigWitness, delta,
                 ledger_out: list | None = None) -> EmbeddingCertificate:
    """Embed T into the LKS host along the witnessed configuration.

    Seeds the two witness clusters, runs the configuration's case
    script with every inequality checked exactly, finishes leaves
    greedily and validates the certificate.  Failures carry the case
    and step id plus the relevant ledger tail.
    """
    delta = Fraction(delta)
    if verify_fine_partition(T, fp):
        raise PreconditionError("fine partition does not verify")
    stats = TreeStats.from_partition(fp, T)
    if not verify_witness(g.cluster_graph(), stats, w,
                          Fraction(g.params["eta"])):
        raise PreconditionError("configuration witness fails verification")
    ctx = EmbedContext(g, T)
    cg, r = ctx.cg, ctx.r
    k = T.k
    n = ctx.n_model
    q = Fraction(k, n)
    rt = stats.r_tilde
    A, B = w.X, w.Y
    small = small_class_colour(T)
    d_a2 = sum(1 for comp in fp.D_A for v in comp if T.colour[v] == small)
    d_a1 = sum(1 for comp in fp.D_A for v in comp if T.colour[v] != small)
    d_b1 = stats.b1
    case = w.config
    s_m = list(w.S_M)
    s_1 = list(w.S_1)
    l_all = list(cg.L)
    skew = r / (1 - r)

    hyp = f"case-{case}-hypothesis"
    if case == "A":
        ctx.check(hyp, "degA", cg.degbar(A, s_1 + s_m),
                  (1 - rt) / rt * d_a2 + delta * k)
        ctx.check(hyp, "degB", cg.degbar(B, l_all), (rt + delta) * k)
    elif case in ("B", "C"):
        if case == "B":
            ctx.check(hyp, "skew", rt * d_a1, (1 - rt) * d_a2)
            ctx.check(hyp, "degB", cg.degbar(B, l_all), (rt + delta) * k)
        else:
            ctx.check(hyp, "skew", (1 - rt) * d_a2, rt * d_a1)
            ctx.check(hyp, "degB", cg.degbar(B, l_all), d_b1 + delta * k)
        ctx.check(hyp, "degA", cg.degbar(A, s_1 + s_m + l_all),
                  (1 + delta) * k)
    else:
        ctx.check(hyp, "skew", rt * d_a1, (1 - rt) * d_a2)
        ctx.check(hyp, "b1-bound", rt / (1 - rt) * rt * k, d_b1)
        ctx.check(hyp, "degA", cg.degbar(A, s_m + l_all), (1 + delta) * k)
        ctx.check(hyp, "degB", cg.degbar(B, l_all), d_b1 + delta * k)
        for l, s in w.M:
            if cg.pair_density(A, l) != 0 and cg.pair_density(A, s) != 0:
                raise PreconditionError(
                    f"{hyp}: matching edge ({l},{s}) fully adjacent to "
                    "the primary cluster")

    def run(step_id: str, fn, *args):
        try:
            return fn(*args)
        except (PreconditionError, EmbeddingFailure) as exc:
            exc.args = (f"[case {case} / {step_id}] {exc.args[0]}",
                        *exc.args[1:])
            raise

    run("seed", _seed, ctx, fp, A, B)
    seed_imgs = set(ctx.image())
    f_a, f_b = to_anchored_forests(fp, T)

    def reserve_db(used, eta):
        ctx.used = set(used)
        _, wres = run("reserve-DB", embed_anchored_degrees_reserve,
                      ctx, f_b, B, l_all, eta)
        u_prime = ctx.reserved_flat() | {
            ctx.phi[v] for att in f_b.attachments for _, v in att}
        return wres, u_prime

    def complete_db(wres, u_reserve, tilde, eta):
        ctx.used = set(u_reserve)
        run("complete-DB", embed_anchored_degrees_complete,
            ctx, f_b, wres, tilde, eta)

    if case == "A":
        cap_f = skew * cg.degbar(A, s_m) - skew * delta * k / 2
        split = split_fgh(f_a, T, small, cap_f, None, skew_sort=False)
        ctx.used = set(seed_imgs)
        run("matching-F", embed_anchored_matching,
            ctx, split.F_prime, A, w.M, q * delta / 4)
        g2_imgs = {ctx.phi[v] for comp in split.F_prime.components
                   for v in comp if T.colour[v] == small}
        ctx.used = seed_imgs | g2_imgs
        run("cfg2-G", embed_anchored_degrees_cfg2,
            ctx, split.G_prime, A, s_1, q * delta / 4)
        u2_img = set(ctx.image())
        wres, _ = reserve_db(u2_img, q * delta / 2)
        complete_db(wres, u2_img, set(), q * delta / 2)
    elif case == "B":
        cap_f = skew * (cg.degbar(A, s_m) - delta * k / 3)
        cap_g = skew * (cg.degbar(A, s_1) - delta * k / 3)
        split = split_fgh(f_a, T, small, cap_f, cap_g)
        ctx.check(f"case-{case}", "FG-skew",
                  rt * (split.counts["F1"] + split.counts["G1"]),
                  (1 - rt) * (split.counts["F2"] + split.counts["G2"]))
        ctx.used = set(seed_imgs)
        run("matching-F", embed_anchored_matching,
            ctx, split.F_prime, A, w.M, q * delta / 4)
        f2_imgs = {ctx.phi[v] for comp in split.F_prime.components
                   for v in comp if T.colour[v] == small}
        ctx.used = seed_imgs | f2_imgs
        run("cfg2-G", embed_anchored_degrees_cfg2,
            ctx, split.G_prime, A, s_1, q * delta / 4)
        fg2 = f2_imgs | {ctx.phi[v] for comp in split.G_prime.components
                         for v in comp if T.colour[v] == small}
        wres, u_prime = reserve_db(seed_imgs | fg2, q * delta / 20)
        pre_h = set(ctx.image())
        ctx.used = set(ctx.image()) | u_prime
        run("degrees-H", _embed_degrees_full,
            ctx, split.H, A, l_all, q * delta / 4)
        tilde = ctx.image() - pre_h
        complete_db(wres, seed_imgs | fg2, tilde, q * delta / 20)
    elif case == "C":
        wres, u_prime = reserve_db(seed_imgs, q * delta / 20)
        cap_f = skew * cg.degbar(A, s_m) - len(u_prime) \
            - skew * delta * k / 3
        cap_g = skew * cg.degbar(A, s_1) - skew * delta * k / 3
        split = split_fgh(f_a, T, small, cap_f, cap_g)
        pre_da = set(ctx.image())
        ctx.used = seed_imgs | u_prime
        run("matching-F", embed_anchored_matching,
            ctx, split.F_prime, A, w.M, q * delta / 4)
        f2_imgs = {ctx.phi[v] for comp in split.F_prime.components
                   for v in comp if T.colour[v] == small}
        ctx.used = seed_imgs | f2_imgs | u_prime
        run("cfg2-G", embed_anchored_degrees_cfg2,
            ctx, split.G_prime, A, s_1, q * delta / 4)
        ctx.used = set(ctx.image()) | u_prime
        run("degrees-H", _embed_degrees_full,
            ctx, split.H, A, l_all, q * delta / 8)
        tilde = ctx.image() - pre_da
        complete_db(wres, seed_imgs, tilde, q * delta / 20)
    else:
        wres, u_prime = reserve_db(seed_imgs, q * delta / 20)
        n_a = {c for c in range(len(ctx.clusters))
               if c != A and cg.pair_density(A, c) > 0}
        u1 = {v for v in u_prime if ctx.cluster_of[v] in n_a}
        u2 = u_prime - u1
        cap_f = skew * cg.degbar(A, s_m) - len(u2) - skew * delta * k / 2
        split = split_fgh(f_a, T, small, cap_f, None)
        m_restr = tuple((l, s) for l, s in w.M
                        if cg.pair_density(A, s) > 0)
        pre_da = set(ctx.image())
        ctx.used = seed_imgs | u2
        run("matching-F", embed_anchored_matching,
            ctx, split.F_prime, A, m_restr, q * delta / 3)
        b_na = [c for c in l_all if c in n_a]
        ctx.used = seed_imgs | {
            ctx.phi[v] for comp in split.F.components for v in comp
            if v in ctx.phi} | u_prime
        run("degrees-G", _embed_degrees_full,
            ctx, split.G, A, b_na, q * delta / 4)
        tilde = ctx.image() - pre_da
        complete_db(wres, seed_imgs, tilde, q * delta / 20)

    ctx.used = set()
    run("greedy-leaves", _greedy_leaves, ctx, "greedy-leaves")
    assert not ctx.reserved, "reservation blocks left unreleased"
    cert = EmbeddingCertificate(
        tuple(ctx.phi[v] for v in range(T.n)),
        tuple(ctx.provenance[v] for v in range(T.n)))
    if not validate_embedding(cert, T, g.host):
        raise EmbeddingFailure("certificate failed final validation",
                               case=case)
    ctx.note("done", "ledger-entries", len(ctx.ledger))
    if ledger_out is not None:
        ledger_out.extend(ctx.ledger)
    return cert


def _embed_degrees_full(ctx: EmbedContext, F: AnchoredForest, A: int,
                        B_set, eta) -> EmbedContext:
    """Reserve-then-complete in one sweep (the immediate 'moreover')."""
    ctx, wres = embed_anchored_degrees_reserve(ctx, F, A, B_set, eta)
    return embed_anchored_degrees_complete(ctx, F, wres, set(), eta)
