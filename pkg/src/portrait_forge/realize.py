"""Realization of a polynomial portrait as a finite subdivision rule.

The pipeline: order the finite postcritical vertices into chains, build the
star model complex and its 2n-gon tile, subdivide the tile in three stages
(doodles and edge bundles for the chain boundaries, more subtiles for the
remaining critical vertices, stickers to complete every subtile to a 2n-gon),
then glue back to the sphere.  Iterating the subdivision and tracking which
edges are new yields mechanical witnesses that no curve family of Levy type
can exist for the subdivision map.

Tile layout: the tile has darts 0..4n-1; boundary position j in 0..2n-1 is
the vertex V_j, alternating corner (even j, mapped to the central vertex) and
finite vertex a_{(j+1)/2} (odd j).  Edge j runs V_j -> V_{j+1} with darts
2j, 2j+1; the interior face orbit is the even darts in order.  Stages only
append darts, so boundary dart ids are stable at every level.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field

from . import _kernel
from .errors import CapExceeded, ConstructionError, PreconditionError, WitnessError
from .planarmap import (INFINITY_LABEL, OUTER_FACE, CombinatorialMap, InsertArc,
                        InsertSticker, surgery, validate_map)
from .portrait import INF, Portrait, require_polynomial

MAX_DARTS_ENV = "PORTRAIT_FORGE_MAX_DARTS"
DEFAULT_MAX_DARTS = 2_000_000

TYPE1 = "type1"
TYPE2 = "type2"


@dataclass(frozen=True)
class Chain:
    vertices: tuple
    kind: str

    @property
    def first(self):
        return self.vertices[0]

    @property
    def last(self):
        return self.vertices[-1]


@dataclass(frozen=True)
class ChainDecomposition:
    order: tuple          # a_1..a_n
    chains: tuple         # of Chain, type-1 chains first
    chooser: dict         # v in A -> chosen non-postcritical critical c_v


def order_chains(p):
    """Partition the finite postcritical vertices into ordered chains."""
    report = require_polynomial(p)
    infinity = report.infinity
    finite = p.finite_postcritical(infinity)
    if not finite:
        raise PreconditionError("portrait has no finite postcritical vertices")
    gen = p.chain_generators(infinity)
    post = set(p.postcritical_vertices())
    chooser = {}
    for v in gen:
        cands = [c for c in p.critical_vertices()
                 if c not in post and p.tau(c) == v]
        chooser[v] = min(cands)

    def periodic(v):
        x = p.tau(v)
        steps = 1
        while x != v and steps <= len(finite) + 1:
            x = p.tau(x)
            steps += 1
        return x == v

    placed = set()
    chains = []
    order = []
    remaining_gen = set(gen)
    while not remaining_gen <= placed:
        unplaced = [v for v in finite if v not in placed]
        if any(not periodic(v) for v in unplaced):
            cands = [v for v in sorted(remaining_gen - placed)
                     if not any(x in post and p.tau(x) == v for x in p.vertices)]
            if not cands:
                raise ConstructionError(
                    "paper-claimed choice unavailable: no generator free of "
                    "postcritical preimages")
            v = cands[0]
        else:
            v = min(remaining_gen - placed)
        chain = [v]
        placed.add(v)
        while p.tau(chain[-1]) not in placed:
            chain.append(p.tau(chain[-1]))
            placed.add(chain[-1])
        chains.append(Chain(tuple(chain), TYPE1))
        order.extend(chain)
    leftovers = [v for v in finite if v not in placed]
    while leftovers:
        cyc_start = min(leftovers)
        cyc = [cyc_start]
        x = p.tau(cyc_start)
        while x != cyc_start:
            if x in placed or x not in leftovers or len(cyc) > len(finite):
                raise ConstructionError(
                    "leftover vertices do not form attractor components")
            cyc.append(x)
            x = p.tau(x)
        crits = [v for v in cyc if p.deg(v) > 1]
        if not crits:
            raise ConstructionError("leftover cycle has no critical vertex")
        incoming = {v for w in p.vertices if (v := p.tau(w)) in cyc and w not in cyc}
        if incoming:
            raise ConstructionError("leftover cycle is not a component")
        start = min(crits)
        i = cyc.index(start)
        chain = tuple(cyc[i:] + cyc[:i])
        chains.append(Chain(chain, TYPE2))
        order.extend(chain)
        placed.update(chain)
        leftovers = [v for v in finite if v not in placed]
    return ChainDecomposition(tuple(order), tuple(chains), chooser)


# -- model complex ---------------------------------------------------------


def build_model_complex(cd):
    """The star model complex and the 2n-gon tile, with the characteristic
    correspondence tile dart 2j -> model dart j, 2j+1 -> j+1 (mod 2n)."""
    order = cd.order
    n = len(order)
    # star: sticker i has darts 2i (at the center) and 2i+1 (at a_{i+1})
    sigma = []
    alpha = []
    for i in range(n):
        sigma.extend([None, None])
        alpha.extend([2 * i + 1, 2 * i])
    for i in range(n):
        sigma[2 * i] = (2 * i + 2) % (2 * n)
        sigma[2 * i + 1] = 2 * i + 1
    vlabels = {0: INFINITY_LABEL}
    for i in range(n):
        vlabels[2 * i + 1] = order[i]
    model = CombinatorialMap(tuple(sigma), tuple(alpha), vlabels, {}, frozenset())

    m = 4 * n
    sigma = [d - 1 if d % 2 == 0 else d + 1 for d in range(m)]
    sigma[0] = m - 1
    sigma[m - 1] = 0
    alpha = [d + 1 if d % 2 == 0 else d - 1 for d in range(m)]
    vlabels = {0: INFINITY_LABEL}
    for j in range(1, 2 * n):
        rep = 2 * j - 1
        vlabels[rep] = order[(j - 1) // 2] if j % 2 == 1 else INFINITY_LABEL
    flabels = {0: "tile", 1: OUTER_FACE}
    tile = CombinatorialMap(tuple(sigma), tuple(alpha), vlabels, flabels, frozenset())
    return model, tile


def _boundary_vertex_rep(j):
    return 0 if j == 0 else 2 * j - 1


@dataclass
class StageOp:
    kind: str
    args: dict


class _Build:
    """Mutable workspace threading the tile subdivision through the stages."""

    def __init__(self, p, cd, model, tile):
        self.p = p
        self.cd = cd
        self.order = cd.order
        self.idx = {a: i for i, a in enumerate(cd.order)}
        self.degree = require_polynomial(p).degree
        self.model = model
        self.tile0 = tile
        self.m = tile
        self.n = len(cd.order)
        # image labels: boundary finite vertices map by tau, new vertices by
        # the label given at insertion time
        self.image = {}
        for i, a in enumerate(cd.order):
            self.image[_boundary_vertex_rep(2 * i + 1)] = p.tau(a)
        self.c_tilde = []
        self.log = []

    # -- lookups ----------------------------------------------------------

    def image_of(self, vertex_rep):
        if vertex_rep in self.image:
            return self.image[vertex_rep]
        return self.m.vertex_labels.get(vertex_rep)

    def boundary_position(self, a):
        return 2 * self.idx[a] + 1

    def interior_faces(self):
        face_of, reps = self.m.face_orbits()
        outer = face_of[1]
        return [rep for k, rep in enumerate(reps) if k != outer]

    def face_word(self, face_rep):
        """(dart, image label or None) along the face orbit."""
        out = []
        for d in self.m.face_darts(face_rep):
            v = self.m.vertex_of(d)
            lab = self.image_of(v)
            out.append((d, lab if lab != INFINITY_LABEL else None))
        return out

    def check(self, full=False):
        diag = validate_map(self.m)
        if not diag.ok:
            raise ConstructionError("map invariant broke: %s" % "; ".join(diag.problems))
        if full:
            for rep in self.interior_faces():
                self.assert_proper(rep)

    def assert_proper(self, face_rep):
        word = [lab for _, lab in self.face_word(face_rep) if lab is not None]
        if len(set(word)) != len(word):
            raise ConstructionError("repeated image label in subtile: %r" % (word,))
        if len(word) > 1:
            ranks = [self.idx[lab] for lab in word]
            descents = sum(1 for i in range(len(ranks))
                           if ranks[i] >= ranks[(i + 1) % len(ranks)])
            if descents != 1:
                raise ConstructionError("image labels out of cyclic order: %r" % (word,))
        # alternation: every other vertex is a corner
        full = self.face_word(face_rep)
        for i, (_, lab) in enumerate(full):
            nxt = full[(i + 1) % len(full)][1]
            if (lab is None) == (nxt is None):
                raise ConstructionError("face boundary does not alternate")

    def boundary_context(self, a):
        """Orbit darts (d_before, d_at, d_after) around untouched boundary
        vertex a in its current interior face."""
        j = self.boundary_position(a)
        d_before = 2 * (j - 1)
        d_at = self.m.phi(d_before)
        d_after = self.m.phi(d_at)
        if self.m.vertex_of(d_at) != _boundary_vertex_rep(j):
            raise ConstructionError("boundary vertex %s already modified" % a)
        if self.m.vertex_of(d_after) != _boundary_vertex_rep((j + 1) % (2 * self.n)):
            raise ConstructionError("boundary vertex %s already enclosed" % a)
        return d_before, d_at, d_after

    # -- surgery helpers ----------------------------------------------------

    def doodle(self, face, head_dart, foot_dart, k, label):
        """k-doodle: head edge at head_dart's corner, k-1 foot edges at
        foot_dart's corner, central vertex carrying an image label."""
        base = self.m.num_darts
        self.m = surgery(self.m, InsertArc(face, head_dart, foot_dart, label))
        e1, x1, y1, e2 = base, base + 1, base + 2, base + 3
        center = x1
        foot = e2
        for _ in range(k - 2):
            nxt = self.m.num_darts
            self.m = surgery(self.m, InsertArc(self.m.face_of(x1), x1, foot))
            foot = nxt + 1
        self.check()
        return center, e1, foot

    def degenerate_doodle(self, face, corner_dart, k, label):
        """k-doodle with head and foot at one corner: k parallel edges from a
        new labeled center to the corner's vertex."""
        base = self.m.num_darts
        self.m = surgery(self.m, InsertArc(face, corner_dart, corner_dart, label))
        e1, x1, y1 = base, base + 1, base + 2
        center = x1
        foot = e1
        for _ in range(k - 2):
            nxt = self.m.num_darts
            self.m = surgery(self.m, InsertArc(self.m.face_of(y1), y1, foot))
            foot = nxt + 1
        self.check()
        return center

    def parallel_edges(self, face, u_dart, v_dart, count):
        """count edges from the finite vertex at u_dart's corner to the
        corner at v_dart; the first one closes off [v_dart .. u_dart)."""
        v = v_dart
        for _ in range(count):
            base = self.m.num_darts
            self.m = surgery(self.m, InsertArc(self.m.face_of(u_dart), u_dart, v))
            v = base + 1
        self.check()

    def sticker(self, face, corner_dart, label):
        self.m = surgery(self.m, InsertSticker(face, corner_dart, label))

    def gap_corner(self, face_rep, label):
        """The unique corner of the face where the image label fits the
        cyclic order; returns the corner-owning orbit dart."""
        word = self.face_word(face_rep)
        k = len(word)
        lab_rank = self.idx[label]
        hits = []
        for i, (d, lab) in enumerate(word):
            if lab is not None:
                continue
            prev_lab = word[(i - 1) % k][1]
            next_lab = word[(i + 1) % k][1]
            if prev_lab is None or next_lab is None:
                raise ConstructionError("face boundary does not alternate")
            finite = [x for _, x in word if x is not None]
            if len(finite) == 1:
                hits.append(d)
                continue
            a, b = self.idx[prev_lab], self.idx[next_lab]
            n = self.n
            if (lab_rank - a) % n and (lab_rank - a) % n < (b - a) % n:
                hits.append(d)
        if len(hits) != 1:
            raise ConstructionError(
                "no unique corner for label %s in face %d (found %d)"
                % (label, face_rep, len(hits)))
        return hits[0]

    def count_subtiles(self):
        return len(self.interior_faces())


def stage1(build):
    """Chain-boundary constructions; returns the workspace with its log."""
    p, cd = build.p, build.cd
    chains = cd.chains
    chooser = cd.chooser
    k_chains = len(chains)
    for i_ch, ch in enumerate(chains):
        nxt = chains[(i_ch + 1) % k_chains]
        a_i, a_j = ch.last, nxt.first
        if k_chains == 1 and ch.kind == TYPE1 and p.tau(a_i) == a_j:
            _single_type1_cycle(build)
            continue
        if ch.kind == TYPE1 and nxt.kind == TYPE1:
            _chain_doodle(build, a_i, a_j)
        elif ch.kind == TYPE1 and nxt.kind == TYPE2:
            _chain_edges(build, a_j, before=a_i)
        elif ch.kind == TYPE2 and nxt.kind == TYPE1:
            if len(ch.vertices) == 1:
                build.log.append(StageOp("noop", {"pair": (a_i, a_j)}))
            else:
                _chain_doodle(build, a_i, a_j)
        else:
            if len(ch.vertices) == 1:
                _chain_edges(build, a_j, before=a_j)
            else:
                _chain_edges(build, a_j, before=a_i)
    expected = 1 + sum(p.deg(v) - 1 for v in build.c_tilde)
    got = build.count_subtiles()
    if got != expected:
        raise ConstructionError("stage 1 made %d subtiles, expected %d" % (got, expected))
    build.check(full=True)
    return build


def _chain_doodle(build, a_i, a_j):
    """Doodle around a_i whose center is a preimage of a_j."""
    c = build.cd.chooser[a_j]
    k = build.p.deg(c)
    d_before, d_at, d_after = build.boundary_context(a_i)
    face = build.m.face_of(d_at)
    center, head, foot = build.doodle(face, d_after, d_before, k, a_j)
    build.c_tilde.append(c)
    build.log.append(StageOp("doodle", {
        "around": a_i, "label": a_j, "k": k, "critical": c, "center": center}))


def _chain_edges(build, a_j, before):
    """deg(a_j)-1 edges joining the critical vertex a_j to the corner before
    the boundary vertex ``before``."""
    k = build.p.deg(a_j)
    if k < 2:
        raise ConstructionError("chain edges demand a critical first element")
    j_pos = build.boundary_position(a_j)
    d_w = 2 * (build.boundary_position(before) - 1)
    face = build.m.face_of(d_w)
    # the orbit dart at a_j in this face
    d_u = None
    for d in build.m.face_darts(face):
        if build.m.vertex_of(d) == _boundary_vertex_rep(j_pos):
            d_u = d
            break
    if d_u is None:
        raise ConstructionError("vertex %s not on the expected face" % a_j)
    build.parallel_edges(face, d_u, d_w, k - 1)
    build.c_tilde.append(a_j)
    build.log.append(StageOp("edges", {
        "from": a_j, "to_corner_before": before, "count": k - 1}))


def _single_type1_cycle(build):
    """One type-1 chain traversing a full cycle."""
    p = build.p
    order = build.order
    n = build.n
    crit_r = [r for r in range(1, n + 1) if p.deg(order[r - 1]) > 1]
    if crit_r:
        r = crit_r[0]
        a_r = order[r - 1]
        k = p.deg(a_r)
        d_before, d_at, _ = build.boundary_context(a_r)
        face = build.m.face_of(d_at)
        build.parallel_edges(face, d_at, d_before, k - 1)
        build.c_tilde.append(a_r)
        build.log.append(StageOp("arcs", {"at": a_r, "count": k - 1}))
        return
    values = set(p.finite_critical_values(require_polynomial(p).infinity))
    val_r = [r for r in range(2, n + 1) if order[r - 1] in values]
    if not val_r:
        raise ConstructionError(
            "paper-claimed choice unavailable: cyclic type-1 chain without a "
            "usable critical value")
    r = val_r[0]
    a_r, a_1, a_n = order[r - 1], order[0], order[n - 1]
    c_r, c_1 = build.cd.chooser[a_r], build.cd.chooser[a_1]
    k_r, k_1 = p.deg(c_r), p.deg(c_1)
    d_before, d_at, d_after = build.boundary_context(a_n)
    face = build.m.face_of(d_at)
    center_r, head_r, foot_r = build.doodle(face, d_after, d_before, k_r, a_r)
    build.c_tilde.append(c_r)
    outer_face = build.m.face_of(d_after)
    center_1, head_1, foot_1 = build.doodle(outer_face, d_after, foot_r, k_1, a_1)
    build.c_tilde.append(c_1)
    build.log.append(StageOp("nested_doodles", {
        "around": a_n, "inner_label": a_r, "outer_label": a_1,
        "k_inner": k_r, "k_outer": k_1}))


def stage2(build):
    """Subtiles for the critical vertices not yet accounted for."""
    p = build.p
    infinity = require_polynomial(p).infinity
    ops_before = len(build.log)
    remaining = [c for c in p.finite_critical_vertices(infinity)
                 if c not in build.c_tilde]
    post = set(p.finite_postcritical(infinity))
    while remaining:
        in_post = [c for c in remaining if c in post]
        if in_post:
            c = in_post[0]
            k = p.deg(c)
            j = build.boundary_position(c)
            d_w = 2 * (j - 1)
            face = build.m.face_of(d_w)
            d_u = build.m.phi(d_w)
            if build.m.vertex_of(d_u) != _boundary_vertex_rep(j):
                raise ConstructionError("periodic critical %s has lost its corner" % c)
            build.parallel_edges(face, d_u, d_w, k - 1)
            build.c_tilde.append(c)
            build.log.append(StageOp("edges", {
                "from": c, "to_corner_before": c, "count": k - 1}))
        else:
            c = remaining[0]
            others = [x for x in remaining
                      if x not in post and x != c and p.tau(x) != p.tau(c)]
            if others:
                c2 = others[0]
                _stage2_pair(build, c, c2)
            else:
                images = {p.tau(x) for x in remaining}
                if len(images) != 1:
                    raise ConstructionError("distinct leftover images without a pair")
                _stage2_residue(build, c)
        build.check(full=True)
        remaining = [x for x in p.finite_critical_vertices(infinity)
                     if x not in build.c_tilde]
    got = build.count_subtiles()
    if got != build.degree:
        raise ConstructionError("stage 2 ended with %d subtiles, expected %d"
                                % (got, build.degree))
    if len(build.log) == ops_before:
        build.log.append(StageOp("noop", {"stage": 2}))
    return build


def _stage2_pair(build, c, c2):
    """Two independent non-postcritical criticals with distinct images."""
    p = build.p
    a_i, a_j = p.tau(c), p.tau(c2)
    k, k2 = p.deg(c), p.deg(c2)
    face = min(build.interior_faces())
    word = build.face_word(face)
    spot = [d for d, lab in word if lab == a_i]
    if not spot:
        corner = build.gap_corner(face, a_i)
        center = build.degenerate_doodle(face, corner, k, a_i)
        build.c_tilde.append(c)
        build.log.append(StageOp("degenerate_doodle", {
            "label": a_i, "k": k, "critical": c}))
        return
    d_v = spot[0]
    idx = [d for d, _ in word].index(d_v)
    d_before = word[(idx - 1) % len(word)][0]
    d_after = word[(idx + 1) % len(word)][0]
    center2, head2, foot2 = build.doodle(face, d_after, d_before, k2, a_j)
    outer_face = build.m.face_of(d_after)
    center1, head1, foot1 = build.doodle(outer_face, d_after, foot2, k, a_i)
    build.c_tilde.extend([c2, c])
    build.log.append(StageOp("nested_doodles", {
        "around_image": a_i, "inner_label": a_j, "outer_label": a_i,
        "k_inner": k2, "k_outer": k}))


def _stage2_residue(build, c):
    """All leftover criticals share one image; a label-free subtile exists."""
    p = build.p
    a_i = p.tau(c)
    k = p.deg(c)
    candidates = [f for f in build.interior_faces()
                  if all(lab != a_i for _, lab in build.face_word(f))]
    if not candidates:
        raise ConstructionError(
            "counting bound violated: no subtile free of image label %s" % a_i)
    face = min(candidates)
    corner = build.gap_corner(face, a_i)
    build.degenerate_doodle(face, corner, k, a_i)
    build.c_tilde.append(c)
    build.log.append(StageOp("degenerate_doodle", {
        "label": a_i, "k": k, "critical": c}))


def stage3(build):
    """Stickers until every subtile carries every image label."""
    added = 0
    for face in list(build.interior_faces()):
        current = face
        while True:
            word = [lab for _, lab in build.face_word(current) if lab is not None]
            missing = [a for a in build.order if a not in word]
            if not missing:
                break
            label = missing[0]
            corner = build.gap_corner(current, label)
            build.sticker(current, corner, label)
            added += 1
            current = build.m.face_of(corner)
    build.check(full=True)
    for face in build.interior_faces():
        word = [lab for _, lab in build.face_word(face) if lab is not None]
        if len(word) != build.n:
            raise ConstructionError("subtile is not a 2n-gon after stage 3")
    if added:
        build.log.append(StageOp("stickers", {"count": added}))
    return build


# -- assembly ---------------------------------------------------------------


@dataclass(frozen=True)
class FiniteSubdivisionRule:
    portrait: Portrait
    degree: int
    order: tuple
    chains: ChainDecomposition
    model: CombinatorialMap
    tile: CombinatorialMap
    subdivided_tile: CombinatorialMap
    sub_map: dict            # subdivided-tile dart -> tile dart
    stage_log: tuple
    image_label: dict = field(compare=False)  # finite vertex rep -> a-label


def _subtile_alignment(build, face_rep):
    """Orbit darts of a subtile aligned to tile positions 0..2n-1 via image
    labels; position 2i+1 carries image label a_{i+1}."""
    darts = build.m.face_darts(face_rep)
    n = build.n
    if len(darts) != 2 * n:
        raise ConstructionError("subtile of size %d, expected %d" % (len(darts), 2 * n))
    a1 = build.order[0]
    at = [i for i, d in enumerate(darts)
          if build.image_of(build.m.vertex_of(d)) == a1]
    if len(at) != 1:
        raise ConstructionError("subtile lacks a unique %s vertex" % a1)
    i0 = at[0]
    aligned = [darts[(i0 - 1 + m) % (2 * n)] for m in range(2 * n)]
    for m, d in enumerate(aligned):
        lab = build.image_of(build.m.vertex_of(d))
        want = None if m % 2 == 0 else build.order[(m - 1) // 2]
        got = None if lab in (None, INFINITY_LABEL) else lab
        if got != want:
            raise ConstructionError("subtile misaligned at position %d" % m)
    return aligned


def assemble_fsr(build):
    """Freeze the subdivision into an FSR with its dart-level subdivision map."""
    build.check(full=True)
    faces = build.interior_faces()
    if len(faces) != build.degree:
        raise ConstructionError("expected %d subtiles, found %d"
                                % (build.degree, len(faces)))
    sub_map = {}
    for face in faces:
        aligned = _subtile_alignment(build, face)
        for m, d in enumerate(aligned):
            sub_map[d] = 2 * m
    # outer boundary darts map onto the tile's own outer orbit positions
    for j in range(2 * build.n):
        sub_map[2 * j + 1] = 2 * j + 1
    labels = {}
    image = {}
    for d in range(build.m.num_darts):
        v = build.m.vertex_of(d)
        if v in labels or v in image:
            continue
        lab = build.image_of(v)
        if lab is None or lab == INFINITY_LABEL:
            labels[v] = INFINITY_LABEL
        else:
            labels[v] = lab
            image[v] = lab
    sub_tile = CombinatorialMap(build.m.sigma, build.m.alpha, labels,
                                dict(build.m.face_labels), build.m.new_edges)
    return FiniteSubdivisionRule(
        portrait=build.p, degree=build.degree, order=build.order,
        chains=build.cd, model=build.model,
        tile=build.tile0, subdivided_tile=sub_tile,
        sub_map=sub_map, stage_log=tuple(build.log), image_label=image)


def realize(p):
    """Run the full pipeline on a valid polynomial portrait."""
    cd = order_chains(p)
    model, tile = build_model_complex(cd)
    build = _Build(p, cd, model, tile)
    stage1(build)
    stage2(build)
    stage3(build)
    return assemble_fsr(build)


# -- iterated subdivision ----------------------------------------------------


class _Scheme:
    """Substitution data extracted once from the subdivided tile.

    Boundary darts are 0..4n-1 and never change; interior darts (4n..) are
    copied with an offset into every subtile of the current level.
    ``fans[m]`` lists the interior darts hanging in the corner at boundary
    position m, in rotation order between the arriving and leaving boundary
    darts.
    """

    def __init__(self, fsr):
        rt = fsr.subdivided_tile
        self.n = len(fsr.order)
        self.order = fsr.order
        self.degree = fsr.degree
        self.b = 4 * self.n
        self.rt_sigma = list(rt.sigma)
        self.rt_alpha = list(rt.alpha)
        self.inner_count = rt.num_darts - self.b
        idx = {a: i for i, a in enumerate(fsr.order)}
        p = fsr.portrait
        self.tau_idx = [idx[p.tau(a)] for a in fsr.order]
        rel = []
        for d in range(rt.num_darts):
            v = rt.vertex_of(d)
            lab = fsr.image_label.get(v)
            rel.append(idx[lab] if lab is not None else -1)
        self.rt_rel = rel
        self.rt_new = [False] * rt.num_darts
        for e in rt.new_edges:
            self.rt_new[e] = True
            self.rt_new[rt.alpha[e]] = True


def _level_one(scheme):
    return _LevelState(1, list(scheme.rt_sigma), list(scheme.rt_alpha),
                       list(scheme.rt_rel), list(scheme.rt_new), scheme)


class _LevelState:
    """Disk map of one subdivision level: permutations, per-dart rel labels
    (position of the vertex in the subtile the dart bounds) and per-dart
    new-edge flags."""

    def __init__(self, level, sigma, alpha, rel, new_dart, scheme):
        self.level = level
        self.sigma = sigma
        self.alpha = alpha
        self.rel = rel
        self.new_dart = new_dart
        self.scheme = scheme

    @property
    def num_darts(self):
        return len(self.sigma)


def _substitute(state, max_darts):
    """One subdivision step: paste a copy of the subdivided tile into every
    interior face of the level, splicing corner fans into the rotations."""
    sch = state.scheme
    b = sch.b
    n = sch.n
    sigma, alpha, rel = state.sigma, state.alpha, state.rel
    nd = len(sigma)
    phi = _kernel.face_permutation(sigma, alpha)
    face_of, reps = _kernel.orbits(phi)
    outer = face_of[1]
    faces = [r for i, r in enumerate(reps) if i != outer]
    total = nd + len(faces) * sch.inner_count
    if total > max_darts:
        raise CapExceeded("subdivision needs %d darts, cap is %d" % (total, max_darts))
    pred = [0] * nd
    for d in range(nd):
        pred[sigma[d]] = d
    new_sigma = sigma + [0] * (total - nd)
    new_alpha = alpha + [0] * (total - nd)
    new_rel = [sch.tau_idx[r] if r >= 0 else -1 for r in rel] + [0] * (total - nd)
    new_flag = state.new_dart + [True] * (total - nd)
    base = nd
    for f in faces:
        darts = [f]
        x = phi[f]
        while x != f:
            darts.append(x)
            x = phi[x]
        if len(darts) != 2 * n:
            raise ConstructionError("level face of size %d" % len(darts))
        i0 = [i for i, d in enumerate(darts) if rel[d] == 0]
        if len(i0) != 1:
            raise ConstructionError("face alignment not unique")
        aligned = [darts[(i0[0] - 1 + m) % (2 * n)] for m in range(2 * n)]
        off = base - b
        for x in range(b, b + sch.inner_count):
            s = sch.rt_sigma[x]
            new_sigma[off + x] = off + s if s >= b else aligned[s // 2]
            new_alpha[off + x] = off + sch.rt_alpha[x]
            new_rel[off + x] = sch.rt_rel[x]
        for m in range(2 * n):
            arrive = (2 * m - 1) % b
            s = sch.rt_sigma[arrive]
            new_sigma[pred[aligned[m]]] = off + s if s >= b else aligned[s // 2]
        base += sch.inner_count
    return _LevelState(state.level + 1, new_sigma, new_alpha, new_rel,
                       new_flag, sch)


class SphereLevel:
    """Glued sphere map of one subdivision level plus witness metadata."""

    def __init__(self, cmap, inf_vertex, post, image, level):
        self.map = cmap
        self.inf_vertex = inf_vertex
        self.post = post    # a-name -> vertex rep
        self.image = image  # finite vertex rep -> a-name it maps to
        self.level = level


def _glue(state):
    """Fold the disk boundary onto the star: the corner vertices merge into
    one central vertex and the two boundary edges at each finite vertex merge
    into one sticker edge."""
    sch = state.scheme
    n = sch.n
    b = sch.b
    old_sigma = state.sigma
    sigma = list(old_sigma)
    alpha = state.alpha
    dropped = set()
    for i in range(1, n + 1):
        dropped.add(4 * i - 2)
        dropped.add(4 * i - 1)
    pred = [0] * len(sigma)
    for d in range(len(sigma)):
        pred[old_sigma[d]] = d
    for i in range(1, n + 1):
        sigma[pred[4 * i - 2]] = 4 * i - 3
        sigma[4 * (i - 1)] = old_sigma[4 * i - 1]
    remap = {}
    for d in range(len(sigma)):
        if d not in dropped:
            remap[d] = len(remap)
    new_sigma = [0] * len(remap)
    new_alpha = [0] * len(remap)
    inv = [0] * len(remap)
    for d, nd in remap.items():
        new_sigma[nd] = remap[sigma[d]]
        new_alpha[nd] = remap[alpha[d]]
        inv[nd] = d
    new_edges = set()
    for nd in range(len(remap)):
        if nd < new_alpha[nd] and state.new_dart[inv[nd]]:
            new_edges.add(nd)
    orbit_of, vreps = _kernel.orbits(new_sigma)
    inf_vertex = vreps[orbit_of[remap[0]]]
    post = {sch.order[i - 1]: vreps[orbit_of[remap[4 * i - 3]]]
            for i in range(1, n + 1)}
    vlabels = {inf_vertex: INFINITY_LABEL}
    image = {}
    for v in vreps:
        if v == inf_vertex:
            continue
        r = state.rel[inv[v]]
        if r < 0:
            raise ConstructionError("finite sphere vertex without an image label")
        image[v] = sch.order[r]
        vlabels[v] = image[v]
    for a, v in post.items():
        vlabels[v] = a
    cmap = CombinatorialMap(tuple(new_sigma), tuple(new_alpha), vlabels, {},
                            frozenset(new_edges))
    return SphereLevel(cmap, inf_vertex, post, image, state.level)


class LevelCache:
    """Lazily computed disk and sphere maps of the iterated subdivision."""

    def __init__(self, fsr, max_darts=None):
        if max_darts is None:
            max_darts = int(os.environ.get(MAX_DARTS_ENV, DEFAULT_MAX_DARTS))
        self.scheme = _Scheme(fsr)
        self.max_darts = max_darts
        self._disk = {1: _level_one(self.scheme)}
        self._sphere = {}

    def disk(self, level):
        if level < 1:
            raise PreconditionError("subdivision level must be at least 1")
        top = max(self._disk)
        while top < level:
            self._disk[top + 1] = _substitute(self._disk[top], self.max_darts)
            top += 1
        return self._disk[level]

    def sphere(self, level):
        if level not in self._sphere:
            self._sphere[level] = _glue(self.disk(level))
        return self._sphere[level]


def iterate(fsr, level, *, max_darts=None):
    """The level-th subdivision of the model complex, as a sphere map."""
    return LevelCache(fsr, max_darts).sphere(level).map


# -- portrait extraction -----------------------------------------------------


def portrait_of_fsr(fsr):
    """Ramification portrait of the subdivision map, read off the realized
    level-one sphere: local degrees are edge-end counts at finite vertices."""
    sph = LevelCache(fsr).sphere(1)
    m = sph.map
    post_rep = {v: a for a, v in sph.post.items()}
    _, vreps = m.vertex_orbits()
    crit = []
    for v in vreps:
        if v == sph.inf_vertex:
            continue
        valence = len(m.vertex_darts(v))
        if valence > 1:
            crit.append((v, valence))
    succ_a = {a: sph.image[v] for a, v in sph.post.items()}
    reach = set()
    stack = [sph.image[v] for v, _ in crit]
    while stack:
        a = stack.pop()
        if a not in reach:
            reach.add(a)
            stack.append(succ_a[a])
    edges = {INF: (INF, fsr.degree)}
    for a in sorted(reach):
        edges[a] = (succ_a[a], len(m.vertex_darts(sph.post[a])))
    k = 0
    for v, valence in sorted(crit):
        if v in post_rep:
            continue
        edges["c%d" % k] = (sph.image[v], valence)
        k += 1
    return Portrait(edges)


# -- Levy exclusion witnesses -------------------------------------------------


@dataclass(frozen=True)
class LevyWitness:
    vertex: str
    kind: str        # "edge_to_infinity" | "enclosing_disk" | "exempt"
    level: int | None
    edges: tuple     # edge reps (least darts) in the glued map of that level
    enclosed: tuple  # postcritical names strictly inside (disk witnesses)


def _eventually_critical(p, a):
    """Least m >= 0 with the m-th image of a critical, or None."""
    x = a
    for m in range(2 * len(p.vertices) + 1):
        if p.deg(x) > 1:
            return m
        x = p.tau(x)
    return None


def _sphere_faces(sph):
    if not hasattr(sph, "_faces"):
        m = sph.map
        phi = _kernel.face_permutation(list(m.sigma), list(m.alpha))
        face_of, reps = _kernel.orbits(phi)
        darts_in = [[] for _ in reps]
        for d, f in enumerate(face_of):
            darts_in[f].append(d)
        vert_of = [0] * m.num_darts
        orbit_of, vreps = _kernel.orbits(list(m.sigma))
        for d in range(m.num_darts):
            vert_of[d] = vreps[orbit_of[d]]
        sph._faces = (face_of, darts_in, vert_of)
    return sph._faces


def _edge_witness(sph, a):
    m = sph.map
    va = sph.post[a]
    for d in m.vertex_darts(va):
        e = min(d, m.alpha[d])
        if e in m.new_edges and m.vertex_of(m.alpha[d]) == sph.inf_vertex:
            return e
    return None


def _enclosure(sph, e1, e2, post_names):
    """Interior postcritical census of the two sides of the 2-edge cycle.

    Lockstep BFS from the two sides of e1, so the cost is proportional to
    the smaller side; returns (census of smaller side, census of the other).
    """
    m = sph.map
    face_of, darts_in, vert_of = _sphere_faces(sph)
    cut = {e1, m.alpha[e1], e2, m.alpha[e2]}
    start_a = face_of[e1]
    start_b = face_of[m.alpha[e1]]
    if start_a == start_b:
        return None  # cycle does not separate: not a witness pair
    cycle_verts = {vert_of[e1], vert_of[m.alpha[e1]]}
    comp_a, comp_b = {start_a}, {start_b}
    stack_a, stack_b = [start_a], [start_b]

    def step(comp, stack, other_comp):
        f = stack.pop()
        for d in darts_in[f]:
            if d in cut:
                continue
            g = face_of[m.alpha[d]]
            if g in other_comp:
                return False  # sides met: pair does not separate
            if g not in comp:
                comp.add(g)
                stack.append(g)
        return True

    small = None
    while True:
        if stack_a:
            if not step(comp_a, stack_a, comp_b):
                return None
            if not stack_a:
                small = comp_a
                break
        else:
            small = comp_a
            break
        if stack_b:
            if not step(comp_b, stack_b, comp_a):
                return None
            if not stack_b:
                small = comp_b
                break
        else:
            small = comp_b
            break
    census = set()
    for f in small:
        for d in darts_in[f]:
            v = vert_of[d]
            if v in cycle_verts:
                continue
            name = post_names.get(v)
            if name is not None:
                census.add(name)
    big_census = set(post_names.values()) - census
    for v in cycle_verts:
        big_census.discard(post_names.get(v))
    return census, big_census


def _find_disk(sph, a):
    """A pair of parallel new edges through the center enclosing exactly a."""
    m = sph.map
    post_names = {v: name for name, v in sph.post.items()}
    groups = {}
    for d in m.vertex_darts(sph.inf_vertex):
        e = min(d, m.alpha[d])
        if e not in m.new_edges:
            continue
        other = m.vertex_of(m.alpha[d])
        groups.setdefault(other, []).append(e)
    for other in sorted(groups):
        edges = sorted(set(groups[other]))
        for i in range(len(edges)):
            for j in range(i + 1, len(edges)):
                res = _enclosure(sph, edges[i], edges[j], post_names)
                if res is None:
                    continue
                small, big = res
                if small == {a} or big == {a}:
                    return LevyWitness(a, "enclosing_disk", sph.level,
                                       (edges[i], edges[j]), (a,))
    return None


def levy_witnesses(fsr, *, max_darts=None):
    """One verified witness per finite postcritical vertex.

    Eventually-critical vertices get a new edge to the center; vertices of
    type-1 chains get an enclosing pair of new edges at the prescribed level;
    the single residual vertex (last element of a type-1 chain followed by a
    type-2 chain) is searched for an enclosing disk across levels and marked
    exempt when none exists.
    """
    cache = LevelCache(fsr, max_darts)
    p = fsr.portrait
    order = fsr.order
    n = len(order)
    cap = n + 2
    chains = fsr.chains.chains
    chain_index = {}
    for k, ch in enumerate(chains):
        for v in ch.vertices:
            chain_index[v] = k
    pos = {a: i + 1 for i, a in enumerate(order)}
    witnesses = []
    exempt = 0
    for a in order:
        m_crit = _eventually_critical(p, a)
        if m_crit is not None:
            level = m_crit + 1
            if level > cap:
                raise WitnessError("edge witness for %s needs level %d > cap %d"
                                   % (a, level, cap))
            e = _edge_witness(cache.sphere(level), a)
            if e is None:
                raise WitnessError("no new edge joins %s to the center at level %d"
                                   % (a, level))
            witnesses.append(LevyWitness(a, "edge_to_infinity", level, (e,), ()))
            continue
        ch = chains[chain_index[a]]
        if ch.kind != TYPE1:
            raise WitnessError("non-eventually-critical vertex %s in a type-2 chain" % a)
        nxt = chains[(chain_index[a] + 1) % len(chains)]
        if nxt.kind == TYPE2 and a == ch.last:
            found = None
            for level in range(1, cap + 1):
                found = _find_disk(cache.sphere(level), a)
                if found is not None:
                    break
            if found is not None:
                witnesses.append(found)
            else:
                witnesses.append(LevyWitness(a, "exempt", None, (), ()))
                exempt += 1
            continue
        level = pos[ch.last] - pos[a] + 1
        if level > cap:
            raise WitnessError("disk witness for %s needs level %d > cap %d"
                               % (a, level, cap))
        found = _find_disk(cache.sphere(level), a)
        if found is None:
            raise WitnessError("no enclosing disk for %s at level %d" % (a, level))
        witnesses.append(found)
    if exempt > 1:
        raise WitnessError("more than one exempt vertex")
    return tuple(witnesses)
