"""Weighted functional graphs (ramification portraits) and their validation.

A portrait assigns every vertex one successor and a positive integer weight.
Vertices of weight > 1 are critical; a vertex is postcritical if some
critical vertex reaches it in one or more steps.  The abstract-portrait
axioms are: every vertex critical or postcritical, the weights satisfy
sum(weight-1) = 2d-2 over critical vertices for an integer degree d >= 2,
and incoming weight sums never exceed d.  A polynomial portrait additionally
has a fixed vertex of full weight d, conventionally named ``inf``.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import PreconditionError

INF = "inf"


class Portrait:
    """Immutable weighted functional graph."""

    __slots__ = ("_items", "_succ", "_weight")

    def __init__(self, edges):
        """edges: mapping vertex -> (successor, weight), vertices are strings."""
        items = []
        mapping = dict(edges)
        for v in sorted(mapping):
            to, w = mapping[v]
            if not isinstance(w, int) or w < 1:
                raise ValueError("weight of %r must be a positive integer" % v)
            items.append((str(v), str(to), w))
        succ = {v: t for v, t, _ in items}
        for v, t, _ in items:
            if t not in succ:
                raise ValueError("successor %r of %r is not a vertex" % (t, v))
        self._items = tuple(items)
        self._succ = succ
        self._weight = {v: w for v, _, w in items}

    @property
    def vertices(self):
        return tuple(v for v, _, _ in self._items)

    def tau(self, v):
        return self._succ[v]

    def deg(self, v):
        return self._weight[v]

    def items(self):
        return self._items

    def __eq__(self, other):
        return isinstance(other, Portrait) and self._items == other._items

    def __hash__(self):
        return hash(self._items)

    def __repr__(self):
        body = ", ".join("%s->%s[%d]" % it for it in self._items)
        return "Portrait(%s)" % body

    # -- derived sets -------------------------------------------------------

    def critical_vertices(self):
        return tuple(v for v in self.vertices if self.deg(v) > 1)

    def postcritical_vertices(self):
        out = set()
        for c in self.critical_vertices():
            v = self.tau(c)
            while v not in out:
                out.add(v)
                v = self.tau(v)
        return tuple(sorted(out))

    def critical_values(self):
        return tuple(sorted({self.tau(c) for c in self.critical_vertices()}))

    def incoming_weight(self, v):
        return sum(self.deg(x) for x in self.vertices if self.tau(x) == v)

    # finite variants relative to a polynomial infinity vertex

    def finite_critical_vertices(self, infinity):
        return tuple(v for v in self.critical_vertices() if v != infinity)

    def finite_postcritical(self, infinity):
        return tuple(v for v in self.postcritical_vertices() if v != infinity)

    def finite_critical_values(self, infinity):
        return tuple(v for v in self.critical_values() if v != infinity)

    def chain_generators(self, infinity):
        """The set A: finite critical values hit by a critical vertex outside
        the postcritical set."""
        post = set(self.postcritical_vertices())
        out = {self.tau(c) for c in self.critical_vertices()
               if c not in post and self.tau(c) != infinity}
        return tuple(sorted(out))


@dataclass(frozen=True)
class ValidationReport:
    degree: int | None
    is_abstract: bool
    is_polynomial: bool
    infinity: str | None
    finite_postcritical_count: int
    violations: tuple

    def violation_tags(self):
        return tuple(v[0] for v in self.violations)


def validate(p):
    """Check the abstract-portrait axioms; violations are data, not errors."""
    violations = []
    critical = p.critical_vertices()
    total = sum(p.deg(v) - 1 for v in critical)
    degree = None
    if total == 0 or total % 2 != 0:
        if total == 0:
            violations.append(("DegreeBelowTwo", None))
        else:
            violations.append(("RiemannHurwitz", total))
    else:
        degree = total // 2 + 1
    post = set(p.postcritical_vertices())
    for v in p.vertices:
        if p.deg(v) == 1 and v not in post:
            violations.append(("OrphanVertex", v))
    if degree is not None:
        for v in p.vertices:
            if p.incoming_weight(v) > degree:
                violations.append(("IncomingWeightExceedsDegree", v))
    is_abstract = not violations
    infinity = None
    is_polynomial = False
    n_finite = 0
    if is_abstract:
        full_fixed = [v for v in p.vertices
                      if p.tau(v) == v and p.deg(v) == degree]
        if full_fixed:
            is_polynomial = True
            infinity = INF if INF in full_fixed else full_fixed[0]
            if len(full_fixed) > 1:
                violations.append(("MultipleFullFixedVertices", tuple(full_fixed)))
            n_finite = len(p.finite_postcritical(infinity))
            # incoming-sum axiom forces the loop at infinity to be alone
            assert p.incoming_weight(infinity) == degree
    return ValidationReport(degree, is_abstract, is_polynomial, infinity,
                            n_finite, tuple(violations))


def require_polynomial(p):
    report = validate(p)
    if not report.is_polynomial:
        raise PreconditionError("portrait is not a valid polynomial portrait: %s"
                                % (report.violations or "no full-degree fixed vertex",))
    return report


@dataclass(frozen=True)
class Cycle:
    vertices: tuple
    length: int
    is_attractor: bool
    is_finite: bool
    contains_critical_value: bool


@dataclass(frozen=True)
class CycleReport:
    cycles: tuple
    tail_length: dict  # vertex -> steps to reach its cycle

    def finite_cycles(self):
        return tuple(c for c in self.cycles if c.is_finite)

    def non_attractors(self):
        return tuple(c for c in self.cycles if c.is_finite and not c.is_attractor)


def analyze_cycles(p, *, require_abstract=True):
    """All cycles of the successor map, ordered by least vertex id."""
    if require_abstract and not validate(p).is_abstract:
        raise PreconditionError("analyze_cycles requires a valid abstract portrait")
    report = validate(p)
    infinity = report.infinity
    values = set(p.critical_values())
    on_cycle = {}
    nverts = len(p.vertices)
    for v in p.vertices:
        x = p.tau(v)
        steps = 1
        while x != v and steps <= nverts:
            x = p.tau(x)
            steps += 1
        if x == v:
            cyc = [v]
            y = p.tau(v)
            while y != v:
                cyc.append(y)
                y = p.tau(y)
            start = min(cyc)
            i = cyc.index(start)
            on_cycle.setdefault(start, tuple(cyc[i:] + cyc[:i]))
    cycles = []
    for start in sorted(on_cycle):
        cyc = on_cycle[start]
        cycles.append(Cycle(
            vertices=cyc,
            length=len(cyc),
            is_attractor=any(p.deg(v) > 1 for v in cyc),
            is_finite=not (infinity is not None and cyc == (infinity,)),
            contains_critical_value=any(v in values for v in cyc),
        ))
    cycle_vertices = {v for c in cycles for v in c.vertices}
    tails = {}
    for v in p.vertices:
        x, t = v, 0
        while x not in cycle_vertices:
            x = p.tau(x)
            t += 1
        tails[v] = t
    return CycleReport(tuple(cycles), tails)


@dataclass(frozen=True)
class BranchData:
    per_value: dict  # critical value -> sorted tuple of local degrees, padded with 1s
    passport: tuple  # sorted multiset of the tuples

    def __eq__(self, other):
        return isinstance(other, BranchData) and self.passport == other.passport


def branch_data(p):
    """Passport of the portrait: per critical value, the weights of its
    critical preimages padded with 1-entries to total the degree."""
    report = validate(p)
    if not report.is_abstract:
        raise PreconditionError("branch_data requires a valid abstract portrait")
    d = report.degree
    per_value = {}
    for w in p.critical_values():
        degs = sorted((p.deg(c) for c in p.critical_vertices() if p.tau(c) == w),
                      reverse=True)
        pad = d - sum(degs)
        assert pad >= 0
        per_value[w] = tuple(degs + [1] * pad)
    passport = tuple(sorted(per_value.values(), reverse=True))
    return BranchData(per_value, passport)


# -- canonical form -------------------------------------------------------


def _component_encodings(p):
    cycle_set = set()
    report = analyze_cycles(p, require_abstract=False)
    for c in report.cycles:
        cycle_set.update(c.vertices)
    children = {v: [] for v in p.vertices}
    for v in p.vertices:
        t = p.tau(v)
        if v not in cycle_set or t not in cycle_set:
            # tree edge (cycle-to-cycle edges are the cycle itself)
            children[t].append(v)
    # trees hanging off cycles: AHU encoding with weights
    memo = {}

    def enc(v):
        if v in memo:
            return memo[v]
        subs = sorted(enc(u) for u in children[v] if u not in cycle_set)
        memo[v] = (p.deg(v), tuple(subs))
        return memo[v]

    comps = []
    for c in report.cycles:
        ring = [enc(v) for v in c.vertices]
        k = len(ring)
        best = min(tuple(ring[(i + j) % k] for j in range(k)) for i in range(k))
        comps.append(best)
    return sorted(comps)


def canonical_form(p):
    """Deterministic encoding invariant under vertex renaming."""
    return repr(_component_encodings(p))


def is_isomorphic(p, q):
    return canonical_form(p) == canonical_form(q)


def canonical_relabel(p):
    """The same portrait with canonical vertex names.

    Cycles are ordered by their encodings; each vertex gets a name ``v00``,
    ``v01``, ... in a deterministic traversal, except that a full-degree
    fixed vertex of a valid polynomial portrait is named ``inf``.
    """
    report = analyze_cycles(p, require_abstract=False)
    cycle_set = {v for c in report.cycles for v in c.vertices}
    children = {v: [] for v in p.vertices}
    for v in p.vertices:
        t = p.tau(v)
        if v not in cycle_set or t not in cycle_set:
            children[t].append(v)
    memo = {}

    def enc(v):
        if v in memo:
            return memo[v]
        subs = sorted(enc(u) for u in children[v] if u not in cycle_set)
        memo[v] = (p.deg(v), tuple(subs))
        return memo[v]

    ordered = []

    def visit(v):
        ordered.append(v)
        for u in sorted((u for u in children[v] if u not in cycle_set),
                        key=lambda u: (enc(u), u)):
            visit(u)

    keyed = []
    for c in report.cycles:
        ring = [enc(v) for v in c.vertices]
        k = len(ring)
        rot = min(range(k),
                  key=lambda i: (tuple(ring[(i + j) % k] for j in range(k)),
                                 c.vertices[i]))
        keyed.append((tuple(ring[(rot + j) % k] for j in range(k)),
                      tuple(c.vertices[(rot + j) % k] for j in range(k))))
    for _, cyc in sorted(keyed):
        for v in cyc:
            visit(v)
    val = validate(p)
    names = {}
    counter = 0
    for v in ordered:
        if val.is_polynomial and v == val.infinity:
            names[v] = INF
        else:
            names[v] = "v%02d" % counter
            counter += 1
    return Portrait({names[v]: (names[p.tau(v)], p.deg(v)) for v in p.vertices})
