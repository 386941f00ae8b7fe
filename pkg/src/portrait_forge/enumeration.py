"""Exhaustive enumeration of abstract polynomial portraits up to isomorphism.

Strategy: enumerate functional graphs on the finite postcritical set (one
canonical representative per unweighted isomorphism class), then decorate
them with critical weights in all ways compatible with the degree: a
partition of d-1 is distributed between postcritical vertices (which become
critical) and anonymous non-postcritical critical vertices aimed at chosen
targets.  Candidates are validated and deduplicated by canonical form.
"""

from __future__ import annotations

from itertools import product

from .errors import CapExceeded, PreconditionError
from .portrait import INF, Portrait, canonical_form, canonical_relabel, validate

DEFAULT_CAP = 2_000_000


def _partitions(total, maxpart=None):
    """Partitions of ``total`` into nonincreasing positive parts."""
    if maxpart is None:
        maxpart = total
    if total == 0:
        yield ()
        return
    for first in range(min(total, maxpart), 0, -1):
        for rest in _partitions(total - first, first):
            yield (first,) + rest


_REPS_CACHE = {}


def _functional_graph_reps(n):
    """One representative per isomorphism class of maps {0..n-1} -> itself."""
    if n in _REPS_CACHE:
        return _REPS_CACHE[n]
    seen = {}
    for tau in product(range(n), repeat=n):
        key = _unweighted_canonical(tau)
        if key not in seen:
            seen[key] = tau
    reps = [seen[k] for k in sorted(seen)]
    _REPS_CACHE[n] = reps
    return reps


def _unweighted_canonical(tau):
    p = Portrait({str(i): (str(t), 1) for i, t in enumerate(tau)})
    return canonical_form(p)


def enumerate_polynomial_portraits(degree, max_finite_postcritical, *, cap=DEFAULT_CAP):
    """Yield canonical representatives of every isomorphism class of valid
    abstract polynomial portraits of the given degree with at most
    ``max_finite_postcritical`` finite postcritical vertices.

    Deterministic order (sorted canonical encodings); raises
    :class:`CapExceeded` when more than ``cap`` raw candidates arise.
    """
    if degree < 2:
        raise PreconditionError("degree must be at least 2")
    if max_finite_postcritical < 0:
        raise PreconditionError("max_finite_postcritical must be nonnegative")
    found = {}
    budget = cap
    for n in range(1, max_finite_postcritical + 1):
        for tau in _functional_graph_reps(n):
            for portrait in _decorations(degree, n, tau):
                budget -= 1
                if budget < 0:
                    raise CapExceeded("enumeration cap of %d candidates exceeded" % cap)
                report = validate(portrait)
                if not (report.is_polynomial and report.degree == degree):
                    continue
                if report.finite_postcritical_count != n:
                    continue
                key = canonical_form(portrait)
                if key not in found:
                    found[key] = canonical_relabel(portrait)
    for key in sorted(found):
        yield found[key]


def _decorations(degree, n, tau):
    """All critical-weight decorations of a postcritical skeleton.

    Each part of a partition of degree-1 is the excess weight of one finite
    critical vertex, realized either as a postcritical vertex (part places
    are then distinct) or as an anonymous outside vertex aimed at a target.
    """
    choices = [("post", v) for v in range(n)] + [("ext", v) for v in range(n)]
    for parts in _partitions(degree - 1):
        k = len(parts)
        for combo in product(range(len(choices)), repeat=k):
            # canonical order among equal parts avoids duplicate work
            ok = True
            for i in range(1, k):
                if parts[i] == parts[i - 1] and combo[i] < combo[i - 1]:
                    ok = False
                    break
            if not ok:
                continue
            placed = [choices[c] for c in combo]
            post_targets = [v for kind, v in placed if kind == "post"]
            if len(set(post_targets)) != len(post_targets):
                continue
            edges = {INF: (INF, degree)}
            weights = {}
            for i, (kind, v) in enumerate(placed):
                if kind == "post":
                    weights[str(v)] = parts[i] + 1
            for v in range(n):
                edges[str(v)] = (str(tau[v]), weights.get(str(v), 1))
            ext = 0
            for i, (kind, v) in enumerate(placed):
                if kind == "ext":
                    edges["x%d" % ext] = (str(v), parts[i] + 1)
                    ext += 1
            yield Portrait(edges)
