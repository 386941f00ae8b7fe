"""Obstruction classification of valid polynomial portraits.

Two families of conditions are evaluated: the completely-unobstructed ones
(every realization is unobstructed) and the constructively-obstructed ones
(an obstructed realization exists, built by :mod:`portrait_forge.rose`).
Exactly one family matches any valid polynomial portrait; the check is an
assertion, not an input error.
"""

from __future__ import annotations

from dataclasses import dataclass

from .portrait import analyze_cycles, require_polynomial


def _prime_power(n):
    """(p, k) with n == p**k, or None."""
    if n < 2:
        return None
    for p in range(2, n + 1):
        if p * p > n and n % p != 0:
            return (n, 1)
        if n % p == 0:
            k = 0
            while n % p == 0:
                n //= p
                k += 1
            return (p, k) if n == 1 else None
    return None


@dataclass(frozen=True)
class Classification:
    thm4_condition: str | None  # 'i'..'iv': only unobstructed realizations
    thm3_case: str | None       # 'i'..'iv': an obstructed realization exists
    thm3_params: dict | None
    thm2_condition: str | None  # 'i'/'ii' (needs at least 4 postcritical vertices)
    levy_berstein: bool
    kelsey_cases: tuple


def _cycle_enumeration(p, cycle, start):
    """The cycle listed from ``start`` following the successor map."""
    i = cycle.index(start)
    return tuple(cycle[i:] + cycle[:i])


def _grid_rotation_exists(p, cycle, pk):
    """True if some rotation puts every critical value at an index that is a
    multiple of p**(k-1)."""
    prime, k = pk
    step = prime ** (k - 1)
    n = len(cycle)
    values = set(p.finite_critical_values(_inf(p)))
    positions = [i for i, v in enumerate(cycle) if v in values]
    for shift in range(n):
        if all((i - shift) % n % step == 0 for i in positions):
            return True
    return False


def _inf(p):
    return require_polynomial(p).infinity


def _max_incoming_critical_value(p, infinity, exclude=()):
    """Finite critical value with the most incoming edges from critical
    vertices, least id on ties."""
    crit = set(p.finite_critical_vertices(infinity))
    best = None
    best_count = -1
    for v in p.finite_critical_values(infinity):
        if v in exclude:
            continue
        count = sum(1 for c in crit if p.tau(c) == v)
        if count > best_count or (count == best_count and v < best):
            best, best_count = v, count
    return best, best_count


def classify(p):
    report = require_polynomial(p)
    infinity = report.infinity
    d = report.degree
    cycles = analyze_cycles(p)
    finite = set(p.finite_postcritical(infinity))
    n_post_total = len(finite) + 1
    non_attr = cycles.non_attractors()
    values = set(p.finite_critical_values(infinity))

    levy_berstein = len(non_attr) == 0

    # single non-attractor cycle through every finite postcritical vertex
    full_cycle = None
    for c in non_attr:
        if set(c.vertices) == finite:
            full_cycle = c
            break
    pk = _prime_power(full_cycle.length) if full_cycle is not None else None

    # completely-unobstructed conditions; the all-attractor test precedes the
    # small-postcritical-set test so that the tag always matches the
    # Levy-Berstein predicate
    thm4 = None
    if levy_berstein:
        thm4 = "ii"
    elif n_post_total <= 3:
        thm4 = "i"
    elif len(non_attr) == 1 and non_attr[0].length == 1:
        thm4 = "iii"
    elif full_cycle is not None and pk is not None and \
            _grid_rotation_exists(p, full_cycle.vertices, pk):
        thm4 = "iv"

    thm3 = None
    params = None
    if n_post_total >= 4:
        if full_cycle is not None and pk is not None and \
                not _grid_rotation_exists(p, full_cycle.vertices, pk):
            u, _ = _max_incoming_critical_value(p, infinity)
            enum = _cycle_enumeration(p, full_cycle.vertices, u)
            step = pk[0] ** (pk[1] - 1)
            off_grid = [i for i, w in enumerate(enum)
                        if w in values and i % step != 0]
            thm3 = "i"
            params = {"p": pk[0], "k": pk[1], "u": u,
                      "v": enum[off_grid[0]], "m": step}
        elif full_cycle is not None and full_cycle.length >= 2 and pk is None:
            u, _ = _max_incoming_critical_value(p, infinity)
            enum = _cycle_enumeration(p, full_cycle.vertices, u)
            v = min(values - {u})
            i = enum.index(v)
            n_len = full_cycle.length
            m = min(m for m in range(2, n_len) if n_len % m == 0 and i % m != 0)
            thm3 = "ii"
            params = {"length": n_len, "u": u, "v": v, "m": m}
        else:
            witness = None
            for c in non_attr:
                if c.length >= 2 and not values <= set(c.vertices):
                    witness = c
                    break
            if witness is not None:
                thm3 = "iii"
                params = {"cycle": witness.vertices}
            else:
                fixed = [c.vertices[0] for c in non_attr if c.length == 1]
                if len(fixed) >= 2:
                    thm3 = "iv"
                    params = {"pair": tuple(sorted(fixed)[:2])}

    assert (thm4 is None) != (thm3 is None), \
        "classification dichotomy violated for %r" % (p,)

    thm2 = None
    if n_post_total >= 4:
        if len(non_attr) == 1 and non_attr[0].length == 1:
            thm2 = "i"
        elif full_cycle is not None and pk is not None and \
                _grid_rotation_exists(p, full_cycle.vertices, pk):
            thm2 = "ii"

    kelsey = []
    no_value_cycles = [c for c in cycles.finite_cycles()
                       if not c.contains_critical_value]
    if any(c.length >= 2 for c in no_value_cycles):
        kelsey.append(1)
    if len(no_value_cycles) >= 2:
        kelsey.append(2)
    if sum(1 for c in non_attr if c.length >= 2) >= 2:
        kelsey.append(3)
    if len(non_attr) >= 4:
        kelsey.append(4)

    return Classification(thm4, thm3, params, thm2, levy_berstein, tuple(kelsey))
