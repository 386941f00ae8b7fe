"""Pure-Python kernel: orbit scans over dart permutations.

The compiled twin (``_fast.pyx``) implements the same four functions with the
same semantics; both operate on plain lists of ints.
"""

BACKEND = "pure"


def orbits(perm):
    """Orbit decomposition of a permutation given as a list.

    Returns ``(orbit_of, reps)`` where ``orbit_of[i]`` is the index into
    ``reps`` of the orbit containing ``i`` and ``reps[k]`` is the smallest
    element of orbit ``k``.  Orbits are numbered by increasing representative.
    """
    n = len(perm)
    orbit_of = [-1] * n
    reps = []
    for start in range(n):
        if orbit_of[start] >= 0:
            continue
        idx = len(reps)
        reps.append(start)
        j = start
        while orbit_of[j] < 0:
            orbit_of[j] = idx
            j = perm[j]
    return orbit_of, reps


def face_permutation(sigma, alpha):
    """The face operator phi = sigma o alpha (apply alpha first)."""
    return [sigma[a] for a in alpha]


def is_transitive(sigma, alpha):
    """True if <sigma, alpha> acts transitively on the darts."""
    n = len(sigma)
    if n == 0:
        return True
    seen = [False] * n
    stack = [0]
    seen[0] = True
    count = 1
    while stack:
        d = stack.pop()
        for e in (sigma[d], alpha[d]):
            if not seen[e]:
                seen[e] = True
                count += 1
                stack.append(e)
    return count == n


def face_components(face_of, nfaces, alpha, cut):
    """Connected components of the face-adjacency graph with some edges cut.

    ``face_of`` maps darts to face indices; ``cut`` is a set of darts whose
    edges are ignored when crossing between faces (list both darts of each
    cut edge).  Returns a list mapping face index -> component id, components
    numbered by smallest face index.
    """
    darts_in = [[] for _ in range(nfaces)]
    for d, f in enumerate(face_of):
        darts_in[f].append(d)
    comp = [-1] * nfaces
    ncomp = 0
    for fstart in range(nfaces):
        if comp[fstart] >= 0:
            continue
        comp[fstart] = ncomp
        stack = [fstart]
        while stack:
            f = stack.pop()
            for d in darts_in[f]:
                if d in cut:
                    continue
                g = face_of[alpha[d]]
                if comp[g] < 0:
                    comp[g] = ncomp
                    stack.append(g)
        ncomp += 1
    return comp
