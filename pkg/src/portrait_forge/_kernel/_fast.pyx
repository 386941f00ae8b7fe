# cython: boundscheck=False, wraparound=False, language_level=3
"""Compiled kernel: same contract as ``pure.py``, C loops for the hot scans."""

from cpython.mem cimport PyMem_Free, PyMem_Malloc

BACKEND = "fast"


cdef long* _as_array(object seq, Py_ssize_t n) except NULL:
    cdef long* buf = <long*> PyMem_Malloc(n * sizeof(long))
    if buf == NULL:
        raise MemoryError()
    cdef Py_ssize_t i
    for i in range(n):
        buf[i] = seq[i]
    return buf


def orbits(perm):
    cdef Py_ssize_t n = len(perm)
    cdef long* p = _as_array(perm, n)
    cdef long* orb = <long*> PyMem_Malloc(n * sizeof(long))
    if orb == NULL:
        PyMem_Free(p)
        raise MemoryError()
    cdef Py_ssize_t i, j
    cdef long idx
    reps = []
    try:
        for i in range(n):
            orb[i] = -1
        for i in range(n):
            if orb[i] >= 0:
                continue
            idx = len(reps)
            reps.append(i)
            j = i
            while orb[j] < 0:
                orb[j] = idx
                j = p[j]
        orbit_of = [orb[i] for i in range(n)]
    finally:
        PyMem_Free(p)
        PyMem_Free(orb)
    return orbit_of, reps


def face_permutation(sigma, alpha):
    cdef Py_ssize_t n = len(sigma)
    cdef long* s = _as_array(sigma, n)
    cdef long* a = _as_array(alpha, n)
    cdef Py_ssize_t i
    try:
        out = [0] * n
        for i in range(n):
            out[i] = s[a[i]]
    finally:
        PyMem_Free(s)
        PyMem_Free(a)
    return out


def is_transitive(sigma, alpha):
    cdef Py_ssize_t n = len(sigma)
    if n == 0:
        return True
    cdef long* s = _as_array(sigma, n)
    cdef long* a = _as_array(alpha, n)
    cdef char* seen = <char*> PyMem_Malloc(n * sizeof(char))
    cdef long* stack = <long*> PyMem_Malloc(n * sizeof(long))
    if seen == NULL or stack == NULL:
        PyMem_Free(s); PyMem_Free(a)
        if seen != NULL: PyMem_Free(seen)
        if stack != NULL: PyMem_Free(stack)
        raise MemoryError()
    cdef Py_ssize_t i, top, count
    cdef long d, e, f
    try:
        for i in range(n):
            seen[i] = 0
        stack[0] = 0
        seen[0] = 1
        top = 1
        count = 1
        while top > 0:
            top -= 1
            d = stack[top]
            e = s[d]
            if not seen[e]:
                seen[e] = 1
                count += 1
                stack[top] = e
                top += 1
            f = a[d]
            if not seen[f]:
                seen[f] = 1
                count += 1
                stack[top] = f
                top += 1
        return count == n
    finally:
        PyMem_Free(s)
        PyMem_Free(a)
        PyMem_Free(seen)
        PyMem_Free(stack)


def face_components(face_of, nfaces, alpha, cut):
    cdef Py_ssize_t n = len(face_of)
    cdef Py_ssize_t nf = nfaces
    cdef long* fo = _as_array(face_of, n)
    cdef long* al = _as_array(alpha, n)
    cdef char* iscut = <char*> PyMem_Malloc(n * sizeof(char))
    # darts grouped by face: counting sort
    cdef long* start = <long*> PyMem_Malloc((nf + 1) * sizeof(long))
    cdef long* darts = <long*> PyMem_Malloc(n * sizeof(long))
    cdef long* fill = <long*> PyMem_Malloc(nf * sizeof(long))
    cdef long* comp = <long*> PyMem_Malloc(nf * sizeof(long))
    cdef long* stack = <long*> PyMem_Malloc(nf * sizeof(long))
    if (iscut == NULL or start == NULL or darts == NULL or fill == NULL
            or comp == NULL or stack == NULL):
        raise MemoryError()
    cdef Py_ssize_t i, top
    cdef long f, g, d, k, ncomp
    try:
        for i in range(n):
            iscut[i] = 0
        for d in cut:
            iscut[d] = 1
        for i in range(nf + 1):
            start[i] = 0
        for i in range(n):
            start[fo[i] + 1] += 1
        for i in range(nf):
            start[i + 1] += start[i]
            fill[i] = start[i]
        for i in range(n):
            darts[fill[fo[i]]] = i
            fill[fo[i]] += 1
        for i in range(nf):
            comp[i] = -1
        ncomp = 0
        for i in range(nf):
            if comp[i] >= 0:
                continue
            comp[i] = ncomp
            stack[0] = i
            top = 1
            while top > 0:
                top -= 1
                f = stack[top]
                for k in range(start[f], start[f + 1]):
                    d = darts[k]
                    if iscut[d]:
                        continue
                    g = fo[al[d]]
                    if comp[g] < 0:
                        comp[g] = ncomp
                        stack[top] = g
                        top += 1
            ncomp += 1
        return [comp[i] for i in range(nf)]
    finally:
        PyMem_Free(fo)
        PyMem_Free(al)
        PyMem_Free(iscut)
        PyMem_Free(start)
        PyMem_Free(darts)
        PyMem_Free(fill)
        PyMem_Free(comp)
        PyMem_Free(stack)
