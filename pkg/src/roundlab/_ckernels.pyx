# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled computational kernels (fast backend).

Same surface and same results as _pykernels.py; kernels.py selects one at
import time. Loops mirror the pure twin exactly, including float
accumulation order, so the two backends agree bitwise on the same input.
"""

import itertools

from libc.stdlib cimport free, malloc
from libc.string cimport memset

BACKEND = "compiled"


cdef inline int _cyc(int v, int units) nogil:
    if 2 * v <= units:
        return v
    return units - v


def pair_census(int coords, int units):
    """Census of unordered point pairs by (delta, support) difference class.

    Sweeps all nonzero difference vectors w; the U^C/2 halving accounts for
    the {w, -w} orbit exactly (antipodal vectors are their own negatives and
    pair every point with a single partner). Returns (class counts, count of
    pairs whose nonzero coordinates are not all at one cyclic distance).
    """
    total = int(units) ** int(coords)
    if total > (1 << 62):
        from . import _pykernels
        return _pykernels.pair_census(coords, units)
    half = total // 2
    cdef long long n_vecs = <long long> total
    cdef int half_u = units // 2
    cdef int tab_w = coords + 1
    cdef long long* tab = <long long*> malloc(
        (half_u + 1) * tab_w * sizeof(long long))
    cdef int* w = <int*> malloc(coords * sizeof(int))
    if tab == NULL or w == NULL:
        free(tab)
        free(w)
        raise MemoryError()
    memset(tab, 0, (half_u + 1) * tab_w * sizeof(long long))
    memset(w, 0, coords * sizeof(int))
    cdef long long unclassified_vecs = 0
    cdef long long k
    cdef int i, v, d, delta, support
    cdef bint uniform
    with nogil:
        for k in range(n_vecs):
            delta = 0
            support = 0
            uniform = True
            for i in range(coords):
                v = w[i]
                if v == 0:
                    continue
                d = _cyc(v, units)
                support += 1
                if delta == 0:
                    delta = d
                elif d != delta:
                    uniform = False
                    break
            if support > 0:
                if uniform:
                    tab[delta * tab_w + support] += 1
                else:
                    unclassified_vecs += 1
            i = coords - 1
            while i >= 0:
                w[i] += 1
                if w[i] < units:
                    break
                w[i] = 0
                i -= 1
    counts = {}
    for delta in range(1, half_u + 1):
        for support in range(1, coords + 1):
            k = tab[delta * tab_w + support]
            if k:
                counts[(delta, support)] = k * half
    unclassified = unclassified_vecs * half
    free(tab)
    free(w)
    return counts, unclassified


def class_partners(int coords, int units, int delta, int support, point):
    """All points forming a (delta, support)-pair with `point`, deterministic order."""
    if 2 * delta == units:
        offs = (delta,)
    else:
        offs = (delta, units - delta)
    out = []
    for combo in itertools.combinations(range(coords), support):
        for signs in itertools.product(offs, repeat=support):
            y = list(point)
            for c, off in zip(combo, signs):
                y[c] = (y[c] + off) % units
            out.append(tuple(y))
    return out


def is_class_pair(int coords, int units, int delta, int support, x, y):
    cdef int s = 0
    cdef int d
    for a, b in zip(x, y):
        d = a - b
        if d < 0:
            d = -d
        if 2 * d > units:
            d = units - d
        if d == 0:
            continue
        if d != delta:
            return False
        s += 1
    return s == support


cdef inline bint _is_pair_c(int* x, int* y, int coords, int units,
                            int delta, int support) nogil:
    cdef int s = 0
    cdef int i, d
    for i in range(coords):
        d = x[i] - y[i]
        if d < 0:
            d = -d
        if 2 * d > units:
            d = units - d
        if d == 0:
            continue
        if d != delta:
            return False
        s += 1
    return s == support


cdef int* _pack(list pts, int coords) except NULL:
    cdef int n = len(pts)
    cdef int* arr = <int*> malloc(max(n, 1) * coords * sizeof(int))
    if arr == NULL:
        raise MemoryError()
    cdef int i, j
    for i in range(n):
        pt = pts[i]
        for j in range(coords):
            arr[i * coords + j] = pt[j]
    return arr


def completion_count_r2(int coords, int units, int delta, int support,
                        a, b, bint role_edge):
    """Completions of an anchored pair into an r=2 class double simplex.

    role_edge: the pair is one whole family (count the partner families);
    otherwise it straddles the families (count the two missing points).
    Edge class is (2*delta, support), connecting class (delta, 2*support).
    """
    cdef int e_delta = 2 * delta
    cdef int e_sup = support
    cdef int c_delta = delta
    cdef int c_sup = 2 * support
    cdef int* xa = NULL
    cdef int* ya = NULL
    cdef long long n = 0
    cdef int nx, ny, i, j
    if role_edge:
        cands = [y for y in class_partners(coords, units, c_delta, c_sup, a)
                 if is_class_pair(coords, units, c_delta, c_sup, b, y)]
        nx = len(cands)
        xa = _pack(cands, coords)
        with nogil:
            for i in range(nx):
                for j in range(i + 1, nx):
                    if _is_pair_c(xa + i * coords, xa + j * coords,
                                  coords, units, e_delta, e_sup):
                        n += 1
        free(xa)
        return n
    x2s = [x2 for x2 in class_partners(coords, units, e_delta, e_sup, a)
           if is_class_pair(coords, units, c_delta, c_sup, x2, b)]
    y2s = [y2 for y2 in class_partners(coords, units, e_delta, e_sup, b)
           if is_class_pair(coords, units, c_delta, c_sup, y2, a)]
    nx = len(x2s)
    ny = len(y2s)
    xa = _pack(x2s, coords)
    try:
        ya = _pack(y2s, coords)
    except MemoryError:
        free(xa)
        raise
    with nogil:
        for i in range(nx):
            for j in range(ny):
                if _is_pair_c(xa + i * coords, ya + j * coords,
                              coords, units, c_delta, c_sup):
                    n += 1
    free(xa)
    free(ya)
    return n


def simplex_count_r2(int coords, int units, int delta, int support):
    """Number of r=2 class double simplices, X/Y swap identified.

    Anchors one family at the origin and scales by translation invariance:
    summing #{(X,Y): v in X} over all v counts each ordered family pair twice
    (once per member of X), and the per-v count is translation-constant.
    """
    zero = (0,) * coords
    anchored = 0
    for x2 in class_partners(coords, units, 2 * delta, support, zero):
        anchored += completion_count_r2(coords, units, delta, support,
                                        zero, x2, True)
    total = anchored * (int(units) ** int(coords))
    if total % 4 != 0:
        raise ArithmeticError("anchored simplex total not divisible by 2r")
    return total // 4


def min_gap_scan(dp, int max_size, double rel_tol):
    """Scan all double simplices (multiset families, sizes 2..max_size).

    dp is a symmetric matrix of d**p values. Canonical order: family size
    ascending from 2, then both families in combinations_with_replacement
    order with the second family starting at the first (swap-symmetric
    dedup). Returns (first violating (xs, ys) or None, minimum gap seen,
    configs scanned); stops at the first violation.
    """
    cdef int npts = len(dp)
    cdef double* D = <double*> malloc(max(npts * npts, 1) * sizeof(double))
    if D == NULL:
        raise MemoryError()
    cdef int i, j
    for i in range(npts):
        row = dp[i]
        for j in range(npts):
            D[i * npts + j] = row[j]
    cdef double* cs = <double*> malloc(max(npts, 1) * sizeof(double))
    if cs == NULL:
        free(D)
        raise MemoryError()

    cdef double min_gap = 0.0
    cdef bint has_min = False
    cdef long long scanned = 0
    cdef int n, m, xi, yi, v, u
    cdef int* fam = NULL
    cdef double* within = NULL
    cdef double s, sx, lhs, rhs, gap, scale
    cdef bint hit = False
    cdef int hit_x = 0, hit_y = 0
    witness = None

    for n in range(2, max_size + 1):
        families = list(itertools.combinations_with_replacement(range(npts), n))
        m = len(families)
        fam = <int*> malloc(max(m * n, 1) * sizeof(int))
        within = <double*> malloc(max(m, 1) * sizeof(double))
        if fam == NULL or within == NULL:
            free(fam)
            free(within)
            free(D)
            free(cs)
            raise MemoryError()
        for xi in range(m):
            tup = families[xi]
            for i in range(n):
                fam[xi * n + i] = tup[i]
        with nogil:
            for xi in range(m):
                s = 0.0
                for i in range(n):
                    for j in range(i + 1, n):
                        s += D[fam[xi * n + i] * npts + fam[xi * n + j]]
                within[xi] = s
            for xi in range(m):
                if hit:
                    break
                sx = within[xi]
                for v in range(npts):
                    s = 0.0
                    for i in range(n):
                        s += D[v * npts + fam[xi * n + i]]
                    cs[v] = s
                for yi in range(xi, m):
                    lhs = sx + within[yi]
                    rhs = 0.0
                    for i in range(n):
                        rhs += cs[fam[yi * n + i]]
                    gap = rhs - lhs
                    scanned += 1
                    if not has_min or gap < min_gap:
                        min_gap = gap
                        has_min = True
                    scale = lhs if lhs > rhs else rhs
                    if scale < 1.0:
                        scale = 1.0
                    if gap < -rel_tol * scale:
                        hit = True
                        hit_x = xi
                        hit_y = yi
                        break
        if hit:
            witness = (families[hit_x], families[hit_y])
        free(fam)
        free(within)
        fam = NULL
        within = NULL
        if hit:
            break
    free(D)
    free(cs)
    if not has_min:
        return witness, None, scanned
    return witness, min_gap, scanned
