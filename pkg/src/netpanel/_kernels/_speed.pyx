# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled sampling kernels.

Operation-for-operation twin of ``reference.py``: identical uniform
consumption, identical floating-point evaluation order (the build turns off
floating-point contraction), identical libm calls.  Keep the two in sync.
"""

from libc.math cimport exp, sqrt


cdef double _change_one(int code, const signed char[:, ::1] adj,
                        const double[::1] vec, const double[:, ::1] mat,
                        Py_ssize_t i, Py_ssize_t j) noexcept nogil:
    cdef Py_ssize_t n = adj.shape[0]
    cdef Py_ssize_t k, b
    cdef long c1, c2, c3, c
    cdef double acc, d, r, cin
    if code == 0:    # edges
        return 1.0
    if code == 1:    # reciprocity, ordered-pair form
        return 2.0 * adj[j, i]
    if code == 2:    # transitive triplets
        c1 = 0
        c2 = 0
        c3 = 0
        for k in range(n):
            if adj[i, k] and adj[j, k]:
                c1 += 1
            if adj[i, k] and adj[k, j]:
                c2 += 1
            if adj[k, i] and adj[k, j]:
                c3 += 1
        return <double>(c1 + c2 + c3)
    if code == 3:    # transitive ties
        c = 0
        for b in range(n):
            if adj[i, b] and adj[b, j]:
                c += 1
        acc = 1.0 if c > 0 else 0.0
        for k in range(n):
            if k == i or k == j:
                continue
            if adj[i, k] and adj[j, k]:
                c = 0
                for b in range(n):
                    if b != j and adj[i, b] and adj[b, k]:
                        c += 1
                if c == 0:
                    acc += 1.0
            if adj[k, j] and adj[k, i]:
                c = 0
                for b in range(n):
                    if b != i and adj[k, b] and adj[b, j]:
                        c += 1
                if c == 0:
                    acc += 1.0
        return acc
    if code == 4:    # three-cycles
        c1 = 0
        for k in range(n):
            if adj[j, k] and adj[k, i]:
                c1 += 1
        return 3.0 * <double>c1
    if code == 5:    # indegree popularity (sqrt)
        c1 = 0
        for k in range(n):
            c1 += adj[k, j]
        d = <double>c1 - <double>adj[i, j]
        return (d + 1.0) * sqrt(d + 1.0) - d * sqrt(d)
    if code == 6:    # outdegree popularity (sqrt)
        c1 = 0
        c2 = 0
        c3 = 0
        for k in range(n):
            c1 += adj[i, k]
            c2 += adj[k, i]
            c3 += adj[j, k]
        r = <double>c1 - <double>adj[i, j]
        cin = <double>c2
        return sqrt(<double>c3) + cin * (sqrt(r + 1.0) - sqrt(r))
    if code == 7:    # outdegree activity (power 1.5)
        c1 = 0
        for k in range(n):
            c1 += adj[i, k]
        r = <double>c1 - <double>adj[i, j]
        return (r + 1.0) * sqrt(r + 1.0) - r * sqrt(r)
    if code == 8:    # covariate sender
        return vec[i]
    if code == 9:    # covariate receiver
        return vec[j]
    return mat[i, j]  # dyadic score (covariate match, memory terms)


def mh_block(signed char[:, ::1] adj, const int[::1] codes,
             const double[:, ::1] vectors, const double[:, :, ::1] matrices,
             const double[::1] theta, const double[:, ::1] u,
             long step0, long burn_in, long thinning,
             signed char[:, :, ::1] draws, long recorded, long extreme,
             long edges, double lo, double hi):
    """Advance a tie-toggle Metropolis chain by one block of proposals."""
    cdef Py_ssize_t n = adj.shape[0]
    cdef long npairs = n * (n - 1)
    cdef Py_ssize_t k = codes.shape[0]
    cdef Py_ssize_t draw_cap = draws.shape[0]
    cdef Py_ssize_t s, q, a, b
    cdef long dyad, r, completed
    cdef Py_ssize_t i, j
    cdef double total, logr
    cdef bint accept
    with nogil:
        for s in range(u.shape[0]):
            dyad = <long>(u[s, 0] * npairs)
            if dyad >= npairs:
                dyad = npairs - 1
            i = dyad // (n - 1)
            r = dyad % (n - 1)
            j = r + 1 if r >= i else r
            total = 0.0
            for q in range(k):
                total += theta[q] * _change_one(
                    codes[q], adj, vectors[q], matrices[q], i, j
                )
            logr = total if adj[i, j] == 0 else -total
            accept = logr >= 0.0 or u[s, 1] < exp(logr)
            if accept:
                if adj[i, j] == 0:
                    adj[i, j] = 1
                    edges += 1
                else:
                    adj[i, j] = 0
                    edges -= 1
            completed = step0 + s + 1
            if completed > burn_in:
                if edges < lo or edges > hi:
                    extreme += 1
                if (completed - burn_in) % thinning == 0 and recorded < draw_cap:
                    for a in range(n):
                        for b in range(n):
                            draws[recorded, a, b] = adj[a, b]
                    recorded += 1
    return recorded, extreme, edges


cdef double _ego_change_one(int code, const signed char[:, ::1] adj,
                            const double[::1] vec, const double[:, ::1] mat,
                            Py_ssize_t i, Py_ssize_t j,
                            const long[::1] tp_row) noexcept nogil:
    cdef Py_ssize_t n = adj.shape[0]
    cdef Py_ssize_t k
    cdef long c1, c2
    cdef double d, r, acc
    if code == 0:    # edges
        return 1.0
    if code == 1:    # reciprocity, actor perspective: counted once
        return <double>adj[j, i]
    if code == 2:    # transitive triplets
        c1 = 0
        c2 = 0
        for k in range(n):
            if adj[i, k] and adj[j, k]:
                c1 += 1
            if adj[i, k] and adj[k, j]:
                c2 += 1
        return <double>(c1 + c2)
    if code == 3:    # transitive ties
        acc = 1.0 if tp_row[j] > 0 else 0.0
        for k in range(n):
            if adj[i, k] and adj[j, k]:
                if tp_row[k] - adj[i, j] == 0:
                    acc += 1.0
        return acc
    if code == 4:    # three-cycles
        c1 = 0
        for k in range(n):
            if adj[j, k] and adj[k, i]:
                c1 += 1
        return <double>c1
    if code == 5:    # indegree popularity (sqrt)
        c1 = 0
        for k in range(n):
            c1 += adj[k, j]
        d = <double>c1 - <double>adj[i, j]
        return sqrt(d + 1.0)
    if code == 6:    # outdegree popularity (sqrt)
        c1 = 0
        for k in range(n):
            c1 += adj[j, k]
        return sqrt(<double>c1)
    if code == 7:    # outdegree activity (power 1.5)
        c1 = 0
        for k in range(n):
            c1 += adj[i, k]
        r = <double>c1 - <double>adj[i, j]
        return (r + 1.0) * sqrt(r + 1.0) - r * sqrt(r)
    if code == 8:    # covariate sender
        return vec[i]
    if code == 9:    # covariate receiver
        return vec[j]
    return mat[i, j]  # dyadic score


def saom_block(signed char[:, ::1] adj, const int[::1] codes,
               const double[:, ::1] vectors, const double[:, :, ::1] matrices,
               const double[::1] beta, const double[:, ::1] u,
               long[::1] actors, long[::1] targets,
               double[::1] obj, double[::1] cum, long[::1] tp_row):
    """Run a block of actor mini-steps, mutating ``adj`` in place.

    ``obj``, ``cum``, and ``tp_row`` are caller-provided length-n scratch
    buffers.
    """
    cdef Py_ssize_t n = adj.shape[0]
    cdef Py_ssize_t k = codes.shape[0]
    cdef Py_ssize_t s, q, j, b
    cdef Py_ssize_t i, chosen
    cdef double d, m, total, threshold, w
    cdef bint need_tp = False
    for q in range(k):
        if codes[q] == 3:
            need_tp = True
    with nogil:
        for s in range(u.shape[0]):
            i = <Py_ssize_t>(u[s, 0] * n)
            if i >= n:
                i = n - 1
            if need_tp:
                for j in range(n):
                    tp_row[j] = 0
                    for b in range(n):
                        if adj[i, b] and adj[b, j]:
                            tp_row[j] += 1
            for j in range(n):
                if j == i:
                    obj[j] = 0.0
                    continue
                d = 0.0
                for q in range(k):
                    d += beta[q] * _ego_change_one(
                        codes[q], adj, vectors[q], matrices[q], i, j, tp_row
                    )
                obj[j] = -d if adj[i, j] == 1 else d
            m = obj[0]
            for j in range(1, n):
                if obj[j] > m:
                    m = obj[j]
            total = 0.0
            for j in range(n):
                w = exp(obj[j] - m)
                total += w
                cum[j] = total
            threshold = u[s, 1] * total
            chosen = n - 1
            for j in range(n):
                if threshold < cum[j]:
                    chosen = j
                    break
            if chosen != i:
                adj[i, chosen] = 1 - adj[i, chosen]
            actors[s] = i
            targets[s] = chosen
    return None
