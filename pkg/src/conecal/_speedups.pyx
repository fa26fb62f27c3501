# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels: batched calibration-field evaluation, its
finite-difference divergence, and the two lattice max-flow solvers.

Drop-in twin of ``conecal._pykernels``; selected at import by
``conecal.backend`` when available.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport pow, sqrt

cnp.import_array()

BACKEND_NAME = "compiled"


cdef inline void _field_point(const double* x, Py_ssize_t n, double lam,
                              double gamma, double* out) noexcept nogil:
    cdef double r2 = 0.0
    cdef Py_ssize_t j
    for j in range(1, n):
        r2 += x[j] * x[j]
    cdef double r = sqrt(r2)
    cdef double rho = sqrt(r2 + x[0] * x[0])
    cdef double u = x[0] / r
    cdef double w = 1.0 + u * u
    cdef double h = pow(w, -0.5 * gamma)
    cdef double hp = -gamma * u * pow(w, -0.5 * gamma - 1.0)
    cdef double a = h - u * hp / (n - 1)
    cdef double b = hp / (n - 1)
    out[0] = a
    for j in range(1, n):
        out[j] = -b * x[j] / r
    out[n] = lam * (a * x[0] - b * r) / rho


def field_batch(xs, double lam, double gamma):
    """Calibration field at a batch of base points (rows of xs, all with
    x' != 0); returns ambient (n+1)-vectors, one row per point."""
    cdef cnp.ndarray[double, ndim=2, mode="c"] pts = np.ascontiguousarray(xs, dtype=np.float64)
    cdef Py_ssize_t npts = pts.shape[0]
    cdef Py_ssize_t n = pts.shape[1]
    cdef cnp.ndarray[double, ndim=2, mode="c"] out = np.empty((npts, n + 1))
    cdef Py_ssize_t i
    with nogil:
        for i in range(npts):
            _field_point(&pts[i, 0], n, lam, gamma, &out[i, 0])
    return out


def field_divergence_fd(xs, double lam, double gamma, double step):
    """Central-difference ambient divergence of the field at each base point.

    The stencil runs over the n horizontal coordinates; the vertical
    difference is identically zero because the field does not depend on t.
    """
    cdef cnp.ndarray[double, ndim=2, mode="c"] pts = np.ascontiguousarray(xs, dtype=np.float64)
    cdef Py_ssize_t npts = pts.shape[0]
    cdef Py_ssize_t n = pts.shape[1]
    cdef cnp.ndarray[double, ndim=1, mode="c"] div = np.zeros(npts)
    cdef double* buf
    cdef double* val
    cdef Py_ssize_t i, axis, j
    cdef double total
    cdef cnp.ndarray[double, ndim=1, mode="c"] work = np.empty(n)
    cdef cnp.ndarray[double, ndim=1, mode="c"] field_val = np.empty(n + 1)
    buf = &work[0]
    val = &field_val[0]
    with nogil:
        for i in range(npts):
            total = 0.0
            for axis in range(n):
                for j in range(n):
                    buf[j] = pts[i, j]
                buf[axis] = pts[i, axis] + step
                _field_point(buf, n, lam, gamma, val)
                total += val[axis]
                buf[axis] = pts[i, axis] - step
                _field_point(buf, n, lam, gamma, val)
                total -= val[axis]
            div[i] = total / (2.0 * step)
    return div


cdef double _residual_eps(double[::1] cap):
    cdef double scale = 1.0
    cdef Py_ssize_t e
    for e in range(cap.shape[0]):
        if cap[e] > scale and cap[e] < 1e300:
            scale = cap[e]
    return 1e-15 * scale


def maxflow_dinic(first, to, pair, cap, int s, int t):
    """Blocking-flow max-flow on a CSR residual graph; mutates cap in place."""
    cdef int[::1] first_v = np.ascontiguousarray(first, dtype=np.int32)
    cdef int[::1] to_v = np.ascontiguousarray(to, dtype=np.int32)
    cdef int[::1] pair_v = np.ascontiguousarray(pair, dtype=np.int32)
    cdef double[::1] cap_v = cap
    cdef Py_ssize_t n_nodes = first_v.shape[0] - 1
    cdef double eps = _residual_eps(cap_v)
    cdef cnp.ndarray[int, ndim=1] level_a = np.empty(n_nodes, dtype=np.int32)
    cdef cnp.ndarray[int, ndim=1] it_a = np.empty(n_nodes, dtype=np.int32)
    cdef cnp.ndarray[int, ndim=1] queue_a = np.empty(n_nodes, dtype=np.int32)
    cdef cnp.ndarray[int, ndim=1] path_a = np.empty(n_nodes + 1, dtype=np.int32)
    cdef cnp.ndarray[int, ndim=1] orig_a = np.empty(n_nodes + 1, dtype=np.int32)
    cdef int[::1] level = level_a
    cdef int[::1] it = it_a
    cdef int[::1] queue = queue_a
    cdef int[::1] path = path_a
    cdef int[::1] orig = orig_a
    cdef double flow = 0.0, bottleneck
    cdef Py_ssize_t head, tail, depth, k
    cdef int v, w, e
    cdef bint reached, advanced
    with nogil:
        while True:
            for v in range(n_nodes):
                level[v] = -1
            level[s] = 0
            queue[0] = s
            head = 0
            tail = 1
            while head < tail:
                v = queue[head]
                head += 1
                for e in range(first_v[v], first_v[v + 1]):
                    w = to_v[e]
                    if cap_v[e] > eps and level[w] < 0:
                        level[w] = level[v] + 1
                        queue[tail] = w
                        tail += 1
            if level[t] < 0:
                break
            for v in range(n_nodes):
                it[v] = first_v[v]
            while True:
                depth = 0
                v = s
                reached = False
                while True:
                    if v == t:
                        reached = True
                        break
                    advanced = False
                    while it[v] < first_v[v + 1]:
                        e = it[v]
                        if cap_v[e] > eps and level[to_v[e]] == level[v] + 1:
                            advanced = True
                            break
                        it[v] += 1
                    if advanced:
                        path[depth] = it[v]
                        orig[depth] = v
                        depth += 1
                        v = to_v[it[v]]
                    else:
                        if v == s:
                            break
                        depth -= 1
                        v = orig[depth]
                        it[v] += 1
                if not reached:
                    break
                bottleneck = cap_v[path[0]]
                for k in range(1, depth):
                    if cap_v[path[k]] < bottleneck:
                        bottleneck = cap_v[path[k]]
                for k in range(depth):
                    e = path[k]
                    cap_v[e] -= bottleneck
                    cap_v[pair_v[e]] += bottleneck
                flow += bottleneck
    return flow


def maxflow_shortest_aug(first, to, pair, cap, int s, int t):
    """Shortest-augmenting-path max-flow (BFS per augmentation); mutates cap."""
    cdef int[::1] first_v = np.ascontiguousarray(first, dtype=np.int32)
    cdef int[::1] to_v = np.ascontiguousarray(to, dtype=np.int32)
    cdef int[::1] pair_v = np.ascontiguousarray(pair, dtype=np.int32)
    cdef double[::1] cap_v = cap
    cdef Py_ssize_t n_nodes = first_v.shape[0] - 1
    cdef double eps = _residual_eps(cap_v)
    cdef cnp.ndarray[int, ndim=1] parent_a = np.empty(n_nodes, dtype=np.int32)
    cdef cnp.ndarray[long, ndim=1] stamp_a = np.zeros(n_nodes, dtype=np.int64)
    cdef cnp.ndarray[int, ndim=1] queue_a = np.empty(n_nodes, dtype=np.int32)
    cdef int[::1] parent = parent_a
    cdef long[::1] stamp = stamp_a
    cdef int[::1] queue = queue_a
    cdef double flow = 0.0, bottleneck
    cdef long mark = 0
    cdef Py_ssize_t head, tail
    cdef int v, w, e
    cdef bint found
    with nogil:
        while True:
            mark += 1
            stamp[s] = mark
            queue[0] = s
            head = 0
            tail = 1
            found = False
            while head < tail and not found:
                v = queue[head]
                head += 1
                for e in range(first_v[v], first_v[v + 1]):
                    w = to_v[e]
                    if cap_v[e] > eps and stamp[w] != mark:
                        stamp[w] = mark
                        parent[w] = e
                        if w == t:
                            found = True
                            break
                        queue[tail] = w
                        tail += 1
            if not found:
                break
            bottleneck = cap_v[parent[t]]
            v = t
            while v != s:
                e = parent[v]
                if cap_v[e] < bottleneck:
                    bottleneck = cap_v[e]
                v = to_v[pair_v[e]]
            v = t
            while v != s:
                e = parent[v]
                cap_v[e] -= bottleneck
                cap_v[pair_v[e]] += bottleneck
                v = to_v[pair_v[e]]
            flow += bottleneck
    return flow


def residual_reachable(first, to, cap, int s):
    """Nodes reachable from s through positive residual capacity."""
    cdef int[::1] first_v = np.ascontiguousarray(first, dtype=np.int32)
    cdef int[::1] to_v = np.ascontiguousarray(to, dtype=np.int32)
    cdef double[::1] cap_v = np.ascontiguousarray(cap, dtype=np.float64)
    cdef Py_ssize_t n_nodes = first_v.shape[0] - 1
    cdef double eps = _residual_eps(cap_v)
    cdef cnp.ndarray[cnp.uint8_t, ndim=1] seen_a = np.zeros(n_nodes, dtype=np.uint8)
    cdef cnp.uint8_t[::1] seen = seen_a
    cdef cnp.ndarray[int, ndim=1] queue_a = np.empty(n_nodes, dtype=np.int32)
    cdef int[::1] queue = queue_a
    cdef Py_ssize_t head = 0, tail = 1
    cdef int v, w, e
    seen[s] = 1
    queue[0] = s
    with nogil:
        while head < tail:
            v = queue[head]
            head += 1
            for e in range(first_v[v], first_v[v + 1]):
                w = to_v[e]
                if cap_v[e] > eps and not seen[w]:
                    seen[w] = 1
                    queue[tail] = w
                    tail += 1
    return seen_a.astype(bool)
