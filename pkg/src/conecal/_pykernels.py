"""Pure-Python / numpy implementations of the hot kernels.

Mirrors the compiled extension ``conecal._speedups``: batched evaluation of
the calibration field, finite-difference divergence stencils, and the two
lattice max-flow solvers.  Selected automatically when the extension is not
built (see ``conecal.backend``).
"""

from __future__ import annotations

from collections import deque

import numpy as np

BACKEND_NAME = "python"


def field_batch(xs: np.ndarray, lam: float, gamma: float) -> np.ndarray:
    """Calibration field at a batch of base points (rows of xs, all with
    x' != 0); returns ambient (n+1)-vectors, one row per point."""
    xs = np.ascontiguousarray(xs, dtype=float)
    npts, n = xs.shape
    r = np.linalg.norm(xs[:, 1:], axis=1)
    rho = np.hypot(r, xs[:, 0])
    u = xs[:, 0] / r
    w = 1.0 + u * u
    h = w ** (-0.5 * gamma)
    hp = -gamma * u * w ** (-0.5 * gamma - 1.0)
    a = h - u * hp / (n - 1)
    b = hp / (n - 1)
    out = np.empty((npts, n + 1))
    out[:, 0] = a
    out[:, 1:n] = -(b / r)[:, None] * xs[:, 1:]
    out[:, n] = lam * (a * xs[:, 0] - b * r) / rho
    return out


def field_divergence_fd(
    xs: np.ndarray, lam: float, gamma: float, step: float
) -> np.ndarray:
    """Central-difference ambient divergence of the field at each base point.

    The stencil runs over the n horizontal coordinates; the vertical
    difference is identically zero because the field does not depend on t.
    """
    xs = np.ascontiguousarray(xs, dtype=float)
    npts, n = xs.shape
    div = np.zeros(npts)
    for axis in range(n):
        xp = xs.copy()
        xm = xs.copy()
        xp[:, axis] += step
        xm[:, axis] -= step
        zp = field_batch(xp, lam, gamma)[:, axis]
        zm = field_batch(xm, lam, gamma)[:, axis]
        div += (zp - zm) / (2.0 * step)
    return div


def _default_eps(cap: np.ndarray) -> float:
    finite = cap[np.isfinite(cap)]
    scale = float(finite.max()) if finite.size else 1.0
    return 1e-15 * max(scale, 1.0)


def maxflow_dinic(first, to, pair, cap, s: int, t: int) -> float:
    """Blocking-flow max-flow on a CSR residual graph; mutates cap in place."""
    eps = _default_eps(np.asarray(cap))
    n_nodes = len(first) - 1
    first_l = [int(v) for v in first]
    to_l = [int(v) for v in to]
    pair_l = [int(v) for v in pair]
    cap_l = [float(v) for v in cap]
    level = [0] * n_nodes
    it = [0] * n_nodes
    flow = 0.0
    while True:
        for i in range(n_nodes):
            level[i] = -1
        level[s] = 0
        dq = deque([s])
        while dq:
            v = dq.popleft()
            for e in range(first_l[v], first_l[v + 1]):
                w = to_l[e]
                if cap_l[e] > eps and level[w] < 0:
                    level[w] = level[v] + 1
                    dq.append(w)
        if level[t] < 0:
            break
        for i in range(n_nodes):
            it[i] = first_l[i]
        while True:
            path = []
            origins = []
            v = s
            reached = False
            while True:
                if v == t:
                    reached = True
                    break
                advanced = False
                while it[v] < first_l[v + 1]:
                    e = it[v]
                    if cap_l[e] > eps and level[to_l[e]] == level[v] + 1:
                        advanced = True
                        break
                    it[v] += 1
                if advanced:
                    path.append(it[v])
                    origins.append(v)
                    v = to_l[it[v]]
                else:
                    if v == s:
                        break
                    path.pop()
                    v = origins.pop()
                    it[v] += 1
            if not reached:
                break
            bottleneck = min(cap_l[e] for e in path)
            for e in path:
                cap_l[e] -= bottleneck
                cap_l[pair_l[e]] += bottleneck
            flow += bottleneck
    cap[:] = cap_l
    return flow


def maxflow_shortest_aug(first, to, pair, cap, s: int, t: int) -> float:
    """Shortest-augmenting-path max-flow (BFS per augmentation); mutates cap."""
    eps = _default_eps(np.asarray(cap))
    n_nodes = len(first) - 1
    first_l = [int(v) for v in first]
    to_l = [int(v) for v in to]
    pair_l = [int(v) for v in pair]
    cap_l = [float(v) for v in cap]
    parent = [-1] * n_nodes
    stamp = [0] * n_nodes
    mark = 0
    flow = 0.0
    while True:
        mark += 1
        stamp[s] = mark
        dq = deque([s])
        found = False
        while dq and not found:
            v = dq.popleft()
            for e in range(first_l[v], first_l[v + 1]):
                w = to_l[e]
                if cap_l[e] > eps and stamp[w] != mark:
                    stamp[w] = mark
                    parent[w] = e
                    if w == t:
                        found = True
                        break
                    dq.append(w)
        if not found:
            break
        bottleneck = float("inf")
        v = t
        while v != s:
            e = parent[v]
            if cap_l[e] < bottleneck:
                bottleneck = cap_l[e]
            v = to_l[pair_l[e]]
        v = t
        while v != s:
            e = parent[v]
            cap_l[e] -= bottleneck
            cap_l[pair_l[e]] += bottleneck
            v = to_l[pair_l[e]]
        flow += bottleneck
    cap[:] = cap_l
    return flow


def residual_reachable(first, to, cap, s: int) -> np.ndarray:
    """Nodes reachable from s through positive residual capacity."""
    eps = _default_eps(np.asarray(cap))
    n_nodes = len(first) - 1
    seen = np.zeros(n_nodes, dtype=bool)
    seen[s] = True
    dq = deque([s])
    first_l = [int(v) for v in first]
    to_l = [int(v) for v in to]
    cap_l = [float(v) for v in cap]
    while dq:
        v = dq.popleft()
        for e in range(first_l[v], first_l[v + 1]):
            w = to_l[e]
            if cap_l[e] > eps and not seen[w]:
                seen[w] = True
                dq.append(w)
    return seen
