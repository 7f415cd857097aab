"""Marching squares with root refinement on the crossed grid edges.

Vertices of the returned polylines sit on grid edges at a bisected root of
the sampled function, so they satisfy the implicit equation to roughly the
bisection tolerance rather than to linear-interpolation accuracy.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

BISECT_TOL = 1e-13


@dataclass
class Polyline:
    points: np.ndarray  # (n, 2) rows of (t, x)
    closed: bool

    def __len__(self) -> int:
        return len(self.points)

    @property
    def segments(self):
        """(start, end) index pairs, including the closing segment if any."""
        n = len(self.points)
        pairs = [(i, i + 1) for i in range(n - 1)]
        if self.closed and n > 2:
            pairs.append((n - 1, 0))
        return pairs


def _bisect(fn, p0, p1, f0, tol):
    """Vectorized bisection of fn along the segments p0 -> p1 (fn(p0) = f0)."""
    lo = np.zeros(len(p0))
    hi = np.ones(len(p0))
    span = np.max(np.linalg.norm(p1 - p0, axis=1)) if len(p0) else 0.0
    n_iter = int(np.ceil(np.log2(max(span, tol) / tol))) + 2
    s0 = f0 >= 0.0
    for _ in range(n_iter):
        mid = 0.5 * (lo + hi)
        pm = p0 + mid[:, None] * (p1 - p0)
        same = (fn(pm[:, 0], pm[:, 1]) >= 0.0) == s0
        lo = np.where(same, mid, lo)
        hi = np.where(same, hi, mid)
    s = 0.5 * (lo + hi)
    return p0 + s[:, None] * (p1 - p0)


def extract_zero_set(
    fn: Callable[[np.ndarray, np.ndarray], np.ndarray],
    window,
    grid_n: int,
    tol: float = BISECT_TOL,
) -> list[Polyline]:
    """Polylines of {fn = 0} over the (t, x) window sampled on grid_n x grid_n nodes."""
    if grid_n < 2:
        raise ValueError("grid_n must be at least 2")
    tmin, tmax, xmin, xmax = window
    n = grid_n
    tg = np.linspace(tmin, tmax, n)
    xg = np.linspace(xmin, xmax, n)
    T, X = np.meshgrid(tg, xg, indexing="ij")
    F = np.broadcast_to(np.asarray(fn(T, X), dtype=float), T.shape)
    S = F >= 0.0

    # edge ids: t-edges (i,j)-(i+1,j) first, then x-edges (i,j)-(i,j+1)
    n_te = (n - 1) * n

    def te(i, j):
        return i * n + j

    def xe(i, j):
        return n_te + i * (n - 1) + j

    t_cross = S[:-1, :] != S[1:, :]
    x_cross = S[:, :-1] != S[:, 1:]

    # per-cell edges: bottom (t-edge at j), top (t-edge at j+1), left (x-edge at i), right (x-edge at i+1)
    I, J = np.meshgrid(np.arange(n - 1), np.arange(n - 1), indexing="ij")
    cb, ct = t_cross[:, :-1], t_cross[:, 1:]
    cl, cr = x_cross[:-1, :], x_cross[1:, :]
    eb, et_, el, er = te(I, J), te(I, J + 1), xe(I, J), xe(I + 1, J)
    count = cb.astype(int) + ct + cl + cr

    links = []
    two = count == 2
    if np.any(two):
        edges = np.stack([eb, er, et_, el], axis=-1)[two]
        crossed = np.stack([cb, cr, ct, cl], axis=-1)[two]
        pair = edges[crossed].reshape(-1, 2)
        links.append(pair)
    four = count == 4
    if np.any(four):
        ii, jj = I[four], J[four]
        tc = 0.5 * (tg[ii] + tg[ii + 1])
        xc = 0.5 * (xg[jj] + xg[jj + 1])
        center = np.broadcast_to(np.asarray(fn(tc, xc), dtype=float), tc.shape) >= 0.0
        joined = center == S[ii, jj]  # corner (i,j) connects through the middle to (i+1,j+1)
        b, r, t_, l = eb[four], er[four], et_[four], el[four]
        # joined: cut off corners (i+1,j) and (i,j+1); else cut off (i,j) and (i+1,j+1)
        first = np.where(joined, np.stack([b, r], 1).T, np.stack([b, l], 1).T).T
        second = np.where(joined, np.stack([l, t_], 1).T, np.stack([r, t_], 1).T).T
        links.append(first)
        links.append(second)
    if not links:
        return []
    links = np.concatenate(links)

    adj: dict[int, list[int]] = {}
    for a, b in links.tolist():
        adj.setdefault(a, []).append(b)
        adj.setdefault(b, []).append(a)
    for v in adj.values():
        v.sort()

    # refine every crossed edge once
    ids = np.array(sorted(adj))
    is_t = ids < n_te
    p0 = np.empty((len(ids), 2))
    p1 = np.empty((len(ids), 2))
    ti, tj = np.divmod(ids[is_t], n)
    p0[is_t] = np.column_stack([tg[ti], xg[tj]])
    p1[is_t] = np.column_stack([tg[ti + 1], xg[tj]])
    xi, xj = np.divmod(ids[~is_t] - n_te, n - 1)
    p0[~is_t] = np.column_stack([tg[xi], xg[xj]])
    p1[~is_t] = np.column_stack([tg[xi], xg[xj + 1]])
    f0 = np.empty(len(ids))
    f0[is_t] = F[ti, tj]
    f0[~is_t] = F[xi, xj]
    roots = _bisect(fn, p0, p1, f0, tol)
    where = {e: k for k, e in enumerate(ids.tolist())}

    seen: set[int] = set()
    out: list[Polyline] = []

    def walk(start):
        chain = [start]
        seen.add(start)
        prev, cur = None, start
        while True:
            nxt = [e for e in adj[cur] if e != prev and e not in seen]
            if not nxt:
                closed = len(chain) > 2 and start in adj[cur] and prev is not None
                return chain, closed
            prev, cur = cur, nxt[0]
            chain.append(cur)
            seen.add(cur)

    ends = [e for e in ids.tolist() if len(adj[e]) == 1]
    for e in ends + ids.tolist():
        if e in seen:
            continue
        chain, closed = walk(e)
        out.append(Polyline(roots[[where[c] for c in chain]], closed))
    return out
