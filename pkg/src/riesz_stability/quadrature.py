"""Integrals of smooth weights against |x - p|^-lam over axis-aligned boxes.

The box is cut at the coordinates of ``p`` (and at any extra cut planes) so
that ``p`` is a vertex of every piece containing it. Each such piece is split
into the n pyramids over its far faces; along the pyramid axis the singular
factor becomes s^(n-1-lam), integrated exactly by Gauss-Jacobi.
"""

from __future__ import annotations

import itertools
from functools import lru_cache

import numpy as np
from scipy.special import roots_jacobi

DEFAULT_ORDER = 16


@lru_cache(maxsize=32)
def _legendre01(order):
    x, w = np.polynomial.legendre.leggauss(order)
    return 0.5 * (x + 1.0), 0.5 * w


@lru_cache(maxsize=32)
def _jacobi01(order, beta):
    # weight s^beta on [0, 1]
    x, w = roots_jacobi(order, 0.0, beta)
    return 0.5 * (x + 1.0), w * 0.5 ** (beta + 1.0)


def _tensor_box(lo, hi, order):
    x1, w1 = _legendre01(order)
    pts = [lo[i] + (hi[i] - lo[i]) * x1 for i in range(len(lo))]
    wts = [(hi[i] - lo[i]) * w1 for i in range(len(lo))]
    grid = np.stack(np.meshgrid(*pts, indexing="ij"), axis=-1).reshape(-1, len(lo))
    w = np.ones(1)
    for wi in wts:
        w = np.outer(w, wi).ravel()
    return grid, w


def _vertex_piece(g, lo, hi, lam, p, order):
    n = len(lo)
    s, ws = _jacobi01(order, n - 1.0 - lam)
    total = 0.0
    far = [hi[i] if abs(lo[i] - p[i]) < abs(hi[i] - p[i]) else lo[i] for i in range(n)]
    for i in range(n):
        others = [j for j in range(n) if j != i]
        if others:
            q_o, w_o = _tensor_box([lo[j] for j in others], [hi[j] for j in others], order)
        else:
            q_o, w_o = np.zeros((1, 0)), np.ones(1)
        q = np.empty((len(w_o), n))
        q[:, i] = far[i]
        q[:, others] = q_o
        d = q - p
        dist = np.sqrt(np.sum(d * d, axis=1))
        # x = p + s (q - p), dx = |far_i - p_i| s^(n-1) ds dq
        x = p[None, None, :] + s[None, :, None] * d[:, None, :]
        vals = g(x.reshape(-1, n)).reshape(len(w_o), len(s))
        total += abs(far[i] - p[i]) * np.sum(w_o * dist**-lam * (vals @ ws))
    return total


def singular_box_integral(g, lo, hi, lam, p, cuts=(), order=DEFAULT_ORDER):
    """Integral over the box [lo, hi] of g(x) |x - p|^(-lam).

    ``g`` maps an (m, n) array of points to m values and must be smooth on each
    piece after cutting at ``p`` and at the coordinates listed per axis in
    ``cuts`` (a sequence of n iterables, or empty).
    """
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    p = np.asarray(p, dtype=float)
    n = len(lo)
    edges = []
    for i in range(n):
        pts = {lo[i], hi[i]}
        if lo[i] < p[i] < hi[i]:
            pts.add(p[i])
        if cuts:
            pts.update(c for c in cuts[i] if lo[i] < c < hi[i])
        edges.append(sorted(pts))
    total = 0.0
    for idx in itertools.product(*[range(len(e) - 1) for e in edges]):
        plo = np.array([edges[i][k] for i, k in enumerate(idx)])
        phi = np.array([edges[i][k + 1] for i, k in enumerate(idx)])
        at_vertex = all(p[i] == plo[i] or p[i] == phi[i] for i in range(n))
        if at_vertex:
            total += _vertex_piece(g, plo, phi, lam, p, order)
        else:
            pts, w = _tensor_box(plo, phi, order)
            r = np.sqrt(np.sum((pts - p) ** 2, axis=1))
            total += float(np.dot(w, g(pts) * r**-lam))
    return total
