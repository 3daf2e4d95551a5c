"""Fraenkel asymmetry of voxel sets."""

from __future__ import annotations

import math

import numpy as np
from scipy.optimize import minimize_scalar
from scipy.signal import fftconvolve

from .voxel import VoxelSet, ball_coverage


def ball_overlap(A: VoxelSet, center, R: float, subsamples: int = 4, _pts=None) -> float:
    """Vol(A cap B(center, R)) against the antialiased ball."""
    pts = A.occupied_centers() if _pts is None else _pts
    return float(ball_coverage(pts, A.spacing, center, R, subsamples).sum()) * A.grid.cell_volume


def _lattice_scan(occ, h, R, n, subsamples, shift):
    r = int(math.ceil(R / h + 0.5 * math.sqrt(n) + shift)) + 1
    rel = (np.arange(-r, r + 1) - shift) * h
    pts = np.stack(np.meshgrid(*([rel] * n), indexing="ij"), axis=-1).reshape(-1, n)
    cov = ball_coverage(pts, h, np.zeros(n), R, subsamples).reshape((2 * r + 1,) * n)
    conv = fftconvolve(occ, cov[(slice(None, None, -1),) * n], mode="full")
    k = np.unravel_index(int(np.argmax(conv)), conv.shape)
    m = np.array(k) - r
    return float(conv[k]), m + shift


def fraenkel_asymmetry(A: VoxelSet, subsamples: int = 4, return_center: bool = False,
                       sweeps: int = 3, maxiter: int = 24):
    """1 - max_c Vol(A cap B(c, R_A)) / Vol(A).

    Ball centers on the lattice of cell centers and of cell corners are scanned
    with one FFT correlation each; the best is refined coordinate-wise by a
    bounded golden-section search within one cell.
    """
    A.require_nonempty()
    C = A.cropped()
    h, n = C.spacing, C.n
    R = C.volume_radius
    vol = C.volume
    occ = C.occupancy.astype(float)
    best_val, best_m = -1.0, None
    for shift in (0.0, 0.5):
        val, m = _lattice_scan(occ, h, R, n, subsamples, shift)
        if val > best_val + 1e-9:
            best_val, best_m = val, m
    c = np.array(C.origin) + h * best_m
    pts_all = C.occupied_centers()
    near = np.sum((pts_all - c) ** 2, axis=1) < (R + h * (math.sqrt(n) + 2)) ** 2
    pts = pts_all[near]
    best = ball_overlap(C, c, R, subsamples, pts)
    for _ in range(sweeps):
        moved = False
        for ax in range(n):
            def f(x, ax=ax):
                cc = c.copy()
                cc[ax] = x
                return -ball_overlap(C, cc, R, subsamples, pts)

            res = minimize_scalar(f, bounds=(c[ax] - h, c[ax] + h), method="bounded",
                                  options={"xatol": 1e-3 * h, "maxiter": maxiter})
            if -res.fun > best + 1e-12 * vol:
                best = -float(res.fun)
                c[ax] = float(res.x)
                moved = True
        if not moved:
            break
    alpha = min(max(1.0 - best / vol, 0.0), 1.0)
    return (alpha, c) if return_center else alpha


def normalized_symmetric_difference(A: VoxelSet, center=None) -> float:
    """Vol(A triangle B(center, R_A)) / (2 Vol(A)) against the voxelized ball (cell centers)."""
    A.require_nonempty()
    c = np.zeros(A.n) if center is None else np.asarray(center, dtype=float)
    R = A.volume_radius
    # pad the grid until it holds the whole ball
    C = A.cropped()
    lo, hi = C.grid.bounds()
    need = max(0.0, float(np.max(c + R - hi)), float(np.max(lo - (c - R))))
    C = C.padded(int(math.ceil(need / C.spacing)) + 1)
    d2 = np.sum((C.grid.centers() - c) ** 2, axis=-1)
    ball = d2 < R * R
    return int(np.count_nonzero(ball ^ C.occupancy)) / (2.0 * C.count)
