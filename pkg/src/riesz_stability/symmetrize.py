"""Reflection symmetrization of voxel sets and the bounded-support truncation."""

from __future__ import annotations

import math
from typing import NamedTuple

import numpy as np

from .asymmetry import fraenkel_asymmetry
from .errors import GridError
from .kernel import Kernel
from .voxel import VoxelSet, symmetrize_halfspace


class FMPResult(NamedTuple):
    set: VoxelSet
    alpha_before: float
    alpha_after: float
    ratio: float | None
    choices: tuple
    imbalances: tuple
    candidates: int


def fmp_branches(A: VoxelSet):
    """All distinct outcomes of successive symmetrization along axes 0..n-1.

    Each entry is (set, choices, imbalances); choices holds "+" (lower half
    kept) or "-" per axis. Outcomes are recentered so their mirror planes are
    the coordinate hyperplanes.
    """
    A.require_nonempty()
    branches = [(A, (), ())]
    for axis in range(A.n):
        nxt = []
        for S, ch, imb in branches:
            r = symmetrize_halfspace(S, axis, recenter=True)
            nxt.append((r.plus, ch + ("+",), imb + (r.imbalance,)))
            if not np.array_equal(r.plus.occupancy, r.minus.occupancy):
                nxt.append((r.minus, ch + ("-",), imb + (r.imbalance,)))
        branches = nxt
    return branches


def fmp_symmetrize(A: VoxelSet, subsamples: int = 4) -> FMPResult:
    """Symmetrize successively at one plane per coordinate axis.

    Among the (up to) 2^n branches of ``fmp_branches`` the one with the
    largest Fraenkel asymmetry is returned, with alpha(result)/alpha(A).
    """
    A.require_nonempty()
    alpha0 = fraenkel_asymmetry(A, subsamples)
    if alpha0 == 0.0:
        return FMPResult(A, 0.0, 0.0, None, (), (), 1)
    branches = fmp_branches(A)
    best = None
    for S, ch, imb in branches:
        a = fraenkel_asymmetry(S, subsamples)
        if best is None or a > best[1]:
            best = (S, a, ch, imb)
    S, a, ch, imb = best
    return FMPResult(S, alpha0, a, a / alpha0, ch, imb, len(branches))


class Truncation(NamedTuple):
    set: VoxelSet
    outer_radius: float  # R: cut-off radius, relative to the set's own scale
    shell_radius: float  # r: extent of the added shell
    moved_cells: int


def frame_around_origin(A: VoxelSet, reach: float) -> VoxelSet:
    """Crop and pad uniformly so the grid covers B(0, reach).

    Uniform padding keeps a grid that is symmetric about the origin symmetric.
    """
    C = A.cropped()
    lo, hi = C.grid.bounds()
    need = max(0.0, float(np.max(reach - hi)), float(np.max(lo + reach)))
    pad = int(math.ceil(need / C.spacing)) + 1
    return C.padded(pad)


def truncate_tail(A: VoxelSet, alpha0: float, c: float, kernel: Kernel) -> Truncation:
    """Replace the part of A outside B_R by a thin shell just outside A*.

    A* is the centered ball of A's volume; R = R_A (1 + c alpha0^(1 - lam/n)).
    The shell B_r minus A* is filled cell by cell in order of distance from the
    origin until the volume is restored, in antipodal pairs when A is
    symmetric under x -> -x.
    """
    A.require_nonempty()
    if not c > 0:
        raise ValueError("truncation constant c must be positive")
    n = A.n
    RA = A.volume_radius
    R = RA * (1.0 + c * alpha0 ** (1.0 - kernel.lam / n))
    sym = A.is_origin_symmetric()
    W = frame_around_origin(A, R + 2 * A.spacing)
    if sym and not W.is_grid_symmetric():
        raise GridError("origin-symmetric set did not land on a symmetric grid")
    d = np.sqrt(np.sum(W.grid.centers() ** 2, axis=-1))
    occ = W.occupancy
    keep = occ & (d < R)
    moved = int(np.count_nonzero(occ & ~(d < R)))
    if moved == 0:
        return Truncation(A, R, RA, 0)
    cand = ~(d < RA) & ~keep
    flat = np.flatnonzero(cand.ravel())
    order = flat[np.lexsort((flat, d.ravel()[flat]))]
    new = keep.copy().ravel()
    added = 0
    last = RA
    for i in order:
        if added >= moved:
            break
        if new[i]:
            continue
        new[i] = True
        added += 1
        last = d.ravel()[i]
        if sym:
            j = np.ravel_multi_index(
                tuple(N - 1 - k for k, N in zip(np.unravel_index(i, W.shape), W.shape)), W.shape
            )
            if not new[j]:
                new[j] = True
                added += 1
    if added != moved or last >= R:
        raise GridError(f"no shell radius below R = {R:.4g} restores the volume; R is too small")
    return Truncation(W.with_occupancy(new.reshape(W.shape)), R, float(last), moved)
