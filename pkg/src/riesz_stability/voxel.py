"""Voxel sets on uniform cubic grids, rasterization and rearrangement."""

from __future__ import annotations

import base64
import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy import ndimage

from .errors import EmptySetError, GridError
from .kernel import BallSpec, Kernel, unit_ball_volume

_CHUNK = 1 << 21


@dataclass(frozen=True)
class Grid:
    """Cell-centered grid; ``origin`` is the center of cell (0, ..., 0)."""

    shape: tuple
    spacing: float
    origin: tuple

    def __post_init__(self):
        object.__setattr__(self, "shape", tuple(int(s) for s in self.shape))
        object.__setattr__(self, "origin", tuple(float(o) for o in self.origin))
        if any(s < 1 for s in self.shape):
            raise GridError(f"grid shape must be positive, got {self.shape}")
        if not self.spacing > 0:
            raise GridError(f"grid spacing must be positive, got {self.spacing}")
        if len(self.origin) != len(self.shape):
            raise GridError("origin and shape disagree in dimension")

    @classmethod
    def cube(cls, center, half_width, resolution):
        """``resolution`` cells per axis spanning center +- half_width."""
        center = tuple(float(c) for c in center)
        h = 2.0 * half_width / resolution
        origin = tuple(c - half_width + 0.5 * h for c in center)
        return cls((resolution,) * len(center), h, origin)

    @property
    def n(self):
        return len(self.shape)

    @property
    def cell_volume(self):
        return self.spacing**self.n

    def axes(self):
        return [self.origin[i] + self.spacing * np.arange(self.shape[i]) for i in range(self.n)]

    def centers(self):
        """Array of shape (*shape, n) with cell-center coordinates."""
        return np.stack(np.meshgrid(*self.axes(), indexing="ij"), axis=-1)

    def bounds(self):
        h = self.spacing
        lo = np.array(self.origin) - 0.5 * h
        hi = lo + h * np.array(self.shape)
        return lo, hi

    def midpoint(self):
        return np.array(self.origin) + 0.5 * self.spacing * (np.array(self.shape) - 1)

    def to_dict(self):
        return {"n": self.n, "shape": list(self.shape), "spacing": self.spacing, "origin": list(self.origin)}


class VoxelSet:
    """Binary occupancy on a grid. Immutable once built."""

    def __init__(self, occupancy, spacing, origin=None):
        occ = np.array(occupancy, dtype=bool)
        if origin is None:
            origin = (0.0,) * occ.ndim
        self.grid = Grid(occ.shape, float(spacing), origin)
        occ.setflags(write=False)
        self.occupancy = occ

    @classmethod
    def on_grid(cls, occupancy, grid: Grid):
        return cls(occupancy, grid.spacing, grid.origin)

    def __repr__(self):
        return f"VoxelSet(n={self.n}, shape={self.shape}, h={self.spacing:.4g}, count={self.count})"

    @property
    def n(self):
        return self.grid.n

    @property
    def shape(self):
        return self.grid.shape

    @property
    def spacing(self):
        return self.grid.spacing

    @property
    def origin(self):
        return self.grid.origin

    @property
    def count(self) -> int:
        return int(np.count_nonzero(self.occupancy))

    @property
    def empty(self) -> bool:
        return self.count == 0

    @property
    def volume(self) -> float:
        return self.count * self.grid.cell_volume

    @property
    def volume_radius(self) -> float:
        return (self.volume / unit_ball_volume(self.n)) ** (1.0 / self.n)

    def require_nonempty(self):
        if self.empty:
            raise EmptySetError("operation needs a set of finite positive volume")

    def occupied_index(self):
        return np.argwhere(self.occupancy)

    def occupied_centers(self):
        return np.array(self.origin) + self.spacing * self.occupied_index()

    def barycenter(self):
        self.require_nonempty()
        return self.occupied_centers().mean(axis=0)

    def cropped(self, pad: int = 0) -> "VoxelSet":
        """Smallest box around the occupied cells, optionally padded."""
        self.require_nonempty()
        idx = self.occupied_index()
        lo = idx.min(axis=0) - pad
        hi = idx.max(axis=0) + 1 + pad
        out = np.zeros(tuple(hi - lo), dtype=bool)
        src_lo = np.maximum(lo, 0)
        src_hi = np.minimum(hi, self.shape)
        dst = tuple(slice(a - l, b - l) for a, b, l in zip(src_lo, src_hi, lo))
        out[dst] = self.occupancy[tuple(slice(a, b) for a, b in zip(src_lo, src_hi))]
        origin = np.array(self.origin) + self.spacing * lo
        return VoxelSet(out, self.spacing, tuple(origin))

    def padded(self, pad: int) -> "VoxelSet":
        out = np.pad(self.occupancy, pad)
        origin = np.array(self.origin) - self.spacing * pad
        return VoxelSet(out, self.spacing, tuple(origin))

    def translated(self, v) -> "VoxelSet":
        return VoxelSet(self.occupancy, self.spacing, tuple(np.array(self.origin) + np.asarray(v, float)))

    def scaled(self, f: float) -> "VoxelSet":
        return VoxelSet(self.occupancy, self.spacing * f, tuple(np.array(self.origin) * f))

    def reflected(self, axis: int) -> "VoxelSet":
        """Mirror image under x_axis -> -x_axis."""
        occ = np.flip(self.occupancy, axis)
        origin = list(self.origin)
        origin[axis] = -(origin[axis] + self.spacing * (self.shape[axis] - 1))
        return VoxelSet(occ, self.spacing, tuple(origin))

    def with_occupancy(self, occ) -> "VoxelSet":
        return VoxelSet(occ, self.spacing, self.origin)

    def same_cells(self, other: "VoxelSet", tol: float = 1e-6) -> bool:
        """True if both sets occupy the same cells in world coordinates."""
        if self.n != other.n or abs(self.spacing - other.spacing) > tol * self.spacing:
            return False
        if self.count != other.count:
            return False
        if self.empty:
            return True
        a = np.round(self.occupied_centers() / self.spacing, 3)
        b = np.round(other.occupied_centers() / other.spacing, 3)
        a = a[np.lexsort(a.T[::-1])]
        b = b[np.lexsort(b.T[::-1])]
        return bool(np.allclose(a, b, atol=tol * 1e3))

    def is_origin_symmetric(self) -> bool:
        """Invariant under x -> -x (world coordinates)."""
        if self.empty:
            return True
        refl = self
        for ax in range(self.n):
            refl = refl.reflected(ax)
        return self.same_cells(refl)

    def is_grid_symmetric(self) -> bool:
        """Grid centered at the origin and occupancy invariant under every axis flip."""
        if not np.allclose(self.grid.midpoint(), 0.0, atol=1e-9 * self.spacing):
            return False
        return all(np.array_equal(self.occupancy, np.flip(self.occupancy, ax)) for ax in range(self.n))

    def union(self, other: "VoxelSet") -> "VoxelSet":
        if other.grid != self.grid:
            raise GridError("set algebra needs identical grids")
        return self.with_occupancy(self.occupancy | other.occupancy)

    def intersection(self, other: "VoxelSet") -> "VoxelSet":
        if other.grid != self.grid:
            raise GridError("set algebra needs identical grids")
        return self.with_occupancy(self.occupancy & other.occupancy)

    def symmetric_difference_volume(self, other: "VoxelSet") -> float:
        if other.grid != self.grid:
            raise GridError("set algebra needs identical grids")
        return int(np.count_nonzero(self.occupancy ^ other.occupancy)) * self.grid.cell_volume

    # serialization -------------------------------------------------------

    def to_dict(self):
        bits = np.packbits(self.occupancy.ravel(order="F").astype(np.uint8), bitorder="little")
        d = self.grid.to_dict()
        d["occupancy"] = base64.b64encode(bits.tobytes()).decode("ascii")
        return d

    @classmethod
    def from_dict(cls, d):
        n = int(d["n"])
        shape = tuple(int(s) for s in d["shape"])
        if len(shape) != n:
            raise ValueError("shape length does not match n")
        total = int(np.prod(shape))
        if "occupancy" in d:
            raw = np.frombuffer(base64.b64decode(d["occupancy"]), dtype=np.uint8)
            bits = np.unpackbits(raw, bitorder="little")
            if bits.size < total:
                raise ValueError("occupancy bit array shorter than the grid")
            occ = bits[:total].astype(bool).reshape(shape, order="F")
        elif "cells" in d:
            occ = np.zeros(shape, dtype=bool)
            cells = np.asarray(d["cells"], dtype=int).reshape(-1, n)
            if len(cells) and (cells.min() < 0 or np.any(cells >= np.array(shape))):
                raise ValueError("cell index outside the grid")
            occ[tuple(cells.T)] = True
        else:
            raise ValueError("voxel set needs 'occupancy' or 'cells'")
        return cls(occ, float(d["spacing"]), tuple(d["origin"]))


class CoverageField:
    """Fraction of each cell covered by a shape, values in [0, 1]."""

    def __init__(self, values, grid: Grid):
        v = np.clip(np.asarray(values, dtype=float), 0.0, 1.0)
        if v.shape != grid.shape:
            raise GridError("coverage values do not match the grid")
        self.values = v
        self.grid = grid

    @property
    def volume(self):
        return float(self.values.sum()) * self.grid.cell_volume


class PotentialField:
    """Potential sampled at cell centers."""

    def __init__(self, values, grid: Grid, kernel: Kernel | None = None):
        v = np.asarray(values, dtype=float)
        if v.shape != grid.shape:
            raise GridError("field values do not match the grid")
        self.values = v
        self.grid = grid
        self.kernel = kernel

    def to_dict(self):
        d = self.grid.to_dict()
        d["values"] = self.values.ravel(order="F").tolist()
        if self.kernel is not None:
            d["kernel"] = self.kernel.to_dict()
        return d

    @classmethod
    def from_dict(cls, d):
        shape = tuple(int(s) for s in d["shape"])
        grid = Grid(shape, float(d["spacing"]), tuple(d["origin"]))
        vals = np.asarray(d["values"], dtype=float).reshape(shape, order="F")
        k = d.get("kernel")
        return cls(vals, grid, Kernel(int(k["n"]), float(k["lambda"])) if k else None)


# rasterization -------------------------------------------------------------


def _sub_offsets(n, subsamples, h):
    s = int(subsamples)
    if s < 1:
        raise ValueError("subsamples must be >= 1")
    o = ((np.arange(s) + 0.5) / s - 0.5) * h
    return np.stack(np.meshgrid(*([o] * n), indexing="ij"), axis=-1).reshape(-1, n)


def _fraction_inside(points, inside, h, subsamples):
    """Fraction of subsample points inside, for each cell center in ``points``."""
    n = points.shape[1]
    off = _sub_offsets(n, subsamples, h)
    out = np.empty(len(points))
    step = max(1, _CHUNK // len(off))
    for k in range(0, len(points), step):
        p = points[k:k + step, None, :] + off[None, :, :]
        out[k:k + step] = inside(p.reshape(-1, n)).reshape(-1, len(off)).mean(axis=1)
    return out


def ball_coverage(points, h, center, R, subsamples=4):
    """Coverage of the cells centered at ``points`` (m, n) by the ball B(center, R)."""
    points = np.asarray(points, dtype=float)
    center = np.asarray(center, dtype=float)
    n = points.shape[1]
    d = np.sqrt(np.sum((points - center) ** 2, axis=1))
    half = 0.5 * h * math.sqrt(n)
    cov = (d + half <= R).astype(float)
    mixed = np.nonzero((d + half > R) & (d - half < R))[0]
    if len(mixed):
        # |p + o - c|^2 = |p - c|^2 + 2 (p - c).o + |o|^2, one matmul per chunk
        off = _sub_offsets(n, subsamples, h)
        oo = np.sum(off * off, axis=1)
        rel = points[mixed] - center
        base = d[mixed] ** 2
        R2 = R * R
        step = max(1, _CHUNK // len(off))
        for k in range(0, len(mixed), step):
            d2 = base[k:k + step, None] + 2.0 * (rel[k:k + step] @ off.T) + oo[None, :]
            cov[mixed[k:k + step]] = np.count_nonzero(d2 < R2, axis=1) / len(off)
    return cov


def _check_inside_grid(grid: Grid, lo, hi):
    glo, ghi = grid.bounds()
    if np.any(np.asarray(lo) <= glo) or np.any(np.asarray(hi) >= ghi):
        raise GridError("shape does not fit strictly inside the grid bounding box")


def rasterize_ball(spec: BallSpec, grid: Grid, subsamples: int = 4) -> CoverageField:
    c = np.asarray(spec.center, dtype=float)
    if len(c) != grid.n:
        raise GridError("ball center dimension does not match the grid")
    _check_inside_grid(grid, c - spec.radius, c + spec.radius)
    pts = grid.centers().reshape(-1, grid.n)
    cov = ball_coverage(pts, grid.spacing, c, spec.radius, subsamples)
    return CoverageField(cov.reshape(grid.shape), grid)


def rasterize_radial(A, grid: Grid, center=None, subsamples: int = 4) -> CoverageField:
    """Coverage of a centered radial set translated to ``center``."""
    c = np.zeros(grid.n) if center is None else np.asarray(center, dtype=float)
    _check_inside_grid(grid, c - A.outer_radius, c + A.outer_radius)
    pts = grid.centers().reshape(-1, grid.n)
    cov = np.zeros(len(pts))
    for a, b in A.shells:
        cov += ball_coverage(pts, grid.spacing, c, b, subsamples)
        if a > 0:
            cov -= ball_coverage(pts, grid.spacing, c, a, subsamples)
    return CoverageField(cov.reshape(grid.shape), grid)


def rasterize_implicit(inside, grid: Grid, subsamples: int = 4) -> CoverageField:
    """Coverage of {x : inside(x)} for shapes whose features exceed a cell.

    Cells whose corners disagree, and their neighbors, are subsampled; the
    rest take the common corner value.
    """
    n, h = grid.n, grid.spacing
    corner_axes = [o - 0.5 * h + h * np.arange(s + 1) for o, s in zip(grid.origin, grid.shape)]
    corners = np.stack(np.meshgrid(*corner_axes, indexing="ij"), axis=-1)
    cin = inside(corners.reshape(-1, n)).reshape(corners.shape[:-1])
    allin = np.ones(grid.shape, dtype=bool)
    anyin = np.zeros(grid.shape, dtype=bool)
    for shift in np.ndindex(*([2] * n)):
        sl = cin[tuple(slice(s, s + m) for s, m in zip(shift, grid.shape))]
        allin &= sl
        anyin |= sl
    mixed = ndimage.binary_dilation(anyin & ~allin, structure=np.ones((3,) * n, dtype=bool))
    values = allin.astype(float)
    idx = np.argwhere(mixed)
    if len(idx):
        pts = np.array(grid.origin) + h * idx
        values[tuple(idx.T)] = _fraction_inside(pts, inside, h, subsamples)
    return CoverageField(values, grid)


def binarize(c: CoverageField, threshold: float = 0.5) -> VoxelSet:
    if not 0.0 < threshold < 1.0:
        raise ValueError("threshold must lie in (0, 1)")
    return VoxelSet.on_grid(c.values >= threshold, c.grid)


# halfspace symmetrization ------------------------------------------------------


class HalfspaceSymmetrization(NamedTuple):
    plus: VoxelSet
    minus: VoxelSet
    imbalance: float
    plane: float  # world coordinate of the mirror plane along ``axis``
    axis: int


def bisecting_plane(A: VoxelSet, axis: int):
    """Face index k (plane between slices k-1 and k) minimizing the volume imbalance.

    Ties are broken toward the middle of the (contiguous) tied range.
    """
    A.require_nonempty()
    other = tuple(i for i in range(A.n) if i != axis)
    slab = A.occupancy.sum(axis=other) if other else A.occupancy.astype(int)
    left = np.concatenate([[0], np.cumsum(slab)])
    imb = np.abs(2 * left - A.count)
    best = np.flatnonzero(imb == imb.min())
    k = int(best[(len(best) - 1) // 2])
    return k, int(imb[k])


def symmetrize_halfspace(A: VoxelSet, axis: int, recenter: bool = False) -> HalfspaceSymmetrization:
    """The two symmetrizations of A at the most nearly bisecting grid plane.

    ``plus`` keeps the part below the plane, ``minus`` the part above; each is
    completed by its mirror image. Outputs share a grid symmetric about the
    plane; with ``recenter`` they are translated so the plane sits at 0.
    """
    k, imb = bisecting_plane(A, axis)
    N = A.shape[axis]
    m = max(k, N - k)
    shape = list(A.shape)
    shape[axis] = 2 * m
    base = np.zeros(shape, dtype=bool)
    dst = [slice(None)] * A.n
    dst[axis] = slice(m - k, m - k + N)
    base[tuple(dst)] = A.occupancy
    lower = base.copy()
    upper = base.copy()
    lo_sl = [slice(None)] * A.n
    hi_sl = [slice(None)] * A.n
    lo_sl[axis] = slice(0, m)
    hi_sl[axis] = slice(m, 2 * m)
    lower[tuple(hi_sl)] = False
    upper[tuple(lo_sl)] = False
    plus = lower | np.flip(lower, axis)
    minus = upper | np.flip(upper, axis)
    origin = list(A.origin)
    if recenter:
        origin[axis] = -A.spacing * (m - 0.5)
        plane = 0.0
    else:
        origin[axis] = A.origin[axis] + A.spacing * (k - m)
        plane = A.origin[axis] + A.spacing * (k - 0.5)
    return HalfspaceSymmetrization(
        VoxelSet(plus, A.spacing, tuple(origin)),
        VoxelSet(minus, A.spacing, tuple(origin)),
        imb * A.grid.cell_volume,
        plane,
        axis,
    )


# rearrangement ------------------------------------------------------------------


def distance_order(grid: Grid):
    """Flat (C-order) cell indices sorted by distance from the grid midpoint.

    Ties are broken lexicographically by cell index.
    """
    d2 = np.sum((grid.centers() - grid.midpoint()) ** 2, axis=-1).ravel()
    return np.lexsort((np.arange(d2.size), d2)), np.sqrt(d2)


def rearrange_decreasing(f: PotentialField) -> PotentialField:
    """Symmetric decreasing rearrangement about the grid midpoint."""
    if np.any(f.values < 0):
        raise ValueError("rearrangement needs a nonnegative field")
    order, _ = distance_order(f.grid)
    vals = np.sort(f.values.ravel())[::-1]
    out = np.empty_like(vals)
    out[order] = vals
    return PotentialField(out.reshape(f.grid.shape), f.grid, f.kernel)
