"""Seeded generators of test shapes and the default verification corpus."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .kernel import BallSpec, unit_ball_volume
from .radial import RadialSet, annulus_perturbation
from .voxel import Grid, VoxelSet, binarize, rasterize_ball, rasterize_implicit, rasterize_radial

DEFAULT_RESOLUTION = 64
SHAPES = ("ball", "annulus", "ellipsoid", "two-balls", "box", "blob")


def default_grid(center, volume_radius, extent, resolution=DEFAULT_RESOLUTION, n=3):
    """Cube of side 4 R_A around ``center``, enlarged if the shape reaches further.

    ``extent`` is the largest distance from ``center`` to a point of the shape
    along any axis.
    """
    if resolution < 8:
        raise ValueError(f"resolution must be at least 8, got {resolution}")
    half = 2.0 * volume_radius
    if extent >= half * (1.0 - 2.0 / resolution):
        # leave at least two empty cells on each side
        half = extent * resolution / (resolution - 4.0)
    c = np.broadcast_to(np.asarray(center, dtype=float), (n,))
    return Grid.cube(c, half, resolution)


def ball(R=1.0, center=None, resolution=DEFAULT_RESOLUTION, n=3, subsamples=4) -> VoxelSet:
    c = np.zeros(n) if center is None else np.asarray(center, dtype=float)
    grid = default_grid(c, R, R, resolution, n)
    return binarize(rasterize_ball(BallSpec(R, c), grid, subsamples))


def radial(A: RadialSet, resolution=DEFAULT_RESOLUTION, subsamples=4) -> VoxelSet:
    grid = default_grid(np.zeros(A.n), A.volume_radius, A.outer_radius, resolution, A.n)
    return binarize(rasterize_radial(A, grid, subsamples=subsamples))


def annulus(a, resolution=DEFAULT_RESOLUTION, n=3, subsamples=4) -> VoxelSet:
    return radial(annulus_perturbation(a, n), resolution, subsamples)


def ellipsoid(semi_axes=(1.3, 1 / 1.3, 1.0), resolution=DEFAULT_RESOLUTION, subsamples=4) -> VoxelSet:
    ax = np.asarray(semi_axes, dtype=float)
    n = len(ax)
    RA = float(np.prod(ax)) ** (1.0 / n)
    grid = default_grid(np.zeros(n), RA, float(ax.max()), resolution, n)
    return binarize(rasterize_implicit(lambda p: np.sum((p / ax) ** 2, axis=1) < 1.0, grid, subsamples))


def two_balls(R=1.0, separation=3.0, R2=None, resolution=DEFAULT_RESOLUTION, n=3, subsamples=4) -> VoxelSet:
    """Union of B(-s/2 e1, R) and B(s/2 e1, R2); disjoint when s > R + R2."""
    R2 = R if R2 is None else R2
    c1 = np.zeros(n)
    c1[0] = -0.5 * separation
    c2 = -c1
    RA = (R**n + R2**n) ** (1.0 / n)
    extent = max(0.5 * separation + max(R, R2), max(R, R2))
    grid = default_grid(np.zeros(n), RA, extent, resolution, n)

    def inside(p):
        return (np.sum((p - c1) ** 2, axis=1) < R * R) | (np.sum((p - c2) ** 2, axis=1) < R2 * R2)

    return binarize(rasterize_implicit(inside, grid, subsamples))


def box(sides=(1.6, 1.6, 1.6), resolution=DEFAULT_RESOLUTION, subsamples=4) -> VoxelSet:
    s = 0.5 * np.asarray(sides, dtype=float)
    n = len(s)
    RA = (float(np.prod(2 * s)) / unit_ball_volume(n)) ** (1.0 / n)
    grid = default_grid(np.zeros(n), RA, float(s.max()), resolution, n)
    return binarize(rasterize_implicit(lambda p: np.all(np.abs(p) < s, axis=1), grid, subsamples))


def blob(seed=0, steps=10, radius=0.5, step_length=0.35, resolution=DEFAULT_RESOLUTION, n=3,
         subsamples=4) -> VoxelSet:
    """Seeded random walk dilated by a ball; connected since steps < 2 * radius."""
    rng = np.random.default_rng(seed)
    d = rng.normal(size=(steps, n))
    d *= step_length / np.linalg.norm(d, axis=1, keepdims=True)
    pts = np.vstack([np.zeros(n), np.cumsum(d, axis=0)])
    pts -= pts.mean(axis=0)
    # volume radius only sizes the grid; the union bound is good enough
    RA = radius * len(pts) ** (1.0 / n)
    extent = float(np.max(np.abs(pts))) + radius
    grid = default_grid(np.zeros(n), min(RA, extent), extent, resolution, n)
    r2 = radius * radius

    def inside(p):
        out = np.zeros(len(p), dtype=bool)
        for q in pts:
            out |= np.sum((p - q) ** 2, axis=1) < r2
        return out

    return binarize(rasterize_implicit(inside, grid, subsamples))


def ball_with_satellite(fraction=0.03, distance=4.0, resolution=DEFAULT_RESOLUTION, n=3,
                        subsamples=4) -> VoxelSet:
    """Unit ball plus a small ball holding ``fraction`` of the unit-ball volume."""
    return two_balls(1.0, distance, fraction ** (1.0 / n), resolution, n, subsamples).translated(
        np.eye(n)[0] * 0.5 * distance
    )


def checkerboard_ball(R=1.0, resolution=DEFAULT_RESOLUTION, n=3) -> VoxelSet:
    """Voxel ball thinned to half density: cells whose first two indices have an even sum.

    Flipping every axis preserves that parity, so the set stays origin-symmetric.
    """
    B = ball(R, None, resolution, n)
    idx = np.indices(B.shape)[:2].sum(axis=0)
    return B.with_occupancy(B.occupancy & (idx % 2 == 0))


def generate(shape: str, resolution=DEFAULT_RESOLUTION, n=3, seed=0, **params):
    """Dispatch by shape name; ``annulus`` returns the exact RadialSet."""
    if shape == "ball":
        return ball(params.get("R", 1.0), params.get("center"), resolution, n)
    if shape == "annulus":
        return annulus_perturbation(params.get("a", 0.1), n)
    if shape == "ellipsoid":
        return ellipsoid(params.get("semi_axes", (1.3, 1 / 1.3, 1.0)), resolution)
    if shape == "two-balls":
        return two_balls(params.get("R", 1.0), params.get("separation", 3.0), params.get("R2"), resolution, n)
    if shape == "box":
        return box(params.get("sides", (1.6,) * n), resolution)
    if shape == "blob":
        return blob(seed, params.get("steps", 10), params.get("radius", 0.5), resolution=resolution, n=n)
    raise ValueError(f"unknown shape {shape!r}; choose from {', '.join(SHAPES)}")


@dataclass
class CorpusEntry:
    name: str
    set: VoxelSet
    params: dict = field(default_factory=dict)


def build_corpus(resolution=DEFAULT_RESOLUTION) -> list:
    """The seeded 3D corpus: symmetric and asymmetric shapes, 33 sets."""
    out = [
        CorpusEntry("ball", ball(resolution=resolution)),
        CorpusEntry("ball-shifted", ball(center=(0.31, -0.17, 0.05), resolution=resolution), {"center": [0.31, -0.17, 0.05]}),
        CorpusEntry("ball-small", ball(R=0.6, resolution=resolution), {"R": 0.6}),
    ]
    for a in (0.05, 0.1, 0.15, 0.2, 0.3):
        out.append(CorpusEntry(f"annulus-{a:g}", annulus(a, resolution), {"a": a}))
    for e in (1.1, 1.2, 1.3, 1.5, 2.0):
        out.append(CorpusEntry(f"ellipsoid-{e:g}", ellipsoid((e, 1 / e, 1.0), resolution), {"semi_axes": [e, 1 / e, 1.0]}))
    for e in (1.3, 2.0):
        ax = (e, 1.0, 1.0)
        out.append(CorpusEntry(f"prolate-{e:g}", ellipsoid(ax, resolution), {"semi_axes": list(ax)}))
    for s in (2.2, 3.0, 5.0):
        out.append(CorpusEntry(f"two-balls-{s:g}", two_balls(1.0, s, resolution=resolution), {"separation": s}))
    out.append(CorpusEntry("two-balls-unequal", two_balls(1.0, 2.0, 0.6, resolution=resolution), {"separation": 2.0, "R2": 0.6}))
    for sides in ((1.6, 1.6, 1.6), (2.0, 1.0, 1.0), (1.5, 1.0, 0.7), (3.0, 1.0, 1.0)):
        out.append(CorpusEntry("box-" + "x".join(f"{s:g}" for s in sides), box(sides, resolution), {"sides": list(sides)}))
    for seed in range(8):
        out.append(CorpusEntry(f"blob-{seed}", blob(seed, resolution=resolution), {"seed": seed}))
    out.append(CorpusEntry("ball-satellite", ball_with_satellite(resolution=resolution), {"fraction": 0.03, "distance": 4.0}))
    out.append(CorpusEntry("checkerboard-ball", checkerboard_ball(resolution=resolution)))
    return out


def volume_error(A: VoxelSet, exact: float) -> float:
    return abs(A.volume - exact) / exact


def ball_volume(R=1.0, n=3) -> float:
    return unit_ball_volume(n) * R**n


__all__ = [name for name in dir() if not name.startswith("_") and name not in {"math", "np", "dataclass", "field"}]
