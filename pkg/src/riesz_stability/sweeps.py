"""Parameter sweeps over shape families, feeding the exponent fit."""

from __future__ import annotations

import math

import numpy as np

from .asymmetry import fraenkel_asymmetry
from .corpus import DEFAULT_RESOLUTION, ellipsoid, two_balls
from .kernel import Kernel
from .potential import quadratic_distance
from .radial import annulus_perturbation, deficit_radial, quadratic_distance_radial, radial_asymmetry
from .stability import DEFAULT_TOLERANCES, FamilySweep, deficit, fit_exponent

FAMILIES = ("annulus", "ellipsoid", "two-balls", "lambda-scan")


def parse_range(text: str) -> list:
    """``start:stop:count`` (inclusive linspace), a comma list, or one number."""
    text = (text or "").strip()
    if not text:
        raise ValueError("empty parameter range")
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise ValueError(f"range must look like start:stop:count, got {text!r}")
        start, stop, count = float(parts[0]), float(parts[1]), int(parts[2])
        if count < 1:
            raise ValueError("range count must be positive")
        return [float(v) for v in np.linspace(start, stop, count)]
    return [float(v) for v in text.split(",") if v.strip()]


def sweep_annulus(a_values, kernel: Kernel = Kernel(3, 1.0), fit: bool = True) -> FamilySweep:
    """Exact radial computation along the annulus perturbation family."""
    if not a_values:
        raise ValueError("empty parameter range")
    n = kernel.n
    alpha, delta, middle = [], [], []
    for a in a_values:
        A = annulus_perturbation(a, n)
        alpha.append(radial_asymmetry(A))
        delta.append(deficit_radial(A, kernel))
        middle.append(quadratic_distance_radial(A, kernel) if kernel.reflection_positive else math.nan)
    if fit:
        sw = fit_exponent(a_values, alpha, delta, "annulus", n, middle_yg=middle)
    else:
        sw = FamilySweep("annulus", list(a_values), alpha, delta, n, middle)
    sw.notes["kernel"] = kernel.to_dict()
    return sw


def _voxel_sweep(family, params, build, kernel, resolution, subsamples):
    alpha, delta, middle, floors = [], [], [], []
    for p in params:
        A = build(p)
        a, c = fraenkel_asymmetry(A, subsamples, return_center=True)
        alpha.append(a)
        delta.append(deficit(A, kernel))
        middle.append(quadratic_distance(A, kernel, center=c) if kernel.reflection_positive else math.nan)
        floors.append(DEFAULT_TOLERANCES.alpha_floor(A))
    sw = fit_exponent(params, alpha, delta, family, kernel.n, alpha_floor=max(floors), middle_yg=middle)
    sw.notes.update({"kernel": kernel.to_dict(), "resolution": resolution, "alpha_floor": max(floors)})
    return sw


def sweep_ellipsoid(e_values, kernel: Kernel = Kernel(3, 1.0), resolution=DEFAULT_RESOLUTION,
                    subsamples=4) -> FamilySweep:
    """Volume-preserving ellipsoids with semi-axes (e, 1/e, 1)."""
    if not e_values:
        raise ValueError("empty parameter range")
    return _voxel_sweep("ellipsoid", list(e_values), lambda e: ellipsoid((e, 1.0 / e, 1.0), resolution, subsamples),
                        kernel, resolution, subsamples)


def sweep_two_balls(s_values, kernel: Kernel = Kernel(3, 1.0), resolution=DEFAULT_RESOLUTION,
                    subsamples=4) -> FamilySweep:
    """Union of two unit balls with centers ``s`` apart; s = 0 is the ball."""
    if not s_values:
        raise ValueError("empty parameter range")
    return _voxel_sweep("two-balls", list(s_values), lambda s: two_balls(1.0, s, resolution=resolution,
                                                                         subsamples=subsamples),
                        kernel, resolution, subsamples)


def sweep_lambda(a: float, lambdas, n: int = 3) -> FamilySweep:
    """delta_lam / alpha^2 on one annulus perturbation as lambda varies.

    alpha does not depend on lambda, so no exponent is fitted.
    """
    if not lambdas:
        raise ValueError("empty parameter range")
    A = annulus_perturbation(a, n)
    alpha = radial_asymmetry(A)
    deltas, middle = [], []
    for lam in lambdas:
        k = Kernel(n, lam)
        deltas.append(deficit_radial(A, k))
        middle.append(quadratic_distance_radial(A, k) if k.reflection_positive else math.nan)
    sw = FamilySweep("lambda-scan", list(lambdas), [alpha] * len(lambdas), deltas, n, middle)
    sw.notes["a"] = a
    return sw
