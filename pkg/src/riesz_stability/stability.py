"""Deficit, asymmetry-based stability checks and exponent fitting.

Every check returns a StabilityReport oriented so that the inequality reads
``lhs >= rhs``; it passes when ``margin = lhs - rhs >= -tolerance``. All
reported quantities are dimensionless (energies are divided by E(A*),
potentials by the centre value of the equal-volume ball).
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import asdict, dataclass, field
from functools import cached_property

import numpy as np
from scipy import ndimage

from .asymmetry import fraenkel_asymmetry, normalized_symmetric_difference
from .errors import GridError, PreconditionError, UnsupportedDimensionError
from .kernel import Kernel, ball_energy, ball_potential, ball_potential_center, sphere_area, unit_ball_volume
from .potential import energy_voxel, poisson_residual, potential_fft, quadratic_distance
from .radial import integrate_intervals
from .symmetrize import fmp_branches, frame_around_origin, truncate_tail
from .voxel import VoxelSet, distance_order, rearrange_decreasing, symmetrize_halfspace

PASS, FAIL, INCONCLUSIVE = "pass", "fail", "inconclusive"


@dataclass
class Tolerances:
    """Resolution-dependent tolerances, K * h / R_A unless overridden.

    The K values were calibrated on the voxel ball (n=3, lam=1), where the
    deficit error is about 0.011 h/R_A and the potential-maximum error about
    0.020 h/R_A at 64 cells per axis; K = 0.06 leaves a factor of about 3.
    The voxel ball itself has Fraenkel asymmetry 0.35 h/R_A, so asymmetries
    below 0.5 h/R_A are treated as indistinguishable from zero.
    """

    k_deficit: float = 0.06
    k_potential: float = 0.06
    k_alpha_floor: float = 0.5
    c_floor: float = 1e-3
    poisson: float = 0.05
    lattice_identity: float = 1e-9
    override: float | None = None

    def _scaled(self, k, A: VoxelSet):
        if self.override is not None:
            return float(self.override)
        return k * A.spacing / A.volume_radius

    def deficit(self, A):
        return self._scaled(self.k_deficit, A)

    def potential(self, A):
        return self._scaled(self.k_potential, A)

    def alpha_floor(self, A):
        return self.k_alpha_floor * A.spacing / A.volume_radius


DEFAULT_TOLERANCES = Tolerances()


@dataclass
class StabilityReport:
    check: str
    kernel: dict
    set: str
    lhs: float
    rhs: float
    tolerance: float
    resolution: dict
    status: str = ""
    details: dict = field(default_factory=dict)

    def __post_init__(self):
        self.lhs = float(self.lhs)
        self.rhs = float(self.rhs)
        self.margin = self.lhs - self.rhs
        self.passed = bool(self.margin >= -self.tolerance)
        if not self.status:
            self.status = PASS if self.passed else FAIL

    def to_dict(self):
        d = asdict(self)
        d["margin"] = self.margin
        d["pass"] = self.passed
        return _plain(d)

    def __str__(self):
        return (f"{self.check:<22} {self.set:<24} {self.status:<12} "
                f"lhs={self.lhs:.6g} rhs={self.rhs:.6g} margin={self.margin:+.3e} tol={self.tolerance:.2e}")


def _plain(x):
    if isinstance(x, dict):
        return {str(k): _plain(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_plain(v) for v in x]
    if isinstance(x, np.ndarray):
        return _plain(x.tolist())
    if isinstance(x, (np.floating, float)):
        x = float(x)
        return x if math.isfinite(x) else str(x)
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, np.bool_):
        return bool(x)
    return x


def sort_reports(reports):
    return sorted(reports, key=lambda r: (r.check, r.set, json.dumps(_plain(r.details), sort_keys=True)))


def reports_to_json(reports) -> str:
    return json.dumps([r.to_dict() for r in sort_reports(reports)], indent=2)


def resolution_info(A: VoxelSet) -> dict:
    return {"shape": list(A.shape), "spacing": A.spacing, "volume_radius": A.volume_radius,
            "h_over_RA": A.spacing / A.volume_radius}


class Analysis:
    """Lazily computed quantities of one set under one kernel, shared across checks."""

    def __init__(self, A: VoxelSet, kernel: Kernel, name: str = "", subsamples: int = 4,
                 nearfield: bool = False, tolerances: Tolerances = DEFAULT_TOLERANCES):
        A.require_nonempty()
        self.A = A
        self.kernel = kernel
        self.name = name or repr(A)
        self.subsamples = subsamples
        self.nearfield = nearfield
        self.tol = tolerances

    @cached_property
    def _alpha_center(self):
        return fraenkel_asymmetry(self.A, self.subsamples, return_center=True)

    @property
    def alpha(self) -> float:
        return self._alpha_center[0]

    @property
    def center(self):
        return self._alpha_center[1]

    @cached_property
    def energy(self) -> float:
        return energy_voxel(self.A, self.kernel, self.nearfield)

    @cached_property
    def ball_energy(self) -> float:
        return ball_energy(self.A.volume_radius, self.kernel)

    @property
    def delta(self) -> float:
        return (self.ball_energy - self.energy) / self.ball_energy

    @cached_property
    def potential(self):
        return potential_fft(self.A, self.kernel, self.nearfield)

    @property
    def alpha_floor(self) -> float:
        return self.tol.alpha_floor(self.A)

    @property
    def below_floor(self) -> bool:
        return self.alpha < self.alpha_floor

    def report(self, check, lhs, rhs, tolerance, status="", **details):
        return StabilityReport(check, self.kernel.to_dict(), self.name, lhs, rhs, tolerance,
                               resolution_info(self.A), status, details)


def _analysis(A, kernel, analysis, name, tolerances, subsamples=4, nearfield=False):
    if analysis is not None:
        return analysis
    return Analysis(A, kernel, name, subsamples, nearfield, tolerances or DEFAULT_TOLERANCES)


def deficit(A: VoxelSet, kernel: Kernel, nearfield: bool = False) -> float:
    """(E(A*) - E(A)) / E(A*), unclamped; may dip below zero by grid error."""
    A.require_nonempty()
    e_star = ball_energy(A.volume_radius, kernel)
    return (e_star - energy_voxel(A, kernel, nearfield)) / e_star


def clamped(delta: float) -> dict:
    """Clamp a raw deficit at zero and record that it happened."""
    return {"delta_raw": delta, "delta": max(delta, 0.0), "clamped": delta < 0.0}


def theorem_main_constant(n: int) -> float:
    """c_n = (n-2) 2^(n/2) / n^(2+n/2)."""
    if n < 3:
        raise UnsupportedDimensionError("the Newton-kernel bound needs n >= 3")
    return (n - 2) * 2.0 ** (n / 2) / n ** (2 + n / 2)


def lemma_max_factor(alpha: float, kernel: Kernel) -> float:
    n, lam = kernel.n, kernel.lam
    return 1.0 - lam * (n - lam) / n**2 * alpha**2


def key3_slope(n: int) -> float:
    """Leading coefficient of the boundary gap bound in (r/R_A - 1), in units of omega_n."""
    return -2.0 + n * 2.0 ** (1.0 - n / 2)


class RatioTracker:
    """Running minimum of delta/alpha^2 across a suite."""

    def __init__(self):
        self.minimum = math.inf
        self.argmin = None
        self.values = {}

    def update(self, name, ratio):
        self.values[name] = ratio
        if ratio < self.minimum:
            self.minimum, self.argmin = ratio, name


# checks ----------------------------------------------------------------------


def check_theorem_sharp3(A: VoxelSet, name="", tolerances=None, analysis=None,
                         tracker: RatioTracker | None = None) -> StabilityReport:
    """delta / alpha^2 above a small floor, for n = 3 and lam = 1."""
    if A.n != 3:
        raise PreconditionError("the quadratic stability bound is stated for n = 3, lambda = 1")
    an = _analysis(A, Kernel(3, 1.0), analysis, name, tolerances)
    if an.kernel.n != 3 or an.kernel.lam != 1.0:
        raise PreconditionError("the quadratic stability bound is stated for n = 3, lambda = 1")
    alpha, delta = an.alpha, an.delta
    c_floor = an.tol.c_floor
    if an.below_floor:
        return an.report("sharp3", 0.0, c_floor, 0.0, INCONCLUSIVE, alpha=alpha,
                         alpha_floor=an.alpha_floor, reason="alpha below grid floor", **clamped(delta))
    ratio = delta / alpha**2
    if tracker is not None:
        tracker.update(an.name, ratio)
    return an.report("sharp3", ratio, c_floor, 0.0, alpha=alpha, alpha_floor=an.alpha_floor,
                     ratio=ratio, **clamped(delta))


def check_theorem_main(A: VoxelSet, kernel: Kernel, name="", tolerances=None, analysis=None) -> StabilityReport:
    """delta >= c_n alpha^(n+2) for the Newton kernel."""
    if not kernel.is_newton:
        raise PreconditionError(f"this bound needs the Newton kernel lambda = n - 2, got {kernel.to_dict()}")
    an = _analysis(A, kernel, analysis, name, tolerances)
    n = kernel.n
    c_n = theorem_main_constant(n)
    alpha, delta = an.alpha, an.delta
    rhs = c_n * alpha ** (n + 2)
    return an.report("main", delta, rhs, an.tol.deficit(A), alpha=alpha, c_n=c_n,
                     ratio=delta / alpha ** (n + 2) if alpha > 0 else math.inf, **clamped(delta))


def check_lemma_max(A: VoxelSet, kernel: Kernel, name="", tolerances=None, analysis=None) -> StabilityReport:
    """sup Phi_A <= Phi_{A*}(0) (1 - lam (n - lam) alpha^2 / n^2), normalized by Phi_{A*}(0)."""
    an = _analysis(A, kernel, analysis, name, tolerances)
    center_value = ball_potential_center(A.volume_radius, kernel)
    sup = float(an.potential.values.max())
    factor = lemma_max_factor(an.alpha, kernel)
    return an.report("lemma-max", factor, sup / center_value, an.tol.potential(A), alpha=an.alpha,
                     sup_potential=sup, ball_center_potential=center_value, factor=factor)


def containing_radius(A: VoxelSet) -> float:
    """Smallest r with every occupied cell center in the closed ball B(0, r)."""
    return float(np.sqrt(np.max(np.sum(A.occupied_centers() ** 2, axis=1))))


def check_lemma_key3(A: VoxelSet, r: float | None = None, kernel: Kernel | None = None, name="",
                     tolerances=None, analysis=None) -> StabilityReport:
    """Phi_A <= Phi_{B_r} - (sqrt(2) r)^-lam Vol(B_r minus A) on the sphere |x| = r.

    Needs A symmetric under x -> -x and contained in B_r: every cell center
    inside, and Vol(A) <= Vol(B_r). The default r is the smallest such radius
    plus half a cell. The
    bound is evaluated at every cell center within one cell of the sphere.
    """
    kernel = kernel or Kernel(A.n, A.n - 2.0)
    A.require_nonempty()
    if not A.is_origin_symmetric():
        raise PreconditionError("symmetry precondition: the set is not symmetric under x -> -x")
    # cell centers inside B_r, and no more volume than B_r (cells poking out
    # of the sphere otherwise carry mass the bound does not account for)
    r_min = max(containing_radius(A), A.volume_radius)
    r = r_min + 0.5 * A.spacing if r is None else float(r)
    if r_min > r:
        raise PreconditionError(f"containment precondition: set needs radius {r_min:.4g} > r = {r:.4g}")
    tol = tolerances or (analysis.tol if analysis else DEFAULT_TOLERANCES)
    W = frame_around_origin(A, r + 2.0 * A.spacing)
    phi = potential_fft(W, kernel, analysis.nearfield if analysis else False).values
    d = np.sqrt(np.sum(W.grid.centers() ** 2, axis=-1))
    pts = np.abs(d - r) <= W.spacing
    n, lam = A.n, kernel.lam
    missing = max(unit_ball_volume(n) * r**n - A.volume, 0.0)
    bound = ball_potential(r, d[pts], kernel) - (math.sqrt(2.0) * r) ** (-lam) * missing
    norm = ball_potential_center(A.volume_radius, kernel)
    gap = (bound - phi[pts]) / norm
    k = int(np.argmin(gap))
    return StabilityReport(
        "key3", kernel.to_dict(), name or repr(A), float(gap[k]), 0.0, tol.potential(A), resolution_info(A),
        details={"r": r, "points": int(pts.sum()), "missing_volume": missing,
                 "worst_bound": float(bound[k]) / norm, "worst_potential": float(phi[pts][k]) / norm,
                 "mean_gap": float(gap.mean())},
    )


def sphere_points(n: int, count: int, seed: int = 0):
    """Quasi-uniform unit vectors (normalized scrambled Sobol Gaussians)."""
    from scipy.special import ndtri
    from scipy.stats import qmc

    u = qmc.Sobol(n, scramble=True, seed=seed).random(count)
    g = ndtri(np.clip(u, 1e-12, 1 - 1e-12))
    return g / np.linalg.norm(g, axis=1, keepdims=True)


def key3_expansion(eps=(0.02, 0.05), resolution=64, n=3):
    """Boundary gap of the voxel ball inside B_r, r = R_A (1 + eps).

    Returns, per eps, the actual gap Phi_{A*}(R_A) - max Phi_A on |x| = r (from
    the grid) and the gap guaranteed by the key-3 bound; plus the linear
    coefficient of the guaranteed gap, extracted from the two smallest eps by
    eliminating the quadratic term, in units of omega_n.
    """
    from .corpus import ball

    kernel = Kernel(n, n - 2.0)
    B = ball(resolution=resolution, n=n)
    RA = B.volume_radius
    w = unit_ball_volume(n)
    pts = sphere_points(n, 4096)
    rows = []
    for e in eps:
        r = RA * (1.0 + e)
        W = frame_around_origin(B, r + 3.0 * B.spacing)
        phi = potential_fft(W, kernel).values
        # the sphere |x| = r passes between cell centers: interpolate there
        idx = (r * pts - np.array(W.origin)) / W.spacing
        on_sphere = ndimage.map_coordinates(phi, idx.T, order=3, mode="nearest")
        edge = float(ball_potential(RA, RA, kernel))
        bound = float(ball_potential(r, r, kernel)) - (math.sqrt(2.0) * r) ** (-kernel.lam) * w * (r**n - RA**n)
        rows.append({"eps": e, "actual_gap": edge - float(on_sphere.max()), "bound_gap": edge - bound})
    e1, e2 = rows[0]["eps"], rows[1]["eps"]
    g1, g2 = rows[0]["bound_gap"], rows[1]["bound_gap"]
    scale = w * RA**2
    linear = (g1 * e2**2 - g2 * e1**2) / (e1 * e2 * (e2 - e1)) / scale
    secant = (g2 - g1) / (e2 - e1) / scale
    return {"rows": rows, "linear_coefficient": linear, "secant_slope": secant, "expected": key3_slope(n)}


def check_reflection_positivity(A: VoxelSet, axis: int = 0, kernel: Kernel | None = None, name="",
                                tolerances=None, nearfield=False) -> StabilityReport:
    """E(A+) + E(A-) >= 2 E(A) at the bisecting grid plane along ``axis``.

    On the lattice the difference is a sum of reflected cross terms, so the
    tolerance only covers rounding. delta(A+-) <= 2 delta(A) is reported too.
    """
    kernel = kernel or Kernel(A.n, 1.0)
    if not kernel.reflection_positive:
        raise PreconditionError(f"kernel {kernel.to_dict()} is not reflection positive (needs n-2 <= lambda < n)")
    A.require_nonempty()
    tol = tolerances or DEFAULT_TOLERANCES
    s = symmetrize_halfspace(A, axis)
    e = energy_voxel(A, kernel, nearfield)
    ep = energy_voxel(s.plus, kernel, nearfield)
    em = energy_voxel(s.minus, kernel, nearfield)

    def dl(S, en):
        star = ball_energy(S.volume_radius, kernel)
        return (star - en) / star

    d, dp, dm = dl(A, e), dl(s.plus, ep), dl(s.minus, em)
    td = tol.deficit(A)
    return StabilityReport(
        "reflection", kernel.to_dict(), name or repr(A), (ep + em) / (2 * e), 1.0,
        tol.lattice_identity if tol.override is None else tol.override, resolution_info(A),
        details={"axis": axis, "imbalance": s.imbalance, "plane": s.plane, "delta": d, "delta_plus": dp,
                 "delta_minus": dm, "deficit_tolerance": td,
                 "deficit_bound_holds": bool(dp <= 2 * d + td and dm <= 2 * d + td),
                 "deficit_sum_holds": bool(dp + dm <= 2 * d + td)},
    )


def check_fmp_deficit(A: VoxelSet, kernel: Kernel | None = None, name="", tolerances=None,
                      nearfield=False) -> StabilityReport:
    """delta of every n-fold symmetrization branch is at most 2^n delta(A)."""
    kernel = kernel or Kernel(A.n, 1.0)
    if not kernel.reflection_positive:
        raise PreconditionError(f"kernel {kernel.to_dict()} is not reflection positive (needs n-2 <= lambda < n)")
    tol = tolerances or DEFAULT_TOLERANCES
    d = deficit(A, kernel, nearfield)
    worst, worst_choice, all_d = -math.inf, None, {}
    for S, ch, _ in fmp_branches(A):
        ds = deficit(S, kernel, nearfield)
        all_d["".join(ch)] = ds
        if ds > worst:
            worst, worst_choice = ds, "".join(ch)
    factor = 2**A.n
    return StabilityReport("fmp-deficit", kernel.to_dict(), name or repr(A), factor * d, worst,
                           factor * tol.deficit(A), resolution_info(A),
                           details={"delta": d, "worst_branch": worst_choice, "branch_deficits": all_d})


def _talenti_profile(an: Analysis):
    f = an.potential
    R = rearrange_decreasing(f)
    order, dist = distance_order(f.grid)
    d = dist[order]
    rearranged = R.values.ravel()[order]
    exact = ball_potential(an.A.volume_radius, d, an.kernel)
    return d, rearranged, exact


def check_talenti(A: VoxelSet, name="", tolerances=None, analysis=None, integrated=False) -> StabilityReport:
    """(Phi_A)* <= Phi_{A*} cell by cell in distance rank, Newton kernel.

    Only grid values are rearranged; dropping values outside the grid can only
    lower each rank, so the comparison stays valid.
    """
    kernel = analysis.kernel if analysis else Kernel(A.n, A.n - 2.0)
    if not kernel.is_newton:
        raise PreconditionError("the rearranged-potential comparison is checked for the Newton kernel only")
    an = _analysis(A, kernel, analysis, name, tolerances)
    d, rearranged, exact = _talenti_profile(an)
    norm = ball_potential_center(A.volume_radius, kernel)
    gap = (exact - rearranged) / norm
    RA = A.volume_radius
    interior = d < RA - 2 * A.spacing
    total_gap = float(gap.sum() / len(gap))
    if integrated:
        lhs = float(exact.sum())
        rhs = float(rearranged.sum())
        return an.report("talenti-integrated", lhs / lhs, rhs / lhs, an.tol.potential(A),
                         mean_gap=total_gap)
    k = int(np.argmin(gap))
    return an.report("talenti", float(gap[k]), 0.0, an.tol.potential(A), worst_rank=k, worst_distance=float(d[k]),
                     interior_min_gap=float(gap[interior].min()) if interior.any() else None,
                     mean_gap=total_gap)


def ball_potential_integral(R_A: float, R_E: float, kernel: Kernel) -> float:
    """Integral of Phi_{B(0, R_A)} over B(0, R_E)."""
    n = kernel.n
    area = sphere_area(n)
    cuts = sorted({0.0, min(R_A, R_E), R_E})
    intervals = [(a, b) for a, b in zip(cuts[:-1], cuts[1:]) if b > a]
    return integrate_intervals(lambda t: area * t ** (n - 1) * ball_potential(R_A, t, kernel), intervals,
                               what="ball potential integral")


def check_dom(A: VoxelSet, E: VoxelSet, kernel: Kernel, name="", tolerances=None, analysis=None) -> StabilityReport:
    """int_E Phi_A <= int_{E*} Phi_{A*}, both normalized by the right side."""
    if A.grid != E.grid:
        raise GridError("A and E must live on the same grid")
    E.require_nonempty()
    an = _analysis(A, kernel, analysis, name, tolerances)
    left = float(an.potential.values[E.occupancy].sum()) * A.grid.cell_volume
    right = ball_potential_integral(A.volume_radius, E.volume_radius, kernel)
    return an.report("dom", 1.0, left / right, an.tol.potential(A), left=left, right=right,
                     E_volume=E.volume)


def check_alpha_yg(A: VoxelSet, kernel: Kernel, name="", tolerances=None, analysis=None) -> StabilityReport:
    """min_c E(X_A - X_B(c, R_A)) / E(A*) is nonnegative; its ratios to alpha^4 and alpha^(2-lam/n) are recorded."""
    if not kernel.reflection_positive:
        raise PreconditionError(f"kernel {kernel.to_dict()} is not reflection positive (needs n-2 <= lambda < n)")
    an = _analysis(A, kernel, analysis, name, tolerances)
    middle = quadratic_distance(A, kernel, center=an.center, nearfield=an.nearfield)
    alpha = an.alpha
    tol = an.tol.deficit(A)
    if an.below_floor:
        return an.report("alpha-yg", middle, 0.0, tol, INCONCLUSIVE, alpha=alpha, middle=middle,
                         alpha_floor=an.alpha_floor, reason="alpha below grid floor")
    lower = middle / alpha**4
    upper = middle / alpha ** (2.0 - kernel.lam / kernel.n)
    ok = math.isfinite(lower) and math.isfinite(upper)
    rep = an.report("alpha-yg", middle, 0.0, tol, alpha=alpha, middle=middle, ratio_alpha4=lower,
                    ratio_upper=upper, upper_exponent=2.0 - kernel.lam / kernel.n)
    if not ok:
        rep.status = FAIL
    return rep


def check_truncation(A: VoxelSet, kernel: Kernel, c: float | None = None, name="", tolerances=None,
                     alpha_max: float = 0.25, c_scan=(0.25, 0.5, 1.0, 2.0, 4.0), nearfield=False) -> StabilityReport:
    """delta does not increase when the far part of A is folded onto a shell around A*.

    A* is centered at the origin. Without ``c`` the scan values are tried in
    increasing order and the first feasible one that moves cells is used
    (all outcomes are recorded).
    """
    A.require_nonempty()
    tol = tolerances or DEFAULT_TOLERANCES
    alpha0 = normalized_symmetric_difference(A)
    if alpha0 > alpha_max:
        raise PreconditionError(f"alpha0 = {alpha0:.3g} exceeds the small-asymmetry threshold {alpha_max}")
    d0 = deficit(A, kernel, nearfield)
    tried = {}
    chosen = None
    for cc in ([c] if c is not None else c_scan):
        try:
            t = truncate_tail(A, alpha0, cc, kernel)
        except GridError as exc:
            tried[str(cc)] = str(exc)
            if c is not None:
                raise
            continue
        tried[str(cc)] = {"R": t.outer_radius, "r": t.shell_radius, "moved": t.moved_cells}
        if chosen is None and (t.moved_cells > 0 or c is not None):
            chosen = (cc, t)
    if chosen is None:
        # nothing to truncate for any feasible c: the set already lies inside B_R
        t = truncate_tail(A, alpha0, c_scan[-1], kernel)
        chosen = (c_scan[-1], t)
    cc, t = chosen
    d1 = deficit(t.set, kernel, nearfield) if t.moved_cells else d0
    alpha1 = normalized_symmetric_difference(t.set)
    return StabilityReport(
        "truncation", kernel.to_dict(), name or repr(A), d0, d1, tol.deficit(A), resolution_info(A),
        details={"c": cc, "alpha0": alpha0, "alpha0_after": alpha1, "alpha0_preserved": bool(abs(alpha1 - alpha0) <= 1e-12),
                 "outer_radius": t.outer_radius, "shell_radius": t.shell_radius, "moved_cells": t.moved_cells,
                 "symmetric_in": A.is_origin_symmetric(), "symmetric_out": t.set.is_origin_symmetric(),
                 "scan": tried},
    )


def check_poisson(A: VoxelSet, name="", tolerances=None, analysis=None) -> StabilityReport:
    """-Laplace Phi_A = n (n-2) omega_n inside A and 0 away from it, relative max residual."""
    kernel = analysis.kernel if analysis else Kernel(A.n, A.n - 2.0)
    an = _analysis(A, kernel, analysis, name, tolerances)
    pr = poisson_residual(an.potential, A)
    worst = max(pr.interior_max, pr.exterior_max) / pr.target
    return an.report("poisson", an.tol.poisson, worst, 0.0, **pr.to_dict())


# exponent fitting --------------------------------------------------------------


@dataclass
class FamilySweep:
    family: str
    params: list
    alpha: list
    delta: list
    n: int = 3
    middle_yg: list = field(default_factory=list)
    slope: float = math.nan
    intercept: float = math.nan
    fitted_points: int = 0
    notes: dict = field(default_factory=dict)

    def __post_init__(self):
        for a in self.alpha:
            if not 0.0 <= a <= 1.0:
                raise ValueError(f"asymmetry {a} outside [0, 1]")
        if not self.middle_yg:
            self.middle_yg = [math.nan] * len(self.params)

    def ratio_quadratic(self):
        return [d / a**2 if a > 0 else math.nan for a, d in zip(self.alpha, self.delta)]

    def ratio_theorem_main(self):
        return [d / a ** (self.n + 2) if a > 0 else math.nan for a, d in zip(self.alpha, self.delta)]

    def rows(self):
        return list(zip(self.params, self.alpha, self.delta, self.ratio_quadratic(), self.ratio_theorem_main(),
                        self.middle_yg))

    def write_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["param", "alpha", "delta", "ratio_quadratic", "ratio_theorem_main", "middle_yg"])
            for row in self.rows():
                w.writerow([repr(float(v)) for v in row])

    def summary(self):
        rq = [r for r in self.ratio_quadratic() if math.isfinite(r)]
        rm = [r for r in self.ratio_theorem_main() if math.isfinite(r)]
        return _plain({
            "family": self.family, "points": len(self.params), "fitted_points": self.fitted_points,
            "slope": self.slope, "intercept": self.intercept,
            "min_ratio_quadratic": min(rq) if rq else math.nan,
            "max_ratio_quadratic": max(rq) if rq else math.nan,
            "ratio_theorem_main_first_last": [rm[0], rm[-1]] if rm else [],
            **self.notes,
        })


def fit_exponent(params, alpha, delta, family="family", n=3, alpha_floor=0.0, middle_yg=None,
                 min_points=4) -> FamilySweep:
    """Least-squares slope and intercept of log delta against log alpha.

    Points with alpha at or below ``alpha_floor`` or nonpositive delta are left
    out of the fit but kept in the table.
    """
    alpha = [float(a) for a in alpha]
    delta = [float(d) for d in delta]
    if not (len(params) == len(alpha) == len(delta)):
        raise ValueError("params, alpha and delta differ in length")
    use = [i for i, (a, d) in enumerate(zip(alpha, delta)) if a > alpha_floor and d > 0]
    if len(use) < min_points:
        raise ValueError(f"need at least {min_points} points above the grid floor, got {len(use)}")
    x = np.log([alpha[i] for i in use])
    y = np.log([delta[i] for i in use])
    if np.ptp(x) == 0:
        raise ValueError("all asymmetries are equal; the exponent is undetermined")
    slope, intercept = np.polyfit(x, y, 1)
    sweep = FamilySweep(family, list(params), alpha, delta, n, list(middle_yg or []), float(slope),
                        float(intercept), len(use))
    rm = sweep.ratio_theorem_main()
    lo = min(use, key=lambda i: alpha[i])
    hi = max(use, key=lambda i: alpha[i])
    # delta / alpha^(n+2) blows up as alpha -> 0 when delta ~ alpha^2
    sweep.notes["theorem_main_ratio_grows"] = bool(rm[lo] > rm[hi])
    return sweep
