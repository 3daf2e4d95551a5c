"""Centered radial sets: finite unions of concentric shells.

Energies and potentials reduce to one-dimensional integrals over the radius,
which makes these sets the high-accuracy reference for the voxel pipeline.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize_scalar
from scipy.special import betainc

from .errors import QuadratureError
from .kernel import Kernel, ball_energy, ball_potential, unit_ball_volume

GL_ORDER = 16
START_PANELS = 16  # 16 panels x 16 nodes = 256 points per shell
MAX_PANELS = 8192
ENERGY_RTOL = 1e-8


@dataclass(frozen=True)
class RadialSet:
    """Union of shells a_i <= |x| < b_i in R^n, sorted and disjoint."""

    n: int
    shells: tuple

    def __post_init__(self):
        shells = tuple((float(a), float(b)) for a, b in self.shells)
        if not shells:
            raise ValueError("a radial set needs at least one shell")
        prev = -1.0
        for a, b in shells:
            if not (a >= 0 and b > a and a > prev):
                raise ValueError(f"shells must be sorted, disjoint and non-degenerate: {shells}")
            prev = b
        object.__setattr__(self, "shells", shells)

    @property
    def outer_radius(self) -> float:
        return self.shells[-1][1]

    @property
    def volume(self) -> float:
        return radial_volume(self)

    @property
    def volume_radius(self) -> float:
        return (self.volume / unit_ball_volume(self.n)) ** (1.0 / self.n)

    def contains_radius(self, r):
        r = np.asarray(r, dtype=float)
        out = np.zeros(r.shape, dtype=bool)
        for a, b in self.shells:
            out |= (r >= a) & (r < b)
        return out

    def truncated(self, r: float) -> "RadialSet":
        """A intersected with B_r."""
        kept = [(a, min(b, r)) for a, b in self.shells if a < r]
        return RadialSet(self.n, kept)

    def scaled(self, f: float) -> "RadialSet":
        return RadialSet(self.n, [(a * f, b * f) for a, b in self.shells])

    def to_dict(self):
        return {"n": self.n, "shells": [list(s) for s in self.shells]}

    @classmethod
    def from_dict(cls, d):
        return cls(int(d["n"]), [tuple(s) for s in d["shells"]])


def radial_volume(A: RadialSet) -> float:
    w = unit_ball_volume(A.n)
    return sum(w * (b**A.n - a**A.n) for a, b in A.shells)


def volume_radius_within(A: RadialSet, r):
    """Volume radius rho(r) of A intersected with B_r, vectorized in r."""
    r = np.asarray(r, dtype=float)
    acc = np.zeros_like(r)
    for a, b in A.shells:
        hi = np.clip(r, a, b)
        acc += hi**A.n - a**A.n
    return acc ** (1.0 / A.n)


def annulus_perturbation(a: float, n: int = 3) -> RadialSet:
    """Unit ball with an inner annulus of volume a*omega_n moved just outside."""
    if not 0.0 <= a < 1.0:
        raise ValueError(f"annulus parameter must lie in [0, 1), got {a}")
    if a == 0.0:
        return RadialSet(n, [(0.0, 1.0)])
    return RadialSet(n, [(0.0, (1.0 - a) ** (1.0 / n)), (1.0, (1.0 + a) ** (1.0 / n))])


def radial_potential(A: RadialSet, t, kernel: Kernel):
    t = np.asarray(t, dtype=float)
    out = np.zeros(t.shape)
    for a, b in A.shells:
        out = out + ball_potential(b, t, kernel)
        if a > 0:
            out = out - ball_potential(a, t, kernel)
    return out[()] if out.ndim == 0 else out


def _gl_nodes(lo, hi, panels, order=GL_ORDER):
    x, w = np.polynomial.legendre.leggauss(order)
    edges = np.linspace(lo, hi, panels + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[1:] + edges[:-1])
    nodes = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    weights = (half[:, None] * w[None, :]).ravel()
    return nodes, weights


def integrate_intervals(f, intervals, rtol=ENERGY_RTOL, what="radial integral"):
    """Composite Gauss-Legendre over a list of intervals, doubling panels until stable.

    ``f`` is evaluated on a flat array of nodes. Returns the integral value.
    """
    intervals = [(lo, hi) for lo, hi in intervals if hi > lo]
    if not intervals:
        return 0.0

    def total(panels):
        acc = 0.0
        for lo, hi in intervals:
            x, w = _gl_nodes(lo, hi, panels)
            acc += float(np.dot(f(x), w))
        return acc

    panels = START_PANELS
    prev = total(panels)
    while panels < MAX_PANELS:
        panels *= 2
        cur = total(panels)
        change = abs(cur - prev) / max(abs(cur), 1e-300)
        if change < rtol or cur == prev:
            return cur
        prev = cur
    raise QuadratureError(f"{what} did not converge (rel. change {change:.2e})", change)


def radial_energy(A: RadialSet, kernel: Kernel) -> float:
    n = A.n
    sa = n * unit_ball_volume(n)
    return integrate_intervals(
        lambda t: radial_potential(A, t, kernel) * sa * t ** (n - 1), A.shells, what="radial energy"
    )


def radial_cross(A: RadialSet, R: float, kernel: Kernel) -> float:
    """Integral of the potential of the centered ball B_R over A."""
    n = A.n
    sa = n * unit_ball_volume(n)
    return integrate_intervals(
        lambda t: ball_potential(R, t, kernel) * sa * t ** (n - 1), A.shells, what="cross term"
    )


def energy_via_shell_split(A: RadialSet, R: float, kernel: Kernel) -> float:
    """Energy as E(A cap B_R) plus twice the outward-layer interaction beyond R."""
    n = A.n
    sa = n * unit_ball_volume(n)
    inner = radial_energy(A.truncated(R), kernel) if R > A.shells[0][0] else 0.0
    unit_surface = ball_potential(1.0, 1.0, kernel)

    def integrand(r):
        # potential of A cap B_r evaluated on its own outer sphere
        phi = np.zeros_like(r)
        for a, b in A.shells:
            full = b <= r
            part = (a < r) & (r < b)
            pb = ball_potential(b, r, kernel)
            pa = ball_potential(a, r, kernel) if a > 0 else 0.0
            phi += np.where(full, pb - pa, 0.0)
            phi += np.where(part, unit_surface * r ** (n - kernel.lam) - pa, 0.0)
        return 2.0 * phi * sa * r ** (n - 1)

    tail = [(max(a, R), b) for a, b in A.shells if b > R]
    return inner + integrate_intervals(integrand, tail, what="shell-split tail")


def _sphere_fraction(u0, n):
    """Fraction of the unit sphere S^(n-1) where the first coordinate is >= u0."""
    u0 = np.clip(u0, -1.0, 1.0)
    if n == 1:
        return np.where(u0 <= -1.0, 1.0, np.where(u0 < 1.0, 0.5, 0.0))
    half = 0.5 * betainc(0.5 * (n - 1), 0.5, 1.0 - u0 * u0)
    return np.where(u0 >= 0, half, 1.0 - half)


def radial_overlap(A: RadialSet, c: float, R: float) -> float:
    """Vol(A cap B(c e_1, R)) by integrating spherical-cap areas over the radius."""
    n = A.n
    sa = n * unit_ball_volume(n)
    if c <= 0:
        return radial_volume(A.truncated(R)) if R > A.shells[0][0] else 0.0

    def cap(r):
        u0 = (r * r + c * c - R * R) / (2.0 * r * c)
        return sa * r ** (n - 1) * _sphere_fraction(u0, n)

    cuts = sorted({abs(R - c), R + c})
    pieces = []
    for a, b in A.shells:
        pts = [a] + [x for x in cuts if a < x < b] + [b]
        pieces.extend(zip(pts[:-1], pts[1:]))
    # outside [|R-c|, R+c] the cap is the full sphere or empty: integrate exactly
    exact = 0.0
    quad = []
    for lo, hi in pieces:
        mid = 0.5 * (lo + hi)
        if mid + c <= R:
            exact += unit_ball_volume(n) * (hi**n - lo**n)
        elif mid >= R + c or mid <= c - R:
            continue
        else:
            quad.append((lo, hi))
    return exact + integrate_intervals(cap, quad, rtol=1e-11, what="overlap")


def radial_asymmetry(A: RadialSet, return_center: bool = False, scan_points: int = 101):
    """Fraenkel asymmetry of a centered radial set.

    The best ball center lies on a ray by symmetry; the overlap is scanned over
    the distance c in [0, outer + R_A] and the best scan point refined with a
    bounded golden-section/Brent search. c = 0 is not assumed optimal.
    """
    RA = A.volume_radius
    vol = A.volume
    hi = A.outer_radius + RA
    cs = np.linspace(0.0, hi, scan_points)
    ov = np.array([radial_overlap(A, c, RA) for c in cs])
    k = int(np.argmax(ov))
    best_c, best = cs[k], ov[k]
    lo_b, hi_b = cs[max(k - 1, 0)], cs[min(k + 1, len(cs) - 1)]
    res = minimize_scalar(
        lambda c: -radial_overlap(A, c, RA), bounds=(lo_b, hi_b), method="bounded",
        options={"xatol": 1e-10 * max(hi, 1.0)},
    )
    if not res.success:
        raise RuntimeError("asymmetry refinement did not converge")
    if -res.fun > best:
        best_c, best = float(res.x), -float(res.fun)
    alpha = min(max(1.0 - best / vol, 0.0), 1.0)
    return (alpha, best_c) if return_center else alpha


def deficit_radial(A: RadialSet, kernel: Kernel) -> float:
    e_star = ball_energy(A.volume_radius, kernel)
    return (e_star - radial_energy(A, kernel)) / e_star


def quadratic_distance_radial(A: RadialSet, kernel: Kernel) -> float:
    """E(X_A - X_{A*}) / E(A*) with both sets centered at the origin."""
    RA = A.volume_radius
    e_star = ball_energy(RA, kernel)
    return (radial_energy(A, kernel) + e_star - 2.0 * radial_cross(A, RA, kernel)) / e_star
