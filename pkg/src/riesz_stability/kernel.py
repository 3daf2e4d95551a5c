"""Riesz kernels |x-y|^-lambda and closed-form potentials of balls and shells."""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.special import gammaln, roots_jacobi

from .errors import (
    InvalidDimensionError,
    InvalidKernelError,
    QuadratureError,
    SingularConfigurationError,
    UnsupportedDimensionError,
)

QUAD_START = 64
QUAD_MAX = 4096
QUAD_RTOL = 1e-10


@dataclass(frozen=True)
class Kernel:
    """The kernel |x - y|^(-lam) on R^n, with 0 < lam < n."""

    n: int
    lam: float

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise InvalidDimensionError(f"dimension must be a positive integer, got {self.n}")
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "lam", float(self.lam))
        if not 0.0 < self.lam < self.n:
            raise InvalidKernelError(f"need 0 < lambda < n, got lambda={self.lam}, n={self.n}")

    @property
    def reflection_positive(self) -> bool:
        return self.n >= 3 and self.n - 2 <= self.lam < self.n

    @property
    def is_newton(self) -> bool:
        return self.n >= 3 and self.lam == self.n - 2

    def to_dict(self):
        return {"n": self.n, "lambda": self.lam}


@dataclass(frozen=True)
class BallSpec:
    radius: float
    center: tuple

    def __post_init__(self):
        if not self.radius > 0:
            raise ValueError(f"ball radius must be positive, got {self.radius}")
        object.__setattr__(self, "center", tuple(float(c) for c in self.center))


def unit_ball_volume(n: int) -> float:
    if int(n) != n or n < 1:
        raise InvalidDimensionError(f"dimension must be a positive integer, got {n}")
    return math.exp(0.5 * n * math.log(math.pi) - gammaln(0.5 * n + 1.0))


def sphere_area(n: int) -> float:
    """Surface area of the unit sphere S^(n-1) in R^n."""
    return n * unit_ball_volume(n)


def newton_potential_ball(R, t, n: int):
    """Newton potential (lam = n-2) of the centered ball B_R at distance t."""
    if n < 3:
        raise UnsupportedDimensionError("the Newton potential needs n >= 3")
    t = np.asarray(t, dtype=float)
    w = unit_ball_volume(n)
    x = t / R
    inside = w * R**2 * (0.5 * n - 0.5 * (n - 2) * x**2)
    with np.errstate(divide="ignore"):
        outside = w * R**2 * np.power(np.where(x > 0, x, 1.0), -(n - 2.0))
    out = np.where(x <= 1.0, inside, outside)
    return out[()] if out.ndim == 0 else out


def newton_energy_ball(R: float, n: int) -> float:
    if n < 3:
        raise UnsupportedDimensionError("the Newton energy needs n >= 3")
    w = unit_ball_volume(n)
    return 2.0 * n / (n + 2.0) * w * w * R ** (n + 2)


def ball_potential_center(R: float, kernel: Kernel) -> float:
    """Riesz potential of B_R at its center, n*omega_n/(n-lam) R^(n-lam)."""
    n, lam = kernel.n, kernel.lam
    return n * unit_ball_volume(n) / (n - lam) * R ** (n - lam)


def ball_energy(R: float, kernel: Kernel) -> float:
    """Energy of B_R: closed form when Newtonian, radial quadrature otherwise."""
    if kernel.is_newton:
        return newton_energy_ball(R, kernel.n)
    return _unit_ball_energy(kernel.n, kernel.lam) * R ** (2 * kernel.n - kernel.lam)


@lru_cache(maxsize=64)
def _unit_ball_energy(n, lam):
    from .radial import RadialSet, radial_energy

    return radial_energy(RadialSet(n, [(0.0, 1.0)]), Kernel(n, lam))


def shell_potential_3d(s, t, lam):
    """Integral of |x-y|^-lam over the sphere |y| = s, seen from |x| = t (n = 3)."""
    s = float(s)
    t = np.asarray(t, dtype=float)
    if not 0.0 < lam < 3.0:
        raise InvalidKernelError(f"need 0 < lambda < 3, got {lam}")
    if s <= 0:
        raise ValueError("shell radius must be positive")
    if lam >= 2.0 and np.any(t == s):
        raise SingularConfigurationError(f"shell potential with lambda={lam} diverges on the shell")
    tt = np.where(t > 0, t, 1.0)
    gap = np.abs(s - tt)
    with np.errstate(divide="ignore"):
        if lam == 2.0:
            val = 2.0 * np.pi * s / tt * np.log((s + tt) / gap)
        else:
            p = 2.0 - lam
            val = 2.0 * np.pi * s / (tt * p) * ((s + tt) ** p - gap**p)
    out = np.where(t > 0, val, 4.0 * np.pi * s ** (2.0 - lam))
    return out[()] if out.ndim == 0 else out


def ball_potential(R, t, kernel: Kernel):
    """Riesz potential of the centered ball B_R at distance t from the origin.

    Vectorized in ``t``. Closed forms for n = 1 and n = 3; other dimensions
    use Gauss-Jacobi quadrature over the direction cosine, doubling the order
    until the relative change drops below 1e-10.
    """
    R = float(R)
    if not R > 0:
        raise ValueError("ball radius must be positive")
    t = np.abs(np.asarray(t, dtype=float))
    n, lam = kernel.n, kernel.lam
    if n == 3:
        out = _ball_potential_3d(R, t, lam)
    elif n == 1:
        out = _ball_potential_1d(R, t, lam)
    else:
        out = _ball_potential_quad(R, t, n, lam)
    out = np.where(t == 0, ball_potential_center(R, kernel), out)
    return out[()] if out.ndim == 0 else out


def _ball_potential_1d(R, t, lam):
    q = 1.0 - lam
    gap = np.abs(R - t)
    inside = (gap**q + (R + t) ** q) / q
    outside = ((t + R) ** q - gap**q) / q
    return np.where(t < R, inside, outside)


def _ball_potential_3d(R, t, lam):
    # integrate the shell formula over s in (0, R); Taylor branch near t = 0
    # where the closed form cancels
    q = 3.0 - lam
    small = t < 1e-3 * R
    x = np.where(small, t, 0.0) / R
    taylor = 2.0 * np.pi / q * R**q * (2.0 + q * (q - 3.0) * x**2 / 3.0)
    tt = np.where(small, R, t)
    if lam == 2.0:
        gap = np.abs(R - tt)
        with np.errstate(divide="ignore", invalid="ignore"):
            logterm = np.where(gap > 0, (R * R - tt * tt) / 2.0 * np.log((R + tt) / gap), 0.0)
        val = 2.0 * np.pi / tt * (logterm + tt * R)
    else:
        p = 2.0 - lam

        def upper(u):
            return u ** (p + 2) / (p + 2) - tt * u ** (p + 1) / (p + 1)

        plus = upper(R + tt) - upper(tt)
        below = R <= tt
        d = np.abs(tt - R)
        # int_0^R s |s - t|^p ds, split at s = t
        minus_below = tt * tt ** (p + 1) / (p + 1) - tt ** (p + 2) / (p + 2) - (
            tt * d ** (p + 1) / (p + 1) - d ** (p + 2) / (p + 2)
        )
        minus_above = (
            tt ** (p + 2) * (1.0 / (p + 1) - 1.0 / (p + 2))
            + d ** (p + 2) / (p + 2)
            + tt * d ** (p + 1) / (p + 1)
        )
        minus = np.where(below, minus_below, minus_above)
        val = 2.0 * np.pi / (tt * p) * (plus - minus)
    return np.where(small, taylor, val)


@lru_cache(maxsize=64)
def _jacobi(order, alpha, beta):
    x, w = roots_jacobi(order, alpha, beta)
    return x, w


def _ball_potential_quad(R, t, n, lam):
    # Polar coordinates around the evaluation point: the chord length rho(u)
    # along a direction with cosine u to -x gives int rho^(n-lam)/(n-lam).
    a = 0.5 * (n - 3)
    q = n - lam
    pref = sphere_area(n - 1) / q
    shape = t.shape
    t = t.ravel()
    res = np.empty_like(t)
    ins = t < R
    if np.any(ins):
        res[ins] = _adaptive(lambda N: _inside_sum(R, t[ins], a, q, N))
    if np.any(~ins):
        res[~ins] = _adaptive(lambda N: _outside_sum(R, t[~ins], a, q, N))
    return (pref * res).reshape(shape)


def _adaptive(fn):
    N = QUAD_START
    prev = fn(N)
    while N < QUAD_MAX:
        N *= 2
        cur = fn(N)
        change = np.max(np.abs(cur - prev) / np.maximum(np.abs(cur), 1e-300))
        if change < QUAD_RTOL:
            return cur
        prev = cur
    # near-tangent evaluation points converge slowly; accept a looser result
    if change < 1e-7:
        return cur
    raise QuadratureError(f"ball potential quadrature did not converge (rel. change {change:.2e})", change)


def _inside_sum(R, t, a, q, N):
    d2 = (R - t) * (R + t)
    # u in [0, 1]: weight (1-u)^a handled by Jacobi, (1+u)^a explicit
    v, w = _jacobi(N, a, 0.0)
    u = 0.5 * (1.0 + v)
    tu = np.outer(t, u)
    rho = d2[:, None] / (tu + np.sqrt(d2[:, None] + tu * tu))
    right = (rho**q * (1.0 + u) ** a) @ w
    v, w = _jacobi(N, 0.0, a)
    u = 0.5 * (1.0 - v)
    tu = np.outer(t, u)
    rho = tu + np.sqrt(d2[:, None] + tu * tu)
    left = (rho**q * (1.0 + u) ** a) @ w
    return 0.5**(a + 1.0) * (right + left)


def _outside_sum(R, t, a, q, N):
    W = R / t
    u0sq = (t - R) * (t + R) / (t * t)
    v, w = _jacobi(N, a, 0.0)
    ww = np.outer(W, 0.5 * (1.0 + v))
    root = np.sqrt(u0sq[:, None] + ww * ww)
    rplus = t[:, None] * (root + ww)
    rminus = t[:, None] * u0sq[:, None] / (root + ww)
    g = rplus**q - rminus**q
    f = g * ww / root * (W[:, None] + ww) ** a
    return (0.5 * W) ** (a + 1.0) * (f @ w)
