"""Static figures for sweeps and rearranged potential profiles."""

from __future__ import annotations

import math

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402


def plot_sweep(sweep, path):
    fig, ax = plt.subplots(figsize=(5.5, 4.2))
    if sweep.family == "lambda-scan":
        ax.plot(sweep.params, sweep.ratio_quadratic(), "o-")
        ax.set_xlabel(r"$\lambda$")
        ax.set_ylabel(r"$\delta_\lambda / \alpha^2$")
        ax.set_ylim(bottom=0)
        ax.set_title(f"annulus a = {sweep.notes.get('a')}")
    else:
        a = np.asarray(sweep.alpha)
        d = np.asarray(sweep.delta)
        ok = (a > 0) & (d > 0)
        ax.loglog(a[ok], d[ok], "o", label=sweep.family)
        if math.isfinite(sweep.slope):
            xs = np.array([a[ok].min(), a[ok].max()])
            ax.loglog(xs, np.exp(sweep.intercept) * xs**sweep.slope, "-",
                      label=f"fit: slope {sweep.slope:.3f}")
        ax.set_xlabel(r"asymmetry $\alpha$")
        ax.set_ylabel(r"deficit $\delta$")
        ax.legend()
    ax.grid(True, which="both", alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def plot_talenti_profile(distance, rearranged, exact, path):
    fig, ax = plt.subplots(figsize=(5.5, 4.2))
    ax.plot(distance, exact, "-", label=r"$\Phi_{A^*}$")
    ax.plot(distance, rearranged, ".", ms=2, label=r"$(\Phi_A)^*$")
    ax.set_xlabel("distance from grid center")
    ax.set_ylabel("potential")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path
