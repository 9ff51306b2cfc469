"""Figure rendering for CLI reports.

Every function writes a file next to the delimited output it illustrates
and returns the path; nothing here opens a window.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .analysis import CLASSICAL_BOUND, SweepPoint
from .chain import TransitionMatrix


def save_matrix_heatmap(matrix: TransitionMatrix, path) -> str:
    fig, ax = plt.subplots(figsize=(6.0, 5.0))
    im = ax.imshow(matrix.entries, cmap="viridis", interpolation="nearest")
    ax.set_xlabel("from state")
    ax.set_ylabel("to state")
    ax.set_title(f"{matrix.n}-state transition matrix")
    fig.colorbar(im, ax=ax, label="probability")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return str(path)


def save_sweep_curve(points: list[SweepPoint], path) -> str:
    ps = [pt.p for pt in points]
    empirical = [pt.report.value for pt in points]
    errors = [2.0 * pt.report.std_error for pt in points]
    analytic = [pt.analytic for pt in points]
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    ax.errorbar(ps, empirical, yerr=errors, fmt="o", capsize=3, label="simulated (2 s.e.)")
    ax.plot(ps, analytic, "-", color="C1", label="12p - 6")
    ax.axhline(CLASSICAL_BOUND, color="gray", linestyle="--", label="classical bound 4")
    ax.axvline(5.0 / 6.0, color="gray", linestyle=":", label="threshold p = 5/6")
    ax.set_xlabel("alignment probability p")
    ax.set_ylabel("inequality value")
    ax.legend()
    ax.grid(alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return str(path)


def save_mixing_decay(steps, distances, epsilon: float, bound: float, path) -> str:
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    positive = np.asarray(distances) > 0
    ax.semilogy(np.asarray(steps)[positive], np.asarray(distances)[positive], "o-",
                label="worst-case TV distance")
    ax.axhline(epsilon, color="gray", linestyle="--", label=f"epsilon = {epsilon:g}")
    ax.axvline(bound, color="C1", linestyle=":", label=f"bound = {bound:.2f}")
    ax.set_xlabel("step t")
    ax.set_ylabel("d(t)")
    ax.legend()
    ax.grid(alpha=0.3, which="both")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return str(path)


def save_coupon_histogram(times, analytic: float, path) -> str:
    times = np.asarray(times)
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    ax.hist(times, bins=40, color="C0", alpha=0.8)
    ax.axvline(times.mean(), color="C1", label=f"simulated mean {times.mean():.1f}")
    ax.axvline(analytic, color="gray", linestyle="--",
               label=f"independent-draw value {analytic:.1f}")
    ax.set_xlabel("rounds to see all 24 states")
    ax.set_ylabel("trajectories")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return str(path)


def save_correlator_bars(report, path) -> str:
    estimates = [e.estimate for e in report.correlators.estimates]
    errors = [2.0 * e.std_error for e in report.correlators.estimates]
    labels = [f"j={e.context}" for e in report.correlators.estimates]
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    ax.bar(labels, estimates, yerr=errors, capsize=3, color="C0", alpha=0.85)
    ax.axhline(0.0, color="black", linewidth=0.8)
    ax.set_ylim(-1.1, 1.1)
    ax.set_ylabel("correlator")
    ax.set_title(f"inequality value {report.value:.4f} (bound 4, quantum 6)")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return str(path)
