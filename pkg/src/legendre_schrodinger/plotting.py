"""Figures written next to the CSV reports.

matplotlib is imported lazily so the solver itself never depends on it.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np


def _pyplot():
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    return plt


def figure_path(csv_path, suffix=".png"):
    return Path(csv_path).with_suffix(suffix)


def plot_error_surface(rows, path, title=""):
    """Two surface panels (real, imaginary) from long-format (x, y, err_re, err_im) rows."""
    plt = _pyplot()
    data = np.asarray(rows, dtype=float)
    xs = np.unique(data[:, 0])
    ys = np.unique(data[:, 1])
    shape = (xs.size, ys.size)
    X = data[:, 0].reshape(shape)
    Y = data[:, 1].reshape(shape)
    fig = plt.figure(figsize=(10, 4.2))
    for k, label in ((2, "real part"), (3, "imaginary part")):
        ax = fig.add_subplot(1, 2, k - 1, projection="3d")
        ax.plot_surface(X, Y, data[:, k].reshape(shape), cmap="viridis", linewidth=0)
        ax.set_xlabel("x")
        ax.set_ylabel("y")
        ax.set_title(f"|error|, {label}", fontsize=9)
        ax.ticklabel_format(axis="z", style="sci", scilimits=(0, 0))
    if title:
        fig.suptitle(title, fontsize=10)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return Path(path)


def plot_convergence(rows, path, title=""):
    """Semilog plot of discrete L2 errors against N."""
    plt = _pyplot()
    data = np.asarray(rows, dtype=float)
    fig, axes = plt.subplots(1, 2, figsize=(9, 3.6), sharey=True)
    for ax, col, label in ((axes[0], 1, "real part"), (axes[1], 2, "imaginary part")):
        ax.semilogy(data[:, 0], data[:, col], "o-", ms=4)
        ax.set_xlabel("N")
        ax.set_title(label, fontsize=9)
        ax.grid(True, which="both", alpha=0.3)
    axes[0].set_ylabel("discrete L2 error")
    if title:
        fig.suptitle(title, fontsize=10)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return Path(path)


def plot_time_order(rows, slope, path, title=""):
    plt = _pyplot()
    data = np.asarray(rows, dtype=float)
    err = np.hypot(data[:, 1], data[:, 2])
    fig, ax = plt.subplots(figsize=(4.8, 3.8))
    ax.loglog(data[:, 0], err, "o-", ms=4, label="error")
    if slope is not None:
        ref = err[0] * (data[:, 0] / data[0, 0]) ** 6
        ax.loglog(data[:, 0], ref, "--", lw=0.8, label="order 6")
        ax.set_title(f"fitted order {slope:.2f}", fontsize=9)
    ax.set_xlabel("h")
    ax.set_ylabel("error")
    ax.legend(fontsize=8)
    ax.grid(True, which="both", alpha=0.3)
    if title:
        fig.suptitle(title, fontsize=10)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return Path(path)
