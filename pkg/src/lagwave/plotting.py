"""Report figures (PNG) rendered with the non-interactive matplotlib backend."""
from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

FIELD_LABELS = ("v", "u", "theta", "E", "b")


def plot_ledger(led, path: Path) -> Path:
    """Sup-norm deviations per field and the energy series against 1 + t (log-log)."""
    t = led.times
    tt = 1.0 + t
    fig, axes = plt.subplots(1, 2, figsize=(11, 4))
    ax = axes[0]
    for k in FIELD_LABELS:
        vals = np.array([e["sup"][k] for e in led.entries])
        if np.any(vals > 0):
            ax.loglog(tt[vals > 0], vals[vals > 0], marker="o", ms=3, label=k)
    ax.set_xlabel("1 + t")
    ax.set_ylabel("sup |deviation|")
    ax.set_title(f"deviation from {'fan' if led.comparison == 'fan' else 'smooth'} profile")
    ax.legend()
    ax = axes[1]
    for key, label in (("l2", "L2 perturbation"), ("relative_entropy", "relative entropy"),
                       ("maxwell_energy", "Maxwell energy"), ("compound_integral", "compound dissipation")):
        vals = led.series(key)
        if np.any(vals > 0):
            ax.loglog(tt[vals > 0], vals[vals > 0], marker="o", ms=3, label=label)
    ax.set_xlabel("1 + t")
    ax.set_title("energy ledger")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def plot_snapshot(x, state, background_sample, path: Path) -> Path:
    """Solution fields with the background profile overlaid."""
    fig, axes = plt.subplots(5, 1, figsize=(8, 10), sharex=True)
    bg = (background_sample.V, background_sample.U, background_sample.Theta, None, None)
    for ax, name, f, g in zip(axes, FIELD_LABELS, state.fields(), bg):
        ax.plot(x, f, lw=1.0, label="solution")
        if g is not None:
            ax.plot(x, g, lw=0.8, ls="--", label="background")
        ax.set_ylabel(name)
    axes[0].legend(loc="best")
    axes[0].set_title(f"t = {state.t:g}")
    axes[-1].set_xlabel("x")
    fig.tight_layout()
    fig.savefig(path, dpi=110)
    plt.close(fig)
    return path


def plot_profile(x, sample, t: float, path: Path) -> Path:
    fig, axes = plt.subplots(3, 1, figsize=(8, 7), sharex=True)
    for ax, name, f in zip(axes, ("V", "U", "Theta"), (sample.V, sample.U, sample.Theta)):
        ax.plot(x, f, lw=1.0)
        ax.set_ylabel(name)
    axes[0].set_title(f"background profile, t = {t:g}")
    axes[-1].set_xlabel("x")
    fig.tight_layout()
    fig.savefig(path, dpi=110)
    plt.close(fig)
    return path


def plot_convergence(study: dict, path: Path) -> Path:
    h = np.array(study["h"])
    err = np.array(study["errors"])
    fig, ax = plt.subplots(figsize=(6, 4.5))
    for j, name in enumerate(FIELD_LABELS):
        ax.loglog(h, err[:, j], marker="o", label=name)
    ax.loglog(h, err[0].max() * (h / h[0]) ** 2, "k--", lw=0.8, label="slope 2")
    ax.set_xlabel("h")
    ax.set_ylabel("max-norm error")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path
