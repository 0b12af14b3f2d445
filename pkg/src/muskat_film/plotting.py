"""Report figures written next to the CSV outputs (Agg backend, no display)."""

from __future__ import annotations

from collections import defaultdict
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .spectral import WienerIndex, to_physical, wiener_norm  # noqa: E402


def _save(fig, path: Path) -> Path:
    fig.tight_layout()
    # fixed metadata keeps repeated runs byte-stable
    fig.savefig(path, dpi=110, metadata={"Software": None})
    plt.close(fig)
    return Path(path)


def plot_trajectory(traj, path: Path, label: str = "") -> Path:
    """Wiener norm history and initial/final interface profiles."""
    fig, (a1, a2) = plt.subplots(1, 2, figsize=(9, 3.6))
    norms = [wiener_norm(s) for s in traj.states]
    a1.plot(traj.times, norms, lw=1.5)
    a1.set_xlabel("t")
    a1.set_ylabel(r"$|\zeta(t)|_{0,0}$")
    if min(norms) > 0:
        a1.set_yscale("log")
    a1.set_title(label or traj.model.law.value)
    x = traj.grid.x
    a2.plot(x, to_physical(traj.states[0]), "k--", lw=1, label="t = 0")
    a2.plot(x, to_physical(traj.final), lw=1.5, label=f"t = {traj.times[-1]:g}")
    a2.set_xlabel("x")
    a2.set_ylabel(r"$\zeta$")
    a2.legend(frameon=False)
    return _save(fig, path)


def plot_ledger(ledger, path: Path) -> Path:
    fig, ax = plt.subplots(figsize=(6, 3.6))
    ax.plot(ledger.times, ledger.inequality_slack, label="energy inequality slack")
    ax.plot(ledger.times, ledger.decay_slack, label="decay slack")
    ax.axhline(0.0, color="k", lw=0.8)
    ax.set_xlabel("t")
    ax.set_ylabel("slack")
    ax.legend(frameon=False)
    return _save(fig, path)


def plot_difference(trajA, trajB, nu: float, path: Path) -> Path:
    fig, ax = plt.subplots(figsize=(6, 3.6))
    d0 = [wiener_norm(a - b, WienerIndex(0.0, nu * t)) for a, b, t in zip(trajA.states, trajB.states, trajA.times)]
    ax.plot(trajA.times, d0)
    ax.set_xlabel("t")
    ax.set_ylabel(r"$|\zeta_A - \zeta_B|_{0,\nu t}$")
    ax.set_title(f"{trajA.model.law.value} vs {trajB.model.law.value}")
    return _save(fig, path)


def plot_slopes(fit, path: Path, reference: float | None = None) -> Path:
    """Errors against mu on log-log axes with the fitted line."""
    fig, ax = plt.subplots(figsize=(5, 4))
    mus, err = np.asarray(fit.mus), np.asarray(fit.errors)
    pos = err > 0
    ax.loglog(mus[pos], err[pos], "o", label="measured")
    if fit.ok:
        ax.loglog(mus, np.exp(fit.intercept) * mus ** fit.slope, "-", label=f"fit, slope {fit.slope:.3f}")
    if reference is not None and np.any(pos):
        m0, e0 = mus[pos][0], err[pos][0]
        ax.loglog(mus, e0 * (mus / m0) ** reference, ":", color="gray", label=f"slope {reference:g}")
    ax.set_xlabel(r"$\mu$")
    ax.set_ylabel("error")
    ax.legend(frameon=False)
    return _save(fig, path)


def plot_dispersion(n, symbol, path: Path, law: str = "") -> Path:
    fig, ax = plt.subplots(figsize=(5, 3.6))
    ax.plot(n, symbol, "o-")
    ax.axhline(0.0, color="k", lw=0.8)
    ax.set_xlabel("n")
    ax.set_ylabel("growth rate")
    ax.set_title(law)
    return _save(fig, path)


def plot_inequalities(rows, path: Path) -> Path:
    """Relative slack (rhs - lhs) / rhs per inequality family."""
    groups = defaultdict(list)
    for _, r in rows:
        if r.rhs > 0:
            groups[r.name].append(r.slack / r.rhs)
    names = sorted(groups)
    fig, ax = plt.subplots(figsize=(max(5, 0.7 * len(names) + 2), 4))
    if names:
        ax.boxplot([groups[k] for k in names])
        ax.set_xticks(range(1, len(names) + 1), names, rotation=45, ha="right")
    ax.axhline(0.0, color="k", lw=0.8)
    ax.set_ylabel("relative slack")
    return _save(fig, path)
