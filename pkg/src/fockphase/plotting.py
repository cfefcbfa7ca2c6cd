"""Figure rendering for the CLI report path.

Figures are written next to the data files and never feed back into them.
matplotlib is imported lazily with the Agg backend so that the library works
headless and the data path does not pay the import cost.
"""
from __future__ import annotations

from pathlib import Path

import numpy as np

STYLE = {
    "font.size": 11,
    "axes.labelsize": 12,
    "axes.linewidth": 0.8,
    "lines.linewidth": 1.4,
    "legend.frameon": False,
    "savefig.dpi": 150,
    "savefig.bbox": "tight",
}
# Strip volatile PNG metadata so reruns give identical bytes.
PNG_METADATA = {"Software": None}


def _pyplot():
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    plt.rcParams.update(STYLE)
    return plt


def _save(fig, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, metadata=PNG_METADATA)
    fig.clf()
    import matplotlib.pyplot as plt

    plt.close(fig)
    return path


def plot_condprob(table, path, title: str | None = None) -> Path:
    """P(m | phi) as an image over (phi, m), with the P(0 | phi) cut underneath."""
    plt = _pyplot()
    fig, (ax, cut) = plt.subplots(2, 1, figsize=(6, 6), sharex=True,
                                  gridspec_kw={"height_ratios": [2, 1]})
    phi = table.grid.points
    m = table.m_values
    im = ax.pcolormesh(phi, m, table.P, shading="nearest", cmap="magma")
    fig.colorbar(im, ax=ax, label=r"$P(m|\phi)$")
    ax.set_ylabel("$m$")
    if title:
        ax.set_title(title)
    cut.plot(phi, table.row(0), color="k")
    J = table.prep.J_mean if table.prep else table.m_max
    tail = np.abs(phi) > 1.0 / J
    cut.plot(phi[tail], 1.0 / (np.pi * J * np.abs(phi[tail])), "--", color="tab:purple",
             label=r"$(\pi J|\phi|)^{-1}$")
    cut.set_xlabel(r"$\phi$")
    cut.set_ylabel(r"$P(0|\phi)$")
    cut.legend()
    return _save(fig, path)


def plot_reconstruction(run, path) -> Path:
    """Posterior evolution: one density curve per snapshot, colored by step."""
    plt = _pyplot()
    fig, (ax, ev) = plt.subplots(1, 2, figsize=(10, 4))
    cmap = plt.get_cmap("viridis")
    steps = run.snapshot_steps
    for k, (step, post) in enumerate(zip(steps, run.posteriors)):
        ax.plot(post.phi, post.density, color=cmap(k / max(len(steps) - 1, 1)), lw=0.9)
    ax.set_xlabel(r"$\phi$")
    ax.set_ylabel(r"$P(\phi|m_1,\ldots,m_n)$")
    ax.set_xlim(-0.8, 0.8)
    summ = run.summaries()
    ev.plot(steps, [s["argmax"] for s in summ], "o-", ms=3, label="argmax")
    ev.plot(steps, [s["std"] for s in summ], "s-", ms=3, label="std")
    ev.set_xlabel("$n$")
    ev.legend()
    ev.set_title("record: " + " ".join(str(v) for v in run.record[:15])
                 + (" ..." if len(run.record) > 15 else ""), fontsize=8)
    return _save(fig, path)


def plot_sweep(rows, path, alpha: float | None = None) -> Path:
    """J * delta_phi_inf against delta_m, one marker series per J, with the fitted law."""
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(6, 4.5))
    markers = "osDv^<>"
    for k, J in enumerate(sorted({r.J for r in rows})):
        sel = [r for r in rows if r.J == J]
        ax.plot([r.delta_m for r in sel], [r.scaled for r in sel], markers[k % len(markers)],
                label=f"J={J}", mfc="none")
    dm = np.linspace(0, max(r.delta_m for r in rows), 200)
    ax.plot(dm, np.sqrt(1 + (2 * dm) ** 2), color="tab:purple", label=r"$\alpha=2$")
    if alpha is not None:
        ax.plot(dm, np.sqrt(1 + (alpha * dm) ** 2), "--", color="gray",
                label=rf"fit $\alpha={alpha:.2f}$")
    ax.set_xlabel(r"$\Delta m$")
    ax.set_ylabel(r"$J\,\Delta\phi_\infty$")
    ax.legend()
    return _save(fig, path)


def plot_mismatch(rows, path, delta_m: float) -> Path:
    """F(phi | theta; dm_est, dm) stacked as an image over dm_est."""
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(6, 4.5))
    phi = rows[0].likelihood.phi
    est = [r.delta_m_est for r in rows]
    Z = np.array([r.likelihood.density / r.likelihood.density.max() for r in rows])
    ax.pcolormesh(phi, est, Z, shading="nearest", cmap="viridis")
    ax.axhline(delta_m, color="k", lw=1)
    ax.set_xlim(-0.6, 0.6)
    ax.set_xlabel(r"$\phi$")
    ax.set_ylabel(r"$\Delta m_{\rm est}$")
    return _save(fig, path)
