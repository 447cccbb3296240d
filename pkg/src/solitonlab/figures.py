"""Matplotlib rendering of run reports, saved alongside the CSV output."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

plt.rcParams.update(
    {
        "figure.figsize": (6.4, 4.0),
        "font.size": 9,
        "axes.grid": True,
        "grid.alpha": 0.3,
        "savefig.dpi": 150,
    }
)

ENGINE_STYLES = {
    "meanfield": dict(color="k", ls="-", marker=""),
    "quantum-mps": dict(color="tab:red", ls="", marker="+"),
    "quantum-exact": dict(color="tab:blue", ls="", marker="x"),
    "continuum": dict(color="tab:gray", ls="--", marker=""),
}


def _style(engine):
    return ENGINE_STYLES.get(engine, dict(color="tab:green", ls="-", marker="."))


def profile_figure(path, snapshots, title=""):
    """Initial vs final density and condensate density, one panel each.

    ``snapshots`` maps an engine label to a pair of records (first, last).
    """
    fig, axes = plt.subplots(2, 2, figsize=(7.5, 5.2), sharex=True)
    for label, (first, last) in snapshots.items():
        sites = np.arange(first.rho.size)
        st = _style(label)
        axes[0, 0].plot(sites, first.rho, label=label, **st)
        axes[0, 1].plot(sites, last.rho, **st)
        axes[1, 0].plot(sites, first.rho_s, **st)
        axes[1, 1].plot(sites, last.rho_s, **st)
        t0, t1 = first.t, last.t
    axes[0, 0].set_title(f"density, t={t0:g}")
    axes[0, 1].set_title(f"density, t={t1:g}")
    axes[1, 0].set_title(f"condensate density, t={t0:g}")
    axes[1, 1].set_title(f"condensate density, t={t1:g}")
    for ax in axes[1]:
        ax.set_xlabel("site")
    axes[0, 0].set_ylabel(r"$\rho$")
    axes[1, 0].set_ylabel(r"$\rho^s$")
    axes[0, 0].legend(loc="best", fontsize=8)
    if title:
        fig.suptitle(title)
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)


def spacetime_figure(path, smap, title=""):
    """Contour-style map of one observable over (site, time)."""
    fig, ax = plt.subplots()
    extent = [
        smap.positions[0] - 0.5,
        smap.positions[-1] + 0.5,
        smap.times[0],
        smap.times[-1],
    ]
    im = ax.imshow(
        smap.matrix,
        origin="lower",
        aspect="auto",
        extent=extent,
        cmap="viridis",
        interpolation="nearest",
    )
    fig.colorbar(im, ax=ax, label=smap.field)
    ax.set_xlabel(smap.axis)
    ax.set_ylabel("t [1/J]")
    ax.set_title(title or smap.field)
    ax.grid(False)
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)


def entropy_profile_figure(path, profiles, title="bond entropy"):
    """Entropy vs bond index for a set of labeled profiles."""
    fig, ax = plt.subplots()
    for label, prof in profiles.items():
        ax.plot(np.arange(len(prof)) + 0.5, prof, label=label)
    ax.set_xlabel("bond")
    ax.set_ylabel(r"$S^{vN}$")
    ax.set_title(title)
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)


def scan_figure(path, points, value_key="delta_rho_density", title=""):
    """Discrepancy vs V/J, one curve per scaled speed."""
    if not points:
        return
    fig, ax = plt.subplots()
    vbars = sorted({p.vbar for p in points})
    for vb in vbars:
        sel = sorted(
            (p for p in points if p.vbar == vb and p.status == "ok"),
            key=lambda p: p.coupling_ratio,
        )
        if not sel:
            continue
        ax.plot(
            [p.coupling_ratio for p in sel],
            [p.results.get(value_key, np.nan) for p in sel],
            marker="o",
            label=f"vbar={vb:g}",
        )
    ax.set_xlabel("V/J")
    ax.set_ylabel(value_key)
    ax.set_title(title or "stability scan")
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)
