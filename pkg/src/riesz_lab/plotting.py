"""
SVG figures for scans, convergence runs and gap tables.

Figures are drawn on a bare :class:`~matplotlib.figure.Figure` (no pyplot
state) and written with a fixed hash salt and no timestamp, so identical
inputs give identical files.
"""

from __future__ import annotations

from typing import Sequence

import matplotlib

matplotlib.use("Agg")

import numpy as np
from matplotlib.figure import Figure

__all__ = ["sigma_scan_figure", "convergence_figure", "gap_table_figure", "ft_figure", "save_svg"]


def save_svg(fig: Figure, path, salt: str, description: str = "") -> None:
    with matplotlib.rc_context({"svg.hashsalt": salt, "svg.fonttype": "path"}):
        fig.savefig(path, format="svg", metadata={"Date": None, "Description": description or None})


def _figure(title: str) -> tuple[Figure, object]:
    fig = Figure(figsize=(7, 4.2))
    ax = fig.add_subplot()
    ax.set_title(title, fontsize=10)
    ax.grid(True, which="both", alpha=0.3)
    return fig, ax


def sigma_scan_figure(scan, title: str | None = None) -> Figure:
    """``Sigma_K(t)`` against ``t`` on a log axis, with the budget line."""
    fig, ax = _figure(title or f"{scan.label}: Sigma_K, K={scan.K}")
    t = scan.grid
    pos = t > 0
    ax.plot(t[pos], scan.values[pos], lw=0.8, color="C0", label="Sigma_K(t)")
    ax.axhline(scan.budget, color="C3", ls="--", lw=1, label=f"budget {scan.budget:.4g}")
    if scan.argmax_t is not None and scan.argmax_t > 0:
        ax.plot([scan.argmax_t], [scan.sup], "o", color="C1", ms=4, label=f"sup {scan.sup:.4g}")
    ax.set_xscale("log")
    ax.set_xlabel("t")
    ax.set_ylabel("Sigma_K(t)")
    ax.legend(loc="upper left", fontsize=8)
    return fig


def convergence_figure(reports: Sequence, title: str = "convergence") -> Figure:
    """Sup and L^2 errors against the schedule index."""
    fig, ax = _figure(title)
    k = np.array([r.k for r in reports])
    sup = np.array([r.sup_err for r in reports])
    l2 = np.array([r.l2_err for r in reports])
    positive = (sup > 0) | (l2 > 0)
    if positive.any():
        ax.set_yscale("log")
        ax.plot(k[sup > 0], sup[sup > 0], "o-", ms=3, label="sup error")
        ax.plot(k[l2 > 0], l2[l2 > 0], "s-", ms=3, label="L2 error")
    else:
        ax.plot(k, sup, "o-", ms=3, label="sup error")
        ax.plot(k, l2, "s-", ms=3, label="L2 error")
    ax.set_xlabel("k")
    ax.set_ylabel("error")
    ax.legend(fontsize=8)
    return fig


def gap_table_figure(rows: Sequence, title: str = "gap bounds") -> Figure:
    """Grid suprema of the off-cloud bound next to ``B_m`` for each gap."""
    fig, ax = _figure(title)
    m = np.array([r.m for r in rows])
    ax.semilogy(m, [float(r.B_m) for r in rows], "o-", ms=3, label="B_m")
    ax.semilogy(m, [r.grid_sup for r in rows], "s-", ms=3, label="grid sup of bound")
    ft = np.array([r.ft_sup for r in rows])
    if np.isfinite(ft).any():
        ax.semilogy(m, ft, "^-", ms=3, label="grid sup |ft|")
    ax.set_xlabel("gap m")
    ax.legend(fontsize=8)
    return fig


def ft_figure(s: np.ndarray, values: np.ndarray, title: str = "transform") -> Figure:
    fig, ax = _figure(title)
    ax.plot(s, np.abs(values), lw=0.8)
    ax.set_xlabel("s")
    ax.set_ylabel("|ft(s)|")
    return fig
