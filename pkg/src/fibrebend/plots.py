"""SVG plot rendering for reports.

Figures are rendered through the Agg backend straight to SVG text with a
fixed hash salt and no embedded date, so identical inputs give byte-identical
documents.  Every data artist carries a gid, which lands in the SVG as an id
attribute; structural tests key on those instead of parsing coordinates.
"""

from __future__ import annotations

import io

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402 (backend must be set first)
import numpy as np  # noqa: E402

PLOT_KINDS = ("angle_pressure", "expansion_pressure", "trajectory", "hysteresis")

_RC = {
    "svg.hashsalt": "fibrebend",
    "svg.fonttype": "none",
    "font.family": "DejaVu Sans",
    "font.size": 9.0,
    "axes.grid": True,
    "grid.alpha": 0.3,
    "figure.figsize": (4.8, 3.4),
    "figure.dpi": 100,
}


class PlotError(ValueError):
    pass


def _render(fig) -> str:
    buf = io.StringIO()
    fig.savefig(buf, format="svg", metadata={"Date": None})
    plt.close(fig)
    return buf.getvalue()


def _check_series(series):
    if not series:
        raise PlotError("empty series")
    for label, x, y in series:
        x, y = np.asarray(x), np.asarray(y)
        if x.size == 0:
            raise PlotError(f"series {label!r} is empty")
        if x.shape != y.shape:
            raise PlotError(f"series {label!r}: x has {x.shape}, y has {y.shape}")


def _curves(series, kind: str, xlabel: str, ylabel: str) -> str:
    _check_series(series)
    with plt.rc_context(_RC):
        fig, ax = plt.subplots()
        for label, x, y in series:
            line, = ax.plot(x, y, marker="o", markersize=3, label=str(label))
            line.set_gid(f"{kind}:{label}")
        ax.set_xlabel(xlabel)
        ax.set_ylabel(ylabel)
        if len(series) > 1:
            ax.legend(loc="best")
        return _render(fig)


def render_plot(series, kind: str) -> str:
    """Render one figure to SVG text.

    series by kind:
      angle_pressure / expansion_pressure: [(label, pressures_kpa, values)]
      trajectory: [(label, tips)] with tips an (n, 3) array
      hysteresis: (forward, backward) AngleSeries-likes on one pressure grid
    """
    if kind == "angle_pressure":
        return _curves(series, kind, "pressure [kPa]", "bending angle [deg]")
    if kind == "expansion_pressure":
        return _curves(series, kind, "pressure [kPa]", "mean radial expansion [mm]")
    if kind == "trajectory":
        if not series:
            raise PlotError("empty series")
        with plt.rc_context(_RC):
            fig, ax = plt.subplots()
            for label, tips in series:
                tips = np.asarray(tips)
                if tips.size == 0:
                    raise PlotError(f"series {label!r} is empty")
                line, = ax.plot(tips[:, 0], tips[:, 2], marker="o", markersize=3,
                                label=str(label))
                line.set_gid(f"trajectory:{label}")
            ax.set_xlabel("tip x [mm]")
            ax.set_ylabel("tip z [mm]")
            ax.set_aspect("equal", adjustable="datalim")
            if len(series) > 1:
                ax.legend(loc="best")
            return _render(fig)
    if kind == "hysteresis":
        fwd, bwd = series
        p1, t1 = np.asarray(fwd.pressures_kpa), np.asarray(fwd.theta_deg)
        p2, t2 = np.asarray(bwd.pressures_kpa), np.asarray(bwd.theta_deg)
        if p1.size == 0 or p2.size == 0:
            raise PlotError("empty series")
        if p1.shape != p2.shape or np.any(np.abs(p1 - p2) > 1e-9):
            raise PlotError("forward and backward series must share the pressure grid")
        with plt.rc_context(_RC):
            fig, ax = plt.subplots()
            lf, = ax.plot(p1, t1, marker="o", markersize=3, label="forward")
            lf.set_gid("hysteresis:forward")
            lb, = ax.plot(p2, t2, marker="s", markersize=3, label="backward")
            lb.set_gid("hysteresis:backward")
            lg, = ax.plot(p1, t2 - t1, linestyle="--", label="gap")
            lg.set_gid("hysteresis:gap")
            ax.set_xlabel("pressure [kPa]")
            ax.set_ylabel("bending angle [deg]")
            ax.legend(loc="best")
            return _render(fig)
    raise PlotError(f"unknown plot kind {kind!r}; expected one of {PLOT_KINDS}")
