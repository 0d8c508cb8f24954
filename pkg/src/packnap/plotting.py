"""Figure rendering for the report path: mean curves with 10-90 percentile
bands, one panel per metric, overlaying whatever frameworks are present."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

_COLORS = {"bma": "tab:blue", "dfl": "tab:orange", "bgs": "tab:green", "pto": "tab:red"}
_LABELS = {"bma": "BMA", "dfl": "DFL", "bgs": "BGS", "pto": "PtO"}


def render_curves(curves_by_framework: dict, which: str, path: str, ylabel: str) -> None:
    """Write one PNG: per framework the mean curve plus a shaded 10-90 band.

    `curves_by_framework` maps framework tag -> the dict produced by
    `running_mean_curves`.
    """
    fig, ax = plt.subplots(figsize=(7.0, 4.2))
    for fw in ("bma", "dfl", "bgs", "pto"):
        if fw not in curves_by_framework:
            continue
        cur = curves_by_framework[fw]
        color = _COLORS[fw]
        ax.plot(cur["t"], cur[f"{which}_mean"], color=color, lw=1.6, label=_LABELS[fw])
        ax.fill_between(cur["t"], cur[f"{which}_p10"], cur[f"{which}_p90"],
                        color=color, alpha=0.2, lw=0)
    ax.set_xlabel("stage")
    ax.set_ylabel(ylabel)
    ax.legend(frameon=False)
    ax.spines["right"].set_visible(False)
    ax.spines["top"].set_visible(False)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
