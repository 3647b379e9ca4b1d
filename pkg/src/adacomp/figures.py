"""Quick-look figures rendered next to the delimited output."""

from __future__ import annotations

import math

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np


def _series(rows, metric):
    pts = [(r.sweep_value, r.value, r.stderr) for r in rows if r.metric == metric]
    if not pts:
        return np.array([]), np.array([]), np.array([])
    x, y, e = map(np.asarray, zip(*pts))
    return x, y, e


def _finite(x, y, e=None):
    keep = np.isfinite(y)
    if e is None:
        return x[keep], y[keep]
    return x[keep], y[keep], e[keep]


def render(spec, rows, path: str) -> str:
    """One PNG per run; layout picked by scenario."""
    scenario = spec.scenario
    axis = spec.sweep.get("axis") if scenario == "custom" else None
    fig, ax = plt.subplots(figsize=(6.4, 4.2))

    if scenario == "time-fraction-sweep" or axis == "window_ms":
        w, eta, _ = _series(rows, "cos_time_fraction")
        wm, etam, se = _series(rows, "cos_time_fraction_mc")
        _, delta, _ = _series(rows, "expected_delta")
        ax.plot(w, eta, label="COS time fraction (quadrature)")
        ax.errorbar(wm, etam, yerr=3 * se, fmt=".", ms=3, alpha=0.6,
                    label="COS time fraction (MC, 3 s.e.)")
        ax.plot(w, delta, "--", label="expected interference factor")
        ax.set_xlabel("message window w [ms]")
        ax.set_ylabel("fraction")
        wo, obj, _ = _series(rows, "window_objective")
        wo, obj = _finite(wo, obj)
        ax2 = ax.twinx()
        ax2.plot(wo, obj, color="tab:red", alpha=0.7, label="window objective")
        ax2.set_ylabel("expected delta per unit COS time", color="tab:red")
        ax2.set_yscale("log")
        ax.legend(loc="upper left", fontsize=8)
    elif scenario.startswith("throughput-vs-delay") or axis == "mean_delay_ms":
        x, y, e = _series(rows, "throughput")
        ax.errorbar(x, y, yerr=3 * e, fmt="o-", capsize=2)
        ax.set_xlabel("mean overhead delay [ms]")
        ax.set_ylabel("ergodic throughput [bits/s/Hz]")
        title = "window %.0f ms" % spec.window_ms if math.isfinite(spec.window_ms) \
            else "no message window"
        ax.set_title(title, fontsize=9)
    elif scenario == "ccdf-vs-bounds" or axis == "beta":
        b, emp, se = _series(rows, "ccdf_empirical")
        ax.errorbar(b, emp, yerr=3 * se, fmt="o-", ms=3, label="empirical CCDF")
        bl, low, _ = _series(rows, "ccdf_lower")
        keep = low > 0
        if keep.any():
            ax.plot(bl[keep], low[keep], "--", label="lower bound")
        bu, up, _ = _series(rows, "ccdf_upper")
        bu, up = _finite(bu, up)
        if len(bu):
            ax.plot(bu, up, ":", label="upper bound (flagged)")
        ax.set_xscale("log")
        ax.set_xlabel("SIR threshold")
        ax.set_ylabel("P[SIR >= threshold]")
        ax.legend(fontsize=8)
    else:
        for metric in sorted({r.metric for r in rows}):
            x, y, e = _series(rows, metric)
            x, y = _finite(x, y)
            ax.plot(x, y, marker=".", label=metric)
        ax.set_xlabel("sweep value")
        ax.set_ylabel("value")
        ax.legend(fontsize=8)

    ax.grid(alpha=0.3)
    fig.suptitle(scenario, fontsize=10)
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)
    return path
