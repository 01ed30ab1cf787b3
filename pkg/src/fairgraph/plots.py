"""Static SVG curves with mean +/- one standard deviation bands."""

from __future__ import annotations

from pathlib import Path
from typing import Dict, List, Sequence

import numpy as np

from .experiment import SummaryRow

METRIC_FILES = {
    "dynamic_regret": "dynamic_regret.svg",
    "weak_regret": "weak_regret.svg",
    "total_reward": "reward.svg",
}


def band_data(summary: Sequence[SummaryRow], metric: str) -> Dict[str, dict]:
    """Per variant: sorted T, mean, and the lower/upper band edges drawn for ``metric``."""
    out: Dict[str, dict] = {}
    for variant in dict.fromkeys(r.variant for r in summary):
        rows = sorted((r for r in summary if r.variant == variant), key=lambda r: r.T)
        mean = np.array([r.mean[metric] for r in rows])
        std = np.array([r.std[metric] for r in rows])
        out[variant] = {"T": np.array([r.T for r in rows]), "mean": mean,
                        "lower": mean - std, "upper": mean + std}
    return out


def _optimum_bands(summary, metric):
    # the optima are shared by all variants of a trial; take them from one variant
    first = summary[0].variant
    rows = sorted((r for r in summary if r.variant == first), key=lambda r: r.T)
    mean = np.array([r.mean[metric] for r in rows])
    std = np.array([r.std[metric] for r in rows])
    return np.array([r.T for r in rows]), mean, mean - std, mean + std


def render_plots(summary: Sequence[SummaryRow], out_dir) -> List[str]:
    if not summary:
        raise ValueError("cannot plot an empty summary")
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = []
    with matplotlib.rc_context({"svg.hashsalt": "fairgraph", "svg.fonttype": "none"}):
        for metric, filename in METRIC_FILES.items():
            fig, ax = plt.subplots(figsize=(6, 4))
            for variant, d in band_data(summary, metric).items():
                line, = ax.plot(d["T"], d["mean"], marker="o", label=variant)
                ax.fill_between(d["T"], d["lower"], d["upper"], color=line.get_color(), alpha=0.2)
            if metric == "total_reward":
                for opt, label in (("opt_dynamic", "OPT_D"), ("opt_weak", "OPT_W")):
                    T, mean, lo, hi = _optimum_bands(summary, opt)
                    if np.isnan(mean).all():
                        continue
                    line, = ax.plot(T, mean, linestyle="--", label=label)
                    ax.fill_between(T, lo, hi, color=line.get_color(), alpha=0.15)
            ax.set_xlabel("T (rounds)")
            ax.set_ylabel(metric.replace("_", " ") + " (raw)")
            ax.legend()
            fig.tight_layout()
            path = out / filename
            fig.savefig(path, format="svg", metadata={"Date": None, "Creator": None})
            plt.close(fig)
            paths.append(str(path))
    return paths
