"""Render summary figures next to the CSV output.

One line per policy against the sweep variable, error bars showing the
standard error of the mean. Figures are written straight to PNG files;
nothing is shown interactively.
"""

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

__all__ = ["render_figures"]

_SWEEP_LABELS = {
    "num_users": "number of users",
    "cell_radius_km": "cell radius (km)",
    "cloudlet_freq_hz": "cloudlet CPU frequency (Hz)",
}

_METRICS = (
    ("energy", "mean_total_energy_j", "se_total_energy_j",
     "total energy (J)"),
    ("saving", "mean_total_saving_j", "se_total_saving_j",
     "total energy saving (J)"),
    ("offload", "mean_offload_count", "se_offload_count",
     "offloaded users"),
)

_STYLE = {
    "local_only": dict(color="0.4", marker="", linestyle="--"),
    "min_group": dict(color="tab:blue", marker="o"),
    "per_resource": dict(color="tab:orange", marker="s"),
    "joint": dict(color="tab:red", marker="^"),
    "opt_unconstrained": dict(color="tab:green", marker="v"),
    "opt_constrained": dict(color="tab:purple", marker="d"),
}


def render_figures(summary: list, sweep_variable: str, out_base) -> list:
    """Write ``<out_base>_{energy,saving,offload}.png`` from summary rows.

    ``summary`` is the list of dicts produced by ``bench.summarize``.
    Returns the written paths.
    """
    xlabel = _SWEEP_LABELS.get(sweep_variable, sweep_variable)
    policies = []
    for row in summary:
        if row["policy"] not in policies:
            policies.append(row["policy"])

    written = []
    for suffix, mean_key, se_key, ylabel in _METRICS:
        fig, ax = plt.subplots(figsize=(5.2, 3.6))
        for policy in policies:
            points = [r for r in summary if r["policy"] == policy]
            xs = [r["sweep_value"] for r in points]
            ys = [r[mean_key] for r in points]
            errs = [r[se_key] for r in points]
            style = _STYLE.get(policy, dict(marker="x"))
            ax.errorbar(xs, ys, yerr=errs, label=policy, capsize=2,
                        markersize=4, linewidth=1.2, **style)
        ax.set_xlabel(xlabel)
        ax.set_ylabel(ylabel)
        ax.grid(alpha=0.3, linestyle=":")
        ax.legend(fontsize=8)
        fig.tight_layout()
        path = f"{out_base}_{suffix}.png"
        fig.savefig(path, dpi=150)
        plt.close(fig)
        written.append(path)
    return written
