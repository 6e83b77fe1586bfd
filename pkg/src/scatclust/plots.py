"""Figure rendering for reports and diagnostics (matplotlib, Agg backend)."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

STYLE = {
    "figure.dpi": 120,
    "axes.grid": True,
    "grid.alpha": 0.3,
    "axes.spines.top": False,
    "axes.spines.right": False,
    "font.size": 9,
}


def save_spectrum_figure(spectra: dict, prefix_50: dict, path) -> None:
    """Eigenvalue-decay panels per domain with the 50%-variance prefix marked."""
    with plt.rc_context(STYLE):
        fig, axes = plt.subplots(1, len(spectra), figsize=(4.2 * len(spectra), 3.2))
        if len(spectra) == 1:
            axes = [axes]
        for ax, (domain, values) in zip(axes, spectra.items()):
            shown = min(len(values), 200)
            ax.semilogy(np.arange(1, shown + 1), np.maximum(values[:shown], 1e-16))
            ax.axvline(prefix_50[domain], color="tab:red", lw=1,
                       label=f"50% variance at {prefix_50[domain]}")
            ax.set_title(f"{domain} domain")
            ax.set_xlabel("eigenvalue rank")
            ax.set_ylabel("normalized eigenvalue")
            ax.legend(loc="upper right")
        fig.tight_layout()
        fig.savefig(path)
        plt.close(fig)


def save_angles_figure(angles: dict, class_pair, path) -> None:
    """Grouped bars of the leading principal angles per domain."""
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=(4.6, 3.2))
        domains = list(angles)
        n = len(next(iter(angles.values())))
        x = np.arange(1, n + 1)
        width = 0.8 / len(domains)
        for i, domain in enumerate(domains):
            ax.bar(x + (i - (len(domains) - 1) / 2) * width, angles[domain],
                   width=width, label=domain)
        ax.set_xticks(x)
        ax.set_xlabel("principal angle index")
        ax.set_ylabel("angle (degrees)")
        ax.set_ylim(0, 95)
        ax.set_title(f"class {class_pair[0]} vs class {class_pair[1]} subspaces")
        ax.legend()
        fig.tight_layout()
        fig.savefig(path)
        plt.close(fig)


def save_report_figure(report: dict, path) -> None:
    """Stage timings plus the metric summary of a clustering run."""
    with plt.rc_context(STYLE):
        fig, (ax_time, ax_metric) = plt.subplots(1, 2, figsize=(8.0, 3.2))
        stages = list(report["stage_seconds"])
        seconds = [report["stage_seconds"][s] for s in stages]
        ax_time.barh(stages[::-1], seconds[::-1], color="tab:blue")
        ax_time.set_xlabel("seconds")
        ax_time.set_title(f"stage timings (total {report['total_seconds']:.1f}s)")

        if report.get("labeled"):
            names = ["ACC", "NMI"]
            means = [report["acc_mean"], report["nmi_mean"]]
            stds = [report["acc_std"], report["nmi_std"]]
            ax_metric.bar(names, means, yerr=stds, color=["tab:green", "tab:orange"],
                          capsize=4)
            ax_metric.set_ylim(0, 1.05)
            ax_metric.set_title(f"metrics over {len(report['seeds'])} trial(s)")
        else:
            ax_metric.axis("off")
            ax_metric.text(0.5, 0.5, "unlabeled dataset", ha="center", va="center")
        fig.tight_layout()
        fig.savefig(path)
        plt.close(fig)


def save_ablation_figure(rows: list, path) -> None:
    """Accuracy bars for the ablation variants (rows: dicts with name/acc)."""
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=(6.4, 3.2))
        names = [r["name"] for r in rows]
        accs = [r["acc_mean"] for r in rows]
        stds = [r["acc_std"] for r in rows]
        ax.bar(names, accs, yerr=stds, capsize=4, color="tab:blue")
        ax.set_ylabel("ACC")
        ax.set_ylim(0, 1.05)
        ax.tick_params(axis="x", rotation=30)
        fig.tight_layout()
        fig.savefig(path)
        plt.close(fig)
