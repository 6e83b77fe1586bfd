"""Command-line interface: cluster, diagnose, and ablate subcommands.

Flags are named after PipelineConfig fields; a plain key=value config file
can seed any of them, with explicit flags taking precedence.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import os
import sys

from .errors import ScatclustError
from .pipeline import (CLUSTERER_CHOICES, DATASET_CHOICES, PipelineConfig,
                       run_diagnostics, run_pipeline)

CONFIG_FIELDS = {f.name: f.type for f in dataclasses.fields(PipelineConfig)}


def _parse_config_file(path) -> dict:
    """key = value lines, '#' comments; values coerced by field type."""
    values = {}
    with open(path) as f:
        for lineno, line in enumerate(f, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ScatclustError(f"{path}:{lineno}: expected key = value")
            key, raw = (part.strip() for part in line.split("=", 1))
            if key not in CONFIG_FIELDS:
                raise ScatclustError(f"{path}:{lineno}: unknown key {key!r}")
            kind = CONFIG_FIELDS[key]
            if kind in ("bool", bool):
                values[key] = raw.lower() in ("1", "true", "yes", "on")
            elif kind in ("int", int):
                values[key] = int(raw)
            else:
                values[key] = raw
    return values


def _add_pipeline_flags(parser):
    parser.add_argument("--config", default=None,
                        help="key = value file seeding any flag below")
    parser.add_argument("--dataset", choices=DATASET_CHOICES, default=None)
    parser.add_argument("--data-dir", dest="data_dir", default=None)
    parser.add_argument("--csv-path", dest="csv_path", default=None)
    parser.add_argument("--J", type=int, default=None)
    parser.add_argument("--L", type=int, default=None)
    parser.add_argument("--pad-size", dest="pad_size", type=int, default=None)
    parser.add_argument("--pca-dim", dest="pca_dim", type=int, default=None)
    parser.add_argument("--poc-n", dest="poc_n", type=int, default=None)
    parser.add_argument("--p-prime", dest="p_prime", type=int, default=None)
    parser.add_argument("--p", type=int, default=None)
    parser.add_argument("--knn", type=int, default=None)
    parser.add_argument("--clusters", type=int, default=None)
    parser.add_argument("--seed", type=int, default=None)
    parser.add_argument("--trials", type=int, default=None)
    parser.add_argument("--use-scattering", dest="use_scattering",
                        action=argparse.BooleanOptionalAction, default=None)
    parser.add_argument("--use-poc", dest="use_poc",
                        action=argparse.BooleanOptionalAction, default=None)
    parser.add_argument("--clusterer", choices=CLUSTERER_CHOICES, default=None)
    parser.add_argument("--cache", default=None,
                        help="scattering feature cache file (created if absent)")
    parser.add_argument("--figures", dest="figures",
                        action=argparse.BooleanOptionalAction, default=None)


def _build_config(args) -> PipelineConfig:
    values = {}
    if args.config:
        values.update(_parse_config_file(args.config))
    for name in CONFIG_FIELDS:
        flag = getattr(args, name, None)
        if flag is not None:
            values[name] = flag
    return PipelineConfig(**values)


def _write_assignments(path, assignments) -> None:
    with open(path, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(["sample_index", "cluster_id"])
        for i, cluster in enumerate(assignments):
            writer.writerow([i, int(cluster)])


def _figure_path(out, suffix):
    stem = os.path.splitext(out)[0]
    return f"{stem}.{suffix}.png"


def cmd_cluster(args) -> int:
    config = _build_config(args)
    report = run_pipeline(config)
    assignments = report.pop("assignments")

    stem = os.path.splitext(config.out)[0]
    assignments_path = config.assignments_out or f"{stem}.assignments.csv"
    _write_assignments(assignments_path, assignments[0])
    with open(config.out, "w") as f:
        json.dump(report, f, indent=2)
    if config.figures:
        from .plots import save_report_figure
        save_report_figure(report, _figure_path(config.out, "summary"))

    if report["labeled"]:
        print(f"ACC {report['acc_mean']:.4f} +/- {report['acc_std']:.4f}   "
              f"NMI {report['nmi_mean']:.4f} +/- {report['nmi_std']:.4f}   "
              f"({len(report['seeds'])} trial(s), {report['total_seconds']:.1f}s)")
    else:
        print(f"clustered {report['n_samples']} unlabeled samples "
              f"in {report['total_seconds']:.1f}s")
    print(f"report: {config.out}   assignments: {assignments_path}")
    return 0


def cmd_diagnose(args) -> int:
    config = _build_config(args)
    result = run_diagnostics(config, args.class_a, args.class_b, args.angles)
    os.makedirs(args.out, exist_ok=True)

    for domain, values in result.spectra.items():
        path = os.path.join(args.out, f"spectrum_{domain}.csv")
        with open(path, "w", newline="") as f:
            writer = csv.writer(f)
            writer.writerow(["index", "normalized_eigenvalue"])
            for i, v in enumerate(values):
                writer.writerow([i, f"{v:.12e}"])

    angles_path = os.path.join(args.out, "angles.csv")
    with open(angles_path, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(["domain"] + [f"theta_{i + 1}" for i in range(args.angles)])
        for domain, angles in result.angles.items():
            writer.writerow([domain] + [f"{a:.4f}" for a in angles])

    if config.figures:
        from .plots import save_angles_figure, save_spectrum_figure
        save_spectrum_figure(result.spectra, result.prefix_50,
                             os.path.join(args.out, "spectrum.png"))
        save_angles_figure(result.angles, result.class_pair,
                           os.path.join(args.out, "angles.png"))

    for domain in result.spectra:
        print(f"{domain}: 50% variance within top {result.prefix_50[domain]} "
              f"eigenvalues; theta_1 = {result.angles[domain][0]:.1f} deg")
    print(f"wrote diagnostics under {args.out}/")
    return 0


ABLATION_ROWS = (
    # name, use_scattering, use_poc, clusterer
    ("scat+poc+uspec", True, True, "uspec"),
    ("poc+uspec", False, True, "uspec"),
    ("scat+uspec", True, False, "uspec"),
    ("uspec", False, False, "uspec"),
    ("scat+poc+kmeans", True, True, "kmeans"),
    ("scat+kmeans", True, False, "kmeans"),
)


def cmd_ablate(args) -> int:
    base = _build_config(args)
    os.makedirs(args.out, exist_ok=True)
    rows = []
    for name, use_scattering, use_poc, clusterer in ABLATION_ROWS:
        config = dataclasses.replace(
            base, use_scattering=use_scattering, use_poc=use_poc,
            clusterer=clusterer,
            # raw-pixel rows skip PCA so "uspec" means uspec on pixels
            pca_dim=base.pca_dim if use_scattering else 0,
            cache=base.cache if use_scattering else "",
            out=os.path.join(args.out, f"{name}.json"),
        )
        report = run_pipeline(config)
        report.pop("assignments")
        with open(config.out, "w") as f:
            json.dump(report, f, indent=2)
        rows.append({
            "name": name,
            "acc_mean": report["acc_mean"], "acc_std": report["acc_std"],
            "nmi_mean": report["nmi_mean"], "nmi_std": report["nmi_std"],
            "seconds": report["total_seconds"],
        })
        print(f"{name:18s} ACC {report['acc_mean']:.4f} "
              f"NMI {report['nmi_mean']:.4f} ({report['total_seconds']:.1f}s)")

    table_path = os.path.join(args.out, "ablation.csv")
    with open(table_path, "w", newline="") as f:
        writer = csv.DictWriter(f, fieldnames=list(rows[0]))
        writer.writeheader()
        writer.writerows(rows)
    if base.figures:
        from .plots import save_ablation_figure
        save_ablation_figure(rows, os.path.join(args.out, "ablation.png"))
    print(f"wrote ablation table to {table_path}")
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="scatclust",
        description="Image clustering via scattering features, dominant-"
                    "direction removal, and scalable spectral clustering.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_cluster = sub.add_parser("cluster", help="run the clustering pipeline")
    _add_pipeline_flags(p_cluster)
    p_cluster.add_argument("--out", default=None, help="report JSON path")
    p_cluster.set_defaults(func=cmd_cluster)

    p_diag = sub.add_parser("diagnose",
                            help="eigenvalue spectra and class principal angles")
    _add_pipeline_flags(p_diag)
    p_diag.add_argument("--class-a", dest="class_a", type=int, default=0)
    p_diag.add_argument("--class-b", dest="class_b", type=int, default=2)
    p_diag.add_argument("--angles", type=int, default=5)
    p_diag.add_argument("--out", default="diagnostics",
                        help="output directory")
    p_diag.set_defaults(func=cmd_diagnose)

    p_abl = sub.add_parser("ablate", help="run the standard ablation variants")
    _add_pipeline_flags(p_abl)
    p_abl.add_argument("--out", default="ablation", help="output directory")
    p_abl.set_defaults(func=cmd_ablate)

    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ScatclustError, FileNotFoundError) as exc:
        print(f"error [{args.command}]: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
