"""Render a run directory into summary tables, CSV histograms and figures.

Reads the stage TSVs written by the pipeline and produces, under
``<output_dir>/report``: histogram CSVs for path counts, expressibility and
ebits (per filter stage), the query trace, a one-row summary matching the
headline numbers of a search (solutions found, energy gap, minimum ebits
among solving circuits), and PNG figures for each. Stages that have not run
yet are skipped and marked pending in the summary.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from .pipeline import (
    EXPRESS_SELECTED_TSV,
    EXPRESS_TSV,
    GENERATION_TSV,
    MANIFEST,
    PATHS_SELECTED_TSV,
    PATHS_TSV,
    QUERIES_TSV,
    PipelineConfig,
    PipelineError,
    collect_report,
    read_tsv,
)


def _write_csv(path: Path, header: list[str], rows: list[list]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)


def _hist_csv_png(
    values: np.ndarray,
    bins: int,
    csv_path: Path,
    png_path: Path,
    title: str,
    xlabel: str,
) -> None:
    counts, edges = np.histogram(values, bins=bins)
    _write_csv(
        csv_path,
        ["bin_left", "bin_right", "count"],
        [[edges[i], edges[i + 1], int(c)] for i, c in enumerate(counts)],
    )
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.bar(edges[:-1], counts, width=np.diff(edges), align="edge", color="#4878cf", edgecolor="none")
    ax.set_xlabel(xlabel)
    ax.set_ylabel("circuits")
    ax.set_title(title)
    fig.tight_layout()
    fig.savefig(png_path, dpi=150)
    plt.close(fig)


def _ebits_by_stage(out: Path) -> dict[str, list[int]]:
    _, rows = read_tsv(out / GENERATION_TSV)
    ebits = {int(r[0]): int(r[7]) for r in rows}
    stages = {"all": list(ebits.values())}
    if (out / PATHS_SELECTED_TSV).exists():
        _, sel = read_tsv(out / PATHS_SELECTED_TSV)
        stages["path_selected"] = [ebits[int(r[1])] for r in sel]
    if (out / EXPRESS_SELECTED_TSV).exists():
        _, sel = read_tsv(out / EXPRESS_SELECTED_TSV)
        stages["candidates"] = [ebits[int(r[1])] for r in sel]
    return stages


def report(output_dir: str | Path, figures: bool = True) -> dict:
    """Build all report artifacts; returns the summary row as a dict."""
    out = Path(output_dir)
    if not (out / MANIFEST).exists():
        raise PipelineError(
            f"{out} holds no pipeline state (no {MANIFEST}); run a pipeline stage first"
        )
    rep_dir = out / "report"
    rep_dir.mkdir(exist_ok=True)
    manifest_cfg = PipelineConfig.from_dict(
        json.loads((out / MANIFEST).read_text())["config"]
    )
    summary_extra = collect_report(manifest_cfg)

    pending: list[str] = []

    if (out / PATHS_TSV).exists():
        _, rows = read_tsv(out / PATHS_TSV)
        counts = np.array([float(int(r[1])) for r in rows])
        _hist_csv_png(
            np.log10(np.maximum(counts, 1.0)),
            40,
            rep_dir / "paths_hist.csv",
            rep_dir / "paths_hist.png",
            "DAG path counts over the generated pool",
            "log10(paths)",
        )
    else:
        pending.append("paths")

    if (out / EXPRESS_TSV).exists():
        _, rows = read_tsv(out / EXPRESS_TSV)
        vals = np.array([float(r[1]) for r in rows])
        _hist_csv_png(
            vals,
            40,
            rep_dir / "expressibility_hist.csv",
            rep_dir / "expressibility_hist.png",
            "Expressibility of path-selected circuits",
            "divergence from Haar (nats)",
        )
    else:
        pending.append("expressibility")

    if (out / GENERATION_TSV).exists():
        stages = _ebits_by_stage(out)
        max_e = max(max(v) for v in stages.values() if v) if stages else 0
        header = ["ebits"] + list(stages)
        rows = []
        for e in range(max_e + 1):
            rows.append([e] + [sum(1 for x in stages[s] if x == e) for s in stages])
        _write_csv(rep_dir / "ebits_hist.csv", header, rows)
        if figures:
            fig, axes = plt.subplots(1, len(stages), figsize=(4 * len(stages), 3.2), squeeze=False)
            for ax, (name, vals) in zip(axes[0], stages.items()):
                ax.hist(vals, bins=range(max_e + 2), color="#6acc65", edgecolor="white")
                ax.set_title(f"ebits: {name}")
                ax.set_xlabel("ebits")
            fig.tight_layout()
            fig.savefig(rep_dir / "ebits_hist.png", dpi=150)
            plt.close(fig)
    else:
        pending.append("generation")

    if (out / QUERIES_TSV).exists():
        _, rows = read_tsv(out / QUERIES_TSV)
        queries = [int(r[0]) for r in rows]
        energies = [float(r[3]) for r in rows]
        running = np.minimum.accumulate(energies) if energies else []
        _write_csv(
            rep_dir / "query_trace.csv",
            ["query", "idx", "best_energy", "running_min", "solved"],
            [
                [int(r[0]), int(r[1]), float(r[3]), float(running[i]), int(r[4])]
                for i, r in enumerate(rows)
            ],
        )
        if figures and energies:
            fig, ax = plt.subplots(figsize=(6, 4))
            ax.plot(queries, running, drawstyle="steps-post", color="#d65f5f")
            if summary_extra.ground_energy is not None:
                ax.axhline(summary_extra.ground_energy, color="black", lw=0.8, ls="--",
                           label="ground energy")
                ax.legend()
            ax.set_xlabel("query")
            ax.set_ylabel("lowest energy so far")
            ax.set_title("Energy versus queries")
            fig.tight_layout()
            fig.savefig(rep_dir / "query_trace.png", dpi=150)
            plt.close(fig)
            fig, ax = plt.subplots(figsize=(6, 4))
            ax.hist(energies, bins=30, color="#956cb4")
            if summary_extra.ground_energy is not None:
                ax.axvline(summary_extra.ground_energy, color="red", lw=1.0)
            ax.set_xlabel("best energy per query")
            ax.set_ylabel("queries")
            ax.set_title("Lowest energies achieved by candidates")
            fig.tight_layout()
            fig.savefig(rep_dir / "energy_hist.png", dpi=150)
            plt.close(fig)
    else:
        pending.append("queries")

    summary = {
        "task": manifest_cfg.task.get("kind"),
        "method": manifest_cfg.method,
        "n_gates": manifest_cfg.n_gates,
        "n_pool": manifest_cfg.n_pool,
        "n_path_keep": manifest_cfg.n_path_keep,
        "n_candidates": manifest_cfg.n_candidates,
        "n_queried": len(summary_extra.query_trace),
        "n_solutions": summary_extra.n_solutions,
        "gap": summary_extra.gap,
        "min_ebits_solving": summary_extra.min_ebits_solving,
        "ground_energy": summary_extra.ground_energy,
        "best_energy": summary_extra.best_energy,
        "pending": ";".join(pending) if pending else "",
    }
    _write_csv(rep_dir / "summary.csv", list(summary), [list(summary.values())])
    return summary
