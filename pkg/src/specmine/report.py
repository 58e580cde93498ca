"""Report rendering: JSON documents, CSV tables, and matplotlib figures.

Every CLI path that produces a report writes the machine-readable JSON, a
delimited per-generation (or per-score) table, and PNG figures next to each
other in the chosen directory.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .scoring import EvalReport
from .search import SearchReport


def write_json(path: Path, doc: dict) -> None:
    path.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n",
                    encoding="utf-8")


def write_search_report(report: SearchReport, outdir: Path) -> list[Path]:
    """Search run: report.json, generations.csv, goals.csv, coverage.png."""
    outdir.mkdir(parents=True, exist_ok=True)
    written = []

    json_path = outdir / "search_report.json"
    write_json(json_path, report.to_doc())
    written.append(json_path)

    gen_path = outdir / "generations.csv"
    with open(gen_path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["generation", "covered", "newly_covered", "targeted",
                         "abandoned", "reset"])
        for g in report.generations:
            writer.writerow([g.generation, g.covered, g.newly_covered,
                             g.targeted, g.abandoned, int(g.reset)])
    written.append(gen_path)

    goals_path = outdir / "goals.csv"
    with open(goals_path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["goal", "state"])
        for goal, state in sorted(report.goal_states.items()):
            writer.writerow([goal, state])
    written.append(goals_path)

    if report.generations:
        gens = [g.generation for g in report.generations]
        fig, (top, bottom) = plt.subplots(2, 1, figsize=(8, 6), sharex=True)
        top.plot(gens, [g.covered for g in report.generations],
                 label="covered", color="tab:blue")
        top.plot(gens, [g.abandoned for g in report.generations],
                 label="abandoned", color="tab:red", linestyle="--")
        for reset_gen in report.resets:
            top.axvline(reset_gen, color="gray", alpha=0.4, linewidth=0.8)
        top.set_ylabel("goals")
        top.legend(loc="best")
        top.set_title("goal coverage over generations")
        bottom.plot(gens, [g.targeted for g in report.generations],
                    color="tab:green")
        bottom.set_ylabel("targeted goals")
        bottom.set_xlabel("generation")
        fig.tight_layout()
        fig_path = outdir / "coverage.png"
        fig.savefig(fig_path, dpi=120)
        plt.close(fig)
        written.append(fig_path)
    return written


def write_eval_report(report: EvalReport, outdir: Path,
                      name: str = "eval") -> list[Path]:
    """Scores: eval.json, scores.csv, scores.png."""
    outdir.mkdir(parents=True, exist_ok=True)
    written = []

    json_path = outdir / f"{name}.json"
    json_path.write_text(report.to_json() + "\n", encoding="utf-8")
    written.append(json_path)

    csv_path = outdir / "scores.csv"
    with open(csv_path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["metric", "value"])
        writer.writerow(["precision", f"{report.precision:.6f}"])
        writer.writerow(["recall", f"{report.recall:.6f}"])
        writer.writerow(["f_measure", f"{report.f_measure:.6f}"])
    written.append(csv_path)

    fig, ax = plt.subplots(figsize=(5, 4))
    metrics = ["precision", "recall", "f_measure"]
    values = [report.precision, report.recall, report.f_measure]
    ax.bar(metrics, values, color=["tab:blue", "tab:orange", "tab:green"])
    ax.set_ylim(0, 1.05)
    for i, value in enumerate(values):
        ax.text(i, value + 0.02, f"{value:.3f}", ha="center")
    ax.set_title("model quality vs ground truth")
    fig.tight_layout()
    fig_path = outdir / "scores.png"
    fig.savefig(fig_path, dpi=120)
    plt.close(fig)
    written.append(fig_path)
    return written


def write_pipeline_report(result, outdir: Path) -> list[Path]:
    """Whole-run bundle: pipeline.json plus the per-phase artifacts."""
    outdir.mkdir(parents=True, exist_ok=True)
    written = []
    json_path = outdir / "pipeline.json"
    write_json(json_path, result.report_doc())
    written.append(json_path)
    if result.search_report is not None:
        written.extend(write_search_report(result.search_report, outdir))
    if result.eval_report is not None:
        written.extend(write_eval_report(result.eval_report, outdir))
    return written
