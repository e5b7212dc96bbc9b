"""
Report generators over a ReportTable: system comparison, grouped metric
report, cross-dataset matrix and multi-variable line report. Generators are
pure; ReportOutput.write puts report.csv, report.json and chart_*.svg in a
report directory.
"""

import csv
import io
import logging
from collections import defaultdict
from collections.abc import Sequence
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from lib.atomic_io import write_json_atomic, write_text_atomic
from lib.errors import ComparisonError, ReportError
from lib.settings import ReportConfig
from reporting.svg import Series, bar_chart, format_number, heatmap, line_chart, write_svg
from reporting.table import REPORT_COLUMNS, ReportRow, ReportTable

logger = logging.getLogger("Reporting")

COMPARISON_KEY = ("train_dataset", "eval_dataset", "subword_model", "vocab_size")


def _sort_key(values: Sequence[object]) -> tuple:
    return tuple((v is None, v if v is not None else 0) for v in values)


def _cell(value: object) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return format_number(value)
    return str(value)


@dataclass
class ReportOutput:
    name: str
    kind: str
    columns: tuple[str, ...]
    rows: list[dict[str, Any]]
    charts: dict[str, str] = field(default_factory=dict)
    params: dict[str, Any] = field(default_factory=dict)
    summary: dict[str, Any] = field(default_factory=dict)
    warnings: list[str] = field(default_factory=list)

    def csv_text(self) -> str:
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(self.columns)
        for row in self.rows:
            writer.writerow([_cell(row.get(c)) for c in self.columns])
        return buffer.getvalue()

    def write(self, out_dir: str | Path) -> list[Path]:
        out_dir = Path(out_dir)
        written = [write_text_atomic(out_dir / "report.csv", self.csv_text())]
        for file_name, svg in sorted(self.charts.items()):
            written.append(write_svg(out_dir / file_name, svg))
        written.append(write_json_atomic(out_dir / "report.json", {
            "name": self.name,
            "kind": self.kind,
            "params": self.params,
            "columns": list(self.columns),
            "rows": self.rows,
            "summary": self.summary,
            "warnings": self.warnings,
        }))
        logger.info(f"Report '{self.name}' written to {out_dir}")
        return written


def _check_dimension(name: str) -> None:
    if name not in REPORT_COLUMNS:
        raise ReportError(f"unknown dimension '{name}'; known: {', '.join(REPORT_COLUMNS)}")


@dataclass(frozen=True)
class ComparisonRow:
    key: tuple
    score_a: float
    score_b: float

    @property
    def delta(self) -> float:
        return self.score_b - self.score_a


@dataclass(frozen=True)
class Comparison:
    system_a: str
    system_b: str
    metric: str
    rows: tuple[ComparisonRow, ...]

    @property
    def signed_mean(self) -> float:
        return float(np.mean([r.delta for r in self.rows])) if self.rows else 0.0

    @property
    def absolute_mean(self) -> float:
        return float(np.mean([abs(r.delta) for r in self.rows])) if self.rows else 0.0


def _scores_by_key(rows: Sequence[ReportRow], system: str) -> dict[tuple, float]:
    scores: dict[tuple, float] = {}
    for row in rows:
        key = tuple(row.value(c) for c in COMPARISON_KEY)
        if key in scores:
            raise ReportError(f"system '{system}' has several scores for {key}; filter by beam")
        scores[key] = row.score
    return scores


def system_comparison(
    table: ReportTable,
    system_a: str,
    system_b: str,
    metric: str = "bleu",
    beam: int | None = None,
) -> Comparison:
    """Per-key delta score_b - score_a over keys (train, eval, subword model, vocab size)."""
    scoped = table.where(metric=metric, beam=beam)
    a = _scores_by_key([r for r in scoped.rows if r.translator == system_a], system_a)
    b = _scores_by_key([r for r in scoped.rows if r.translator == system_b], system_b)
    unmatched = [f"{system_a} only: {k}" for k in a if k not in b] + [f"{system_b} only: {k}" for k in b if k not in a]
    if unmatched:
        raise ComparisonError(sorted(unmatched))
    if not a:
        raise ReportError(f"no '{metric}' scores for '{system_a}' and '{system_b}'")
    rows = tuple(ComparisonRow(k, a[k], b[k]) for k in sorted(a, key=_sort_key))
    return Comparison(system_a, system_b, metric, rows)


def comparison_report(name: str, comparison: Comparison) -> ReportOutput:
    columns = (*COMPARISON_KEY, comparison.system_a, comparison.system_b, "delta")
    rows = [
        {**dict(zip(COMPARISON_KEY, r.key)), comparison.system_a: r.score_a, comparison.system_b: r.score_b,
         "delta": r.delta}
        for r in comparison.rows
    ]
    labels = [" / ".join(str(v) for v in r.key if v is not None) for r in comparison.rows]
    chart = bar_chart(
        f"{comparison.system_b} vs {comparison.system_a} ({comparison.metric})",
        labels,
        [Series(comparison.system_a, [r.score_a for r in comparison.rows]),
         Series(comparison.system_b, [r.score_b for r in comparison.rows])],
        y_label=comparison.metric,
    )
    return ReportOutput(
        name, "comparison", columns, rows,
        charts={"chart_comparison.svg": chart},
        params={"system_a": comparison.system_a, "system_b": comparison.system_b, "metric": comparison.metric},
        summary={
            "signed_mean_delta": round(comparison.signed_mean, 2),
            "absolute_mean_delta": round(comparison.absolute_mean, 2),
            "pairs": len(comparison.rows),
        },
    )


def metric_report(
    table: ReportTable,
    group_by: Sequence[str],
    metrics: Sequence[str],
    name: str = "metrics",
    beam: int | None = None,
) -> ReportOutput:
    """Mean score per (group, metric) as a grouped bar chart and a CSV."""
    for dim in group_by:
        _check_dimension(dim)
    scoped = table.where(beam=beam)
    if len(scoped) == 0:
        raise ReportError(f"report '{name}': no rows to report")

    groups: dict[tuple, dict[str, list[float]]] = defaultdict(lambda: defaultdict(list))
    for row in scoped.rows:
        if row.metric in metrics:
            groups[tuple(row.value(d) for d in group_by)][row.metric].append(row.score)
    keys = sorted(groups, key=_sort_key)

    columns = (*group_by, "metric", "score", "n")
    rows = []
    means: dict[str, list[float | None]] = {m: [] for m in metrics}
    for key in keys:
        for metric in metrics:
            scores = groups[key].get(metric)
            mean = float(np.mean(scores)) if scores else None
            means[metric].append(mean)
            if scores:
                rows.append({**dict(zip(group_by, key)), "metric": metric, "score": mean, "n": len(scores)})

    labels = [" / ".join(str(v) for v in key) for key in keys]
    chart = bar_chart(
        f"{', '.join(metrics)} by {', '.join(group_by)}",
        labels,
        [Series(m, means[m]) for m in metrics],
        x_label=", ".join(group_by),
        y_label="score",
    )
    return ReportOutput(
        name, "metric", columns, rows,
        charts={"chart_scores.svg": chart},
        params={"group_by": list(group_by), "metrics": list(metrics), "beam": beam},
    )


def cross_dataset_matrix(
    table: ReportTable,
    metric: str = "bleu",
    name: str = "cross_dataset",
    beam: int | None = None,
) -> ReportOutput:
    """Runs x eval datasets. Cells without a score stay empty."""
    scoped = table.where(metric=metric, beam=beam)
    cells: dict[tuple[str, str], ReportRow] = {}
    warnings = []
    for row in scoped.rows:
        slot = (row.run_id, row.eval_dataset)
        if slot in cells:
            if row.beam < cells[slot].beam:
                cells[slot] = row
            warnings.append(f"{row.run_id} on {row.eval_dataset}: several beams, keeping beam {cells[slot].beam}")
            continue
        cells[slot] = row

    runs = sorted({(r.run_id, r.train_dataset) for r in scoped.rows})
    eval_sets = sorted({r.eval_dataset for r in scoped.rows})
    matrix = [[cells[(run_id, e)].score if (run_id, e) in cells else None for e in eval_sets] for run_id, _ in runs]

    columns = ("run_id", "train_dataset", *eval_sets)
    rows = [
        {"run_id": run_id, "train_dataset": train, **dict(zip(eval_sets, values))}
        for (run_id, train), values in zip(runs, matrix)
    ]
    chart = heatmap(
        f"{metric}: train run x eval dataset",
        [run_id for run_id, _ in runs],
        eval_sets,
        matrix,
        x_label="eval dataset",
        y_label="run",
    )
    return ReportOutput(
        name, "cross_dataset", columns, rows,
        charts={"chart_matrix.svg": chart},
        params={"metric": metric, "beam": beam},
        warnings=sorted(set(warnings)),
    )


def _variable_values(rows: Sequence[ReportRow], variable: str) -> list[tuple[ReportRow, float]]:
    """(row, value) pairs for a metric name or a numeric table column."""
    if variable in REPORT_COLUMNS:
        pairs = [(r, r.value(variable)) for r in rows]
        if any(v is not None and not isinstance(v, (int, float)) for _, v in pairs):
            raise ReportError(f"variable '{variable}' is not numeric")
        return [(r, float(v)) for r, v in pairs if v is not None]
    return [(r, r.score) for r in rows if r.metric == variable]


def multivariable_report(
    table: ReportTable,
    x: str,
    y_series: Sequence[tuple[str, str]],
    series_by: str = "train_dataset",
    name: str = "multivariable",
    beam: int | None = None,
) -> ReportOutput:
    """
    Line chart of each (series_by group, y variable) against a numeric x.
    y_series items are (variable, axis) with axis "primary" or "secondary";
    a variable is a metric name or a numeric column such as tokens_per_sentence.
    """
    _check_dimension(x)
    _check_dimension(series_by)
    scoped = table.where(beam=beam)
    x_values = [r.value(x) for r in scoped.rows]
    if any(v is not None and not isinstance(v, (int, float)) for v in x_values):
        raise ReportError(f"x dimension '{x}' is not numeric")
    warnings = []
    if any(v is None for v in x_values):
        warnings.append(f"rows without a value for '{x}' were left out")

    points: dict[tuple[str, str, str], dict[float, list[float]]] = defaultdict(lambda: defaultdict(list))
    for variable, axis in y_series:
        pairs = _variable_values(scoped.rows, variable)
        if not pairs:
            raise ReportError(f"variable '{variable}' has no values in the table")
        for row, value in pairs:
            xv = row.value(x)
            if xv is not None:
                points[(str(row.value(series_by)), variable, axis)][xv].append(value)

    xs = sorted({xv for series in points.values() for xv in series})
    columns = ("series", "variable", "axis", x, "value")
    rows = []
    chart_series = []
    for group, variable, axis in sorted(points):
        series_points = points[(group, variable, axis)]
        values: list[float | None] = []
        for xv in xs:
            if xv in series_points:
                mean = float(np.mean(series_points[xv]))
                values.append(mean)
                rows.append({"series": f"{group} {variable}", "variable": variable, "axis": axis, x: xv, "value": mean})
            else:
                values.append(None)
        chart_series.append(Series(f"{group} {variable}", values, axis))

    primary = [v for v, a in y_series if a == "primary"]
    secondary = [v for v, a in y_series if a == "secondary"]
    chart = line_chart(
        f"{', '.join(v for v, _ in y_series)} vs {x}",
        xs,
        chart_series,
        x_label=x,
        y_label=", ".join(primary),
        y2_label=", ".join(secondary),
    )
    return ReportOutput(
        name, "multivariable", columns, rows,
        charts={"chart_lines.svg": chart},
        params={"x": x, "y": [{"variable": v, "axis": a} for v, a in y_series], "series_by": series_by, "beam": beam},
        warnings=warnings,
    )


def generate_report(config: ReportConfig, table: ReportTable) -> ReportOutput:
    """Dispatches a configured report to its generator."""
    match config.kind:
        case "metric":
            output = metric_report(table, config.group_by, config.metrics, config.name, config.beam)
        case "cross_dataset":
            output = cross_dataset_matrix(table, config.metrics[0], config.name, config.beam)
        case "multivariable":
            output = multivariable_report(
                table, config.x, [(y.variable, y.axis) for y in config.y], config.series_by, config.name, config.beam
            )
        case "comparison":
            comparison = system_comparison(table, config.system_a, config.system_b, config.metrics[0], config.beam)
            output = comparison_report(config.name, comparison)
        case _:
            raise ReportError(f"unknown report kind '{config.kind}'")
    output.warnings = [*table.warnings, *output.warnings]
    return output
