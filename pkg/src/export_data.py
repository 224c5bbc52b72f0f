#!/usr/bin/env python3
"""Writers and readers for graph, trace, predictor and ensemble files."""

import csv
import sys
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence, TextIO, Union

# Add src directory to path for imports
sys.path.insert(0, str(Path(__file__).parent))

from analytics import Distribution
from errors import ExportError
from graph_core import MultiGraph
from rules_engine import GrowthTrace
from sim_harness import ComparisonMetrics, EnsembleStats

PathOrStream = Union[str, Path, TextIO]

ENSEMBLE_COLUMNS = ["degree", "min", "q1", "median", "q3", "max", "mean"]
COMPARISON_COLUMNS = ["predictor", "tv", "max_abs_dev", "mean_emp", "mean_pred"]


def format_float(value: Optional[float]) -> str:
    """17 significant digits; empty for a missing value."""
    if value is None:
        return ""
    return f"{float(value):.17g}"


def _write_rows(target: PathOrStream, header: Sequence[str], rows: Iterable[Sequence]) -> None:
    if isinstance(target, (str, Path)):
        path = Path(target)
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", newline="", encoding="utf-8") as f:
            _write_rows(f, header, rows)
        return
    writer = csv.writer(target, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)


def write_edgelist_csv(g: MultiGraph, target: PathOrStream) -> None:
    _write_rows(target, ["u", "v"], g.edges)


def read_edgelist_csv(path: Union[str, Path], n: Optional[int] = None) -> MultiGraph:
    """Edge list written by write_edgelist_csv; vertex ids are kept as written."""
    edges = []
    with open(path, newline="", encoding="utf-8") as f:
        reader = csv.DictReader(f)
        if reader.fieldnames != ["u", "v"]:
            raise ExportError(f"{path}: expected header u,v, got {reader.fieldnames}")
        for row in reader:
            try:
                edges.append((int(row["u"]), int(row["v"])))
            except (TypeError, ValueError):
                raise ExportError(f"{path}:{reader.line_num}: bad edge row {row}") from None
    order = max((max(u, v) for u, v in edges), default=-1) + 1
    if n is not None:
        if n < order:
            raise ExportError(f"{path}: edges use vertex {order - 1} but n={n}")
        order = n
    allow_loops = any(u == v for u, v in edges)
    return MultiGraph(order, edges, allow_loops=allow_loops)


def write_pajek(g: MultiGraph, target: PathOrStream) -> None:
    """Pajek .net text: 1-based vertex lines `i "vi"` then one line per edge."""
    lines = [f"*Vertices {g.n}"]
    lines.extend(f'{i} "v{i}"' for i in range(1, g.n + 1))
    lines.append("*Edges")
    lines.extend(f"{u + 1} {v + 1}" for u, v in g.edges)
    text = "\n".join(lines) + "\n"
    if isinstance(target, (str, Path)):
        Path(target).parent.mkdir(parents=True, exist_ok=True)
        Path(target).write_text(text, encoding="utf-8")
    else:
        target.write(text)


def write_trace_csv(trace: GrowthTrace, target: PathOrStream) -> None:
    rows = ((record.t, record.rule, str(record.left), record.dn, record.dm) for record in trace.steps)
    _write_rows(target, ["t", "rule", "left", "dn", "dm"], rows)


def write_distribution_csv(dist: Distribution, target: PathOrStream, label: str = "d") -> None:
    rows = ((int(value), format_float(p)) for value, p in zip(dist.support, dist.probs))
    _write_rows(target, [label, "p"], rows)


def write_predictor_table(target: PathOrStream, label: str, columns: Dict[str, Optional[Distribution]]) -> None:
    """One row per support value with a column per predictor (empty where a predictor is absent)."""
    present = [dist for dist in columns.values() if dist is not None and len(dist.probs)]
    if present:
        low = min(dist.offset for dist in present)
        high = max(dist.offset + len(dist.probs) - 1 for dist in present)
    else:
        low, high = 0, -1
    rows = []
    for value in range(low, high + 1):
        rows.append([value] + [format_float(dist.pmf(value)) if dist is not None else ""
                               for dist in columns.values()])
    _write_rows(target, [label] + list(columns), rows)


def write_rates_csv(target: PathOrStream, values: Dict[str, float]) -> None:
    _write_rows(target, ["quantity", "value"], ((name, format_float(v)) for name, v in values.items()))


def write_ensemble_csv(stats: EnsembleStats, target: PathOrStream) -> None:
    rows = ((row.degree, format_float(row.minimum), format_float(row.q1), format_float(row.median),
             format_float(row.q3), format_float(row.maximum), format_float(row.mean))
            for row in stats.degrees)
    _write_rows(target, ENSEMBLE_COLUMNS, rows)


def write_comparison_csv(metrics: List[ComparisonMetrics], target: PathOrStream) -> None:
    rows = ((m.predictor, format_float(m.tv), format_float(m.max_abs_dev), format_float(m.mean_emp),
             format_float(m.mean_pred)) for m in metrics)
    _write_rows(target, COMPARISON_COLUMNS, rows)


def read_distribution_csv(path: Union[str, Path], column: Optional[str] = None) -> Distribution:
    """Distribution from a CSV whose first column is the support value.

    Uses `column` if given, else `mean` when present (ensemble reports), else the second column.
    Empty cells count as zero.
    """
    with open(path, newline="", encoding="utf-8") as f:
        reader = csv.reader(f)
        try:
            header = next(reader)
        except StopIteration:
            raise ExportError(f"{path}: empty file") from None
        if len(header) < 2:
            raise ExportError(f"{path}: need a support column and a probability column")
        if column is None:
            column = "mean" if "mean" in header else header[1]
        if column not in header:
            raise ExportError(f"{path}: no column {column!r} in {header}")
        index = header.index(column)

        mapping: Dict[int, float] = {}
        for line_number, row in enumerate(reader, start=2):
            if not row:
                continue
            try:
                value = int(row[0])
                cell = row[index].strip() if index < len(row) else ""
                mapping[value] = mapping.get(value, 0.0) + (float(cell) if cell else 0.0)
            except ValueError:
                raise ExportError(f"{path}:{line_number}: not a number in {row}") from None
    return Distribution.from_dict(mapping)
