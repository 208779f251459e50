"""Evaluation records and aggregate metrics.

All rate metrics use the percent convention (0..100). Precision, recall and
F1 are computed per goal-set group: within one group the selection task is a
multi-class problem over that group's candidate goals, macro-averaged over
the classes that were ever predicted or ever true; the reported value is the
mean across groups. Latency statistics are in seconds (population standard
deviation).
"""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import EmptyInputError

PERCENT = 100.0


@dataclass(frozen=True)
class EvalRecord:
    """One evaluated instance."""

    instance_id: str
    observability: float
    group_id: str
    selected_index: int
    hidden_index: int
    correct: bool
    latency: float

    def __post_init__(self):
        if self.correct != (self.selected_index == self.hidden_index):
            raise ValueError("correct flag contradicts the selected/hidden indices")

    def to_json(self) -> str:
        return json.dumps(asdict(self))

    @classmethod
    def from_json(cls, text: str) -> "EvalRecord":
        return cls(**json.loads(text))


def accuracy(records: Sequence[EvalRecord]) -> float:
    """Percentage of records whose selected goal equals the hidden goal."""
    if len(records) == 0:
        raise EmptyInputError("accuracy needs at least one record")
    return PERCENT * sum(r.correct for r in records) / len(records)


def _group_macro_prf(records: Sequence[EvalRecord]) -> tuple[float, float, float]:
    """Macro precision/recall/F1 (percent) over one goal-set group."""
    classes = sorted({r.selected_index for r in records} | {r.hidden_index for r in records})
    precisions, recalls, f1s = [], [], []
    for cls in classes:
        tp = sum(1 for r in records if r.selected_index == cls and r.hidden_index == cls)
        fp = sum(1 for r in records if r.selected_index == cls and r.hidden_index != cls)
        fn = sum(1 for r in records if r.selected_index != cls and r.hidden_index == cls)
        precision = tp / (tp + fp) if tp + fp else 0.0
        recall = tp / (tp + fn) if tp + fn else 0.0
        f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
        precisions.append(precision)
        recalls.append(recall)
        f1s.append(f1)
    return (
        PERCENT * float(np.mean(precisions)),
        PERCENT * float(np.mean(recalls)),
        PERCENT * float(np.mean(f1s)),
    )


@dataclass
class MetricsRow:
    """Aggregates for one observability level (or the pooled 'all' row)."""

    observability: float | None  # None = all records pooled
    count: int
    accuracy: float
    precision: float
    recall: float
    f1: float
    latency_mean: float
    latency_std: float

    @property
    def label(self) -> str:
        return "all" if self.observability is None else f"{self.observability:g}"


@dataclass
class MetricsTable:
    rows: list[MetricsRow] = field(default_factory=list)

    CSV_HEADER = "observability,count,accuracy,precision,recall,f1,latency_mean_ms,latency_std_ms"

    def row_for(self, observability: float | None) -> MetricsRow:
        for row in self.rows:
            if row.observability == observability:
                return row
        raise KeyError(f"no metrics row for observability {observability!r}")

    def to_csv(self) -> str:
        lines = [self.CSV_HEADER]
        for row in self.rows:
            lines.append(
                f"{row.label},{row.count},{row.accuracy:.2f},{row.precision:.2f},"
                f"{row.recall:.2f},{row.f1:.2f},"
                f"{row.latency_mean * 1000.0:.3f},{row.latency_std * 1000.0:.3f}"
            )
        return "\n".join(lines) + "\n"

    def __str__(self) -> str:
        return self.to_csv()


def _aggregate(records: Sequence[EvalRecord], observability: float | None) -> MetricsRow:
    groups: dict[str, list[EvalRecord]] = {}
    for record in records:
        groups.setdefault(record.group_id, []).append(record)
    per_group = [_group_macro_prf(members) for _, members in sorted(groups.items())]
    latencies = np.array([r.latency for r in records])
    return MetricsRow(
        observability=observability,
        count=len(records),
        accuracy=accuracy(records),
        precision=float(np.mean([p for p, _, _ in per_group])),
        recall=float(np.mean([r for _, r, _ in per_group])),
        f1=float(np.mean([f for _, _, f in per_group])),
        latency_mean=float(latencies.mean()),
        latency_std=float(latencies.std()),
    )


def group_metrics(records: Iterable[EvalRecord]) -> MetricsTable:
    """Metrics per observability level plus a pooled 'all' row.

    Results are independent of record order: records are regrouped by
    observability and group id before aggregation.
    """
    records = list(records)
    if not records:
        raise EmptyInputError("group_metrics needs at least one record")
    levels = sorted({r.observability for r in records})
    table = MetricsTable()
    for level in levels:
        subset = [r for r in records if r.observability == level]
        table.rows.append(_aggregate(subset, level))
    table.rows.append(_aggregate(records, None))
    return table
