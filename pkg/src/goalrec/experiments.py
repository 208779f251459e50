"""Experiment drivers: full-dataset evaluation and the two studies.

``run_experiment`` evaluates a dataset of instances against a checkpoint and
writes line-delimited evaluation records plus a comma-separated summary
table. The bucket study breaks accuracy down by difficulty class, the size
study retrains on nested fractions of the training set.
"""
from __future__ import annotations

import hashlib
import random
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

from .checkpoint import load_checkpoint
from .dataset import (
    GRInstance,
    TrainingPair,
    read_dataset,
    recognizability_report,
    dataset_domain_id,
)
from .blocksworld import vocabulary_for_domain
from .domain import DomainVocabulary
from .errors import EmptyInputError, InvalidConfigError, InvalidInstanceError
from .metrics import EvalRecord, MetricsTable, accuracy, group_metrics
from .model import ModelConfig, train
from .nn import ModelParams
from .recognizer import recognize


def goal_set_group_id(goal_set) -> str:
    """Stable identifier for a candidate goal set (order-insensitive)."""
    canon = "|".join(sorted(",".join(sorted(f.label for f in g)) for g in goal_set))
    return hashlib.sha256(canon.encode("utf-8")).hexdigest()[:12]


def evaluate_instances(
    instances: Sequence[GRInstance],
    params: ModelParams,
    vocabulary: DomainVocabulary,
) -> list[EvalRecord]:
    """Recognize every instance and collect evaluation records."""
    records = []
    for position, instance in enumerate(instances):
        result = recognize(instance, params, vocabulary)
        records.append(
            EvalRecord(
                instance_id=f"i{position:06d}",
                observability=instance.trace.observability,
                group_id=goal_set_group_id(instance.goal_set),
                selected_index=result.selected_index,
                hidden_index=instance.hidden_goal_index,
                correct=result.selected_index == instance.hidden_goal_index,
                latency=result.latency,
            )
        )
    return records


def load_instances(path, vocabulary: DomainVocabulary | None = None) -> list[GRInstance]:
    """Read a dataset file and require every record to be an instance."""
    items = read_dataset(path, vocabulary=vocabulary)
    bad = [k for k, item in enumerate(items) if not isinstance(item, GRInstance)]
    if bad:
        raise InvalidInstanceError(
            f"record {bad[0]} of {path} is a training pair, not a recognition instance"
        )
    return items


def load_pairs(path, vocabulary: DomainVocabulary | None = None) -> list[TrainingPair]:
    """Read a dataset file and require every record to be a training pair."""
    items = read_dataset(path, vocabulary=vocabulary)
    bad = [k for k, item in enumerate(items) if not isinstance(item, TrainingPair)]
    if bad:
        raise InvalidInstanceError(
            f"record {bad[0]} of {path} is a recognition instance, not a training pair"
        )
    return items


def summary_path_for(report_path) -> Path:
    return Path(report_path).with_suffix(".summary.csv")


def run_experiment(dataset_path, checkpoint_path, report_path) -> MetricsTable:
    """Evaluate a dataset against a checkpoint and write the reports.

    Writes one JSON record per instance to ``report_path`` and the summary
    table to the sibling ``.summary.csv`` file. The dataset and checkpoint
    must carry the same vocabulary checksum.
    """
    vocabulary = vocabulary_for_domain(dataset_domain_id(dataset_path))
    checkpoint = load_checkpoint(checkpoint_path, vocabulary=vocabulary)
    instances = load_instances(dataset_path, vocabulary=vocabulary)
    if not instances:
        raise EmptyInputError(f"dataset {dataset_path} contains no instances")
    records = evaluate_instances(instances, checkpoint.params, vocabulary)
    table = group_metrics(records)
    with open(report_path, "w", encoding="utf-8") as handle:
        for record in records:
            handle.write(record.to_json() + "\n")
    summary_path_for(report_path).write_text(table.to_csv(), encoding="utf-8")
    return table


@dataclass
class BucketRow:
    bucket: int
    observability: float
    count: int
    accuracy: float


def run_bucket_study(
    instances: Sequence[GRInstance],
    params: ModelParams,
    vocabulary: DomainVocabulary,
) -> list[BucketRow]:
    """Accuracy per difficulty class per observability level.

    Buckets are computed from each instance's recomputed normalised
    recognizability; empty buckets are simply absent from the result.
    """
    records = evaluate_instances(instances, params, vocabulary)
    cells: dict[tuple[int, float], list[EvalRecord]] = {}
    for instance, record in zip(instances, records):
        bucket = recognizability_report(instance).bucket
        cells.setdefault((bucket, record.observability), []).append(record)
    return [
        BucketRow(bucket=b, observability=obs, count=len(rs), accuracy=accuracy(rs))
        for (b, obs), rs in sorted(cells.items())
    ]


def bucket_rows_to_csv(rows: Sequence[BucketRow]) -> str:
    lines = ["bucket,observability,count,accuracy"]
    for row in rows:
        lines.append(f"C{row.bucket},{row.observability:g},{row.count},{row.accuracy:.2f}")
    return "\n".join(lines) + "\n"


@dataclass
class SizeStudyRow:
    fraction: float
    n_pairs: int
    accuracy: float


def run_size_study(
    pairs: Sequence[TrainingPair],
    fractions: Sequence[float],
    test_instances: Sequence[GRInstance],
    config: ModelConfig,
    vocabulary: DomainVocabulary,
) -> list[SizeStudyRow]:
    """Train one model per training-set fraction and evaluate each.

    Subsets are nested: one seeded draw fixes which pairs enter at each
    fraction, and every subset keeps the original pair order, so fraction 1.0
    is exactly the full training set. All runs share the same config seed.
    """
    if not fractions:
        raise InvalidConfigError("size study needs at least one fraction")
    for fraction in fractions:
        if not 0.0 < fraction <= 1.0:
            raise InvalidConfigError(f"fractions must lie in (0, 1], got {fraction}")
    chooser = random.Random(config.rng_seed)
    drawn = chooser.sample(range(len(pairs)), len(pairs))
    rows = []
    for fraction in sorted(fractions):
        count = int(round(fraction * len(pairs)))
        if count < config.batch_size:
            raise InvalidConfigError(
                f"fraction {fraction} keeps {count} pairs, fewer than "
                f"batch_size={config.batch_size}"
            )
        subset = [pairs[k] for k in sorted(drawn[:count])]
        params, _ = train(subset, config, vocabulary)
        records = evaluate_instances(test_instances, params, vocabulary)
        rows.append(SizeStudyRow(fraction=fraction, n_pairs=count, accuracy=accuracy(records)))
    return rows


def size_rows_to_csv(rows: Sequence[SizeStudyRow]) -> str:
    lines = ["fraction,pairs,accuracy"]
    for row in rows:
        lines.append(f"{row.fraction:g},{row.n_pairs},{row.accuracy:.2f}")
    return "\n".join(lines) + "\n"
