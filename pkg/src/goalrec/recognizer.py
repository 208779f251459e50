"""Goal selection from a prediction vector.

Each candidate goal is scored by summing the predicted probabilities of its
fluents; the goal with the highest score wins, ties going to the lowest
index. An optional mean-normalised score (sum divided by goal size) is
available for candidate sets of very uneven sizes, but the raw sum is the
contractual default.
"""
from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .dataset import GRInstance
from .domain import DomainVocabulary
from .errors import EmptyInputError
from .model import encode_trace, forward
from .nn import ModelParams


@dataclass
class RecognitionResult:
    """Outcome of scoring one instance."""

    selected_index: int
    scores: np.ndarray  # one score per candidate goal
    prediction: np.ndarray  # per-fluent probabilities
    latency: float  # seconds

    @property
    def selected_score(self) -> float:
        return float(self.scores[self.selected_index])


def score_goal(
    goal: Iterable,
    preds: np.ndarray,
    vocabulary: DomainVocabulary,
    normalize: bool = False,
) -> float:
    """Sum of the prediction components at the goal's fluent positions."""
    goal = list(goal)
    total = float(sum(preds[vocabulary.fluent_position(f)] for f in goal))
    if normalize:
        return total / len(goal) if goal else 0.0
    return total


def select_goal(
    goal_set: Sequence,
    preds: np.ndarray,
    vocabulary: DomainVocabulary,
    normalize: bool = False,
) -> RecognitionResult:
    """Pick the highest-scoring candidate goal (lowest index on ties)."""
    if len(goal_set) == 0:
        raise EmptyInputError("cannot select a goal from an empty candidate set")
    started = time.perf_counter()
    scores = np.array(
        [score_goal(goal, preds, vocabulary, normalize=normalize) for goal in goal_set]
    )
    selected = int(np.argmax(scores))  # argmax returns the first maximum
    return RecognitionResult(
        selected_index=selected,
        scores=scores,
        prediction=preds,
        latency=time.perf_counter() - started,
    )


def recognize(
    instance: GRInstance,
    params: ModelParams,
    vocabulary: DomainVocabulary,
    normalize: bool = False,
) -> RecognitionResult:
    """Full pipeline on one instance: encode, forward, select.

    The reported latency is wall-clock around the whole pipeline, excluding
    any model loading.
    """
    started = time.perf_counter()
    indices = encode_trace(instance.trace, vocabulary)
    preds = forward(indices, params)
    result = select_goal(instance.goal_set, preds, vocabulary, normalize=normalize)
    result.latency = time.perf_counter() - started
    return result
