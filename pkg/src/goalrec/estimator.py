"""Scikit-learn style facade over the trace classifier.

``GoalRecognizer`` wraps training and recognition behind the familiar
fit / predict / predict_proba surface so the model composes with pipelines,
parameter search, and cloning. Samples are variable-length sequences of
action labels; fitting is multi-label over the fluent vocabulary, while
prediction selects among per-sample candidate goal sets.
"""
from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .blocksworld import build_blocksworld_vocabulary
from .checkpoint import Checkpoint, load_checkpoint, save_checkpoint
from .dataset import ObservationTrace, TrainingPair
from .domain import DomainVocabulary
from .errors import EmptyInputError, InvalidConfigError
from .model import ModelConfig, TrainReport, encode_trace, forward, train
from .recognizer import select_goal


def _check_traces(X) -> list[tuple[str, ...]]:
    """Validate that X is a non-empty sequence of non-empty label sequences."""
    if X is None or len(X) == 0:
        raise EmptyInputError("X must contain at least one trace")
    traces = []
    for k, trace in enumerate(X):
        labels = tuple(trace)
        if len(labels) == 0:
            raise EmptyInputError(f"trace {k} is empty")
        if not all(isinstance(label, str) for label in labels):
            raise TypeError(f"trace {k} must contain action labels (strings)")
        traces.append(labels)
    return traces


def _check_goals(y, n_expected: int):
    if y is None or len(y) != n_expected:
        raise ValueError(f"y must provide one goal per trace ({n_expected})")
    goals = [frozenset(goal) for goal in y]
    for k, goal in enumerate(goals):
        if not goal:
            raise ValueError(f"goal {k} is empty")
    return goals


def _check_candidates(candidate_goals, n_expected: int):
    if candidate_goals is None or len(candidate_goals) != n_expected:
        raise ValueError(
            f"candidate_goals must provide one goal set per trace ({n_expected})"
        )
    return [[frozenset(goal) for goal in goal_set] for goal_set in candidate_goals]


class GoalRecognizer(BaseEstimator):
    """Recognise which candidate goal an observed action trace is pursuing.

    Parameters
    ----------
    vocabulary : DomainVocabulary, optional
        Fluent/action coordinate system. Either this or ``n_blocks`` must be
        given before fit.
    n_blocks : int, optional
        Convenience: build the Blocksworld vocabulary of this size at fit time.
    embedding_dim, hidden_size, dropout, recurrent_dropout, batch_size,
    learning_rate, epochs, validation_fraction : training hyperparameters.
    random_state : int
        Seed controlling initialisation, shuffling and dropout.

    Attributes
    ----------
    params_ : trained model parameters (after fit).
    vocabulary_ : the resolved vocabulary (after fit).
    report_ : TrainReport of the fitting run.
    """

    def __init__(
        self,
        vocabulary: DomainVocabulary | None = None,
        n_blocks: int | None = None,
        embedding_dim: int = 64,
        hidden_size: int = 128,
        dropout: float = 0.0,
        recurrent_dropout: float = 0.0,
        batch_size: int = 64,
        learning_rate: float = 1e-3,
        epochs: int = 30,
        validation_fraction: float = 0.2,
        random_state: int = 0,
    ):
        self.vocabulary = vocabulary
        self.n_blocks = n_blocks
        self.embedding_dim = embedding_dim
        self.hidden_size = hidden_size
        self.dropout = dropout
        self.recurrent_dropout = recurrent_dropout
        self.batch_size = batch_size
        self.learning_rate = learning_rate
        self.epochs = epochs
        self.validation_fraction = validation_fraction
        self.random_state = random_state

    def _config(self) -> ModelConfig:
        return ModelConfig(
            embedding_dim=self.embedding_dim,
            hidden_size=self.hidden_size,
            dropout=self.dropout,
            recurrent_dropout=self.recurrent_dropout,
            batch_size=self.batch_size,
            learning_rate=self.learning_rate,
            epochs=self.epochs,
            validation_fraction=self.validation_fraction,
            rng_seed=self.random_state,
        )

    def _resolve_vocabulary(self) -> DomainVocabulary:
        if self.vocabulary is not None:
            return self.vocabulary
        if self.n_blocks is not None:
            return build_blocksworld_vocabulary(self.n_blocks)
        raise InvalidConfigError("provide either vocabulary or n_blocks")

    def fit(self, X, y) -> "GoalRecognizer":
        """Fit on traces ``X`` (sequences of action labels) and goals ``y``
        (iterables of fluents). Returns self."""
        traces = _check_traces(X)
        goals = _check_goals(y, len(traces))
        vocabulary = self._resolve_vocabulary()
        pairs = [
            TrainingPair(
                trace=ObservationTrace(
                    labels=labels, source_plan_len=len(labels), observability=1.0
                ),
                hidden_goal=goal,
            )
            for labels, goal in zip(traces, goals)
        ]
        params, report = train(pairs, self._config(), vocabulary)
        self.vocabulary_ = vocabulary
        self.params_ = params
        self.report_ = report
        return self

    def predict_proba(self, X) -> np.ndarray:
        """Per-fluent goal probabilities, shape (n_samples, n_fluents)."""
        check_is_fitted(self, "params_")
        traces = _check_traces(X)
        return np.stack(
            [forward(encode_trace(t, self.vocabulary_), self.params_) for t in traces]
        )

    def score_candidates(self, X, candidate_goals) -> list[np.ndarray]:
        """Per-sample arrays of candidate-goal scores."""
        check_is_fitted(self, "params_")
        traces = _check_traces(X)
        goal_sets = _check_candidates(candidate_goals, len(traces))
        probs = self.predict_proba(traces)
        return [
            select_goal(goal_set, row, self.vocabulary_).scores
            for goal_set, row in zip(goal_sets, probs)
        ]

    def predict(self, X, candidate_goals) -> np.ndarray:
        """Index of the selected goal within each sample's candidate set."""
        check_is_fitted(self, "params_")
        traces = _check_traces(X)
        goal_sets = _check_candidates(candidate_goals, len(traces))
        probs = self.predict_proba(traces)
        return np.array(
            [
                select_goal(goal_set, row, self.vocabulary_).selected_index
                for goal_set, row in zip(goal_sets, probs)
            ],
            dtype=np.int64,
        )

    def score(self, X, y, candidate_goals) -> float:
        """Mean selection accuracy against hidden goal indices ``y``."""
        predicted = self.predict(X, candidate_goals)
        truth = np.asarray(list(y), dtype=np.int64)
        if truth.shape != predicted.shape:
            raise ValueError("y must provide one hidden goal index per trace")
        return float(np.mean(predicted == truth))

    def save(self, path) -> None:
        """Persist the fitted model as a checkpoint."""
        check_is_fitted(self, "params_")
        save_checkpoint(
            path,
            Checkpoint(
                config=self._config(),
                vocab_checksum=self.vocabulary_.checksum,
                params=self.params_,
                history=list(self.report_.history),
            ),
        )

    @classmethod
    def from_checkpoint(cls, path, vocabulary: DomainVocabulary) -> "GoalRecognizer":
        """Rebuild a fitted recognizer from a checkpoint file."""
        checkpoint = load_checkpoint(path, vocabulary=vocabulary)
        config = checkpoint.config
        est = cls(
            vocabulary=vocabulary,
            embedding_dim=config.embedding_dim,
            hidden_size=config.hidden_size,
            dropout=config.dropout,
            recurrent_dropout=config.recurrent_dropout,
            batch_size=config.batch_size,
            learning_rate=config.learning_rate,
            epochs=config.epochs,
            validation_fraction=config.validation_fraction,
            random_state=config.rng_seed,
        )
        est.vocabulary_ = vocabulary
        est.params_ = checkpoint.params
        est.report_ = TrainReport(
            epochs_run=len(checkpoint.history),
            final_train_loss=checkpoint.history[-1][0] if checkpoint.history else 0.0,
            final_validation_loss=checkpoint.history[-1][1] if checkpoint.history else 0.0,
            wall_seconds=0.0,
            history=list(checkpoint.history),
        )
        return est
