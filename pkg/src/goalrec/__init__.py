"""Goal recognition from partial action traces.

A trained sequence classifier maps a trace of observed action labels to
per-fluent goal probabilities; a scoring layer then selects the most likely
goal from a candidate set. The package also ships the Blocksworld machinery
used to synthesise training pairs and evaluation instances, plus an
experiment harness and CLI.
"""

from . import errors
from .blocksworld import (
    build_blocksworld_vocabulary,
    check_goal_consistency,
    generate_plan,
    random_goal,
    random_state,
    vocabulary_for_domain,
)
from .checkpoint import Checkpoint, load_checkpoint, save_checkpoint
from .dataset import (
    GRInstance,
    ObservationTrace,
    RecognizabilityReport,
    TrainingPair,
    bucket_instances,
    bucket_of,
    generate_goal_set,
    generate_instances,
    generate_training_pairs,
    make_training_pair,
    normalized_recognizability,
    read_dataset,
    recognizability,
    recognizability_report,
    sample_observations,
    write_dataset,
)
from .domain import (
    DomainVocabulary,
    Fluent,
    GroundedAction,
    apply_action,
    is_goal_satisfied,
    simulate_plan,
)
from .estimator import GoalRecognizer
from .experiments import (
    evaluate_instances,
    run_bucket_study,
    run_experiment,
    run_size_study,
)
from .metrics import EvalRecord, MetricsTable, accuracy, group_metrics
from .model import (
    ModelConfig,
    ModelParams,
    TrainReport,
    encode_trace,
    forward,
    full_scale_blocksworld_config,
    init_params,
    target_vector,
    train,
)
from .recognizer import RecognitionResult, recognize, score_goal, select_goal

__version__ = "0.1.0"

__all__ = [
    "Checkpoint",
    "DomainVocabulary",
    "EvalRecord",
    "Fluent",
    "GRInstance",
    "GoalRecognizer",
    "GroundedAction",
    "MetricsTable",
    "ModelConfig",
    "ModelParams",
    "ObservationTrace",
    "RecognitionResult",
    "RecognizabilityReport",
    "TrainReport",
    "TrainingPair",
    "accuracy",
    "apply_action",
    "bucket_instances",
    "bucket_of",
    "build_blocksworld_vocabulary",
    "check_goal_consistency",
    "encode_trace",
    "errors",
    "evaluate_instances",
    "forward",
    "full_scale_blocksworld_config",
    "generate_goal_set",
    "generate_instances",
    "generate_plan",
    "generate_training_pairs",
    "group_metrics",
    "init_params",
    "is_goal_satisfied",
    "load_checkpoint",
    "make_training_pair",
    "normalized_recognizability",
    "random_goal",
    "random_state",
    "read_dataset",
    "recognizability",
    "recognizability_report",
    "recognize",
    "run_bucket_study",
    "run_experiment",
    "run_size_study",
    "sample_observations",
    "save_checkpoint",
    "score_goal",
    "select_goal",
    "simulate_plan",
    "target_vector",
    "train",
    "vocabulary_for_domain",
    "write_dataset",
]
