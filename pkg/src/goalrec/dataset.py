"""Training pairs and recognition instances synthesised from generated plans.

A training pair is an observation trace plus the hidden goal it was sampled
for. A recognition instance additionally carries the candidate goal set the
recognizer must choose from. Both serialise to line-delimited JSON records
with a fixed field order; records with a single candidate goal read back as
training pairs, records with two or more as instances.

Recognizability of a hidden goal measures how discernible it is inside its
candidate set: each goal fluent contributes the reciprocal of the number of
candidate goals containing it. The normalised form rescales that sum onto
[0, 1] over its attainable range and drives the difficulty classes C1..C9.
"""
from __future__ import annotations

import json
import math
import random
from dataclasses import dataclass
from typing import Iterable, Sequence

from .blocksworld import (
    GOAL_PREDICATES,
    check_goal_consistency,
    generate_plan,
    n_blocks_of,
    random_goal,
    random_state,
    vocabulary_for_domain,
)
from .domain import DomainVocabulary, Fluent, GroundedAction
from .errors import (
    DatasetParseError,
    DegenerateGoalError,
    DegenerateNormalizationError,
    EmptyInputError,
    GenerationError,
    IncompatibilityError,
    InvalidInstanceError,
    UnsatisfiableGoalError,
)

SCHEMA_VERSION = 1

# desk-scale defaults: small enough to train on a laptop in minutes
DESK_SCALE = dict(n_blocks=7, n_pairs=5000, goal_size=(2, 4), goal_set_size=(5, 10))
# the full-scale preset mirrors the published benchmark configuration
FULL_SCALE_BLOCKSWORLD = dict(
    n_blocks=22, n_pairs=55000, goal_size=(4, 16), goal_set_size=(19, 21)
)


@dataclass(frozen=True)
class ObservationTrace:
    """An order-preserving selection of action labels from a source plan."""

    labels: tuple[str, ...]
    source_plan_len: int
    observability: float

    def __post_init__(self):
        if not 0.0 < self.observability <= 1.0:
            raise InvalidInstanceError(
                f"observability must lie in (0, 1], got {self.observability}"
            )
        expected = observed_count(self.observability, self.source_plan_len)
        if len(self.labels) != expected:
            raise InvalidInstanceError(
                f"trace has {len(self.labels)} labels, expected "
                f"{expected} for observability {self.observability} "
                f"of a {self.source_plan_len}-action plan"
            )

    def __len__(self) -> int:
        return len(self.labels)


@dataclass(frozen=True)
class TrainingPair:
    """One supervised example: a trace and the goal the traced plan achieved."""

    trace: ObservationTrace
    hidden_goal: frozenset[Fluent]
    seed: int | None = None

    def __post_init__(self):
        if not self.hidden_goal:
            raise InvalidInstanceError("training pairs need a non-empty hidden goal")


@dataclass(frozen=True)
class GRInstance:
    """One recognition problem: a trace, candidate goals, and the hidden index."""

    trace: ObservationTrace
    goal_set: tuple[frozenset[Fluent], ...]
    hidden_goal_index: int
    seed: int | None = None

    def __post_init__(self):
        if len(self.goal_set) < 2:
            raise InvalidInstanceError("recognition instances need at least two goals")
        if len(set(self.goal_set)) != len(self.goal_set):
            raise InvalidInstanceError("candidate goals must be pairwise distinct")
        if not 0 <= self.hidden_goal_index < len(self.goal_set):
            raise InvalidInstanceError(
                f"hidden goal index {self.hidden_goal_index} out of range"
            )

    @property
    def hidden_goal(self) -> frozenset[Fluent]:
        return self.goal_set[self.hidden_goal_index]


@dataclass(frozen=True)
class RecognizabilityReport:
    """Raw and normalised recognizability plus the difficulty class."""

    raw: float
    normalized: float
    bucket: int


def observed_count(observability: float, plan_len: int) -> int:
    """Number of observed actions: round-half-up of the fraction, at least 1."""
    return max(1, int(math.floor(observability * plan_len + 0.5)))


def sample_observations(
    plan: Sequence, observability: float, rng_seed
) -> ObservationTrace:
    """Randomly select actions from a plan, preserving their relative order."""
    if len(plan) == 0:
        raise EmptyInputError("cannot sample observations from an empty plan")
    if not 0.0 < observability <= 1.0:
        raise InvalidInstanceError(
            f"observability must lie in (0, 1], got {observability}"
        )
    labels = [a.label if isinstance(a, GroundedAction) else str(a) for a in plan]
    rng = rng_seed if isinstance(rng_seed, random.Random) else random.Random(rng_seed)
    count = observed_count(observability, len(labels))
    positions = sorted(rng.sample(range(len(labels)), count))
    return ObservationTrace(
        labels=tuple(labels[k] for k in positions),
        source_plan_len=len(labels),
        observability=observability,
    )


def make_training_pair(
    init: frozenset, goal: Iterable[Fluent], observability: float, rng_seed
) -> TrainingPair:
    """Plan from ``init`` to ``goal`` and sample a trace from the plan.

    A goal already satisfied by ``init`` is rejected with DegenerateGoalError:
    its empty plan carries no learning signal, so callers resample instead.
    """
    goal = frozenset(goal)
    if not goal:
        raise InvalidInstanceError("training pairs need a non-empty hidden goal")
    rng = random.Random(rng_seed) if not isinstance(rng_seed, random.Random) else rng_seed
    plan_seed = rng.getrandbits(32)
    trace_seed = rng.getrandbits(32)
    plan = generate_plan(init, goal, plan_seed)
    if not plan:
        raise DegenerateGoalError("goal already satisfied by the initial state")
    trace = sample_observations(plan, observability, trace_seed)
    seed = rng_seed if isinstance(rng_seed, int) else None
    return TrainingPair(trace=trace, hidden_goal=goal, seed=seed)


def _goal_candidate_pool(vocab: DomainVocabulary, exclude: frozenset[Fluent]) -> list[Fluent]:
    return sorted(
        f for f in vocab.fluents if f.predicate in GOAL_PREDICATES and f not in exclude
    )


def generate_goal_set(
    hidden: Iterable[Fluent],
    m: int,
    overlap: float,
    vocabulary: DomainVocabulary,
    rng_seed,
    max_tries: int = 200,
) -> list[frozenset[Fluent]]:
    """``m`` distinct consistent goals including ``hidden``.

    All distractors share one common core of about ``overlap * |hidden|``
    fluents drawn from the hidden goal and contain no other hidden fluent,
    which steers the hidden goal's normalised recognizability towards
    ``1 - overlap``. Distractor sizes match the hidden goal's up to one
    fluent. The returned order is shuffled.
    """
    hidden = frozenset(hidden)
    if not hidden:
        raise InvalidInstanceError("the hidden goal must be non-empty")
    if m < 2:
        raise InvalidInstanceError(f"a goal set needs at least two goals, got m={m}")
    if not 0.0 <= overlap <= 1.0:
        raise InvalidInstanceError(f"overlap must lie in [0, 1], got {overlap}")
    check_goal_consistency(hidden)
    for f in hidden:
        vocabulary.fluent_id(f)

    rng = rng_seed if isinstance(rng_seed, random.Random) else random.Random(rng_seed)
    shared_count = int(math.floor(overlap * len(hidden) + 0.5))
    shared = frozenset(rng.sample(sorted(hidden), shared_count))
    pool = _goal_candidate_pool(vocabulary, exclude=hidden)

    goals: list[frozenset[Fluent]] = [hidden]
    for _ in range(m - 1):
        target_size = len(hidden) + rng.choice((-1, 0, 1))
        target_size = max(1, shared_count + 1 if target_size <= shared_count else target_size)
        distractor = None
        for _ in range(max_tries):
            candidate = set(shared)
            for f in rng.sample(pool, len(pool)):
                if len(candidate) >= target_size:
                    break
                candidate.add(f)
                try:
                    check_goal_consistency(candidate)
                except UnsatisfiableGoalError:
                    candidate.discard(f)
            frozen = frozenset(candidate)
            if len(frozen) == target_size and frozen not in goals:
                distractor = frozen
                break
        if distractor is None:
            raise GenerationError(
                f"could not build {m} distinct goals of size about {len(hidden)} "
                f"with overlap {overlap} in this vocabulary"
            )
        goals.append(distractor)
    rng.shuffle(goals)
    return goals


def recognizability(goal: Iterable[Fluent], goal_set: Sequence[Iterable[Fluent]]) -> float:
    """Sum over the goal's fluents of 1 / (number of candidate goals containing it)."""
    goal = frozenset(goal)
    sets = [frozenset(g) for g in goal_set]
    if goal not in sets:
        raise InvalidInstanceError("the goal must be a member of the candidate set")
    return float(sum(1.0 / sum(1 for g in sets if f in g) for f in goal))


def normalized_recognizability(
    goal: Iterable[Fluent], goal_set: Sequence[Iterable[Fluent]]
) -> float:
    """Recognizability rescaled onto [0, 1] over its attainable range.

    Raw values range from |G|/m (every fluent shared by all m goals) to |G|
    (no fluent shared), so the affine rescaling is (R - |G|/m) / (|G| - |G|/m),
    clamped against floating-point drift.
    """
    m = len(goal_set)
    if m < 2:
        raise DegenerateNormalizationError(
            "normalised recognizability needs at least two candidate goals"
        )
    goal = frozenset(goal)
    raw = recognizability(goal, goal_set)
    low = len(goal) / m
    value = (raw - low) / (len(goal) - low)
    return min(1.0, max(0.0, value))


def bucket_of(normalized: float) -> int:
    """Difficulty class C1..C9: class i covers 0.1*i <= R_Z < 0.1*(i+1),
    with values below 0.1 in C1 and 1.0 in C9."""
    return min(9, max(1, int(math.floor(normalized * 10.0 + 1e-9))))


def recognizability_report(instance: GRInstance) -> RecognizabilityReport:
    raw = recognizability(instance.hidden_goal, instance.goal_set)
    normalized = normalized_recognizability(instance.hidden_goal, instance.goal_set)
    return RecognizabilityReport(raw=raw, normalized=normalized, bucket=bucket_of(normalized))


def bucket_instances(instances: Iterable[GRInstance]) -> dict[int, list[GRInstance]]:
    """Group instances by the difficulty class of their hidden goal."""
    buckets: dict[int, list[GRInstance]] = {}
    for instance in instances:
        buckets.setdefault(recognizability_report(instance).bucket, []).append(instance)
    return buckets


# ---------------------------------------------------------------------------
# dataset generators


def _resolve_observability(setting, rng: random.Random) -> float:
    if isinstance(setting, (int, float)):
        return float(setting)
    if isinstance(setting, tuple) and len(setting) == 2:
        return rng.uniform(float(setting[0]), float(setting[1]))
    return float(rng.choice(list(setting)))


def generate_training_pairs(
    vocabulary: DomainVocabulary,
    count: int,
    goal_size=(2, 4),
    observability=(0.3, 0.7),
    rng_seed=0,
) -> list[TrainingPair]:
    """Sample ``count`` pairs from random initial states and random goals.

    ``observability`` is a single ratio, a (low, high) tuple sampled
    uniformly, or a list of levels sampled with equal probability. Goals
    whose plan would be empty are resampled.
    """
    n_blocks = n_blocks_of(vocabulary.domain_id)
    rng = random.Random(rng_seed)
    pairs: list[TrainingPair] = []
    attempts = 0
    while len(pairs) < count:
        attempts += 1
        if attempts > 50 * count + 100:
            raise GenerationError("too many degenerate samples while generating pairs")
        item_seed = rng.getrandbits(48)
        item_rng = random.Random(item_seed)
        size = item_rng.randint(goal_size[0], min(goal_size[1], n_blocks))
        goal = random_goal(n_blocks, size, item_rng)
        init = random_state(n_blocks, item_rng)
        ratio = _resolve_observability(observability, item_rng)
        try:
            pair = make_training_pair(init, goal, ratio, item_rng)
        except DegenerateGoalError:
            continue
        pairs.append(TrainingPair(pair.trace, pair.hidden_goal, seed=item_seed))
    return pairs


def generate_instances(
    vocabulary: DomainVocabulary,
    n_groups: int,
    per_group: int = 3,
    observabilities: Sequence[float] = (0.3, 0.5, 0.7),
    goal_size=(2, 4),
    goal_set_size=(5, 10),
    overlap="random",
    hidden_mode: str = "uniform",
    rng_seed=0,
) -> list[GRInstance]:
    """Recognition instances organised in goal-set groups.

    Each group fixes one candidate goal set, built around an anchor goal with
    the requested fluent overlap; ``overlap`` is a ratio, the string
    ``"random"`` (uniform per group) or ``"sweep"`` (cycled over a fixed grid
    so every difficulty class gets populated). Each of the ``per_group`` base
    problems draws an initial state and plan for the hidden goal, then emits
    one instance per observability level. ``hidden_mode`` is ``"uniform"``
    (hidden goal drawn from the set per base problem) or ``"anchor"`` (always
    the anchor the set was built around).
    """
    if hidden_mode not in ("uniform", "anchor"):
        raise InvalidInstanceError(f"unknown hidden_mode {hidden_mode!r}")
    sweep = (0.0, 0.25, 0.5, 0.75, 1.0)
    n_blocks = n_blocks_of(vocabulary.domain_id)
    rng = random.Random(rng_seed)
    instances: list[GRInstance] = []
    for group in range(n_groups):
        goal_set = None
        for _ in range(50):
            group_rng = random.Random(rng.getrandbits(48))
            size = group_rng.randint(goal_size[0], min(goal_size[1], n_blocks))
            anchor = random_goal(n_blocks, size, group_rng)
            m = group_rng.randint(goal_set_size[0], goal_set_size[1])
            if overlap == "random":
                ratio = group_rng.uniform(0.0, 1.0)
            elif overlap == "sweep":
                ratio = sweep[group % len(sweep)]
            else:
                ratio = float(overlap)
            try:
                goal_set = generate_goal_set(anchor, m, ratio, vocabulary, group_rng)
                break
            except GenerationError:
                continue
        if goal_set is None:
            raise GenerationError(f"could not build a goal set for group {group}")
        anchor_index = goal_set.index(anchor)
        for _ in range(per_group):
            base_seed = rng.getrandbits(48)
            base_rng = random.Random(base_seed)
            if hidden_mode == "anchor":
                hidden_index = anchor_index
            else:
                hidden_index = base_rng.randrange(len(goal_set))
            hidden = goal_set[hidden_index]
            plan = None
            for _ in range(100):
                init = random_state(n_blocks, base_rng)
                candidate = generate_plan(init, hidden, base_rng)
                if candidate:
                    plan = candidate
                    break
            if plan is None:
                raise GenerationError("could not find an initial state needing a plan")
            for ratio in observabilities:
                trace = sample_observations(plan, float(ratio), base_rng)
                instances.append(
                    GRInstance(
                        trace=trace,
                        goal_set=tuple(goal_set),
                        hidden_goal_index=hidden_index,
                        seed=base_seed,
                    )
                )
    return instances


# ---------------------------------------------------------------------------
# serialisation


def _record_of(item, vocabulary: DomainVocabulary) -> dict:
    if isinstance(item, TrainingPair):
        goals = [sorted(f.label for f in item.hidden_goal)]
        hidden_index = 0
    else:
        goals = [sorted(f.label for f in g) for g in item.goal_set]
        hidden_index = item.hidden_goal_index
    return {
        "schema": SCHEMA_VERSION,
        "domain": vocabulary.domain_id,
        "vocab_checksum": vocabulary.checksum,
        "observations": list(item.trace.labels),
        "goals": goals,
        "hidden_index": hidden_index,
        "observability": item.trace.observability,
        "plan_length": item.trace.source_plan_len,
        "seed": item.seed,
    }


def write_dataset(path, items: Iterable, vocabulary: DomainVocabulary) -> int:
    """Write pairs or instances as line-delimited JSON; returns the count."""
    count = 0
    with open(path, "w", encoding="utf-8") as handle:
        for item in items:
            handle.write(json.dumps(_record_of(item, vocabulary)) + "\n")
            count += 1
    return count


def dataset_domain_id(path) -> str:
    """Domain id declared by the first record of a dataset file."""
    with open(path, "r", encoding="utf-8") as handle:
        for line_no, line in enumerate(handle, start=1):
            if line.strip():
                try:
                    return str(json.loads(line)["domain"])
                except (json.JSONDecodeError, KeyError) as exc:
                    raise DatasetParseError(str(exc), line=line_no) from None
    raise EmptyInputError(f"dataset {path} has no records")


def _parse_record(record: dict, line_no: int, vocab_cache: dict) -> TrainingPair | GRInstance:
    try:
        schema = record["schema"]
        domain = record["domain"]
        checksum = record["vocab_checksum"]
        observations = record["observations"]
        goals = record["goals"]
        hidden_index = record["hidden_index"]
        ratio = record["observability"]
        plan_length = record["plan_length"]
        seed = record["seed"]
    except (KeyError, TypeError) as exc:
        raise DatasetParseError(f"missing field {exc}", line=line_no) from None
    if schema != SCHEMA_VERSION:
        raise DatasetParseError(f"unsupported schema version {schema}", line=line_no)
    if domain not in vocab_cache:
        try:
            vocab_cache[domain] = vocabulary_for_domain(domain)
        except Exception as exc:
            raise DatasetParseError(str(exc), line=line_no) from None
    vocab = vocab_cache[domain]
    if checksum != vocab.checksum:
        raise DatasetParseError(
            f"vocabulary checksum {checksum} does not match domain {domain}",
            line=line_no,
        )
    for label in observations:
        if label not in vocab.action_index:
            raise DatasetParseError(f"unknown action label {label!r}", line=line_no)
    goal_sets = []
    for goal in goals:
        fluents = set()
        for label in goal:
            if label not in vocab.fluent_index:
                raise DatasetParseError(f"unknown fluent label {label!r}", line=line_no)
            fluents.add(Fluent.parse(label))
        goal_sets.append(frozenset(fluents))
    try:
        trace = ObservationTrace(
            labels=tuple(observations),
            source_plan_len=int(plan_length),
            observability=float(ratio),
        )
        if len(goal_sets) == 1:
            if hidden_index != 0:
                raise DatasetParseError("single-goal record with nonzero index", line=line_no)
            return TrainingPair(trace=trace, hidden_goal=goal_sets[0], seed=seed)
        return GRInstance(
            trace=trace,
            goal_set=tuple(goal_sets),
            hidden_goal_index=int(hidden_index),
            seed=seed,
        )
    except InvalidInstanceError as exc:
        raise DatasetParseError(str(exc), line=line_no) from None


def read_dataset(path, vocabulary: DomainVocabulary | None = None) -> list:
    """Read a dataset file back into pairs and instances.

    Every record is validated against the vocabulary its domain id names.
    When ``vocabulary`` is given, records must also match its checksum;
    mismatches raise IncompatibilityError.
    """
    items = []
    vocab_cache: dict[str, DomainVocabulary] = {}
    with open(path, "r", encoding="utf-8") as handle:
        for line_no, line in enumerate(handle, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise DatasetParseError(f"invalid JSON: {exc}", line=line_no) from None
            if vocabulary is not None:
                if record.get("vocab_checksum") != vocabulary.checksum:
                    raise IncompatibilityError(
                        f"record at line {line_no} was built for vocabulary "
                        f"{record.get('vocab_checksum')}, expected {vocabulary.checksum}"
                    )
            items.append(_parse_record(record, line_no, vocab_cache))
    return items
