"""Grounded planning vocabulary and state simulation.

This module is domain-agnostic: fluents, grounded actions, the indexed
vocabulary that fixes the network's input/output coordinates, and STRIPS-style
state transitions. Concrete domains (currently Blocksworld) build on top of
these types.
"""
from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from typing import Iterable

from .errors import (
    DomainError,
    InapplicableActionError,
    OutOfVocabularyError,
    ShapeError,
)


@dataclass(frozen=True, order=True)
class Fluent:
    """A grounded proposition: predicate applied to an ordered tuple of objects."""

    predicate: str
    args: tuple[str, ...] = ()

    @property
    def label(self) -> str:
        if self.args:
            return f"({self.predicate} {' '.join(self.args)})"
        return f"({self.predicate})"

    @classmethod
    def parse(cls, label: str) -> "Fluent":
        text = label.strip()
        if not (text.startswith("(") and text.endswith(")")):
            raise DomainError(f"fluent label must be parenthesised: {label!r}")
        parts = text[1:-1].split()
        if not parts:
            raise DomainError(f"fluent label is empty: {label!r}")
        return cls(predicate=parts[0], args=tuple(parts[1:]))

    def __str__(self) -> str:
        return self.label


@dataclass(frozen=True)
class GroundedAction:
    """A fully instantiated action. Only the label is observable; the
    preconditions and effects exist for data synthesis."""

    label: str
    preconds: frozenset[Fluent]
    add_effects: frozenset[Fluent]
    del_effects: frozenset[Fluent]

    def __post_init__(self):
        if self.add_effects & self.del_effects:
            raise DomainError(f"action {self.label} adds and deletes the same fluent")

    def __str__(self) -> str:
        return self.label


State = frozenset  # a state is a frozenset[Fluent]


def apply_action(state: frozenset, action: GroundedAction) -> frozenset:
    """STRIPS transition: (state - del_effects) | add_effects.

    Raises InapplicableActionError when a precondition does not hold.
    """
    if not action.preconds <= state:
        missing = sorted(f.label for f in action.preconds - state)
        raise InapplicableActionError(
            f"action {action.label} inapplicable, missing {missing}"
        )
    return (state - action.del_effects) | action.add_effects


def is_goal_satisfied(state: Iterable[Fluent], goal: Iterable[Fluent]) -> bool:
    """True iff every goal fluent holds in the state."""
    return frozenset(goal) <= frozenset(state)


def simulate_plan(init: frozenset, plan: Iterable[GroundedAction]) -> frozenset:
    """Apply a plan action by action, raising on the first inapplicable step."""
    state = frozenset(init)
    for action in plan:
        state = apply_action(state, action)
    return state


@dataclass
class DomainVocabulary:
    """Indexed fluent and action sets for one domain.

    Fluents and actions are lexically ordered by label. Both index maps are
    1-based; index 0 is reserved for the padding token. ``fluent_position``
    gives the 0-based coordinate of a fluent in prediction/target vectors.
    """

    domain_id: str
    fluents: tuple[Fluent, ...]
    actions: tuple[GroundedAction, ...]
    fluent_index: dict[str, int] = field(default_factory=dict, repr=False)
    action_index: dict[str, int] = field(default_factory=dict, repr=False)

    @classmethod
    def build(
        cls,
        domain_id: str,
        fluents: Iterable[Fluent],
        actions: Iterable[GroundedAction],
    ) -> "DomainVocabulary":
        ordered_fluents = tuple(sorted(fluents, key=lambda f: f.label))
        ordered_actions = tuple(sorted(actions, key=lambda a: a.label))
        if len({f.label for f in ordered_fluents}) != len(ordered_fluents):
            raise DomainError("duplicate fluent labels in vocabulary")
        if len({a.label for a in ordered_actions}) != len(ordered_actions):
            raise DomainError("duplicate action labels in vocabulary")
        vocab = cls(domain_id=domain_id, fluents=ordered_fluents, actions=ordered_actions)
        vocab.fluent_index = {f.label: k + 1 for k, f in enumerate(ordered_fluents)}
        vocab.action_index = {a.label: k + 1 for k, a in enumerate(ordered_actions)}
        return vocab

    @property
    def n_fluents(self) -> int:
        return len(self.fluents)

    @property
    def n_actions(self) -> int:
        return len(self.actions)

    @staticmethod
    def _label(item) -> str:
        return item if isinstance(item, str) else item.label

    def action_id(self, action) -> int:
        """1-based index of an action label (0 is the padding token)."""
        label = self._label(action)
        try:
            return self.action_index[label]
        except KeyError:
            raise OutOfVocabularyError(f"unknown action label {label!r}") from None

    def action_at(self, action_id: int) -> GroundedAction:
        if not 1 <= action_id <= self.n_actions:
            raise OutOfVocabularyError(f"action index {action_id} out of range")
        return self.actions[action_id - 1]

    def fluent_id(self, fluent) -> int:
        """1-based index of a fluent label."""
        label = self._label(fluent)
        try:
            return self.fluent_index[label]
        except KeyError:
            raise OutOfVocabularyError(f"unknown fluent label {label!r}") from None

    def fluent_position(self, fluent) -> int:
        """0-based coordinate of a fluent in prediction/target vectors."""
        return self.fluent_id(fluent) - 1

    def manifest_text(self) -> str:
        """Plain-text export: header plus one label per line in index order."""
        lines = [f"domain {self.domain_id}"]
        lines.append(f"fluents {self.n_fluents}")
        lines.extend(f.label for f in self.fluents)
        lines.append(f"actions {self.n_actions}")
        lines.extend(a.label for a in self.actions)
        return "\n".join(lines) + "\n"

    def write_manifest(self, path) -> None:
        with open(path, "w", encoding="utf-8") as handle:
            handle.write(self.manifest_text())

    @property
    def checksum(self) -> str:
        """First 16 hex digits of the SHA-256 of the manifest text."""
        digest = hashlib.sha256(self.manifest_text().encode("utf-8")).hexdigest()
        return digest[:16]

    def validate_shapes(self, n_fluents: int, n_actions: int) -> None:
        if (self.n_fluents, self.n_actions) != (n_fluents, n_actions):
            raise ShapeError(
                f"vocabulary has {self.n_fluents} fluents / {self.n_actions} actions, "
                f"expected {n_fluents} / {n_actions}"
            )
