"""Blocksworld: grounded vocabulary, state sampling, and a built-in planner.

The agent stacks and unstacks distinguishable blocks one at a time. Goals are
partial tower descriptions over On / On-Table fluents. Holding and Arm-Empty
fluents exist only inside the simulator; the network's fluent vocabulary is
restricted to On, On-Table and Clear, which is why an n-block domain exposes
n(n-1) + 2n fluents and 2n + 2n(n-1) grounded actions.

The plan generator replaces an external planner: it unstacks everything to
the table and then builds the goal towers bottom-up, with the order of
independent moves randomised per seed so distinct seeds can yield distinct
valid plans.
"""
from __future__ import annotations

import math
import random
from typing import Iterable, Sequence

from .domain import DomainVocabulary, Fluent, GroundedAction, apply_action, is_goal_satisfied
from .errors import DomainError, GenerationError, UnsatisfiableGoalError

ON = "On"
ON_TABLE = "On-Table"
CLEAR = "Clear"
HOLDING = "Holding"
ARM_EMPTY_PRED = "Arm-Empty"

ARM_EMPTY = Fluent(ARM_EMPTY_PRED)

# predicates a goal may mention (partial tower descriptions)
GOAL_PREDICATES = (ON, ON_TABLE)


def on(upper: str, lower: str) -> Fluent:
    return Fluent(ON, (upper, lower))


def on_table(block: str) -> Fluent:
    return Fluent(ON_TABLE, (block,))


def clear(block: str) -> Fluent:
    return Fluent(CLEAR, (block,))


def holding(block: str) -> Fluent:
    return Fluent(HOLDING, (block,))


def block_names(n_blocks: int) -> tuple[str, ...]:
    """Deterministic block names, zero-padded so lexical order matches numeric."""
    if n_blocks < 1:
        raise DomainError(f"a Blocksworld domain needs at least one block, got {n_blocks}")
    width = len(str(n_blocks))
    return tuple(f"B{str(k).zfill(width)}" for k in range(1, n_blocks + 1))


def pick_up(block: str) -> GroundedAction:
    return GroundedAction(
        label=f"(Pick-Up {block})",
        preconds=frozenset({clear(block), on_table(block), ARM_EMPTY}),
        add_effects=frozenset({holding(block)}),
        del_effects=frozenset({clear(block), on_table(block), ARM_EMPTY}),
    )


def put_down(block: str) -> GroundedAction:
    return GroundedAction(
        label=f"(Put-Down {block})",
        preconds=frozenset({holding(block)}),
        add_effects=frozenset({clear(block), on_table(block), ARM_EMPTY}),
        del_effects=frozenset({holding(block)}),
    )


def stack(upper: str, lower: str) -> GroundedAction:
    return GroundedAction(
        label=f"(Stack {upper} {lower})",
        preconds=frozenset({holding(upper), clear(lower)}),
        add_effects=frozenset({on(upper, lower), clear(upper), ARM_EMPTY}),
        del_effects=frozenset({holding(upper), clear(lower)}),
    )


def unstack(upper: str, lower: str) -> GroundedAction:
    return GroundedAction(
        label=f"(Unstack {upper} {lower})",
        preconds=frozenset({on(upper, lower), clear(upper), ARM_EMPTY}),
        add_effects=frozenset({holding(upper), clear(lower)}),
        del_effects=frozenset({on(upper, lower), clear(upper), ARM_EMPTY}),
    )


def build_blocksworld_vocabulary(n_blocks: int) -> DomainVocabulary:
    """Fluent and action vocabulary for an n-block domain.

    Fluents: On(x, y) for x != y, On-Table(x), Clear(x). Actions: Pick-Up(x),
    Put-Down(x), Stack(x, y), Unstack(x, y).
    """
    blocks = block_names(n_blocks)
    fluents: list[Fluent] = []
    actions: list[GroundedAction] = []
    for x in blocks:
        fluents.append(on_table(x))
        fluents.append(clear(x))
        actions.append(pick_up(x))
        actions.append(put_down(x))
        for y in blocks:
            if x != y:
                fluents.append(on(x, y))
                actions.append(stack(x, y))
                actions.append(unstack(x, y))
    return DomainVocabulary.build(f"blocksworld-{n_blocks}", fluents, actions)


def n_blocks_of(domain_id: str) -> int:
    """Parse the block count out of a blocksworld domain id."""
    prefix = "blocksworld-"
    if not domain_id.startswith(prefix):
        raise DomainError(f"not a blocksworld domain id: {domain_id!r}")
    try:
        n = int(domain_id[len(prefix):])
    except ValueError:
        raise DomainError(f"malformed blocksworld domain id: {domain_id!r}") from None
    if n < 1:
        raise DomainError(f"malformed blocksworld domain id: {domain_id!r}")
    return n


def vocabulary_for_domain(domain_id: str) -> DomainVocabulary:
    """Rebuild the vocabulary named by a domain id (deterministic)."""
    return build_blocksworld_vocabulary(n_blocks_of(domain_id))


def state_from_towers(towers: Sequence[Sequence[str]]) -> frozenset:
    """State fluents for towers given bottom-to-top, arm empty."""
    fluents = {ARM_EMPTY}
    for tower in towers:
        fluents.add(on_table(tower[0]))
        for lower, upper in zip(tower, tower[1:]):
            fluents.add(on(upper, lower))
        fluents.add(clear(tower[-1]))
    return frozenset(fluents)


def towers_of_state(state: Iterable[Fluent]) -> list[list[str]]:
    """Recover bottom-to-top towers from a state with an empty arm."""
    above: dict[str, str] = {}
    bases: list[str] = []
    for f in state:
        if f.predicate == ON:
            above[f.args[1]] = f.args[0]
        elif f.predicate == ON_TABLE:
            bases.append(f.args[0])
    towers = []
    for base in sorted(bases):
        tower = [base]
        while tower[-1] in above:
            tower.append(above[tower[-1]])
        towers.append(tower)
    return towers


def is_valid_state(state: Iterable[Fluent], n_blocks: int | None = None) -> bool:
    """Physical consistency: every block on exactly one support or held,
    Clear(x) iff nothing on x and x not held, at most one block held,
    Arm-Empty iff nothing held."""
    state = frozenset(state)
    blocks = set()
    for f in state:
        blocks.update(f.args)
    if n_blocks is not None:
        expected = set(block_names(n_blocks))
        if blocks - expected:
            return False
        blocks = expected
    held = {f.args[0] for f in state if f.predicate == HOLDING}
    if len(held) > 1:
        return False
    if (ARM_EMPTY in state) == bool(held):
        return False
    supports: dict[str, list] = {b: [] for b in blocks}
    riders: dict[str, list] = {b: [] for b in blocks}
    for f in state:
        if f.predicate == ON:
            upper, lower = f.args
            if upper == lower:
                return False
            supports[upper].append(lower)
            riders[lower].append(upper)
        elif f.predicate == ON_TABLE:
            supports[f.args[0]].append("table")
    for b in blocks:
        if b in held:
            if supports[b] or riders[b]:
                return False
            if clear(b) in state:
                return False
            continue
        if len(supports[b]) != 1 or len(riders[b]) > 1:
            return False
        if (clear(b) in state) != (len(riders[b]) == 0):
            return False
    # no cycles: walk down from every block must reach the table
    for b in blocks - held:
        seen = set()
        cur = b
        while cur != "table":
            if cur in seen:
                return False
            seen.add(cur)
            cur = supports[cur][0]
    return True


def _tower_count_weights(n: int) -> list[int]:
    """Number of configurations of n labelled blocks into exactly T towers,
    for T = 1..n (partitions into nonempty ordered lists)."""
    factorial = math.factorial(n)
    return [
        math.comb(n - 1, t - 1) * factorial // math.factorial(t)
        for t in range(1, n + 1)
    ]


def _random_towers(blocks: Sequence[str], rng: random.Random) -> list[list[str]]:
    """Uniform sample over all tower configurations of the given blocks.

    Picks the tower count by its exact configuration count, then cuts a
    uniform permutation into that many segments; every configuration with T
    towers corresponds to exactly T! (permutation, cut) pairs, so the result
    is uniform.
    """
    n = len(blocks)
    weights = _tower_count_weights(n)
    draw = rng.randrange(sum(weights))
    n_towers = 1
    for t, w in enumerate(weights, start=1):
        if draw < w:
            n_towers = t
            break
        draw -= w
    perm = rng.sample(list(blocks), n)
    cuts = sorted(rng.sample(range(1, n), n_towers - 1)) if n_towers > 1 else []
    bounds = [0, *cuts, n]
    return [perm[lo:hi] for lo, hi in zip(bounds, bounds[1:])]


def random_state(n_blocks: int, rng_seed) -> frozenset:
    """A uniformly random valid tower configuration with the arm empty."""
    blocks = block_names(n_blocks)
    rng = rng_seed if isinstance(rng_seed, random.Random) else random.Random(rng_seed)
    return state_from_towers(_random_towers(blocks, rng))


def random_goal(n_blocks: int, size: int, rng_seed) -> frozenset:
    """A random consistent goal: `size` support fluents of a random state.

    Any subset of one configuration's On / On-Table fluents is a consistent
    partial tower description.
    """
    if not 1 <= size <= n_blocks:
        raise DomainError(
            f"goal size must lie in 1..{n_blocks} (one support fluent per block), got {size}"
        )
    rng = rng_seed if isinstance(rng_seed, random.Random) else random.Random(rng_seed)
    state = random_state(n_blocks, rng)
    supports = sorted(f for f in state if f.predicate in GOAL_PREDICATES)
    return frozenset(rng.sample(supports, size))


def check_goal_consistency(goal: Iterable[Fluent]) -> None:
    """Raise UnsatisfiableGoalError unless the goal describes disjoint partial towers."""
    goal = frozenset(goal)
    support: dict[str, str] = {}
    ridden: dict[str, str] = {}
    for f in goal:
        if f.predicate == ON:
            upper, lower = f.args
            if upper == lower:
                raise UnsatisfiableGoalError(f"block cannot rest on itself: {f.label}")
            if upper in support:
                raise UnsatisfiableGoalError(f"{upper} placed on two supports")
            support[upper] = lower
            if lower in ridden:
                raise UnsatisfiableGoalError(f"two blocks stacked on {lower}")
            ridden[lower] = upper
        elif f.predicate == ON_TABLE:
            block = f.args[0]
            if block in support:
                raise UnsatisfiableGoalError(f"{block} placed on two supports")
            support[block] = "table"
        else:
            raise UnsatisfiableGoalError(
                f"goals may only contain {ON} and {ON_TABLE} fluents, got {f.label}"
            )
    for start in support:
        seen = set()
        cur = start
        while cur in support and support[cur] != "table":
            if cur in seen:
                raise UnsatisfiableGoalError("cyclic tower description")
            seen.add(cur)
            cur = support[cur]


def generate_plan(init: frozenset, goal: Iterable[Fluent], rng_seed) -> list[GroundedAction]:
    """A valid plan from ``init`` to a state satisfying ``goal``.

    Strategy: unstack every stacked block to the table, then stack the goal's
    On edges bottom-up. Independent moves are ordered randomly per seed. A
    goal already satisfied by ``init`` yields the empty plan.
    """
    goal = frozenset(goal)
    check_goal_consistency(goal)
    init = frozenset(init)
    known = {arg for f in init for arg in f.args}
    wanted = {arg for f in goal for arg in f.args}
    if wanted - known:
        raise UnsatisfiableGoalError(
            f"goal mentions blocks absent from the initial state: {sorted(wanted - known)}"
        )
    if is_goal_satisfied(init, goal):
        return []

    rng = rng_seed if isinstance(rng_seed, random.Random) else random.Random(rng_seed)
    plan: list[GroundedAction] = []
    state = init

    def perform(action: GroundedAction):
        nonlocal state
        state = apply_action(state, action)
        plan.append(action)

    # phase 1: flatten every stack onto the table
    while True:
        movable = sorted(
            f.args for f in state if f.predicate == ON and clear(f.args[0]) in state
        )
        if not movable:
            break
        upper, lower = rng.choice(movable)
        perform(unstack(upper, lower))
        perform(put_down(upper))

    # phase 2: build goal towers bottom-up; an edge is ready once its support
    # is itself in final position
    pending = {f.args[0]: f.args[1] for f in goal if f.predicate == ON}
    while pending:
        ready = sorted(x for x, y in pending.items() if y not in pending)
        upper = rng.choice(ready)
        lower = pending.pop(upper)
        perform(pick_up(upper))
        perform(stack(upper, lower))

    if not is_goal_satisfied(state, goal):
        raise GenerationError("internal error: generated plan does not achieve its goal")
    return plan
