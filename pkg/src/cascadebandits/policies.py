"""Index-policy engine: rank all items by an optimistic index, play the top K.

Supports the two confidence-bound rules (KL-UCB and UCB1) plus two baselines
(ORACLE plays the true means, UNIFORM ranks by fresh uniform noise). All
tie-breaks are deterministic by smaller item id unless ``random_ties`` is set.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .cascade import Action, Instance, RoundOutcome, sample_round, regret_increment
from .divergence import (
    DEFAULT_UCB1_SCALE,
    exploration_threshold,
    klucb_indices,
    ucb1_indices,
)


class RuleKind(enum.Enum):
    KLUCB = "klucb"
    UCB1 = "ucb1"
    ORACLE = "oracle"
    UNIFORM = "uniform"


@dataclass(frozen=True)
class IndexRule:
    """Which index drives the policy, plus the UCB1 bonus scale."""

    kind: RuleKind
    ucb1_scale: float = DEFAULT_UCB1_SCALE
    random_ties: bool = False

    def __post_init__(self):
        if not isinstance(self.kind, RuleKind):
            object.__setattr__(self, "kind", RuleKind(self.kind))
        if not self.ucb1_scale > 1.0:
            raise ValueError(f"ucb1_scale must be > 1, got {self.ucb1_scale!r}")


@dataclass(frozen=True)
class PolicyState:
    """Per-item observation counts and running means, plus the round counter t."""

    pulls: np.ndarray
    means: np.ndarray
    round: int = 1

    def __post_init__(self):
        pulls = np.ascontiguousarray(self.pulls, dtype=np.int64)
        means = np.ascontiguousarray(self.means, dtype=np.float64)
        if pulls.shape != means.shape or pulls.ndim != 1:
            raise ValueError("pulls and means must be 1-d arrays of equal length")
        if self.round < 1:
            raise ValueError(f"round must be >= 1, got {self.round}")
        object.__setattr__(self, "pulls", pulls)
        object.__setattr__(self, "means", means)

    @property
    def num_items(self) -> int:
        return self.pulls.shape[0]


def init_state(num_items: int) -> PolicyState:
    """Fresh state before round 1: zero observations, zero empirical means."""
    return PolicyState(
        pulls=np.zeros(num_items, dtype=np.int64),
        means=np.zeros(num_items, dtype=np.float64),
        round=1,
    )


def compute_indices(state: PolicyState, rule: IndexRule, *,
                    instance: Instance | None = None,
                    rng: np.random.Generator | None = None) -> np.ndarray:
    """Per-item index vector for the current round.

    ORACLE needs the instance (returns the true attractions); UNIFORM needs a
    random stream. Items never observed get index 1 under both UCB rules.
    """
    if rule.kind is RuleKind.KLUCB:
        threshold = exploration_threshold(state.round)
        return klucb_indices(state.means, state.pulls, threshold)
    if rule.kind is RuleKind.UCB1:
        return ucb1_indices(state.means, state.pulls, state.round, rule.ucb1_scale)
    if rule.kind is RuleKind.ORACLE:
        if instance is None:
            raise ValueError("ORACLE rule requires the instance")
        return instance.attraction.copy()
    if rule.kind is RuleKind.UNIFORM:
        if rng is None:
            raise ValueError("UNIFORM rule requires a random stream")
        return rng.random(state.num_items)
    raise ValueError(f"unknown rule kind {rule.kind!r}")


def select_action(indices: np.ndarray, list_size: int, *,
                  rng: np.random.Generator | None = None,
                  random_ties: bool = False) -> Action:
    """The K items of largest index, in decreasing index order.

    Ties go to the smaller item id; with ``random_ties`` they are instead
    broken by a fresh random permutation (for robustness studies).
    """
    indices = np.asarray(indices, dtype=np.float64)
    k = int(list_size)
    if not 1 <= k <= indices.shape[0]:
        raise ValueError(f"list_size must satisfy 1 <= K <= {indices.shape[0]}, got {k}")
    if random_ties:
        if rng is None:
            raise ValueError("random tie-breaking requires a random stream")
        perm = rng.permutation(indices.shape[0])
        order = np.lexsort((perm, -indices))
    else:
        order = np.argsort(-indices, kind="stable")
    return tuple(int(e) + 1 for e in order[:k])


def update_state(state: PolicyState, action, outcome: RoundOutcome) -> PolicyState:
    """Fold one round's examined prefix into the counts and running means."""
    k = len(action)
    examined = outcome.num_examined
    click = outcome.click_position
    expected = k if click is None else min(click, k)
    if examined != expected or (click is not None and click > k):
        raise ValueError(
            f"outcome inconsistent with action: {examined} examined bits for "
            f"click_position={click} on a slate of {k}")
    pulls = state.pulls.copy()
    means = state.means.copy()
    for pos in range(examined):
        e = int(action[pos]) - 1
        hit = 1.0 if click == pos + 1 else 0.0
        # fold the running mean through its exact integer numerator so that
        # items with identical (clicks, pulls) histories tie bitwise no
        # matter how the observations interleaved
        clicks_so_far = float(int(pulls[e] * means[e] + 0.5))
        means[e] = (clicks_so_far + hit) / (pulls[e] + 1)
        pulls[e] += 1
    return PolicyState(pulls=pulls, means=means, round=state.round + 1)


class StepResult(NamedTuple):
    action: Action
    outcome: RoundOutcome
    state: PolicyState
    regret: float


def step(state: PolicyState, rule: IndexRule, instance: Instance,
         rng: np.random.Generator) -> StepResult:
    """One full round: compute indices, play the top-K slate, observe, update.

    The reported regret is the exact expected increment of the played action.
    """
    indices = compute_indices(state, rule, instance=instance, rng=rng)
    action = select_action(indices, instance.list_size, rng=rng,
                           random_ties=rule.random_ties)
    outcome = sample_round(instance, action, rng)
    new_state = update_state(state, action, outcome)
    return StepResult(action, outcome, new_state, regret_increment(instance, action))
