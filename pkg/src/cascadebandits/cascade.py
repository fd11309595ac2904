"""Cascade click-model environment: instances, actions, sampling, regret.

Item ids are 1-based at every interface (matching the usual [L] convention);
weights are stored 0-based internally. A round shows an ordered list of
``list_size`` distinct items; the user clicks the first attractive one and
examines nothing afterwards, so only the prefix up to the click is observed.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

Action = tuple[int, ...]


@dataclass(frozen=True)
class Instance:
    """A cascading bandit problem: item count, slate size, attraction vector."""

    num_items: int
    list_size: int
    attraction: np.ndarray

    def __post_init__(self):
        if self.num_items < 1:
            raise ValueError(f"num_items must be >= 1, got {self.num_items}")
        if not 1 <= self.list_size <= self.num_items:
            raise ValueError(
                f"list_size must satisfy 1 <= K <= L, got K={self.list_size}, L={self.num_items}")
        w = np.ascontiguousarray(self.attraction, dtype=np.float64)
        if w.shape != (self.num_items,):
            raise ValueError(
                f"attraction must have shape ({self.num_items},), got {w.shape}")
        if np.any(w < 0.0) or np.any(w > 1.0):
            raise ValueError("attraction values must lie in [0, 1]")
        w.setflags(write=False)
        object.__setattr__(self, "attraction", w)

    @classmethod
    def make(cls, weights, list_size: int) -> "Instance":
        w = np.asarray(weights, dtype=np.float64)
        return cls(num_items=w.shape[0], list_size=int(list_size), attraction=w)

    @property
    def L(self) -> int:
        return self.num_items

    @property
    def K(self) -> int:
        return self.list_size


@dataclass(frozen=True)
class RoundOutcome:
    """Click position (1-based, None for no click) plus the examined prefix bits."""

    click_position: int | None
    observed: tuple[int, ...] = field(default=())

    def __post_init__(self):
        k = self.click_position
        if k is not None:
            if k < 1:
                raise ValueError(f"click_position must be >= 1 or None, got {k}")
            expected = (0,) * (k - 1) + (1,)
            if tuple(self.observed) != expected:
                raise ValueError("observed prefix must be zeros ending in the click bit")
        elif any(b != 0 for b in self.observed):
            raise ValueError("no-click outcome must observe all zeros")

    @property
    def num_examined(self) -> int:
        return len(self.observed)


def action_indices(instance: Instance, action) -> np.ndarray:
    """Validate an action against an instance and return 0-based indices."""
    ids = np.asarray(action, dtype=np.int64)
    if ids.shape != (instance.list_size,):
        raise ValueError(
            f"action must list exactly K={instance.list_size} items, got {ids.shape}")
    if np.any(ids < 1) or np.any(ids > instance.num_items):
        raise ValueError(f"item ids must lie in [1, {instance.num_items}]")
    if np.unique(ids).size != ids.size:
        raise ValueError("item ids must be pairwise distinct")
    return ids - 1


def optimal_ranking(instance: Instance) -> np.ndarray:
    """All item ids ranked by decreasing attraction, ties broken by smaller id."""
    order = np.argsort(-instance.attraction, kind="stable")
    return order + 1


def optimal_action(instance: Instance) -> Action:
    """The K items of largest attraction, in decreasing order (ties by id)."""
    return tuple(int(e) for e in optimal_ranking(instance)[: instance.list_size])


def click_probability(instance: Instance, action) -> float:
    """P(some click) = 1 - prod_k (1 - w(a_k)); permutation invariant."""
    idx = action_indices(instance, action)
    return 1.0 - _no_click_probability(instance.attraction, idx)


def _no_click_probability(w: np.ndarray, idx: np.ndarray) -> float:
    prod = 1.0
    for i in idx:
        prod *= 1.0 - w[i]
    return prod


def sample_round(instance: Instance, action, rng: np.random.Generator) -> RoundOutcome:
    """Draw one cascade round: Bernoulli per position, stopping at the first click.

    Only the examined prefix is ever drawn; the unexamined suffix is never
    revealed to the learner, so the lazy draw matches the full-slate draw in
    distribution.
    """
    idx = action_indices(instance, action)
    w = instance.attraction
    observed: list[int] = []
    for pos, i in enumerate(idx, start=1):
        if rng.random() < w[i]:
            observed.append(1)
            return RoundOutcome(click_position=pos, observed=tuple(observed))
        observed.append(0)
    return RoundOutcome(click_position=None, observed=tuple(observed))


def regret_increment(instance: Instance, action) -> float:
    """Expected per-round regret of an action: its no-click probability minus the
    optimum's. Nonnegative because the optimal action maximizes click probability."""
    idx = action_indices(instance, action)
    w = instance.attraction
    opt_idx = np.asarray(optimal_action(instance), dtype=np.int64) - 1
    gap = _no_click_probability(w, idx) - _no_click_probability(w, opt_idx)
    return gap if gap > 0.0 else 0.0


def doc_regret_increment(instance: Instance, action) -> float:
    """Per-round regret of the document-based model: sum of per-slot mean gaps."""
    idx = action_indices(instance, action)
    w = instance.attraction
    opt_idx = np.asarray(optimal_action(instance), dtype=np.int64) - 1
    opt_sum = 0.0
    for i in opt_idx:
        opt_sum += w[i]
    act_sum = 0.0
    for i in idx:
        act_sum += w[i]
    gap = opt_sum - act_sum
    return gap if gap > 0.0 else 0.0
