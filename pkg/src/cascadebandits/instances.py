"""Generators for the problem-instance families driving the experiments.

Three structured families plus explicit weight vectors:

* two-level: first K items at p, the rest at p - delta;
* the hard UCB1 instance: optima at eps = 1/(2K), the rest at eps - delta
  with delta = sqrt(L / (chi * n * K));
* the lower-bound family: K groups of N = L/K items, one elevated item per
  group selected by m in [N]^K, weights (eps + delta*1[optimal]) / 2 with
  delta = sqrt(L / (4 n K^2)).
"""

from __future__ import annotations

import enum
import itertools
import math
import warnings
from dataclasses import dataclass
from typing import Iterator

import numpy as np

from .cascade import Instance

FAMILY_ENUMERATION_GUARD = 10**6


class InstanceKind(enum.Enum):
    TWO_LEVEL = "two_level"
    UCB1_HARD = "ucb1_hard"
    LOWER_BOUND = "lower_bound"
    EXPLICIT = "explicit"


def gen_two_level(L: int, K: int, p: float, delta: float) -> Instance:
    """Items 1..K at p, items K+1..L at p - delta."""
    if not 0.0 <= delta <= p <= 1.0:
        raise ValueError(
            f"two-level weights need 0 <= p-delta <= p <= 1, got p={p}, delta={delta}")
    w = np.full(L, p - delta, dtype=np.float64)
    w[:K] = p
    return Instance.make(w, K)


def gen_ucb1_hard(L: int, K: int, n: int, chi: float) -> Instance:
    """The hard instance for UCB1: optima at eps = 1/(2K), gap sqrt(L/(chi n K)).

    Warns (does not fail) when the analysis-scale hypotheses n >= max(LK, 49K^4)
    or L >= 800K are violated; desk-scale runs legitimately use smaller sizes.
    The only hard requirement is eps >= delta so weights stay in [0, 1].
    """
    if chi <= 0.0:
        raise ValueError(f"chi must be positive, got {chi}")
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    eps = 1.0 / (2.0 * K)
    delta = math.sqrt(L / (chi * n * K))
    if delta > eps:
        raise ValueError(
            f"gap delta={delta:.6g} exceeds eps={eps:.6g}; weights would be negative "
            f"(needs n >= 4*L*K/chi; increase n or chi)")
    if n < max(L * K, 49 * K**4) or L < 800 * K:
        warnings.warn(
            f"hard-instance analysis hypotheses violated (n >= max(LK, 49K^4) and L >= 800K); "
            f"construction is still valid at L={L}, K={K}, n={n}",
            UserWarning, stacklevel=2)
    w = np.full(L, eps - delta, dtype=np.float64)
    w[:K] = eps
    return Instance.make(w, K)


def ucb1_margin_chi() -> float:
    """The pinned absolute constant for the UCB1 margin claim, about 2.9e3.

    Evaluates 1 / (log(200) * ((1 - sqrt(5/6)) * sqrt(9/2) - sqrt(1/32))^2);
    the parenthesized margin is strictly positive.
    """
    margin = (1.0 - math.sqrt(5.0 / 6.0)) * math.sqrt(4.5) - math.sqrt(1.0 / 32.0)
    return 1.0 / (math.log(200.0) * margin * margin)


def _family_geometry(L: int, K: int, n: int) -> tuple[int, float, float]:
    if L % K != 0:
        raise ValueError(f"L/K must be an integer, got L={L}, K={K}")
    N = L // K
    if N < 4:
        raise ValueError(f"group size N = L/K must be >= 4, got {N}")
    if n < L:
        raise ValueError(f"horizon must satisfy n >= L, got n={n}, L={L}")
    eps = 1.0 / (2.0 * K)
    delta = math.sqrt(L / (4.0 * n * K * K))
    return N, eps, delta


def gen_lowerbound_member(L: int, K: int, n: int, m) -> Instance:
    """Family member w_m: one elevated item per group of N = L/K items.

    Group i covers ids (i-1)N+1 .. iN; its elevated item is (i-1)N + m(i).
    Weights are (eps + delta)/2 on elevated items and eps/2 elsewhere, so the
    whole family stays inside the small-reward ball of radius eps.
    """
    N, eps, delta = _family_geometry(L, K, n)
    m = tuple(int(v) for v in m)
    if len(m) != K:
        raise ValueError(f"m must have one group choice per slot, got {len(m)} for K={K}")
    if any(not 1 <= v <= N for v in m):
        raise ValueError(f"group choices must lie in [1, {N}], got {m}")
    w = np.full(L, eps / 2.0, dtype=np.float64)
    for i, choice in enumerate(m):
        w[i * N + choice - 1] = (eps + delta) / 2.0
    return Instance.make(w, K)


def enumerate_family(L: int, K: int, n: int, *, sample: int | None = None,
                     seed: int | None = None) -> Iterator[tuple[tuple[int, ...], Instance]]:
    """Yield (m, instance) over the lower-bound family, exhaustively or sampled.

    Full enumeration is guarded at N^K <= 1e6 members; pass ``sample`` to draw
    that many distinct members from a seeded stream instead.
    """
    N, _, _ = _family_geometry(L, K, n)
    total = N**K
    if sample is None:
        if total > FAMILY_ENUMERATION_GUARD:
            raise ValueError(
                f"family has N^K = {total} members (> {FAMILY_ENUMERATION_GUARD}); "
                f"pass sample= to draw a subset")
        for m in itertools.product(range(1, N + 1), repeat=K):
            yield m, gen_lowerbound_member(L, K, n, m)
        return
    sample = int(sample)
    if sample < 1:
        raise ValueError(f"sample must be >= 1, got {sample}")
    if sample > total:
        raise ValueError(f"cannot draw {sample} distinct members from {total}")
    rng = np.random.default_rng(seed)
    seen: set[tuple[int, ...]] = set()
    while len(seen) < sample:
        m = tuple(int(v) for v in rng.integers(1, N + 1, size=K))
        if m in seen:
            continue
        seen.add(m)
        yield m, gen_lowerbound_member(L, K, n, m)


@dataclass(frozen=True)
class InstanceSpec:
    """Declarative description of a problem instance, config-serializable."""

    kind: InstanceKind
    L: int
    K: int
    n: int | None = None
    p: float | None = None
    delta: float | None = None
    chi: float | None = None
    m: tuple[int, ...] | None = None
    weights: tuple[float, ...] | None = None

    def __post_init__(self):
        if not isinstance(self.kind, InstanceKind):
            object.__setattr__(self, "kind", InstanceKind(self.kind))
        if self.m is not None:
            object.__setattr__(self, "m", tuple(int(v) for v in self.m))
        if self.weights is not None:
            object.__setattr__(self, "weights", tuple(float(v) for v in self.weights))

    def with_overrides(self, **kwargs) -> "InstanceSpec":
        from dataclasses import replace

        return replace(self, **kwargs)

    def build(self) -> Instance:
        """Construct the instance; raises ValueError on constraint violations."""
        if self.kind is InstanceKind.TWO_LEVEL:
            self._require("p", "delta")
            return gen_two_level(self.L, self.K, self.p, self.delta)
        if self.kind is InstanceKind.UCB1_HARD:
            self._require("n", "chi")
            return gen_ucb1_hard(self.L, self.K, self.n, self.chi)
        if self.kind is InstanceKind.LOWER_BOUND:
            self._require("n", "m")
            return gen_lowerbound_member(self.L, self.K, self.n, self.m)
        if self.kind is InstanceKind.EXPLICIT:
            self._require("weights")
            if len(self.weights) != self.L:
                raise ValueError(
                    f"weights must list L={self.L} values, got {len(self.weights)}")
            return Instance.make(np.asarray(self.weights), self.K)
        raise ValueError(f"unknown instance kind {self.kind!r}")

    def _require(self, *names: str) -> None:
        for name in names:
            if getattr(self, name) is None:
                raise ValueError(
                    f"instance kind '{self.kind.value}' requires field '{name}'")
