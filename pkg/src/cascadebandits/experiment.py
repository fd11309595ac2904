"""Monte Carlo regret estimation, sweeps, scaling fits, and the theory checks.

Trials are independent and fully reproducible: trial i of a run with seed s
draws from the stream seeded by (s, i), so adding trials or changing the
worker count never perturbs existing results. The per-round loop for the two
UCB rules runs inside a numba kernel that reproduces the policies.step
composition bit for bit (same index solver, same tie-breaks, same draws).
"""

from __future__ import annotations

import enum
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from itertools import repeat
from typing import Iterable, NamedTuple, Sequence

import numpy as np
from numba import njit

from .cascade import (
    Instance,
    click_probability,
    doc_regret_increment,
    optimal_action,
)
from .divergence import ClaimResult, _klucb_root, kl_claim_checks
from .instances import InstanceSpec, InstanceKind, enumerate_family, ucb1_margin_chi
from .policies import IndexRule, RuleKind, init_state, step


class Metric(enum.Enum):
    CASCADE = "cascade"
    DOCUMENT = "document"


def trial_rng(seed: int, trial_index: int) -> np.random.Generator:
    """The private random stream of one trial, derived from (seed, trial)."""
    return np.random.default_rng(np.random.SeedSequence([int(seed), int(trial_index)]))


def default_checkpoints(horizon: int) -> tuple[int, ...]:
    """Geometric checkpoints: powers of two up to the horizon, then the horizon."""
    if horizon < 1:
        raise ValueError(f"horizon must be >= 1, got {horizon}")
    points = []
    k = 1
    while k <= horizon:
        points.append(k)
        k *= 2
    if points[-1] != horizon:
        points.append(horizon)
    return tuple(points)


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything one experiment needs: instance, rule, horizon, trials, seed."""

    instance_spec: InstanceSpec
    rule: IndexRule
    horizon: int
    trials: int
    seed: int
    checkpoints: tuple[int, ...] = ()
    metric: Metric = Metric.CASCADE
    realized: bool = False

    def __post_init__(self):
        if self.horizon < 1:
            raise ValueError(f"horizon must be >= 1, got {self.horizon}")
        if self.trials < 1:
            raise ValueError(f"trials must be >= 1, got {self.trials}")
        if not 0 <= int(self.seed) < 2**63:
            raise ValueError(f"seed must be a nonnegative 63-bit integer, got {self.seed}")
        cps = tuple(int(c) for c in self.checkpoints) or default_checkpoints(self.horizon)
        if list(cps) != sorted(set(cps)):
            raise ValueError("checkpoints must be strictly increasing")
        if cps[0] < 1 or cps[-1] != self.horizon:
            raise ValueError(
                f"checkpoints must lie in [1, horizon] and end at the horizon "
                f"(got last={cps[-1]}, horizon={self.horizon})")
        object.__setattr__(self, "checkpoints", cps)
        if not isinstance(self.metric, Metric):
            object.__setattr__(self, "metric", Metric(self.metric))


@dataclass(frozen=True)
class RegretTrace:
    """Cumulative expected regret of one trial at each checkpoint."""

    trial_index: int
    cum_regret: np.ndarray
    seed_used: int


class RoundsResult(NamedTuple):
    cum_regret: np.ndarray
    pulls: np.ndarray
    means: np.ndarray
    actions: np.ndarray | None


@njit(cache=True)
def _trial_kernel(w, K, n, rule_code, ucb1_scale, opt_prod, opt_sum, metric_code,
                  realized, checkpoints, gen, cum_out, pulls_out, means_out,
                  actions_out, record_actions):  # pragma: no cover - jitted
    L = w.shape[0]
    pulls = np.zeros(L, dtype=np.int64)
    means = np.zeros(L, dtype=np.float64)
    idx = np.empty(L, dtype=np.float64)
    taken = np.zeros(L, dtype=np.bool_)
    action = np.empty(K, dtype=np.int64)
    cum = 0.0
    ci = 0
    for t in range(1, n + 1):
        if rule_code == 0:
            if t == 1:
                thr = 0.0
            else:
                thr = math.log(t) + 3.0 * math.log(math.log(t))
                if thr < 0.0:
                    thr = 0.0
            for e in range(L):
                c = pulls[e]
                if c == 0:
                    idx[e] = 1.0
                    continue
                m = means[e]
                if m >= 1.0:
                    idx[e] = 1.0
                    continue
                target = thr / c
                if target <= 0.0:
                    idx[e] = m
                else:
                    idx[e] = _klucb_root(m, target)
        else:
            logt = math.log(t)
            for e in range(L):
                c = pulls[e]
                if c == 0:
                    idx[e] = 1.0
                else:
                    b = means[e] + math.sqrt(ucb1_scale * logt / c)
                    idx[e] = b if b < 1.0 else 1.0
        for e in range(L):
            taken[e] = False
        for k in range(K):
            best = -1
            bestv = -1.0
            for e in range(L):
                if not taken[e] and idx[e] > bestv:
                    best = e
                    bestv = idx[e]
            taken[best] = True
            action[k] = best
        click = -1
        for k in range(K):
            if gen.random() < w[action[k]]:
                click = k
                break
        if realized:
            inc = (1.0 - opt_prod) - (1.0 if click >= 0 else 0.0)
        elif metric_code == 0:
            prod = 1.0
            for k in range(K):
                prod *= 1.0 - w[action[k]]
            inc = prod - opt_prod
            if inc < 0.0:
                inc = 0.0
        else:
            s = 0.0
            for k in range(K):
                s += w[action[k]]
            inc = opt_sum - s
            if inc < 0.0:
                inc = 0.0
        cum += inc
        upto = click + 1 if click >= 0 else K
        for k in range(upto):
            e = action[k]
            hit = 1.0 if k == click else 0.0
            clicks_so_far = float(int(pulls[e] * means[e] + 0.5))
            means[e] = (clicks_so_far + hit) / (pulls[e] + 1)
            pulls[e] += 1
        if record_actions:
            for k in range(K):
                actions_out[t - 1, k] = action[k] + 1
        if ci < checkpoints.shape[0] and t == checkpoints[ci]:
            cum_out[ci] = cum
            ci += 1
    for e in range(L):
        pulls_out[e] = pulls[e]
        means_out[e] = means[e]


_NO_ACTIONS = np.empty((0, 0), dtype=np.int64)


def _run_reference(instance: Instance, rule: IndexRule, horizon: int,
                   rng: np.random.Generator, checkpoints: Sequence[int],
                   metric: Metric, realized: bool,
                   record_actions: bool) -> RoundsResult:
    state = init_state(instance.num_items)
    cum = 0.0
    ci = 0
    cum_out = np.zeros(len(checkpoints), dtype=np.float64)
    actions = np.empty((horizon, instance.list_size), dtype=np.int64) if record_actions else None
    opt_click = click_probability(instance, optimal_action(instance))
    for t in range(1, horizon + 1):
        action, outcome, state, regret = step(state, rule, instance, rng)
        if realized:
            inc = opt_click - (1.0 if outcome.click_position is not None else 0.0)
        elif metric is Metric.DOCUMENT:
            inc = doc_regret_increment(instance, action)
        else:
            inc = regret
        cum += inc
        if actions is not None:
            actions[t - 1] = action
        if ci < len(checkpoints) and t == checkpoints[ci]:
            cum_out[ci] = cum
            ci += 1
    return RoundsResult(cum_out, state.pulls.copy(), state.means.copy(), actions)


def run_rounds(instance: Instance, rule: IndexRule, horizon: int,
               rng: np.random.Generator, *, checkpoints: Sequence[int] | None = None,
               metric: Metric = Metric.CASCADE, realized: bool = False,
               engine: str = "auto", record_actions: bool = False) -> RoundsResult:
    """Simulate one trial's rounds; the engine choice never changes the result.

    ``engine="kernel"`` requires a UCB rule; ``"reference"`` composes the
    policies module step by step; ``"auto"`` picks the kernel whenever legal.
    """
    checkpoints = tuple(checkpoints) if checkpoints is not None else default_checkpoints(horizon)
    kernel_ok = rule.kind in (RuleKind.KLUCB, RuleKind.UCB1) and not rule.random_ties
    if engine == "auto":
        engine = "kernel" if kernel_ok else "reference"
    if engine == "reference":
        return _run_reference(instance, rule, horizon, rng, checkpoints,
                              metric, realized, record_actions)
    if engine != "kernel":
        raise ValueError(f"unknown engine {engine!r}")
    if not kernel_ok:
        raise ValueError(f"kernel engine does not support rule {rule.kind}")

    w = instance.attraction
    opt_idx = np.asarray(optimal_action(instance), dtype=np.int64) - 1
    opt_prod = 1.0
    opt_sum = 0.0
    for i in opt_idx:
        opt_prod *= 1.0 - w[i]
        opt_sum += w[i]
    cum_out = np.zeros(len(checkpoints), dtype=np.float64)
    pulls_out = np.zeros(instance.num_items, dtype=np.int64)
    means_out = np.zeros(instance.num_items, dtype=np.float64)
    actions_out = (np.empty((horizon, instance.list_size), dtype=np.int64)
                   if record_actions else _NO_ACTIONS)
    _trial_kernel(
        w, instance.list_size, horizon,
        0 if rule.kind is RuleKind.KLUCB else 1,
        float(rule.ucb1_scale), opt_prod, opt_sum,
        0 if metric is Metric.CASCADE else 1,
        bool(realized),
        np.asarray(checkpoints, dtype=np.int64),
        rng, cum_out, pulls_out, means_out, actions_out, bool(record_actions))
    return RoundsResult(cum_out, pulls_out, means_out,
                        actions_out if record_actions else None)


def run_trial(config: ExperimentConfig, trial_index: int, *,
              engine: str = "auto") -> RegretTrace:
    """One independent trial; deterministic given (config.seed, trial_index)."""
    instance = config.instance_spec.build()
    rng = trial_rng(config.seed, trial_index)
    rounds = run_rounds(instance, config.rule, config.horizon, rng,
                        checkpoints=config.checkpoints, metric=config.metric,
                        realized=config.realized, engine=engine)
    return RegretTrace(trial_index=trial_index, cum_regret=rounds.cum_regret,
                       seed_used=config.seed)


def _trial_task(config: ExperimentConfig, trial_index: int) -> RegretTrace:
    return run_trial(config, trial_index)


@dataclass(frozen=True)
class ExperimentResult:
    """Aggregate of independent trials at the configured checkpoints."""

    checkpoints: tuple[int, ...]
    mean_cum_regret: np.ndarray
    stderr: np.ndarray
    traces: tuple[RegretTrace, ...]

    @property
    def terminal_mean(self) -> float:
        return float(self.mean_cum_regret[-1])

    @property
    def terminal_stderr(self) -> float:
        return float(self.stderr[-1])


def run_experiment(config: ExperimentConfig, *, workers: int | None = None) -> ExperimentResult:
    """Run all trials and aggregate; output is invariant to the worker count."""
    n_workers = workers if workers else (os.cpu_count() or 1)
    n_workers = max(1, min(int(n_workers), config.trials))
    if n_workers == 1:
        traces = [run_trial(config, i) for i in range(config.trials)]
    else:
        chunk = max(1, math.ceil(config.trials / (4 * n_workers)))
        with ProcessPoolExecutor(max_workers=n_workers) as pool:
            traces = list(pool.map(_trial_task, repeat(config),
                                   range(config.trials), chunksize=chunk))
    traces.sort(key=lambda tr: tr.trial_index)
    stacked = np.stack([tr.cum_regret for tr in traces])
    mean = stacked.mean(axis=0)
    if config.trials > 1:
        stderr = stacked.std(axis=0, ddof=1) / math.sqrt(config.trials)
    else:
        stderr = np.zeros_like(mean)
    return ExperimentResult(checkpoints=config.checkpoints, mean_cum_regret=mean,
                            stderr=stderr, traces=tuple(traces))


# --- sweeps and scaling fits -------------------------------------------------


@dataclass(frozen=True)
class ScalingFit:
    """Least-squares power-law fit y ~ exp(intercept) * x**exponent."""

    exponent: float
    intercept: float
    r_squared: float
    points_used: int


def fit_scaling(points: Iterable[tuple[float, float]]) -> ScalingFit:
    """OLS in log-log space; exact on noiseless power laws."""
    pts = [(float(x), float(y)) for x, y in points]
    if len(pts) < 2:
        raise ValueError(f"need at least 2 points to fit a power law, got {len(pts)}")
    if any(x <= 0.0 or y <= 0.0 for x, y in pts):
        raise ValueError("power-law fit needs strictly positive coordinates")
    lx = np.log([x for x, _ in pts])
    ly = np.log([y for _, y in pts])
    slope, intercept = np.polyfit(lx, ly, 1)
    resid = ly - (slope * lx + intercept)
    ss_res = float(np.dot(resid, resid))
    centered = ly - ly.mean()
    ss_tot = float(np.dot(centered, centered))
    if ss_tot == 0.0:
        r2 = 1.0 if ss_res < 1e-24 else 0.0
    else:
        r2 = max(0.0, min(1.0, 1.0 - ss_res / ss_tot))
    return ScalingFit(exponent=float(slope), intercept=float(intercept),
                      r_squared=r2, points_used=len(pts))


@dataclass(frozen=True)
class SweepPoint:
    axis: str
    value: int
    result: ExperimentResult

    @property
    def mean_terminal_regret(self) -> float:
        return self.result.terminal_mean

    @property
    def stderr(self) -> float:
        return self.result.terminal_stderr


@dataclass(frozen=True)
class SweepResult:
    points: tuple[SweepPoint, ...]
    fit: ScalingFit | None


def _config_for_axis_value(config: ExperimentConfig, axis: str, value: int) -> ExperimentConfig:
    spec = config.instance_spec
    if axis == "K":
        return replace(config, instance_spec=spec.with_overrides(K=int(value)))
    if axis == "L":
        return replace(config, instance_spec=spec.with_overrides(L=int(value)))
    if axis == "n":
        new_spec = spec.with_overrides(n=int(value)) if spec.n is not None else spec
        return replace(config, instance_spec=new_spec, horizon=int(value),
                       checkpoints=default_checkpoints(int(value)))
    raise ValueError(f"sweep axis must be one of K, n, L; got {axis!r}")


def sweep(config: ExperimentConfig, axis: str, values: Sequence[int], *,
          workers: int | None = None) -> SweepResult:
    """Re-run the experiment along one axis, regenerating the instance per point.

    Returns per-point results plus the terminal-regret power-law fit (absent
    when fewer than two points or any terminal regret is nonpositive).
    """
    points = []
    for value in values:
        point_config = _config_for_axis_value(config, axis, int(value))
        result = run_experiment(point_config, workers=workers)
        points.append(SweepPoint(axis=axis, value=int(value), result=result))
    fit = None
    coords = [(p.value, p.mean_terminal_regret) for p in points]
    if len(coords) >= 2 and all(x > 0 and y > 0 for x, y in coords):
        fit = fit_scaling(coords)
    return SweepResult(points=tuple(points), fit=fit)


# --- lower-bound family probe ------------------------------------------------


@dataclass(frozen=True)
class FamilyResult:
    worst_m: tuple[int, ...]
    worst_regret: float
    members: tuple[tuple[tuple[int, ...], float], ...]


def max_over_family(L: int, K: int, n: int, rule: IndexRule, trials: int,
                    seed: int, *, sample: int | None = None,
                    workers: int | None = None) -> FamilyResult:
    """Worst-case mean document regret over the lower-bound instance family."""
    members = []
    for m, _instance in enumerate_family(L, K, n, sample=sample, seed=seed):
        spec = InstanceSpec(kind=InstanceKind.LOWER_BOUND, L=L, K=K, n=n, m=m)
        config = ExperimentConfig(instance_spec=spec, rule=rule, horizon=n,
                                  trials=trials, seed=seed, metric=Metric.DOCUMENT)
        result = run_experiment(config, workers=workers)
        members.append((m, result.terminal_mean))
    worst_m, worst_regret = max(members, key=lambda item: item[1])
    return FamilyResult(worst_m=worst_m, worst_regret=worst_regret,
                        members=tuple(members))


# --- numeric theory checks ----------------------------------------------------


def check_chi_constant(n: int, K: int, L: int, chi: float) -> ClaimResult:
    """Grid-verify the UCB1 margin: (1-sqrt(5/6)) c_{t,s} - 2 c_{t,ceil(n/4)-1}
    stays above sqrt(L/(chi n K)) for t in [ceil(n/4), n] and s up to nK/(3L).

    The hypotheses n >= LK and L >= 800K are enforced because this check
    certifies the claim itself, not a desk-scale analogue.
    """
    if n < L * K:
        raise ValueError(f"margin claim requires n >= L*K, got n={n}, L*K={L * K}")
    if L < 800 * K:
        raise ValueError(f"margin claim requires L >= 800*K, got L={L}, K={K}")
    if chi <= 0.0:
        raise ValueError(f"chi must be positive, got {chi}")
    t0 = math.ceil(n / 4)
    s_max = max(1, math.floor(n * K / (3 * L)))
    ts = np.unique(np.linspace(t0, n, 20).astype(np.int64))
    ss = np.unique(np.linspace(1, s_max, 20).astype(np.int64))
    rhs = math.sqrt(L / (chi * n * K))
    coef = 1.0 - math.sqrt(5.0 / 6.0)
    min_slack = math.inf
    for t in ts:
        c_ref = 2.0 * math.sqrt(1.5 * math.log(t) / (t0 - 1))
        for s in ss:
            c_ts = math.sqrt(1.5 * math.log(t) / s)
            min_slack = min(min_slack, coef * c_ts - c_ref - rhs)
    return ClaimResult("ucb1-margin-constant", min_slack > 0.0, min_slack,
                       f"n={n} K={K} L={L} chi={chi:.6g}")


def check_tail_sum(n: int, *, partial_limit: int = 10**7) -> ClaimResult:
    """Verify sum_{t >= ceil(n/4)} (t^-3 + t^-5/2) <= 10 n^-3/2 for n >= 800.

    Sums exactly up to ``partial_limit`` and bounds the remainder by the
    integral tail, so the verified total upper-bounds the true series.
    """
    if n < 800:
        raise ValueError(f"tail-sum claim holds for n >= 800, got {n}")
    t0 = math.ceil(n / 4)
    total = 0.0
    chunk = 1_000_000
    for start in range(t0, partial_limit + 1, chunk):
        stop = min(start + chunk, partial_limit + 1)
        t = np.arange(start, stop, dtype=np.float64)
        total += float(np.sum(t**-3.0) + np.sum(t**-2.5))
    total += partial_limit**-2.0 / 2.0 + partial_limit**-1.5 / 1.5
    bound = 10.0 * n**-1.5
    slack = bound - total
    return ClaimResult("tail-sum-bound", slack >= 0.0, slack, f"n={n}")


def check_product_bound(num_checks: int = 1000, seed: int = 20240, *,
                        tol: float = 1e-12) -> ClaimResult:
    """Random-vector check of the product gap bound:
    prod(x) - prod(y) >= delta^(K-1) * sum(x - y) when x >= y >= delta > 0."""
    rng = np.random.default_rng(seed)
    min_slack = math.inf
    for _ in range(num_checks):
        k = int(rng.integers(1, 9))
        delta = float(rng.uniform(0.02, 0.95))
        y = rng.uniform(delta, 1.0, size=k)
        x = y + (1.0 - y) * rng.uniform(0.0, 1.0, size=k)
        slack = float(np.prod(x) - np.prod(y) - delta ** (k - 1) * np.sum(x - y))
        min_slack = min(min_slack, slack)
    return ClaimResult("product-gap-bound", min_slack >= -tol, min_slack,
                       f"{num_checks} random vectors")


def theory_checks(*, grid_size: int = 200, tol: float = 1e-12,
                  kl_lower_bound_constant: float = 12.0) -> list[ClaimResult]:
    """The full runnable inequality suite backing the regret analysis."""
    results = kl_claim_checks(grid_size=grid_size, tol=tol,
                              lower_bound_constant=kl_lower_bound_constant)
    results.append(check_product_bound(tol=tol))
    results.append(check_chi_constant(3200, 2, 1600, ucb1_margin_chi()))
    for n in (800, 10**4, 10**6):
        results.append(check_tail_sum(n))
    return results
