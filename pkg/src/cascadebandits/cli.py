"""Command-line surface: run experiments, sweep axes, run the theory checks.

A run consumes one JSON config and writes, atomically, a results CSV (one row
per trial and checkpoint), a JSON manifest, and a copy of the config. Sweeps
add a summary CSV with one row per (policy, axis value) carrying the fitted
power-law exponent. Exit codes: 0 success, 1 failed theory check, 2 config
parse error, 3 instance-construction error.
"""

from __future__ import annotations

import argparse
import csv
import datetime
import hashlib
import json
import os
import sys
import tempfile
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Sequence

from . import __version__
from .experiment import (
    ExperimentConfig,
    ExperimentResult,
    Metric,
    SweepResult,
    default_checkpoints,
    run_experiment,
    sweep,
    theory_checks,
)
from .instances import InstanceKind, InstanceSpec
from .policies import IndexRule, RuleKind

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_CONFIG_ERROR = 2
EXIT_INSTANCE_ERROR = 3

RESULT_COLUMNS = ("run_id", "policy", "metric", "instance_kind", "L", "K", "n",
                  "chi", "trial", "checkpoint_round", "cum_regret", "seed")
SUMMARY_COLUMNS = RESULT_COLUMNS[:8] + (
    "seed", "axis", "axis_value", "mean_terminal_regret", "stderr",
    "fit_exponent", "fit_r2")

KLUCB_THRESHOLD_FORMULA = "log(t*(log t)^3), clamped at 0"


class ConfigError(ValueError):
    """A config document that cannot be parsed into a RunPlan."""


@dataclass(frozen=True)
class RunPlan:
    """A parsed config: one instance spec, one or more policies to run."""

    instance_spec: InstanceSpec
    policies: tuple[IndexRule, ...]
    horizon: int
    trials: int
    seed: int
    checkpoints: tuple[int, ...]
    metric: Metric
    realized: bool

    def config_for(self, rule: IndexRule) -> ExperimentConfig:
        return ExperimentConfig(
            instance_spec=self.instance_spec, rule=rule, horizon=self.horizon,
            trials=self.trials, seed=self.seed, checkpoints=self.checkpoints,
            metric=self.metric, realized=self.realized)


_INSTANCE_KEYS = {
    InstanceKind.TWO_LEVEL: ("p", "delta"),
    InstanceKind.UCB1_HARD: ("chi",),
    InstanceKind.LOWER_BOUND: ("m",),
    InstanceKind.EXPLICIT: ("weights",),
}
_TOP_KEYS = {"kind", "L", "K", "p", "delta", "chi", "m", "weights", "policy",
             "policies", "ucb1_scale", "horizon", "trials", "seed",
             "checkpoints", "metric", "realized"}


def _need(doc: dict, key: str, kind) -> Any:
    if key not in doc:
        raise ConfigError(f"config is missing required key '{key}'")
    value = doc[key]
    if kind is int:
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"config key '{key}' must be an integer, got {value!r}")
    elif kind is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"config key '{key}' must be a number, got {value!r}")
        value = float(value)
    return value


def parse_config(doc: Any) -> RunPlan:
    """Turn a decoded JSON document into a RunPlan; ConfigError names bad keys."""
    if not isinstance(doc, dict):
        raise ConfigError("config must be a JSON object")
    unknown = set(doc) - _TOP_KEYS
    if unknown:
        raise ConfigError(f"config has unknown key '{sorted(unknown)[0]}'")

    kind_raw = _need(doc, "kind", str)
    try:
        kind = InstanceKind(kind_raw)
    except ValueError:
        raise ConfigError(
            f"config key 'kind' must be one of "
            f"{[k.value for k in InstanceKind]}, got {kind_raw!r}") from None
    L = _need(doc, "L", int)
    K = _need(doc, "K", int)
    horizon = _need(doc, "horizon", int)
    trials = _need(doc, "trials", int)
    seed = _need(doc, "seed", int)

    for key in _INSTANCE_KEYS[kind]:
        if key not in doc:
            raise ConfigError(
                f"instance kind '{kind.value}' requires config key '{key}'")

    spec_kwargs: dict[str, Any] = dict(kind=kind, L=L, K=K)
    if kind in (InstanceKind.UCB1_HARD, InstanceKind.LOWER_BOUND):
        spec_kwargs["n"] = horizon
    if "p" in doc:
        spec_kwargs["p"] = _need(doc, "p", float)
    if "delta" in doc:
        spec_kwargs["delta"] = _need(doc, "delta", float)
    if "chi" in doc:
        spec_kwargs["chi"] = _need(doc, "chi", float)
    if "m" in doc:
        if not isinstance(doc["m"], list):
            raise ConfigError("config key 'm' must be a list of group choices")
        spec_kwargs["m"] = tuple(doc["m"])
    if "weights" in doc:
        if not isinstance(doc["weights"], list):
            raise ConfigError("config key 'weights' must be a list of numbers")
        spec_kwargs["weights"] = tuple(doc["weights"])

    if "policy" in doc and "policies" in doc:
        raise ConfigError("config keys 'policy' and 'policies' are mutually exclusive")
    raw_policies = doc.get("policies", doc.get("policy", "klucb"))
    if isinstance(raw_policies, str):
        raw_policies = [raw_policies]
    if not isinstance(raw_policies, list) or not raw_policies:
        raise ConfigError("config key 'policies' must be a policy name or list of them")
    scale = float(doc.get("ucb1_scale", 1.5))
    rules = []
    for name in raw_policies:
        try:
            rules.append(IndexRule(RuleKind(name), ucb1_scale=scale))
        except ValueError as exc:
            raise ConfigError(f"config key 'policies' has bad entry {name!r}: {exc}") from None

    metric_raw = doc.get("metric", "cascade")
    try:
        metric = Metric(metric_raw)
    except ValueError:
        raise ConfigError(
            f"config key 'metric' must be 'cascade' or 'document', got {metric_raw!r}") from None

    checkpoints = doc.get("checkpoints")
    if checkpoints is not None:
        if not isinstance(checkpoints, list) or not all(
                isinstance(c, int) and not isinstance(c, bool) for c in checkpoints):
            raise ConfigError("config key 'checkpoints' must be a list of integers")
        checkpoints = tuple(checkpoints)
    else:
        checkpoints = default_checkpoints(horizon)

    realized = doc.get("realized", False)
    if not isinstance(realized, bool):
        raise ConfigError("config key 'realized' must be a boolean")

    try:
        spec = InstanceSpec(**spec_kwargs)
        plan = RunPlan(instance_spec=spec, policies=tuple(rules), horizon=horizon,
                       trials=trials, seed=seed, checkpoints=checkpoints,
                       metric=metric, realized=realized)
        plan.config_for(rules[0])  # validates horizon/trials/seed/checkpoints
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(f"config is invalid: {exc}") from None
    return plan


def load_config(path: str | Path) -> tuple[RunPlan, dict]:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from None
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file {path} is not valid JSON: {exc}") from None
    return parse_config(doc), doc


def canonical_config(doc: dict) -> str:
    """Stable text form: sorted keys, compact separators, round-trip floats."""
    return json.dumps(doc, sort_keys=True, separators=(",", ":"), allow_nan=False)


def config_hash(doc: dict) -> str:
    return hashlib.sha256(canonical_config(doc).encode("utf-8")).hexdigest()


def fmt_float(x: float) -> str:
    return f"{x:.17g}"


def _atomic_write(path: Path, text: str) -> None:
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as handle:
            handle.write(text)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise


def _csv_text(columns: Sequence[str], rows: Sequence[Sequence[Any]]) -> str:
    import io

    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(columns)
    writer.writerows(rows)
    return buffer.getvalue()


def _instance_fields(plan: RunPlan, axis: str | None = None,
                     value: int | None = None) -> dict[str, Any]:
    spec = plan.instance_spec
    L, K, n = spec.L, spec.K, plan.horizon
    if axis == "L":
        L = value
    elif axis == "K":
        K = value
    elif axis == "n":
        n = value
    chi = "" if spec.chi is None else fmt_float(spec.chi)
    return {"instance_kind": spec.kind.value, "L": L, "K": K, "n": n, "chi": chi}


def _run_id(doc: dict, policy: str, axis: str | None = None,
            value: int | None = None) -> str:
    tag = canonical_config(doc) + f"|policy={policy}"
    if axis is not None:
        tag += f"|{axis}={value}"
    return hashlib.sha256(tag.encode("utf-8")).hexdigest()[:12]


def _result_rows(run_id: str, policy: str, plan: RunPlan, fields: dict,
                 result: ExperimentResult) -> list[list]:
    rows = []
    for trace in result.traces:
        for checkpoint, value in zip(result.checkpoints, trace.cum_regret):
            rows.append([
                run_id, policy, plan.metric.value, fields["instance_kind"],
                fields["L"], fields["K"], fields["n"], fields["chi"],
                trace.trial_index, checkpoint, fmt_float(float(value)),
                plan.seed,
            ])
    return rows


def _write_run_outputs(out_dir: Path, doc: dict, results_rows: list,
                       summary_rows: list | None, started: str) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    _atomic_write(out_dir / "results.csv", _csv_text(RESULT_COLUMNS, results_rows))
    if summary_rows is not None:
        _atomic_write(out_dir / "summary.csv", _csv_text(SUMMARY_COLUMNS, summary_rows))
    _atomic_write(out_dir / "config.json", canonical_config(doc) + "\n")
    manifest = {
        "config_hash": config_hash(doc),
        "tool_version": __version__,
        "klucb_threshold": KLUCB_THRESHOLD_FORMULA,
        "started_at": started,
        "finished_at": _now(),
        "outputs": ["results.csv", "config.json"]
        + (["summary.csv"] if summary_rows is not None else []),
    }
    _atomic_write(out_dir / "manifest.json", json.dumps(manifest, indent=2) + "\n")


def _now() -> str:
    return datetime.datetime.now(datetime.timezone.utc).isoformat(timespec="seconds")


def cmd_run(config_path: str, out_dir: str, *, workers: int | None = None,
            seed: int | None = None) -> int:
    started = _now()
    try:
        plan, doc = load_config(config_path)
        if seed is not None:
            doc = dict(doc, seed=seed)
            plan = parse_config(doc)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG_ERROR
    try:
        plan.instance_spec.build()
    except ValueError as exc:
        print(f"error: instance construction failed: {exc}", file=sys.stderr)
        return EXIT_INSTANCE_ERROR
    rows = []
    for rule in plan.policies:
        result = run_experiment(plan.config_for(rule), workers=workers)
        run_id = _run_id(doc, rule.kind.value)
        rows.extend(_result_rows(run_id, rule.kind.value, plan,
                                 _instance_fields(plan), result))
    _write_run_outputs(Path(out_dir), doc, rows, None, started)
    return EXIT_OK


def _parse_values(raw: str) -> list[int]:
    try:
        values = [int(v) for v in raw.split(",") if v.strip()]
    except ValueError:
        raise ConfigError(f"--values must be comma-separated integers, got {raw!r}") from None
    if not values:
        raise ConfigError("--values must list at least one integer")
    return values


def cmd_sweep(config_path: str, axis: str, values_raw: str, out_dir: str, *,
              workers: int | None = None, seed: int | None = None) -> int:
    started = _now()
    try:
        plan, doc = load_config(config_path)
        if seed is not None:
            doc = dict(doc, seed=seed)
            plan = parse_config(doc)
        values = _parse_values(values_raw)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG_ERROR
    results_rows = []
    summary_rows = []
    try:
        for rule in plan.policies:
            result: SweepResult = sweep(plan.config_for(rule), axis, values,
                                        workers=workers)
            policy = rule.kind.value
            for point in result.points:
                fields = _instance_fields(plan, axis, point.value)
                run_id = _run_id(doc, policy, axis, point.value)
                results_rows.extend(_result_rows(run_id, policy, plan, fields,
                                                 point.result))
                fit_exp = "" if result.fit is None else fmt_float(result.fit.exponent)
                fit_r2 = "" if result.fit is None else fmt_float(result.fit.r_squared)
                summary_rows.append([
                    run_id, policy, plan.metric.value, fields["instance_kind"],
                    fields["L"], fields["K"], fields["n"], fields["chi"],
                    plan.seed, axis, point.value,
                    fmt_float(point.mean_terminal_regret), fmt_float(point.stderr),
                    fit_exp, fit_r2,
                ])
    except ValueError as exc:
        print(f"error: instance construction failed: {exc}", file=sys.stderr)
        return EXIT_INSTANCE_ERROR
    _write_run_outputs(Path(out_dir), doc, results_rows, summary_rows, started)
    return EXIT_OK


def cmd_check(out_dir: str) -> int:
    results = theory_checks()
    lines = [str(r) for r in results]
    report = "\n".join(lines) + "\n"
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    _atomic_write(out / "theory_report.txt", report)
    print(report, end="")
    failed = [r for r in results if not r.passed]
    if failed:
        print(f"{len(failed)} check(s) failed: "
              + ", ".join(r.name for r in failed), file=sys.stderr)
        return EXIT_CHECK_FAILED
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cascadebandits",
        description="Cascading-bandit regret experiments: KL-UCB vs UCB1.")
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run one experiment from a JSON config")
    run_p.add_argument("--config", required=True)
    run_p.add_argument("--out", required=True)
    run_p.add_argument("--workers", type=int, default=None)
    run_p.add_argument("--seed", type=int, default=None,
                       help="override the config seed")

    sweep_p = sub.add_parser("sweep", help="sweep one axis of the config")
    sweep_p.add_argument("--config", required=True)
    sweep_p.add_argument("--out", required=True)
    sweep_p.add_argument("--axis", required=True, choices=("K", "n", "L"))
    sweep_p.add_argument("--values", required=True,
                         help="comma-separated integers, e.g. 2,4,8,16")
    sweep_p.add_argument("--workers", type=int, default=None)
    sweep_p.add_argument("--seed", type=int, default=None)

    check_p = sub.add_parser("check", help="run the numeric theory-check suite")
    check_p.add_argument("--out", required=True)

    sub.add_parser("version", help="print the tool version")
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "version":
        print(__version__)
        return EXIT_OK
    if args.command == "run":
        return cmd_run(args.config, args.out, workers=args.workers, seed=args.seed)
    if args.command == "sweep":
        return cmd_sweep(args.config, args.axis, args.values, args.out,
                         workers=args.workers, seed=args.seed)
    if args.command == "check":
        return cmd_check(args.out)
    raise AssertionError(f"unhandled command {args.command}")


if __name__ == "__main__":
    sys.exit(main())
