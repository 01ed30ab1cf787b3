"""Config files, result tables and the run bundle."""

from __future__ import annotations

import csv
import json
import math
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional, Sequence

from .errors import ConfigError
from .experiment import SUMMARY_METRICS, ExperimentConfig, SummaryRow, TrialRecord

TRIAL_COLUMNS = (
    "T", "trial_index", "seed", "variant", "eta", "delta",
    "total_reward", "opt_dynamic", "opt_weak", "dynamic_regret", "weak_regret",
    "bound_concentration", "bound_bias", "bound_learning_rate", "bound_explicit", "bound_heuristic",
    "sum_mas", "gamma_clamped_rounds", "reward_clamped_rounds",
)
SUMMARY_COLUMNS = ("T", "variant", "n_trials") + tuple(
    f"{stat}_{m}" for m in SUMMARY_METRICS for stat in ("mean", "std")
)


def fmt(x) -> str:
    """17 significant digits, enough to round-trip any binary64 value."""
    if isinstance(x, bool):
        return str(int(x))
    if isinstance(x, int):
        return str(x)
    if isinstance(x, float):
        if math.isnan(x):
            return "nan"
        return format(x, ".17g")
    return str(x)


def load_config(path) -> ExperimentConfig:
    """Read a JSON experiment config; missing fields take their defaults."""
    text = Path(path).read_text()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: top level must be an object")
    try:
        return ExperimentConfig.from_dict(data)
    except TypeError as exc:
        raise ConfigError(f"{path}: {exc}") from exc


def save_config(cfg: ExperimentConfig, path) -> Path:
    path = Path(path)
    path.write_text(json.dumps(cfg.to_dict(), indent=2) + "\n")
    return path


def trial_row(r: TrialRecord) -> list:
    values = [
        r.T, r.trial_index, r.seed, r.variant, r.eta, r.delta,
        r.total_reward, r.opt_dynamic, r.opt_weak, r.dynamic_regret, r.weak_regret,
        r.bound.concentration, r.bound.bias, r.bound.learning_rate, r.bound.explicit, r.bound.heuristic,
        sum(r.mas), sum(r.gamma_clamped), sum(r.reward_clamped),
    ]
    return [fmt(v) for v in values]


def summary_row(row: SummaryRow) -> list:
    values = [row.T, row.variant, row.n_trials]
    for m in SUMMARY_METRICS:
        values += [row.mean[m], row.std[m]]
    return [fmt(v) for v in values]


def _json_float(x):
    return None if isinstance(x, float) and math.isnan(x) else x


def record_to_json(r: TrialRecord) -> dict:
    return {
        "T": r.T,
        "trial_index": r.trial_index,
        "seed": r.seed,
        "variant": r.variant,
        "eta": r.eta,
        "delta": r.delta,
        "total_reward": r.total_reward,
        "opt_dynamic": _json_float(r.opt_dynamic),
        "opt_weak": r.opt_weak,
        "dynamic_regret": _json_float(r.dynamic_regret),
        "weak_regret": r.weak_regret,
        "bound": {
            "concentration": r.bound.concentration,
            "bias": r.bound.bias,
            "learning_rate": r.bound.learning_rate,
            "explicit": r.bound.explicit,
            "heuristic": r.bound.heuristic,
            "heuristic_note": "unconstanted term, constant taken as 1",
        },
        "rounds": {
            # one-based action labels, matching the graph file format
            "actions": [a + 1 for a in r.actions],
            "raw_rewards": list(r.raw_rewards),
            "normalized_rewards": list(r.normalized_rewards),
            "observations": [[n + 1 for n in obs] for obs in r.observations],
            "gamma_clamped": list(r.gamma_clamped),
            "reward_clamped": list(r.reward_clamped),
            "mas": list(r.mas),
        },
    }


@dataclass
class ResultsBundle:
    config: ExperimentConfig
    records: List[TrialRecord]
    summary: List[SummaryRow]
    plots: List[str] = field(default_factory=list)


def _write_csv(path: Path, header: Sequence[str], rows) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


def write_results(bundle: ResultsBundle, out_dir) -> dict:
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
        paths = {"trials": out / "trials.csv", "summary": out / "summary.csv", "run": out / "run.json"}
        _write_csv(paths["trials"], TRIAL_COLUMNS, (trial_row(r) for r in bundle.records))
        _write_csv(paths["summary"], SUMMARY_COLUMNS, (summary_row(s) for s in bundle.summary))
        payload = {
            "config": bundle.config.to_dict(),
            "trials": [record_to_json(r) for r in bundle.records],
            "summary": [
                {"T": s.T, "variant": s.variant, "n_trials": s.n_trials,
                 "mean": {k: _json_float(v) for k, v in s.mean.items()},
                 "std": {k: _json_float(v) for k, v in s.std.items()}}
                for s in bundle.summary
            ],
            "plots": [os.path.basename(p) for p in bundle.plots],
            "units": {"rewards_and_regrets": "raw", "learner_feedback": "normalized to [0, 1]"},
        }
        paths["run"].write_text(json.dumps(payload, indent=1) + "\n")
    except OSError as exc:
        raise OSError(f"could not write results to {out}: {exc}") from exc
    return paths


def read_trials_csv(path) -> List[dict]:
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))
