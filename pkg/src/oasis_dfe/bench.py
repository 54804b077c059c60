"""Seeded benchmark harness: many trials of one estimator against exact fidelities.

A run is described by an :class:`ExperimentConfig`, stored as flat JSON. Trial
``i`` uses the random stream ``(base_seed, i)`` for everything it draws, so any
trial can be replayed alone and the worker count never changes the output.
"""

from __future__ import annotations

import csv
import io
import json
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, fields
from pathlib import Path

import numpy as np

from . import grouping, oasis_gt, oasis_st, states
from .measurement import make_rng

TARGETS = ("haar", "ghz", "w")
ESTIMATORS = ("gdfe", "oasis_gt", "oasis_st")
FIXED_TARGET_STREAM = 2**31

# average G-DFE shot counts at epsilon = delta = 0.1, for n = 3..6
REFERENCE_SHOTS = {
    "haar": {3: 4426.0, 4: 8126.6, 5: 14083.3, 6: 27399.4},
    "ghz": {3: 875.6, 4: 937.5, 5: 968.6, 6: 984.3},
    "w": {3: 1749.8, 4: 2625.1, 5: 3707.1, 6: 5453.5},
}

# published MSEs in units of 1e-4, used only as labelled reference columns
PUBLISHED_MSE = {
    ("haar", "gdfe"): {3: 4.34, 4: 3.07, 5: 2.91, 6: 2.23},
    ("haar", "oasis_gt"): {3: 3.56, 4: 2.39, 5: 2.00, 6: 1.53},
    ("ghz", "gdfe"): {3: 1.30, 4: 1.01, 5: 0.953, 6: 0.954},
    ("ghz", "oasis_gt"): {3: 1.77, 4: 1.72, 5: 1.56, 6: 1.51},
    ("ghz", "cdfe"): {3: 1.45, 4: 1.46, 5: 1.44, 6: 1.45},
    ("ghz", "oasis_st"): {3: 1.30, 4: 1.01, 5: 0.953, 6: 0.954},
    ("w", "gdfe"): {3: 2.77, 4: 2.58, 5: 1.68, 6: 0.843},
    ("w", "oasis_gt"): {3: 2.63, 4: 3.66, 5: 4.60, 6: 5.31},
    ("w", "cdfe"): {3: 2.16, 4: 3.02, 5: 3.08, 6: 2.78},
    ("w", "oasis_st"): {3: 2.77, 4: 2.35, 5: 1.40, 6: 0.721},
}

PUBLISHED_GROUPS = {
    ("ghz", "si"): {3: 6, 4: 10, 5: 18, 6: 34},
    ("ghz", "analytic"): {3: 6, 4: 10, 5: 18, 6: 34},
    ("w", "si"): {3: 8, 4: 16, 5: 26, 6: 35},
    ("w", "analytic"): {3: 8, 4: 14, 5: 22, 6: 32},
}

CSV_COLUMNS = (
    "target",
    "n",
    "estimator",
    "trials",
    "raw_mse",
    "corrected_mse",
    "mean_shots",
    "ref_shots",
    "mse_stderr",
)


class ConfigError(ValueError):
    """Invalid or inconsistent experiment configuration."""


@dataclass
class ExperimentConfig:
    target: str
    n: int
    estimator: str
    noise_strength: float = 0.1
    trials: int = 1000
    base_seed: int = 0
    shots: int | None = None
    epsilon: float | None = None
    delta: float | None = None
    l: int | None = None
    m: int | None = None
    m2: int | None = None
    feas_tol: float = 1e-9
    opt_tol: float = 1e-9
    fixed_target: bool = False
    ref_shots: float | None = None
    allow_large: bool = False
    workers: int = 1
    out: str | None = None

    def __post_init__(self):
        self.target = str(self.target).lower()
        self.estimator = str(self.estimator).lower()
        if self.target not in TARGETS:
            raise ConfigError(f"target must be one of {TARGETS}, got {self.target!r}")
        if self.estimator not in ESTIMATORS:
            raise ConfigError(f"estimator must be one of {ESTIMATORS}, got {self.estimator!r}")
        if self.estimator == "oasis_st" and self.target == "haar":
            raise ConfigError("oasis_st only applies to ghz and w targets")
        if self.trials < 1:
            raise ConfigError("trials must be at least 1")
        if self.base_seed < 0:
            raise ConfigError("base_seed must be non-negative")
        if not 0.0 <= self.noise_strength <= 1.0:
            raise ConfigError("noise_strength must lie in [0, 1]")
        lo = 2 if self.target in ("ghz", "w") else 1
        if not lo <= self.n <= states.MAX_QUBITS:
            raise ConfigError(f"n must lie in [{lo}, {states.MAX_QUBITS}] for {self.target}")
        self._check_budget()

    def _check_budget(self):
        given = {
            "shots": self.shots is not None,
            "eps_delta": self.epsilon is not None or self.delta is not None,
            "l_m": self.l is not None or self.m is not None or self.m2 is not None,
        }
        kinds = [k for k, v in given.items() if v]
        if len(kinds) != 1:
            raise ConfigError(f"give exactly one budget (shots, epsilon/delta or l/m), got {kinds or 'none'}")
        kind = kinds[0]
        if self.estimator == "oasis_gt" and kind != "shots":
            raise ConfigError("oasis_gt takes a shot budget 'shots'")
        if self.estimator != "oasis_gt" and kind == "shots":
            raise ConfigError(f"{self.estimator} takes epsilon/delta or l/m, not 'shots'")
        if kind == "shots" and self.shots < 1:
            raise ConfigError("shots must be at least 1")
        if kind == "eps_delta":
            if self.epsilon is None or self.delta is None:
                raise ConfigError("epsilon and delta go together")
            if self.epsilon <= 0 or not 0 < self.delta < 1:
                raise ConfigError("need epsilon > 0 and 0 < delta < 1")
        if kind == "l_m":
            if self.l is None or self.m is None:
                raise ConfigError("l and m go together")
            if self.l < 1 or self.m < 1 or (self.m2 is not None and self.m2 < 1):
                raise ConfigError("l and m must be at least 1")
            if self.m2 is not None and not (self.estimator == "oasis_st" and self.target == "w"):
                raise ConfigError("m2 only applies to oasis_st on w targets")

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        known = {f.name for f in fields(cls)}
        extra = set(data) - known
        if extra:
            raise ConfigError(f"unknown config keys: {sorted(extra)}")
        try:
            return cls(**data)
        except TypeError as exc:
            raise ConfigError(str(exc)) from exc

    @classmethod
    def from_json(cls, text: str) -> "ExperimentConfig":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"bad JSON: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigError("config must be a JSON object")
        return cls.from_dict(data)

    @classmethod
    def load(cls, path) -> "ExperimentConfig":
        try:
            text = Path(path).read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read config: {exc}") from exc
        return cls.from_json(text)


@dataclass
class TrialRecord:
    index: int
    estimate: float
    fidelity: float
    shots_used: int
    wall_time: float


@dataclass
class SummaryRow:
    target: str
    n: int
    estimator: str
    trials: int
    raw_mse: float
    corrected_mse: float
    mean_shots: float
    ref_shots: float
    mse_stderr: float

    def as_list(self) -> list:
        return [getattr(self, c) for c in CSV_COLUMNS]


def reference_shots(target: str, n: int) -> float:
    """Average G-DFE shots at ``epsilon = delta = 0.1`` for the published grid."""
    try:
        return REFERENCE_SHOTS[target][n]
    except KeyError:
        raise ConfigError(f"no reference shot count for ({target}, {n}); set ref_shots") from None


def make_target(kind: str, n: int, rng=None) -> np.ndarray:
    if kind == "ghz":
        return states.make_ghz(n)
    if kind == "w":
        return states.make_w(n)
    if kind == "haar":
        return states.make_haar(n, rng)
    raise ConfigError(f"unknown target {kind!r}")


def group_report(target: str, n: int, method: str) -> oasis_st.GroupingResult:
    """Grouping of the GHZ or W support, by sorted insertion or by the analytic catalog."""
    if target not in ("ghz", "w"):
        raise ConfigError("group reports exist for ghz and w only")
    if method == "analytic":
        return oasis_st.group_catalog(oasis_st.StructuredTarget(target, n))
    if method == "si":
        return grouping.group_target(make_target(target, n))
    raise ConfigError(f"method must be 'si' or 'analytic', got {method!r}")


class _Runner:
    """Per-target state (LP weights, groupings, samplers) reused across trials."""

    def __init__(self, config: ExperimentConfig):
        self.config = config
        self.povm = oasis_gt.build_pauli_povm(config.n) if config.estimator == "oasis_gt" else None
        self._fixed = None
        if config.target != "haar" or config.fixed_target:
            O = make_target(config.target, config.n, make_rng(config.base_seed, FIXED_TARGET_STREAM))
            self._fixed = self._prepare(O)

    def _budget(self) -> grouping.EstimationBudget:
        c = self.config
        if c.l is not None:
            return grouping.EstimationBudget(l=c.l, m=c.m)
        return grouping.EstimationBudget(epsilon=c.epsilon, delta=c.delta)

    def _prepare(self, O: np.ndarray) -> dict:
        c = self.config
        rho = states.depolarize(O, c.noise_strength)
        prep = {"O": O, "rho": rho, "fidelity": states.exact_fidelity(rho, O)}
        if c.estimator == "oasis_gt":
            weights, law, _ = oasis_gt.optimize_weights(
                self.povm, O, feas_tol=c.feas_tol, opt_tol=c.opt_tol, allow_large=c.allow_large
            )
            prep["weights"], prep["law"] = weights, law
        elif c.estimator == "gdfe":
            prep["grouping"] = grouping.group_target(O)
        else:
            target = oasis_st.StructuredTarget(c.target, c.n)
            prep["sampler"] = oasis_st.StructuredSampler(target, rho)
            m = None if c.m is None else (c.m, c.m2 if c.m2 is not None else c.m)
            eps = c.epsilon if c.epsilon is not None else 0.1
            dlt = c.delta if c.delta is not None else 0.1
            prep["st_budget"] = oasis_st.structured_budget(target, eps, dlt, c.l, m)
        return prep

    def trial(self, i: int) -> TrialRecord:
        c = self.config
        start = time.perf_counter()
        rng = make_rng(c.base_seed, i)
        prep = self._fixed if self._fixed is not None else self._prepare(make_target(c.target, c.n, rng))
        if c.estimator == "oasis_gt":
            rep = oasis_gt.gt_estimate(prep["rho"], prep["weights"], prep["law"], c.shots, rng)
        elif c.estimator == "gdfe":
            rep = grouping.gdfe_estimate(prep["rho"], prep["grouping"], self._budget(), rng)
        else:
            rep = prep["sampler"].estimate(*prep["st_budget"], rng)
        return TrialRecord(i, rep.estimate, prep["fidelity"], rep.shots_used, time.perf_counter() - start)


_WORKER: _Runner | None = None


def _init_worker(config_json: str) -> None:
    global _WORKER
    _WORKER = _Runner(ExperimentConfig.from_json(config_json))


def _worker_trial(i: int) -> TrialRecord:
    return _WORKER.trial(i)


def run_trials(config: ExperimentConfig) -> list[TrialRecord]:
    """All trials of ``config`` in index order."""
    if config.workers <= 1:
        runner = _Runner(config)
        return [runner.trial(i) for i in range(config.trials)]
    with ProcessPoolExecutor(config.workers, initializer=_init_worker, initargs=(config.to_json(),)) as pool:
        return list(pool.map(_worker_trial, range(config.trials), chunksize=max(1, config.trials // (8 * config.workers))))


def summarize(config: ExperimentConfig, records: list[TrialRecord]) -> SummaryRow:
    """MSE against exact fidelities, rescaled to the reference shot count.

    Unbiased estimators have MSE proportional to ``1/N``, so the MSE at the
    reference budget is ``raw * mean_shots / ref_shots``.
    """
    err2 = np.array([(r.estimate - r.fidelity) ** 2 for r in records])
    shots = np.array([r.shots_used for r in records], dtype=float)
    raw = float(err2.mean())
    stderr = float(err2.std(ddof=1) / math.sqrt(len(err2))) if len(err2) > 1 else float("nan")
    mean_shots = float(shots.mean())
    ref = config.ref_shots if config.ref_shots is not None else reference_shots(config.target, config.n)
    return SummaryRow(
        config.target, config.n, config.estimator, len(records), raw, raw * mean_shots / ref, mean_shots, float(ref), stderr
    )


def run_benchmark(config: ExperimentConfig) -> SummaryRow:
    return summarize(config, run_trials(config))


def _fmt(x) -> str:
    if isinstance(x, float):
        return repr(x)
    return str(x)


def summary_csv(rows: list[SummaryRow]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for row in rows:
        w.writerow([_fmt(x) for x in row.as_list()])
    return buf.getvalue()


def sidecar(config: ExperimentConfig, rows: list[SummaryRow]) -> str:
    meta = {
        "config": asdict(config),
        "correction": "corrected_mse = raw_mse * mean_shots / ref_shots",
        "rows": [asdict(r) for r in rows],
    }
    return json.dumps(meta, indent=2, sort_keys=True) + "\n"


def write_outputs(config: ExperimentConfig, rows: list[SummaryRow], out) -> None:
    out = Path(out)
    out.write_text(summary_csv(rows))
    out.with_suffix(out.suffix + ".json").write_text(sidecar(config, rows))


__all__ = [
    "ExperimentConfig",
    "ConfigError",
    "TrialRecord",
    "SummaryRow",
    "REFERENCE_SHOTS",
    "PUBLISHED_MSE",
    "PUBLISHED_GROUPS",
    "CSV_COLUMNS",
    "reference_shots",
    "make_target",
    "group_report",
    "run_trials",
    "summarize",
    "run_benchmark",
    "summary_csv",
    "sidecar",
    "write_outputs",
]
