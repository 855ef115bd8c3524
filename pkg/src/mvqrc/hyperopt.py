"""Hyperparameter search over (J, epsilon, gamma).

Random log-uniform startup followed by a simplified Parzen-estimator
loop: trials are split at the best quartile, one-dimensional Gaussian
kernel densities are built over each split in log space, and the
candidate maximizing the good/rest density ratio is evaluated next.
The search space is flat, so no conditional tree structure is needed.

Objectives are averaged over a fixed set of reservoir realizations
(seeds). The same per-seed substreams are reused at every trial, so a
study is a deterministic function of its master seed, and failed
evaluations score worst-possible instead of aborting the study.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError
from .numerics import Prng

__all__ = [
    "SearchSpace",
    "TrialRecord",
    "StudyConfig",
    "evaluate_objective",
    "suggest_random",
    "suggest_tpe",
    "optimize",
]

N_STARTUP = 10
GOOD_QUANTILE = 0.25
N_CANDIDATES = 24
BANDWIDTH_FLOOR_FRACTION = 0.01


@dataclass(frozen=True)
class SearchSpace:
    """Per-dimension (lo, hi) bounds, each sampled log-uniformly."""

    j: tuple = (1e-4, 10.0)
    epsilon: tuple = (1e-3, 1.0)
    gamma: tuple = (1e-2, 100.0)

    def __post_init__(self):
        for name, (lo, hi) in self.dims().items():
            if not 0 < lo < hi:
                raise DomainError(f"bad range for {name}: [{lo}, {hi}]")

    def dims(self) -> dict:
        return {"j": self.j, "epsilon": self.epsilon, "gamma": self.gamma}

    def contains(self, params: dict) -> bool:
        return all(lo <= params[k] <= hi for k, (lo, hi) in self.dims().items())


@dataclass(frozen=True)
class TrialRecord:
    """One evaluated hyperparameter point."""

    index: int
    params: dict
    per_seed: list
    aggregate: float
    failed: bool = False

    def to_json(self) -> str:
        return json.dumps(
            {
                "trial": self.index,
                "params": self.params,
                "per_seed": self.per_seed,
                "aggregate": self.aggregate,
                "failed": self.failed,
            }
        )


@dataclass(frozen=True)
class StudyConfig:
    """Study-level settings binding the objective to its evaluation budget.

    `objective(params, seed_index, prng)` returns one scalar per
    reservoir realization; `direction` is "maximize" or "minimize".
    `map_fn` may be an executor map to evaluate seeds concurrently;
    results are always reduced in seed order.
    """

    objective: object
    direction: str = "maximize"
    n_seeds: int = 10
    master_seed: int = 0
    map_fn: object = None

    def __post_init__(self):
        if self.direction not in ("maximize", "minimize"):
            raise DomainError(f"unknown direction {self.direction!r}")

    @property
    def worst(self) -> float:
        return -math.inf if self.direction == "maximize" else math.inf


def _seed_prng(master_seed: int, seed_index: int) -> Prng:
    return Prng(master_seed).split(("realization", seed_index))


def evaluate_objective(params: dict, study: StudyConfig, index: int = 0) -> TrialRecord:
    """Evaluate one hyperparameter point over the study's seeds.

    Seed substreams depend only on (master_seed, seed index), never the
    trial index, so every trial scores against the same reservoir
    realizations (common random numbers) and records are reproducible.
    """
    jobs = [
        (params, seed, _seed_prng(study.master_seed, seed))
        for seed in range(study.n_seeds)
    ]
    mapper = study.map_fn if study.map_fn is not None else _sequential_map
    try:
        per_seed = [float(v) for v in mapper(study.objective, jobs)]
        failed = any(not math.isfinite(v) for v in per_seed)
    except ArithmeticError:
        per_seed = [study.worst] * study.n_seeds
        failed = True
    aggregate = study.worst if failed else float(np.mean(per_seed))
    return TrialRecord(index, dict(params), per_seed, aggregate, failed)


def _sequential_map(objective, jobs):
    return [objective(*job) for job in jobs]


def suggest_random(prng: Prng, space: SearchSpace) -> dict:
    """Independent log-uniform draw in every dimension."""
    params = {}
    for name, (lo, hi) in space.dims().items():
        params[name] = math.exp(prng.uniform(math.log(lo), math.log(hi)))
    return params


def _kde_log_density(x: float, centers: np.ndarray, bandwidth: float) -> float:
    z = (x - centers) / bandwidth
    weights = np.exp(-0.5 * z**2)
    density = np.sum(weights) / (len(centers) * bandwidth * math.sqrt(2 * math.pi))
    return math.log(max(density, 1e-300))


def _bandwidth(values: np.ndarray, log_range: float) -> float:
    scott = np.std(values) * len(values) ** -0.2
    return max(scott, BANDWIDTH_FLOOR_FRACTION * log_range)


def suggest_tpe(
    history: list,
    space: SearchSpace,
    prng: Prng,
    direction: str = "maximize",
) -> dict:
    """Parzen-estimator proposal from the trial history.

    Below the startup count (or with a degenerate history) this
    delegates to suggest_random; proposals are always clipped to the
    search bounds.
    """
    if len(history) < N_STARTUP:
        return suggest_random(prng, space)
    finite = [t for t in history if math.isfinite(t.aggregate)]
    if len(finite) < 2 or len({t.aggregate for t in finite}) < 2:
        return suggest_random(prng, space)

    sign = -1.0 if direction == "maximize" else 1.0
    ranked = sorted(history, key=lambda t: (sign * t.aggregate if math.isfinite(t.aggregate) else math.inf))
    n_good = max(1, math.ceil(GOOD_QUANTILE * len(ranked)))
    good, rest = ranked[:n_good], ranked[n_good:]

    dims = space.dims()
    log_good = {
        k: np.log([t.params[k] for t in good]) for k in dims
    }
    log_rest = {
        k: np.log([t.params[k] for t in rest]) for k in dims
    }

    best_score = -math.inf
    best = None
    for _ in range(N_CANDIDATES):
        candidate = {}
        score = 0.0
        for name, (lo, hi) in dims.items():
            log_lo, log_hi = math.log(lo), math.log(hi)
            log_range = log_hi - log_lo
            bw_good = _bandwidth(log_good[name], log_range)
            bw_rest = _bandwidth(log_rest[name], log_range)
            center = log_good[name][int(prng.integers(0, len(good)))]
            x = float(np.clip(prng.normal(center, bw_good), log_lo, log_hi))
            score += _kde_log_density(x, log_good[name], bw_good)
            score -= _kde_log_density(x, log_rest[name], bw_rest)
            candidate[name] = math.exp(x)
        if score > best_score:
            best_score = score
            best = candidate
    return best


@dataclass
class StudyResult:
    best: TrialRecord
    history: list = field(repr=False)


def optimize(
    study: StudyConfig,
    space: SearchSpace | None = None,
    n_trials: int = 100,
) -> StudyResult:
    """Run the startup + Parzen loop and return the best trial and history.

    Trials are sequential (each proposal depends on the history); only
    within-trial seed evaluations parallelize through study.map_fn.
    """
    if n_trials < 1:
        raise DomainError("n_trials must be positive")
    space = space or SearchSpace()
    sampler = Prng(study.master_seed).split("optimizer")
    history: list = []
    best: TrialRecord | None = None
    better = (lambda a, b: a > b) if study.direction == "maximize" else (lambda a, b: a < b)
    for index in range(n_trials):
        params = suggest_tpe(history, space, sampler, study.direction)
        record = evaluate_objective(params, study, index)
        history.append(record)
        if best is None or better(record.aggregate, best.aggregate):
            best = record
    return StudyResult(best=best, history=history)
