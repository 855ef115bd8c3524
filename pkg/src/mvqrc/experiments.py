"""Experiment pipelines: seedable objectives and grid runners.

Everything here is picklable so seed evaluations can run in worker
processes: objectives are top-level functions bound to frozen
PipelineSpec instances via functools.partial.

Pipeline per realization seed: derive substreams (signals, couplings,
mask, input-weights) from the seed generator, build the encoding and
couplings, drive the reservoir, and score either the mixing capacity
(T = washout + eval protocol) or the Lorenz one-step NRMSE on the test
split.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass

import numpy as np

from . import hyperopt, metrics, quantum_props, readout, reservoir_cv, reservoir_dv, tasks
from .encoding import EncodingSpec, build_clustered, build_global, build_local
from .errors import DomainError
from .hyperopt import SearchSpace, StudyConfig
from .numerics import Prng
from .readout import FeatureMatrix
from .tasks import lorenz_dataset

__all__ = [
    "PipelineSpec",
    "build_encoding",
    "capacity_objective",
    "lorenz_objective",
    "make_study",
    "optimize_point",
    "capacity_at_params",
    "lorenz_at_params",
    "quantum_sweep_point",
]

SYSTEMS = ("dv", "cv")


@dataclass(frozen=True)
class PipelineSpec:
    """Frozen description of one reservoir evaluation pipeline."""

    system: str
    encoding: str
    n: int
    d: int
    washout: int = 1000
    t_eval: int = 10000
    tau_max: int = 15
    p_level: float = 1e-4
    early_stop: bool = False
    input_components: tuple = ("x",)
    target_components: tuple = ("x",)
    dv_substeps: int | None = None
    dv_propagator: str = "split"

    def __post_init__(self):
        if self.system not in SYSTEMS:
            raise DomainError(f"unknown system {self.system!r}")

    def n_outputs(self) -> int:
        """Measurement count: 3n Pauli (dv) or n(n+1)/2 covariances (cv)."""
        if self.system == "dv":
            return 3 * self.n
        return self.n * (self.n + 1) // 2


def build_encoding(prng: Prng, method: str, n: int, d: int, epsilon: float) -> EncodingSpec:
    if method == "local":
        return build_local(n, d, epsilon)
    if method == "clustered":
        return build_clustered(prng.split("mask"), n, d, epsilon)
    if method == "global":
        return build_global(prng.split("input-weights"), n, d, epsilon)
    raise DomainError(f"unknown encoding method {method!r}")


def _run_reservoir(pipe: PipelineSpec, params: dict, prng: Prng, inputs, state_hook=None) -> FeatureMatrix:
    enc = build_encoding(prng, pipe.encoding, pipe.n, pipe.d, params["epsilon"])
    coupling_prng = prng.split("couplings")
    if pipe.system == "dv":
        config = reservoir_dv.DvConfig(
            n=pipe.n,
            j=params["j"],
            gamma=params["gamma"],
            substeps_per_unit_time=pipe.dv_substeps,
            propagator=pipe.dv_propagator,
        )
        couplings = reservoir_dv.init_couplings(coupling_prng, pipe.n, params["j"])
        return reservoir_dv.run(config, couplings, enc, inputs, state_hook=state_hook)
    config = reservoir_cv.CvConfig(n=pipe.n, j=params["j"], gamma=params["gamma"])
    couplings = reservoir_cv.init_couplings(coupling_prng, pipe.n, params["j"])
    return reservoir_cv.run(config, couplings, enc, inputs, state_hook=state_hook)


def _capacity_report(pipe: PipelineSpec, params: dict, prng: Prng, state_hook=None) -> metrics.CapacityReport:
    t_total = pipe.washout + pipe.t_eval
    streams = tasks.uniform_streams(prng.split("signals"), pipe.d, t_total)
    features = _run_reservoir(pipe, params, prng, streams.T, state_hook=state_hook)
    eval_features = features.window(pipe.washout, t_total)
    return metrics.mixing_capacity(
        eval_features,
        streams,
        tau_max=pipe.tau_max,
        p_level=pipe.p_level,
        early_stop=pipe.early_stop,
    )


def capacity_objective(params: dict, seed_index: int, prng: Prng, pipe: PipelineSpec) -> float:
    """Mixing capacity of one reservoir realization (maximize)."""
    return _capacity_report(pipe, params, prng).total


@functools.lru_cache(maxsize=8)
def _cached_dataset(input_components: tuple, target_components: tuple):
    return lorenz_dataset(input_components, target_components)


def lorenz_objective(params: dict, seed_index: int, prng: Prng, pipe: PipelineSpec) -> float:
    """Test-split NRMSE of one-step Lorenz prediction (minimize)."""
    return lorenz_run(params, prng, pipe)[0]


def lorenz_run(params: dict, prng: Prng, pipe: PipelineSpec, state_hook=None):
    """NRMSE plus the pieces needed for overlay plots and baselines."""
    data = _cached_dataset(pipe.input_components, pipe.target_components)
    features = _run_reservoir(pipe, params, prng, data.inputs, state_hook=state_hook)
    targets = data.targets.T
    train, test = data.train_slice, data.test_slice
    weights = readout.fit(features.window(train.start, train.stop), targets[:, train])
    predicted = readout.predict(weights, features.window(test.start, test.stop))
    true = targets[:, test]
    return metrics.nrmse(true, predicted), true, predicted, data


def persistence_baseline_nrmse(pipe: PipelineSpec) -> float:
    """NRMSE of predicting y(t+1) = y(t) on the test split."""
    data = _cached_dataset(pipe.input_components, pipe.target_components)
    idx = [tasks.COMPONENTS[c] for c in pipe.target_components]
    test = data.test_slice
    true = data.targets[test].T
    held = data.trajectory[: tasks.SEQUENCE_LENGTH][test][:, idx].T
    return metrics.nrmse(true, held)


def make_study(
    pipe: PipelineSpec,
    kind: str,
    n_seeds: int,
    master_seed: int,
    map_fn=None,
) -> StudyConfig:
    if kind == "capacity":
        objective = functools.partial(capacity_objective, pipe=pipe)
        direction = "maximize"
    elif kind == "lorenz":
        objective = functools.partial(lorenz_objective, pipe=pipe)
        direction = "minimize"
    else:
        raise DomainError(f"unknown objective kind {kind!r}")
    return StudyConfig(
        objective=objective,
        direction=direction,
        n_seeds=n_seeds,
        master_seed=master_seed,
        map_fn=map_fn,
    )


def optimize_point(
    pipe: PipelineSpec,
    kind: str,
    n_trials: int,
    n_seeds: int,
    master_seed: int,
    space: SearchSpace | None = None,
    map_fn=None,
) -> hyperopt.StudyResult:
    study = make_study(pipe, kind, n_seeds, master_seed, map_fn)
    return hyperopt.optimize(study, space=space, n_trials=n_trials)


def capacity_at_params(pipe: PipelineSpec, params: dict, n_seeds: int, master_seed: int, map_fn=None):
    """Per-seed mixing capacities at a fixed hyperparameter point."""
    study = make_study(pipe, "capacity", n_seeds, master_seed, map_fn)
    return hyperopt.evaluate_objective(params, study)


def lorenz_at_params(pipe: PipelineSpec, params: dict, n_seeds: int, master_seed: int, map_fn=None):
    study = make_study(pipe, "lorenz", n_seeds, master_seed, map_fn)
    return hyperopt.evaluate_objective(params, study)


def quantum_sweep_point(
    params: dict,
    seed_index: int,
    prng: Prng,
    pipe: PipelineSpec,
    kind: str = "capacity",
):
    """Performance metric and mean quantum property from one trajectory.

    The property (negativity for dv, squeezing in dB for cv) is sampled
    from the state at the end of each post-washout input window of the
    same run that produces the performance features.
    """
    washout = pipe.washout
    values = []

    if pipe.system == "dv":
        def hook(t, state):
            if t >= washout:
                values.append(quantum_props.mean_negativity([state]))
    else:
        def hook(t, state):
            if t >= washout:
                values.append(quantum_props.max_squeezing_db(state))

    if kind == "capacity":
        report = _capacity_report(pipe, params, prng, state_hook=hook)
        metric = report.total
    else:
        metric = lorenz_run(params, prng, pipe, state_hook=hook)[0]
    return metric, float(np.mean(values))
