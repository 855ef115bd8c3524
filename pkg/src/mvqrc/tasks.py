"""Benchmark signal generation: i.i.d. uniform streams and the
Lorenz-63 one-step-ahead prediction dataset.

The Lorenz trajectory is integrated by RK4 at dt = 0.005 with the
standard parameters, burned in past the attractor transient, then
downsampled by 18 (effective step 0.09) and min-max normalized per
component to [-1, 1].
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .numerics import Prng, rk4_step

__all__ = ["LorenzDataset", "uniform_streams", "lorenz_step", "lorenz_dataset"]

LORENZ_SIGMA = 10.0
LORENZ_RHO = 28.0
LORENZ_BETA = 8.0 / 3.0

RAW_DT = 0.005
DOWNSAMPLE = 18
SEQUENCE_LENGTH = 11000
WASHOUT = 1000
TRAIN = 6000
TEST = 4000
TRANSIENT_STEPS = 10000

COMPONENTS = {"x": 0, "y": 1, "z": 2}


def uniform_streams(prng: Prng, d: int, t: int) -> np.ndarray:
    """D x T table of i.i.d. U(-1, 1) values; one PRNG substream per stream."""
    if d < 1 or t < 1:
        raise DomainError("need d >= 1 and t >= 1")
    out = np.empty((d, t))
    for i in range(d):
        out[i] = prng.split(("stream", i)).uniform(-1.0, 1.0, size=t)
    return out


def _lorenz_rhs(state: np.ndarray) -> np.ndarray:
    x, y, z = state
    return np.array([
        LORENZ_SIGMA * (y - x),
        x * (LORENZ_RHO - z) - y,
        x * y - LORENZ_BETA * z,
    ])


def lorenz_step(state, dt: float = RAW_DT) -> np.ndarray:
    """One RK4 step of the Lorenz-63 equations at the standard parameters."""
    out = rk4_step(_lorenz_rhs, np.asarray(state, dtype=float), dt)
    if np.max(np.abs(out)) > 1e6:
        raise ArithmeticError("Lorenz trajectory blew up; check dt")
    return out


def _raw_trajectory(n_points: int, initial_state) -> np.ndarray:
    """Downsampled attractor trajectory of n_points states."""
    state = np.asarray(initial_state, dtype=float)
    for _ in range(TRANSIENT_STEPS):
        state = lorenz_step(state)
    points = np.empty((n_points, 3))
    points[0] = state
    for k in range(1, n_points):
        for _ in range(DOWNSAMPLE):
            state = lorenz_step(state)
        points[k] = state
    return points


@dataclass(frozen=True)
class LorenzDataset:
    """One-step-ahead prediction data with the fixed 1000/6000/4000 split.

    inputs[t] holds the selected normalized components at step t and
    targets[t] the predicted components at step t + 1 of the same
    normalized trajectory.
    """

    inputs: np.ndarray
    targets: np.ndarray
    trajectory: np.ndarray
    input_components: tuple
    target_components: tuple
    washout: int = WASHOUT
    train: int = TRAIN
    test: int = TEST

    @property
    def train_slice(self) -> slice:
        return slice(self.washout, self.washout + self.train)

    @property
    def test_slice(self) -> slice:
        return slice(self.washout + self.train, self.washout + self.train + self.test)


def _component_indices(components) -> tuple:
    indices = tuple(COMPONENTS[c] for c in components)
    if not indices:
        raise DomainError("component subset must be nonempty")
    return indices


def lorenz_dataset(
    input_components=("x", "y", "z"),
    target_components=("x",),
    initial_state=(1.0, 1.0, 1.0),
) -> LorenzDataset:
    """Build the normalized Lorenz-63 one-step prediction dataset.

    Deterministic for a fixed initial state: the trajectory, the min-max
    normalization extrema (taken over the full downsampled trajectory),
    and the split are all fixed by construction.
    """
    in_idx = _component_indices(input_components)
    out_idx = _component_indices(target_components)

    points = _raw_trajectory(SEQUENCE_LENGTH + 1, initial_state)
    lo = points.min(axis=0)
    hi = points.max(axis=0)
    normalized = 2.0 * (points - lo) / (hi - lo) - 1.0

    return LorenzDataset(
        inputs=normalized[:SEQUENCE_LENGTH][:, list(in_idx)],
        targets=normalized[1 : SEQUENCE_LENGTH + 1][:, list(out_idx)],
        trajectory=normalized,
        input_components=tuple(input_components),
        target_components=tuple(target_components),
    )


def dataset_to_csv(dataset: LorenzDataset) -> str:
    """Normalized trajectory as CSV text with columns t, x, y, z."""
    lines = ["t,x,y,z"]
    for t, row in enumerate(dataset.trajectory):
        lines.append(f"{t},{row[0]!r},{row[1]!r},{row[2]!r}")
    return "\n".join(lines) + "\n"
