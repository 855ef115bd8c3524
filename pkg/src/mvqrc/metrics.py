"""Mixing capacity with significance pruning, its normalized variant,
and the normalized root mean squared error.

The mixing capacity sums, over all unordered stream pairs i < j and all
delay pairs (tau1, tau2), the in-sample capacity to reconstruct the
product target y(t) = s_i(t - tau1) * s_j(t - tau2), keeping only
contributions above a chi-squared significance threshold that corrects
for finite-sequence inflation.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field

import numpy as np

from . import readout
from .errors import DimensionError, DomainError
from .numerics import chi2_quantile
from .readout import FeatureMatrix

__all__ = [
    "DegenerateTargetError",
    "TargetRecord",
    "CapacityReport",
    "capacity",
    "significance_threshold",
    "mixing_capacity",
    "normalized_mixing_capacity",
    "nrmse",
]


class DegenerateTargetError(ValueError):
    """Target signal has (numerically) zero power."""


def _in_sample_capacities(features: FeatureMatrix, targets: np.ndarray) -> np.ndarray:
    """Row-wise capacity 1 - MSE/power for a stack of targets (L x T)."""
    power = np.mean(targets**2, axis=1)
    if np.any(power <= 1e-300):
        raise DegenerateTargetError("target with zero power")
    weights = readout.fit(features, targets)
    resid = targets - readout.predict(weights, features)
    caps = 1.0 - np.mean(resid**2, axis=1) / power
    return np.clip(caps, 0.0, 1.0)


def capacity(features: FeatureMatrix, target) -> float:
    """In-sample capacity of the readout to reconstruct one target sequence."""
    target = np.asarray(target, dtype=float)
    if target.ndim != 1:
        raise DimensionError("target must be a 1-D sequence")
    return float(_in_sample_capacities(features, target[None, :])[0])


def significance_threshold(p_level: float, n_obs: int, t: int) -> float:
    """Capacity threshold 2 * chi2_{1-p}(N_obs) / T below which a
    contribution is treated as noise."""
    if n_obs < 1 or t < 1:
        raise DomainError("n_obs and t must be positive")
    return 2.0 * chi2_quantile(1.0 - p_level, n_obs) / t


@dataclass(frozen=True)
class TargetRecord:
    i: int
    j: int
    tau1: int
    tau2: int
    capacity: float
    kept: bool


@dataclass(frozen=True)
class CapacityReport:
    """Outcome of one mixing-capacity evaluation."""

    total: float
    per_target: list = field(repr=False)
    threshold: float
    t_eval: int
    n_obs: int
    p_level: float
    tau_max: int

    def to_json(self) -> str:
        return json.dumps(
            {
                "total": self.total,
                "threshold": self.threshold,
                "parameters": {
                    "T": self.t_eval,
                    "N_obs": self.n_obs,
                    "p": self.p_level,
                    "tau_max": self.tau_max,
                },
                "per_target": [
                    {
                        "i": r.i,
                        "j": r.j,
                        "tau1": r.tau1,
                        "tau2": r.tau2,
                        "capacity": r.capacity,
                        "kept": r.kept,
                    }
                    for r in self.per_target
                ],
            },
            indent=2,
        )

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["i", "j", "tau1", "tau2", "capacity", "kept"])
        for r in self.per_target:
            writer.writerow([r.i, r.j, r.tau1, r.tau2, repr(r.capacity), int(r.kept)])
        return buf.getvalue()


def mixing_capacity(
    features: FeatureMatrix,
    streams,
    tau_max: int = 15,
    p_level: float = 1e-4,
    early_stop: bool = False,
) -> CapacityReport:
    """Significance-pruned sum of delayed cross-product capacities.

    `streams` is the full (D x T_record) input record that drove the
    reservoir; the evaluation window is aligned to its last T columns
    where T = features.n_steps, so the record must extend at least
    tau_max steps before the window (the discarded washout provides
    that history). Targets are y(t) = s_i(t - tau1) * s_j(t - tau2) for
    unordered pairs i < j on the full (tau1, tau2) in [0, tau_max]^2
    grid; each one counted once.

    With early_stop=True, delay shells max(tau1, tau2) = 0, 1, ... are
    processed in order and the scan stops after the first shell with no
    kept contribution.
    """
    streams = np.asarray(streams, dtype=float)
    if streams.ndim != 2:
        raise DimensionError("streams must be a (D x T_record) table")
    d, t_record = streams.shape
    if d < 2:
        raise DomainError("mixing capacity needs at least two input streams")
    t_eval = features.n_steps
    offset = t_record - t_eval
    if offset < tau_max:
        raise DimensionError(
            f"stream record too short: need {t_eval + tau_max} columns, have {t_record}"
        )

    n_obs = features.n_features
    threshold = significance_threshold(p_level, n_obs, t_eval)
    pairs = [(i, j) for i in range(d) for j in range(i + 1, d)]

    def shell_cells(tau: int):
        """(tau1, tau2) pairs with max == tau, in row-major order."""
        if tau == 0:
            return [(0, 0)]
        return (
            [(tau1, tau) for tau1 in range(tau)]
            + [(tau, tau2) for tau2 in range(tau)]
            + [(tau, tau)]
        )

    records = []
    total = 0.0
    for tau in range(tau_max + 1):
        cells = shell_cells(tau)
        labels = [(i, j, t1, t2) for (i, j) in pairs for (t1, t2) in cells]
        targets = np.empty((len(labels), t_eval))
        base = np.arange(offset, offset + t_eval)
        for row, (i, j, t1, t2) in enumerate(labels):
            targets[row] = streams[i, base - t1] * streams[j, base - t2]
        caps = _in_sample_capacities(features, targets)
        kept_any = False
        for (i, j, t1, t2), c in zip(labels, caps):
            kept = c > threshold
            records.append(TargetRecord(i, j, t1, t2, float(c), kept))
            if kept:
                total += float(c)
                kept_any = True
        if early_stop and not kept_any:
            break

    records.sort(key=lambda r: (r.i, r.j, r.tau1, r.tau2))
    return CapacityReport(
        total=total,
        per_target=records,
        threshold=threshold,
        t_eval=t_eval,
        n_obs=n_obs,
        p_level=p_level,
        tau_max=tau_max,
    )


def normalized_mixing_capacity(report: CapacityReport, d: int, n_outputs: int) -> float:
    """Total capacity normalized by the D(D-1)/2 stream combinations and
    the number of reservoir outputs (3n discrete / n(n+1)/2 continuous)."""
    if d < 2:
        raise DomainError("normalization requires D >= 2")
    if n_outputs < 1:
        raise DomainError("n_outputs must be positive")
    return report.total / (d * (d - 1) / 2.0 * n_outputs)


def nrmse(y, yhat) -> float:
    """Root mean squared error over all entries, normalized by the RMS of y."""
    y = np.asarray(y, dtype=float)
    yhat = np.asarray(yhat, dtype=float)
    if y.shape != yhat.shape:
        raise DimensionError(f"shape mismatch {y.shape} vs {yhat.shape}")
    power = np.mean(y**2)
    if power <= 1e-300:
        raise DegenerateTargetError("reference signal has zero power")
    return math.sqrt(np.mean((y - yhat) ** 2) / power)
