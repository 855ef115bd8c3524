"""Linear readout layer trained by ordinary least squares.

Features are stored feature-major (M x T) with a constant bias row
appended below the reservoir observables. Weights solve

    W = Y X^T (X X^T)^{-1}

as a symmetric linear system; a one-shot diagonal jitter rescues
numerically singular Gram matrices (duplicate feature rows).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import DimensionError, RankDeficiencyError

__all__ = ["FeatureMatrix", "fit", "predict"]

_COND_LIMIT = 1e12


@dataclass(frozen=True)
class FeatureMatrix:
    """M x T table of readout features; the last row is the constant bias."""

    values: np.ndarray

    @classmethod
    def from_measurements(cls, measurements) -> "FeatureMatrix":
        """Wrap time-major (T x m) reservoir measurements, appending the bias row."""
        meas = np.asarray(measurements, dtype=float)
        if meas.ndim != 2:
            raise DimensionError(f"measurements must be 2-D, got shape {meas.shape}")
        if not np.all(np.isfinite(meas)):
            raise ValueError("measurements contain non-finite values")
        return cls(np.vstack([meas.T, np.ones((1, meas.shape[0]))]))

    @property
    def n_features(self) -> int:
        """Feature count M, bias included."""
        return self.values.shape[0]

    @property
    def n_steps(self) -> int:
        return self.values.shape[1]

    @property
    def measurements(self) -> np.ndarray:
        """Time-major (T x m) view of the reservoir observables, bias excluded."""
        return self.values[:-1].T

    def window(self, start: int, stop: int) -> "FeatureMatrix":
        """Column slice covering time steps [start, stop)."""
        return FeatureMatrix(self.values[:, start:stop])


def _find_duplicate_rows(x: np.ndarray) -> list[tuple[int, int]]:
    pairs = []
    for i in range(x.shape[0]):
        for j in range(i + 1, x.shape[0]):
            if np.allclose(x[i], x[j], atol=1e-12):
                pairs.append((i, j))
    return pairs


def fit(features: FeatureMatrix, targets) -> np.ndarray:
    """Least-squares readout weights (L x M) for targets of shape (L, T).

    Requires T >= M. If the Gram matrix condition estimate exceeds 1e12,
    a diagonal jitter of 1e-10 * trace/M is added once and the solve is
    retried; a still-singular system raises RankDeficiencyError.
    """
    x = features.values
    y = np.atleast_2d(np.asarray(targets, dtype=float))
    m, t = x.shape
    if y.shape[1] != t:
        raise DimensionError(f"targets have {y.shape[1]} steps, features {t}")
    if t < m:
        raise DimensionError(f"need at least M={m} time steps, got T={t}")

    gram = x @ x.T
    rhs = x @ y.T
    cond = np.linalg.cond(gram)
    if cond > _COND_LIMIT:
        gram = gram + (1e-10 * np.trace(gram) / m) * np.eye(m)
        cond = np.linalg.cond(gram)
        if cond > _COND_LIMIT:
            dupes = _find_duplicate_rows(x)
            raise RankDeficiencyError(
                f"Gram matrix singular after jitter (cond={cond:.2e}); "
                f"duplicate feature rows: {dupes or 'none found'}"
            )
    return scipy.linalg.solve(gram, rhs, assume_a="sym").T


def predict(weights, features: FeatureMatrix) -> np.ndarray:
    """Apply readout weights: (L x M) @ (M x T) -> (L x T)."""
    w = np.atleast_2d(np.asarray(weights, dtype=float))
    if w.shape[1] != features.n_features:
        raise DimensionError(
            f"weights expect {w.shape[1]} features, matrix has {features.n_features}"
        )
    return w @ features.values
