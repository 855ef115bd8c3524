"""Multivariate input encodings.

Maps a D-dimensional input vector s(t) with entries in [-1, 1] onto
per-node drive values alpha_i(t) in [1 - eps, 1 + eps]. Three methods:

* local:     dimension j drives node j directly; remaining nodes constant.
* clustered: dimension j drives a contiguous block of K = floor(n/D)
             nodes, each scaled by a frozen random mask weight in [0, 1].
* global:    all dimensions drive every node through a frozen random
             input weight matrix with unit row L1 norms.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import CapacityError, DimensionError, DomainError
from .numerics import Prng

__all__ = ["EncodingSpec", "build_local", "build_clustered", "build_global", "encode"]

METHODS = ("local", "clustered", "global")


@dataclass(frozen=True)
class EncodingSpec:
    """Frozen description of one input encoding.

    mask is only meaningful for the clustered method (length n, zeros on
    undriven nodes); input_weights only for the global method (n x D,
    unit row L1 norms).
    """

    method: str
    n: int
    d: int
    epsilon: float
    mask: np.ndarray | None = field(default=None, repr=False)
    input_weights: np.ndarray | None = field(default=None, repr=False)

    @property
    def block_size(self) -> int:
        """Nodes per input dimension for the clustered method."""
        return self.n // self.d

    def __post_init__(self):
        if self.method not in METHODS:
            raise DomainError(f"unknown encoding method {self.method!r}")
        if self.n < 1 or self.d < 1:
            raise DomainError("n and D must be positive")
        if not 0.0 < self.epsilon <= 1.0:
            raise DomainError(f"epsilon must be in (0, 1], got {self.epsilon}")


def _check_capacity(n: int, d: int):
    if d > n:
        raise CapacityError(
            f"encoding supports at most n={n} input dimensions, got D={d}"
        )


def build_local(n: int, d: int, epsilon: float) -> EncodingSpec:
    """Encoding where dimension j drives node j; nodes j >= D stay constant."""
    _check_capacity(n, d)
    return EncodingSpec("local", n, d, epsilon)


def build_clustered(prng: Prng, n: int, d: int, epsilon: float) -> EncodingSpec:
    """Encoding over contiguous blocks of K = floor(n/D) nodes.

    Mask weights xi_i ~ U(0, 1) are drawn once for each of the K*D driven
    nodes; any nodes beyond K*D stay constant.
    """
    _check_capacity(n, d)
    k = n // d
    mask = np.zeros(n)
    mask[: k * d] = prng.uniform(0.0, 1.0, size=k * d)
    return EncodingSpec("clustered", n, d, epsilon, mask=mask)


def build_global(prng: Prng, n: int, d: int, epsilon: float) -> EncodingSpec:
    """Encoding through a random n x D weight matrix with unit row L1 norms.

    Entries are drawn U(-1, 1) and each row is divided by its L1 norm.
    A row whose L1 norm falls below 1e-12 before normalization is redrawn
    so no node is ever silently undriven. Any D is allowed.
    """
    if n < 1 or d < 1:
        raise DomainError("n and D must be positive")
    w = prng.uniform(-1.0, 1.0, size=(n, d))
    for i in range(n):
        while np.sum(np.abs(w[i])) < 1e-12:
            w[i] = prng.uniform(-1.0, 1.0, size=d)
    w = w / np.sum(np.abs(w), axis=1, keepdims=True)
    return EncodingSpec("global", n, d, epsilon, input_weights=w)


def encode(spec: EncodingSpec, s) -> np.ndarray:
    """Per-node drive values alpha for one input vector.

    Requires |s_j| <= 1 (inputs are pre-normalized by contract); the
    result then always lies in [1 - eps, 1 + eps].
    """
    s = np.asarray(s, dtype=float)
    if s.shape != (spec.d,):
        raise DimensionError(f"expected input of shape ({spec.d},), got {s.shape}")
    if np.max(np.abs(s)) > 1.0 + 1e-12:
        raise DomainError("input entries must lie in [-1, 1]")

    eps = spec.epsilon
    alpha = np.ones(spec.n)
    if spec.method == "local":
        alpha[: spec.d] += eps * s
    elif spec.method == "clustered":
        k = spec.block_size
        driven = k * spec.d
        stream = np.repeat(np.arange(spec.d), k)
        alpha[:driven] += eps * spec.mask[:driven] * s[stream]
    else:
        alpha += eps * (spec.input_weights @ s)
    return alpha
