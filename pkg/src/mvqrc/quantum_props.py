"""Quantum-resource diagnostics: entanglement negativity for the spin
reservoir and maximum squeezing (in dB) for the oscillator reservoir.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import DomainError, UnphysicalStateError
from .numerics import hermitian_eigenvalues

__all__ = [
    "bipartitions",
    "partial_transpose",
    "negativity",
    "mean_negativity",
    "max_squeezing_db",
]


def bipartitions(n: int) -> list:
    """All 2^(n-1) - 1 unique bipartitions of n spins.

    Each is returned as the subset containing spin 0 (as a tuple), which
    enumerates every split exactly once without listing complements.
    """
    if n < 2:
        raise DomainError("bipartitions require at least two spins")
    rest = list(range(1, n))
    out = []
    for bits in range(2 ** (n - 1) - 1):
        subset = (0,) + tuple(rest[k] for k in range(n - 1) if bits & (1 << k))
        out.append(subset)
    return out


def partial_transpose(rho, subset) -> np.ndarray:
    """Transpose the indices of the qubits in `subset`.

    Qubit k corresponds to tensor axis k (ket) and axis n + k (bra) of
    rho reshaped to (2,) * 2n.
    """
    rho = np.asarray(rho, dtype=complex)
    dim = rho.shape[0]
    n = int(round(math.log2(dim)))
    subset = tuple(sorted(set(subset)))
    if not subset or any(q < 0 or q >= n for q in subset):
        raise DomainError(f"invalid qubit subset {subset} for n={n}")
    tensor = rho.reshape((2,) * (2 * n))
    axes = list(range(2 * n))
    for q in subset:
        axes[q], axes[n + q] = axes[n + q], axes[q]
    return tensor.transpose(axes).reshape(dim, dim)


def negativity(rho, subset) -> float:
    """Entanglement negativity (||rho^{T_A}||_1 - 1) / 2 across one split."""
    eigs = hermitian_eigenvalues(partial_transpose(rho, subset))
    value = 0.5 * (np.sum(np.abs(eigs)) - 1.0)
    if value < -1e-12:
        raise UnphysicalStateError(f"trace norm below 1 by {-value:.2e}")
    return max(0.0, float(value))


def mean_negativity(states) -> float:
    """Negativity averaged over all bipartitions and all supplied states."""
    states = list(states)
    if not states:
        raise DomainError("empty state sequence")
    n = int(round(math.log2(np.asarray(states[0]).shape[0])))
    splits = bipartitions(n)
    total = 0.0
    for rho in states:
        for subset in splits:
            total += negativity(rho, subset)
    return total / (len(states) * len(splits))


def max_squeezing_db(sigma) -> float:
    """-10 log10(lambda_min / (1/2)) for a covariance matrix sigma.

    Positive when some quadrature variance dips below the vacuum value.
    """
    sigma = np.asarray(sigma, dtype=float)
    lam_min = float(np.linalg.eigvalsh(0.5 * (sigma + sigma.T))[0])
    if lam_min <= 0:
        raise UnphysicalStateError(f"covariance has nonpositive eigenvalue {lam_min:.2e}")
    return -10.0 * math.log10(lam_min / 0.5)
