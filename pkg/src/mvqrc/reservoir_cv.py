"""Gaussian oscillator-network reservoir.

n coupled harmonic oscillators whose time-dependent frequencies encode
the input. The state is the 2n x 2n quadrature covariance matrix in
(q_1..q_n, p_1..p_n) ordering, evolving under a linear Langevin
equation with drift A = Omega M - (gamma/2) I and diffusion
D = (gamma/2) I. Within each unit input window the drift is constant,
so propagation uses the exact solution

    sigma(t + dt) = e^{A dt} (sigma - sigma_ss) e^{A^T dt} + sigma_ss

with sigma_ss from the continuous Lyapunov equation; numerical ODE
stepping exists only as a cross-check oracle in the tests.

Vacuum convention: sigma_vac = I/2 (hbar = 1).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .encoding import EncodingSpec, encode
from .errors import DimensionError, DomainError, UnphysicalStateError
from .numerics import Prng, lyapunov_solve, mat_exp
from .readout import FeatureMatrix

__all__ = [
    "CvConfig",
    "init_couplings",
    "symplectic_form",
    "hamiltonian_matrix",
    "drift_and_diffusion",
    "step_exact",
    "measure",
    "run",
    "vacuum_state",
    "physicality_margin",
]


@dataclass(frozen=True)
class CvConfig:
    """Oscillator-reservoir parameters; gamma > 0 keeps the drift Hurwitz."""

    n: int
    j: float
    gamma: float
    dt_input: float = 1.0

    def __post_init__(self):
        if self.n < 1:
            raise DomainError("n must be positive")
        if self.j < 0:
            raise DomainError("J must be nonnegative")
        if self.gamma <= 0:
            raise DomainError("gamma must be positive for a stable drift")


def init_couplings(prng: Prng, n: int, j: float) -> np.ndarray:
    """Symmetric nonnegative couplings J_ik ~ U(0, J) above the diagonal."""
    if n < 1:
        raise DomainError("n must be positive")
    if j < 0:
        raise DomainError("J must be nonnegative")
    couplings = np.zeros((n, n))
    for i in range(n):
        for k in range(i + 1, n):
            couplings[i, k] = couplings[k, i] = (
                prng.uniform(0.0, j) if j > 0 else 0.0
            )
    return couplings


def symplectic_form(n: int) -> np.ndarray:
    """Omega = [[0, I], [-I, 0]] in (q, p) ordering."""
    eye = np.eye(n)
    zero = np.zeros((n, n))
    return np.block([[zero, eye], [-eye, zero]])


def hamiltonian_matrix(couplings, omega) -> np.ndarray:
    """Quadratic-form matrix M with H = (1/2) R^T M R, R = (q, p).

    The Q block is diag(omega_i^2) plus the coupling Laplacian from
    expanding sum_{i<k} (J_ik / 2)(q_i - q_k)^2; the P block is the
    identity.
    """
    couplings = np.asarray(couplings, dtype=float)
    omega = np.asarray(omega, dtype=float)
    n = couplings.shape[0]
    if couplings.shape != (n, n):
        raise DimensionError("couplings must be square")
    if omega.shape != (n,):
        raise DimensionError(f"omega must have shape ({n},), got {omega.shape}")
    if np.any(omega < 0):
        raise DomainError("frequencies must be nonnegative")
    laplacian = np.diag(couplings.sum(axis=1)) - couplings
    m = np.zeros((2 * n, 2 * n))
    m[:n, :n] = np.diag(omega**2) + laplacian
    m[n:, n:] = np.eye(n)
    return m


def drift_and_diffusion(m, gamma: float):
    """Drift A = Omega M - (gamma/2) I and diffusion D = (gamma/2) I."""
    m = np.asarray(m, dtype=float)
    if gamma <= 0:
        raise DomainError("gamma must be positive")
    n2 = m.shape[0]
    a = symplectic_form(n2 // 2) @ m - 0.5 * gamma * np.eye(n2)
    d = 0.5 * gamma * np.eye(n2)
    return a, d


def step_exact(sigma, a, d, dt_input: float = 1.0) -> np.ndarray:
    """Exact propagation of the covariance ODE over one window of fixed A."""
    sigma = np.asarray(sigma, dtype=float)
    sigma_ss = lyapunov_solve(a, d)
    propagator = mat_exp(a, dt_input)
    out = propagator @ (sigma - sigma_ss) @ propagator.T + sigma_ss
    return 0.5 * (out + out.T)


def measure(sigma) -> np.ndarray:
    """Position covariances sigma_{q_i q_k} for i <= k, row-major order."""
    sigma = np.asarray(sigma, dtype=float)
    n = sigma.shape[0] // 2
    iu = np.triu_indices(n)
    return sigma[:n, :n][iu]


def vacuum_state(n: int) -> np.ndarray:
    return 0.5 * np.eye(2 * n)


def physicality_margin(sigma) -> float:
    """Smallest eigenvalue of sigma + (i/2) Omega; >= 0 for physical states."""
    sigma = np.asarray(sigma, dtype=float)
    n = sigma.shape[0] // 2
    herm = sigma + 0.5j * symplectic_form(n)
    return float(np.linalg.eigvalsh(herm)[0])


def run(
    config: CvConfig,
    couplings,
    encoding_spec: EncodingSpec,
    inputs,
    initial_state=None,
    state_hook=None,
) -> FeatureMatrix:
    """Drive the reservoir with a T x D input sequence.

    Per step the encoded values become the oscillator frequencies, held
    constant over the unit window; the covariance is propagated exactly
    and the upper-triangle position covariances are recorded.
    """
    inputs = np.asarray(inputs, dtype=float)
    if inputs.ndim != 2:
        inputs = inputs.reshape(-1, encoding_spec.d)
    if encoding_spec.n != config.n:
        raise DimensionError("encoding spec and config disagree on n")
    if inputs.shape[1] != encoding_spec.d:
        raise DimensionError(
            f"inputs have D={inputs.shape[1]}, encoding expects {encoding_spec.d}"
        )

    n = config.n
    couplings = np.asarray(couplings, dtype=float)
    t_steps = inputs.shape[0]
    features = np.empty((t_steps, n * (n + 1) // 2))
    if t_steps == 0:
        return FeatureMatrix.from_measurements(features)

    sigma = vacuum_state(n) if initial_state is None else np.array(initial_state, dtype=float)
    if sigma.shape != (2 * n, 2 * n):
        raise DimensionError(f"initial state must be {2 * n}x{2 * n}")

    for t in range(t_steps):
        omega = encode(encoding_spec, inputs[t])
        m = hamiltonian_matrix(couplings, omega)
        a, d = drift_and_diffusion(m, config.gamma)
        sigma = step_exact(sigma, a, d, config.dt_input)
        if physicality_margin(sigma) < -1e-8:
            raise UnphysicalStateError(
                f"covariance violated sigma + i Omega / 2 >= 0 at step {t}"
            )
        features[t] = measure(sigma)
        if state_hook is not None:
            state_hook(t, sigma)
    return FeatureMatrix.from_measurements(features)
