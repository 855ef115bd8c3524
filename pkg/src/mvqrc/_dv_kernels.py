"""Numba kernels for dense Lindblad propagation.

Basis convention: qubit k maps to bit (n-1-k) of the index (first kron
factor is most significant). Bit value 0 is the excited sigma_z = +1
state, bit value 1 the ground sigma_z = -1 state, so amplitude damping
drives every bit toward 1.

All arrays must be C-contiguous complex128; callers own workspace
allocation where it matters.
"""

import numpy as np
from numba import njit


@njit(cache=True)
def lindblad_rhs_kernel(h, rho, gamma, exc, n, out, work):
    """out = -i[H, rho] + gamma * sum_k D[sigma_k^-](rho).

    `exc` holds the per-index excited-qubit count (number of zero bits);
    `work` is a scratch matrix of the same shape.
    """
    dim = rho.shape[0]
    np.dot(h, rho, work)
    for a in range(dim):
        for b in range(dim):
            out[a, b] = -1j * (work[a, b] - np.conj(work[b, a])) \
                - 0.5 * gamma * (exc[a] + exc[b]) * rho[a, b]
    for k in range(n):
        mask = 1 << (n - 1 - k)
        for a in range(dim):
            if not (a & mask):
                continue
            for b in range(dim):
                if b & mask:
                    out[a, b] += gamma * rho[a ^ mask, b ^ mask]


@njit(cache=True)
def rk4_window(rho, h, gamma, exc, n, dt, substeps):
    """Fixed-substep RK4 integration of the master equation over dt."""
    dim = rho.shape[0]
    step = dt / substeps
    work = np.empty((dim, dim), dtype=np.complex128)
    k1 = np.empty((dim, dim), dtype=np.complex128)
    k2 = np.empty((dim, dim), dtype=np.complex128)
    k3 = np.empty((dim, dim), dtype=np.complex128)
    k4 = np.empty((dim, dim), dtype=np.complex128)
    tmp = np.empty((dim, dim), dtype=np.complex128)
    for _ in range(substeps):
        lindblad_rhs_kernel(h, rho, gamma, exc, n, k1, work)
        for a in range(dim):
            for b in range(dim):
                tmp[a, b] = rho[a, b] + 0.5 * step * k1[a, b]
        lindblad_rhs_kernel(h, tmp, gamma, exc, n, k2, work)
        for a in range(dim):
            for b in range(dim):
                tmp[a, b] = rho[a, b] + 0.5 * step * k2[a, b]
        lindblad_rhs_kernel(h, tmp, gamma, exc, n, k3, work)
        for a in range(dim):
            for b in range(dim):
                tmp[a, b] = rho[a, b] + step * k3[a, b]
        lindblad_rhs_kernel(h, tmp, gamma, exc, n, k4, work)
        for a in range(dim):
            for b in range(dim):
                rho[a, b] += (step / 6.0) * (
                    k1[a, b] + 2.0 * k2[a, b] + 2.0 * k3[a, b] + k4[a, b]
                )
    return rho


@njit(cache=True)
def damp_channel(rho, n, eta):
    """Exact n-qubit product amplitude-damping channel, in place.

    Per qubit: ground-ground entries gain (1 - eta) times their excited
    partner before the excited entries are scaled, so the update order
    within one qubit matters; channels of different qubits commute.
    """
    dim = rho.shape[0]
    sq = np.sqrt(eta)
    for k in range(n):
        mask = 1 << (n - 1 - k)
        for a in range(dim):
            if not (a & mask):
                continue
            for b in range(dim):
                if b & mask:
                    rho[a, b] += (1.0 - eta) * rho[a ^ mask, b ^ mask]
        for a in range(dim):
            ag = (a & mask) != 0
            for b in range(dim):
                bg = (b & mask) != 0
                if not ag and not bg:
                    rho[a, b] *= eta
                elif ag != bg:
                    rho[a, b] *= sq
    return rho


@njit(cache=True)
def split_window(rho, u, udag, gamma, n, dt, substeps):
    """Strang-split propagation over one input window.

    Alternates the exact damping channel with the exact substep unitary
    u = exp(-i H dt/substeps); the composition is a quantum channel, so
    trace and positivity are preserved by construction for any substep
    count. Splitting error is O((dt/substeps)^2) per window.
    """
    delta = dt / substeps
    tmp = np.empty_like(rho)
    damp_channel(rho, n, np.exp(-gamma * delta * 0.5))
    eta_full = np.exp(-gamma * delta)
    for s in range(substeps):
        np.dot(u, rho, tmp)
        np.dot(tmp, udag, rho)
        if s < substeps - 1:
            damp_channel(rho, n, eta_full)
    damp_channel(rho, n, np.exp(-gamma * delta * 0.5))
    return rho
