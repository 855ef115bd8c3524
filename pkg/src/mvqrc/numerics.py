"""Dense small-matrix kernels, special-function quantiles, ODE stepping,
and deterministic splittable randomness shared by all other modules.

Everything here is a pure function of its inputs; matrices are small
(at most 24x24 real or 256x256 complex) so dense algorithms are used
throughout.
"""

from __future__ import annotations

import hashlib

import numpy as np
import scipy.linalg
import scipy.special
from threadpoolctl import threadpool_limits

from .errors import ConditioningError, DimensionError, DomainError, StabilityError, SymmetryError

__all__ = [
    "Prng",
    "mat_exp",
    "lyapunov_solve",
    "hermitian_eigenvalues",
    "chi2_quantile",
    "rk4_step",
    "single_threaded_blas",
]


def single_threaded_blas():
    """Limit BLAS pools to one thread for the enclosed block.

    The matrices here are tiny (<= 256x256); spin-waiting BLAS worker
    threads were measured to slow the reservoir loops ~8x on small
    hosts, so every long-running loop runs under this context.
    """
    return threadpool_limits(limits=1)


# ---------------------------------------------------------------------------
# Deterministic randomness
# ---------------------------------------------------------------------------

def _label_to_stream(label) -> int:
    """Map an arbitrary hashable label to a stable 64-bit stream id.

    Uses blake2b rather than hash() so the mapping is identical across
    processes and interpreter invocations.
    """
    digest = hashlib.blake2b(repr(label).encode("utf-8"), digest_size=8).digest()
    return int.from_bytes(digest, "little")


class Prng:
    """Counter-based (Philox) generator addressed by (seed, stream id).

    Identical (seed, stream) pairs always reproduce the same draw
    sequence; distinct streams are statistically independent, so workers
    never share generator state. Child streams are derived from labels
    via `split`, which never consumes draws from the parent.
    """

    def __init__(self, seed: int, stream: int = 0):
        self.seed = int(seed) & 0xFFFFFFFFFFFFFFFF
        self.stream = int(stream) & 0xFFFFFFFFFFFFFFFF
        key = np.array([self.seed, self.stream], dtype=np.uint64)
        self._gen = np.random.Generator(np.random.Philox(key=key))

    def split(self, label) -> "Prng":
        """Derive an independent child generator for `label`.

        The child stream id mixes the parent stream with the label hash,
        so distinct (parent, label) paths never collide in practice.
        """
        child = _label_to_stream((self.stream, label))
        return Prng(self.seed, child)

    def uniform(self, lo: float, hi: float, size=None):
        """Draw from U[lo, hi); advances the generator state."""
        if not lo < hi:
            raise DomainError(f"uniform requires lo < hi, got [{lo}, {hi})")
        return self._gen.uniform(lo, hi, size=size)

    def normal(self, loc: float = 0.0, scale: float = 1.0, size=None):
        return self._gen.normal(loc, scale, size=size)

    def integers(self, lo: int, hi: int, size=None):
        """Uniform integers in [lo, hi)."""
        return self._gen.integers(lo, hi, size=size)

    def __repr__(self):
        return f"Prng(seed={self.seed}, stream={self.stream})"


def uniform(prng: Prng, lo: float, hi: float, size=None):
    """Functional alias for Prng.uniform."""
    return prng.uniform(lo, hi, size=size)


# ---------------------------------------------------------------------------
# Dense linear algebra
# ---------------------------------------------------------------------------

def _as_square(a, name: str) -> np.ndarray:
    a = np.asarray(a)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionError(f"{name} must be square, got shape {a.shape}")
    return a


def mat_exp(a, t: float = 1.0) -> np.ndarray:
    """e^(A t) for a square matrix, via scaling-and-squaring with a Pade core.

    Dimensions in this package never exceed a few hundred, so the dense
    exact propagator is cheap; relative accuracy is ~1e-13 for the norms
    that occur here.
    """
    a = _as_square(a, "A")
    if not np.isfinite(t):
        raise DomainError("t must be finite")
    if t == 0.0:
        return np.eye(a.shape[0], dtype=a.dtype)
    return scipy.linalg.expm(a * t)


def lyapunov_solve(a, q) -> np.ndarray:
    """Solve A X + X A^T + Q = 0 for symmetric Q and Hurwitz A.

    Vectorizes to a (dim^2 x dim^2) linear system via Kronecker products;
    dims here are at most 2n <= 24, which keeps that trivially cheap.
    Raises StabilityError if A has an eigenvalue real part > -1e-12 and
    verifies the residual of the computed solution.
    """
    a = _as_square(a, "A")
    q = _as_square(q, "Q")
    if a.shape != q.shape:
        raise DimensionError(f"A {a.shape} and Q {q.shape} differ")
    dim = a.shape[0]
    re = np.linalg.eigvals(a).real
    if np.max(re) > -1e-12:
        raise StabilityError(
            f"A is not Hurwitz: max eigenvalue real part {np.max(re):.3e}"
        )
    # column-major vec: vec(AX) = (I (x) A) vec(X), vec(X A^T) = (A (x) I) vec(X);
    # both Kronecker factors assembled in place to avoid np.kron copies
    k = np.zeros((dim * dim, dim * dim))
    view = k.reshape(dim, dim, dim, dim)
    idx = np.arange(dim)
    view[idx, :, idx, :] = a
    view[:, idx, :, idx] += a
    try:
        x = np.linalg.solve(k, -q.flatten(order="F"))
    except np.linalg.LinAlgError as exc:
        raise ConditioningError(f"Lyapunov system is singular: {exc}") from exc
    x = x.reshape((dim, dim), order="F")
    x = 0.5 * (x + x.T)
    residual = np.max(np.abs(a @ x + x @ a.T + q))
    if residual > 1e-10 * max(1.0, np.max(np.abs(q))):
        raise ConditioningError(f"Lyapunov residual {residual:.3e} too large")
    return x


def hermitian_eigenvalues(m) -> np.ndarray:
    """Ascending real eigenvalues of a Hermitian matrix.

    Rejects input whose anti-Hermitian part exceeds 1e-10 relative to
    its scale.
    """
    m = _as_square(m, "M")
    scale = max(1.0, np.max(np.abs(m)))
    if np.max(np.abs(m - m.conj().T)) > 1e-10 * scale:
        raise SymmetryError("matrix is not Hermitian within 1e-10")
    return np.linalg.eigvalsh(m)


# ---------------------------------------------------------------------------
# Chi-squared quantile
# ---------------------------------------------------------------------------

def chi2_quantile(level: float, dof: int) -> float:
    """Quantile of the chi-squared distribution with `dof` degrees of freedom.

    Found by bisection on the regularized lower incomplete gamma function
    (the chi-squared CDF), to absolute accuracy 1e-8. Bisection rather
    than a closed approximation because this value gates capacity sums.
    """
    if not 0.0 < level < 1.0:
        raise DomainError(f"level must be in (0, 1), got {level}")
    if dof < 1:
        raise DomainError(f"dof must be >= 1, got {dof}")

    def cdf(x):
        return scipy.special.gammainc(dof / 2.0, x / 2.0)

    lo, hi = 0.0, max(8.0 * dof, 16.0)
    while cdf(hi) < level:
        hi *= 2.0
        if hi > 1e12:
            raise DomainError("quantile search exceeded bracket bound")
    while hi - lo > 1e-9:
        mid = 0.5 * (lo + hi)
        if cdf(mid) < level:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


# ---------------------------------------------------------------------------
# ODE stepping
# ---------------------------------------------------------------------------

def rk4_step(f, y, dt: float):
    """One classical 4th-order Runge-Kutta step of dy/dt = f(y).

    `y` may be any numpy array; `f` must return an array of the same
    shape. Local error is O(dt^5).
    """
    if dt <= 0:
        raise DomainError(f"dt must be positive, got {dt}")
    y = np.asarray(y)
    k1 = np.asarray(f(y))
    k2 = np.asarray(f(y + 0.5 * dt * k1))
    k3 = np.asarray(f(y + 0.5 * dt * k2))
    k4 = np.asarray(f(y + dt * k3))
    out = y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    if not np.all(np.isfinite(out)):
        raise ArithmeticError("non-finite state after RK4 step")
    return out
