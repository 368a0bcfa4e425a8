"""Hot numeric kernels with numba-compiled and pure-numpy variants.

Every kernel exists in two flavours: ``*_numpy`` (vectorized fallback) and a
numba ``@njit`` build.  The unsuffixed public name points at whichever the
``QKM_BACKEND`` environment flag selected at import time (see
:mod:`qkoopman._backend`).  Both flavours stay importable so the benchmark
and the parity tests can compare them directly.
"""

import numpy as np

from ._backend import NUMBA_ENABLED, jit_kernel

__all__ = [
    "NUMBA_ENABLED",
    "eigenvalue_table",
    "eigenvalue_table_numpy",
    "eigenvalue_table_jit",
    "lazy_phase",
    "lazy_phase_numpy",
    "lazy_phase_jit",
    "apply_diag_phases",
    "apply_diag_phases_numpy",
    "apply_diag_phases_jit",
    "gray_scott_steps",
    "gray_scott_steps_numpy",
    "gray_scott_steps_jit",
]


# --- diagonal Hamiltonian eigenvalues -------------------------------------
#
# lambda_l = -(1/2) * sum_k alpha_k * z_k(l), where z_k(l) is +1 when the bit
# of weight 2^(n-k) in l is 0 and -1 when it is 1 (qubit 1 is the most
# significant bit).


def eigenvalue_table_numpy(alphas: np.ndarray, n: int) -> np.ndarray:
    size = 1 << n
    idx = np.arange(size, dtype=np.uint64)
    shifts = np.arange(n - 1, -1, -1, dtype=np.uint64)
    bits = (idx[:, None] >> shifts[None, :]) & 1
    z = 1.0 - 2.0 * bits
    return -0.5 * (z @ np.asarray(alphas, dtype=np.float64))


def _eigenvalue_table_loop(alphas, n):
    size = 1 << n
    out = np.empty(size, dtype=np.float64)
    for l in range(size):
        acc = 0.0
        for k in range(n):
            if (l >> (n - 1 - k)) & 1:
                acc += alphas[k]
            else:
                acc -= alphas[k]
        out[l] = 0.5 * acc
    return out


def _lazy_phase_loop(l, alphas, n, t):
    acc = 0.0
    for k in range(n):
        if (l >> (n - 1 - k)) & 1:
            acc += alphas[k]
        else:
            acc -= alphas[k]
    return 0.5 * acc * t


def lazy_phase_numpy(l: int, alphas: np.ndarray, n: int, t: float) -> float:
    return _lazy_phase_loop(int(l), np.asarray(alphas, dtype=np.float64), n, t)


def apply_diag_phases_numpy(amplitudes, eigenvalues, t):
    return amplitudes * np.exp(1j * eigenvalues * t)


def _apply_diag_phases_loop(amplitudes, eigenvalues, t):
    out = np.empty_like(amplitudes)
    for i in range(amplitudes.shape[0]):
        theta = eigenvalues[i] * t
        out[i] = amplitudes[i] * complex(np.cos(theta), np.sin(theta))
    return out


# --- Gray-Scott explicit Euler substeps -----------------------------------


def gray_scott_steps_numpy(A, B, d_a, d_b, feed, kill, dt, nsub, inv_dx2):
    for _ in range(nsub):
        lap_a = (
            np.roll(A, 1, 0) + np.roll(A, -1, 0) + np.roll(A, 1, 1) + np.roll(A, -1, 1)
            - 4.0 * A
        ) * inv_dx2
        lap_b = (
            np.roll(B, 1, 0) + np.roll(B, -1, 0) + np.roll(B, 1, 1) + np.roll(B, -1, 1)
            - 4.0 * B
        ) * inv_dx2
        react = A * B * B
        A = A + dt * (d_a * lap_a - react + feed * (1.0 - A))
        B = B + dt * (d_b * lap_b + react - (feed + kill) * B)
    return A, B


def _gray_scott_steps_loop(A, B, d_a, d_b, feed, kill, dt, nsub, inv_dx2):
    ny, nx = A.shape
    for _ in range(nsub):
        A_new = np.empty_like(A)
        B_new = np.empty_like(B)
        for i in range(ny):
            im = i - 1 if i > 0 else ny - 1
            ip = i + 1 if i < ny - 1 else 0
            for j in range(nx):
                jm = j - 1 if j > 0 else nx - 1
                jp = j + 1 if j < nx - 1 else 0
                lap_a = (A[im, j] + A[ip, j] + A[i, jm] + A[i, jp] - 4.0 * A[i, j]) * inv_dx2
                lap_b = (B[im, j] + B[ip, j] + B[i, jm] + B[i, jp] - 4.0 * B[i, j]) * inv_dx2
                react = A[i, j] * B[i, j] * B[i, j]
                A_new[i, j] = A[i, j] + dt * (d_a * lap_a - react + feed * (1.0 - A[i, j]))
                B_new[i, j] = B[i, j] + dt * (d_b * lap_b + react - (feed + kill) * B[i, j])
        A, B = A_new, B_new
    return A, B


if NUMBA_ENABLED:
    eigenvalue_table_jit = jit_kernel(_eigenvalue_table_loop)
    lazy_phase_jit = jit_kernel(_lazy_phase_loop)
    apply_diag_phases_jit = jit_kernel(_apply_diag_phases_loop)
    gray_scott_steps_jit = jit_kernel(_gray_scott_steps_loop)

    eigenvalue_table = eigenvalue_table_jit
    apply_diag_phases = apply_diag_phases_jit
    gray_scott_steps = gray_scott_steps_jit

    def lazy_phase(l, alphas, n, t):
        return lazy_phase_jit(int(l), np.asarray(alphas, dtype=np.float64), n, t)

else:
    eigenvalue_table_jit = None
    lazy_phase_jit = None
    apply_diag_phases_jit = None
    gray_scott_steps_jit = None

    eigenvalue_table = eigenvalue_table_numpy
    lazy_phase = lazy_phase_numpy
    apply_diag_phases = apply_diag_phases_numpy
    gray_scott_steps = gray_scott_steps_numpy
