"""Reference dynamical systems for generating trajectory datasets.

Three generators cover the accuracy ladder: an exact torus rotation (phases
advance linearly), exact spectral advection on a periodic interval (Fourier
moduli are time-invariant, the structure the evolution engine represents
exactly), and a Gray-Scott reaction-diffusion integrator (genuinely nonlinear,
used as a stress source for metrics and losses).
"""

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import IntegrationError, ShapeError
from .trajio import TrajectoryDataset

__all__ = [
    "GrayScottParams",
    "torus_rotation_trajectory",
    "advection_trajectory",
    "advection_wavenumbers",
    "gray_scott_trajectory",
]

# Diffusion coefficients of the reaction-diffusion reference configuration.
DEFAULT_D_A = 2.1e-5
DEFAULT_D_B = 1.1e-5


def torus_rotation_trajectory(omega, phi0, dt, steps) -> TrajectoryDataset:
    """Angles advancing at fixed rates: snapshot k holds phi0 + omega*k*dt."""
    omega = np.asarray(omega, dtype=np.float64)
    phi0 = np.asarray(phi0, dtype=np.float64)
    if omega.shape != phi0.shape or omega.ndim != 1:
        raise ShapeError("omega and phi0 must be 1D arrays of equal length")
    k = np.arange(steps + 1, dtype=np.float64)
    snaps = phi0[None, :] + k[:, None] * dt * omega[None, :]
    meta = {"system": "torus", "d": str(omega.size)}
    return TrajectoryDataset(snapshots=snaps, dt=dt, metadata=meta)


def advection_wavenumbers(d: int) -> np.ndarray:
    """Integer wavenumbers in DFT order with the Nyquist bin assigned +d/2."""
    kappa = np.fft.fftfreq(d, 1.0 / d)
    kappa[d // 2] = d // 2
    return kappa


def advection_trajectory(c: float, u0, dt, steps) -> TrajectoryDataset:
    """Exact solution of u_t + c u_x = 0 on [0, 2pi), computed spectrally."""
    u0 = np.asarray(u0, dtype=np.float64)
    d = u0.size
    if u0.ndim != 1 or d < 2 or d & (d - 1) != 0:
        raise ShapeError(f"u0 must be 1D with power-of-two length, got shape {u0.shape}")
    kappa = advection_wavenumbers(d)
    spectrum = np.fft.fft(u0)
    k = np.arange(steps + 1, dtype=np.float64)
    rotation = np.exp(-1j * c * np.outer(k * dt, kappa))
    snaps = np.fft.ifft(spectrum[None, :] * rotation, axis=1).real
    meta = {"system": "advection", "c": repr(c), "d": str(d)}
    return TrajectoryDataset(snapshots=snaps, dt=dt, metadata=meta)


@dataclass(frozen=True)
class GrayScottParams:
    """Gray-Scott coefficients plus grid and integrator configuration."""

    feed: float
    kill: float
    d_a: float = DEFAULT_D_A
    d_b: float = DEFAULT_D_B
    nx: int = 64
    ny: int = 64
    domain: float = 2.0  # side length; the reference domain is [-1, 1]^2
    dt_int: float = 0.0  # 0 -> half the explicit-Euler stability bound

    def __post_init__(self):
        for name in ("feed", "kill", "d_a", "d_b", "domain"):
            if getattr(self, name) <= 0:
                raise ShapeError(f"{name} must be positive")
        if self.nx < 4 or self.ny < 4:
            raise ShapeError("grid must be at least 4x4")

    @property
    def dx(self) -> float:
        return self.domain / self.nx

    @property
    def stability_bound(self) -> float:
        return self.dx**2 / (4.0 * max(self.d_a, self.d_b))

    def resolved_dt_int(self) -> float:
        dt = self.dt_int if self.dt_int > 0 else 0.5 * self.stability_bound
        if dt > self.stability_bound:
            raise ShapeError(
                f"dt_int={dt} exceeds the stability bound {self.stability_bound:.6g}"
            )
        return dt


def gray_scott_trajectory(params: GrayScottParams, y_a0, y_b0, dt, steps) -> TrajectoryDataset:
    """Integrate the two-species reaction-diffusion system with explicit Euler.

    Periodic boundaries, 5-point Laplacian, substeps of params.dt_int; one
    snapshot pair (Y_A, Y_B) every dt.  Snapshot axis layout: (T+1, 2, ny, nx).
    """
    A = np.ascontiguousarray(y_a0, dtype=np.float64)
    B = np.ascontiguousarray(y_b0, dtype=np.float64)
    if A.shape != (params.ny, params.nx) or B.shape != (params.ny, params.nx):
        raise ShapeError(
            f"initial fields must have shape {(params.ny, params.nx)}, "
            f"got {A.shape} and {B.shape}"
        )
    dt_int = params.resolved_dt_int()
    nsub = max(1, math.ceil(dt / dt_int - 1e-12))
    dt_sub = dt / nsub
    inv_dx2 = 1.0 / params.dx**2
    snaps = np.empty((steps + 1, 2, params.ny, params.nx))
    snaps[0, 0], snaps[0, 1] = A, B
    for k in range(1, steps + 1):
        A, B = kernels.gray_scott_steps(
            A, B, params.d_a, params.d_b, params.feed, params.kill, dt_sub, nsub, inv_dx2
        )
        if not (np.all(np.isfinite(A)) and np.all(np.isfinite(B))):
            raise IntegrationError(f"non-finite field first appeared at step {k}")
        snaps[k, 0], snaps[k, 1] = A, B
    tau = 1.0 / params.feed
    meta = {
        "system": "grayscott",
        "F": repr(params.feed),
        "K": repr(params.kill),
        "D_A": repr(params.d_a),
        "D_B": repr(params.d_b),
        "dt_int": repr(dt_sub),
        "substeps": str(nsub),
        "tau": repr(tau),
        "t_star_step": repr(dt / tau),
    }
    return TrajectoryDataset(snapshots=snaps, dt=dt, metadata=meta)
