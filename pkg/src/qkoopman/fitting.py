"""Recovery of R_z coefficients from observed phase trajectories.

Replaces gradient training with closed-form least squares: unwrap the phase
history, estimate a per-index rate (radians per step) by an OLS slope, then
project the rate vector onto the parity design matrix of the diagonal
Hamiltonian.  The parity columns are mutually orthogonal and zero-sum, so an
optional constant column cleanly absorbs any uniform (global) phase drift.
"""

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import FitError, ShapeError
from .layout import SubsystemLayout
from .unitary import DiagonalHamiltonian

__all__ = [
    "PhaseTrajectory",
    "FitResult",
    "parity_matrix",
    "unwrap_phases",
    "estimate_rates",
    "fit_alphas",
    "fit_system",
]


@dataclass(frozen=True)
class PhaseTrajectory:
    """(T+1) x N_j phase history sampled at a uniform step dt."""

    dt: float
    phases: np.ndarray

    def __post_init__(self):
        phi = np.asarray(self.phases, dtype=np.float64)
        if phi.ndim != 2 or phi.shape[0] < 2:
            raise ShapeError(f"need a (T+1) x N array with T >= 1, got shape {phi.shape}")
        nj = phi.shape[1]
        if nj < 2 or nj & (nj - 1) != 0:
            raise ShapeError(f"subsystem dimension {nj} must be a power of two")
        if self.dt <= 0:
            raise ShapeError(f"dt must be positive, got {self.dt}")
        phi = phi.copy()
        phi.setflags(write=False)
        object.__setattr__(self, "phases", phi)

    @property
    def steps(self) -> int:
        return self.phases.shape[0] - 1


@dataclass(frozen=True)
class FitResult:
    alphas: np.ndarray
    global_phase_rate: Optional[float]
    residual_rms: float
    per_index_rates: np.ndarray
    residuals: np.ndarray

    def report(self, j: int = 1) -> str:
        lines = [f"subsystem {j}"]
        lines.extend(
            f"alpha {k + 1} {a:.17g}" for k, a in enumerate(self.alphas)
        )
        gp = "none" if self.global_phase_rate is None else f"{self.global_phase_rate:.17g}"
        lines.append(f"global_phase_rate {gp}")
        lines.append(f"residual_rms {self.residual_rms:.17g}")
        return "\n".join(lines) + "\n"


def parity_matrix(n: int) -> np.ndarray:
    """2^n x n matrix of z_k(l) = +-1 parities (qubit k on bit weight 2^(n-k))."""
    idx = np.arange(1 << n, dtype=np.uint64)
    shifts = np.arange(n - 1, -1, -1, dtype=np.uint64)
    bits = (idx[:, None] >> shifts[None, :]) & 1
    return 1.0 - 2.0 * bits.astype(np.float64)


def _wrap_halfopen(delta: np.ndarray) -> np.ndarray:
    # maps into (-pi, pi]; an increment of exactly pi stays +pi
    return np.pi - np.mod(np.pi - delta, 2.0 * np.pi)


def unwrap_phases(trajectory: PhaseTrajectory) -> PhaseTrajectory:
    """Integrate wrapped per-step increments; first row is kept as-is.

    Precondition (not checkable from the data): true per-step increments stay
    below pi in magnitude, otherwise the result aliases silently.
    """
    phi = trajectory.phases
    inc = _wrap_halfopen(np.diff(phi, axis=0))
    out = np.empty_like(phi)
    out[0] = phi[0]
    np.cumsum(inc, axis=0, out=out[1:])
    out[1:] += phi[0]
    return PhaseTrajectory(dt=trajectory.dt, phases=out)


def estimate_rates(unwrapped: PhaseTrajectory) -> np.ndarray:
    """OLS slope of phase against step index, per observable index."""
    phi = unwrapped.phases
    t_count = phi.shape[0]
    if t_count < 2:
        raise FitError("rate estimation needs at least two snapshots")
    k = np.arange(t_count, dtype=np.float64)
    k_c = k - k.mean()
    denom = np.dot(k_c, k_c)
    return (k_c @ (phi - phi.mean(axis=0))) / denom


def fit_alphas(
    rates: np.ndarray,
    layout: SubsystemLayout,
    j: int,
    dt: float,
    include_global_phase: bool = False,
    mask: Optional[np.ndarray] = None,
) -> FitResult:
    """Least-squares solve rates = M @ alpha (+ optional constant column).

    M[l, k] = -(dt/2) * z_k(l).  ``mask`` marks indices to include; excluded
    indices (e.g. zero-modulus bins whose phase carries no information) do not
    constrain the solve and do not enter the residual.
    """
    rates = np.asarray(rates, dtype=np.float64)
    nj = layout.dims[j - 1]
    n = layout.qubits[j - 1]
    if rates.shape != (nj,):
        raise ShapeError(f"rates must have length {nj}, got shape {rates.shape}")
    design = -(dt / 2.0) * parity_matrix(n)
    if include_global_phase:
        design = np.column_stack([design, np.ones(nj)])
    if mask is None:
        mask = np.ones(nj, dtype=bool)
    else:
        mask = np.asarray(mask, dtype=bool)
        if mask.shape != (nj,):
            raise ShapeError(f"mask must have length {nj}")
    rows = int(mask.sum())
    if rows < design.shape[1]:
        raise FitError(
            f"underdetermined fit: {rows} usable rates for {design.shape[1]} parameters"
        )
    coeffs, _, _, _ = np.linalg.lstsq(design[mask], rates[mask], rcond=None)
    residuals = rates[mask] - design[mask] @ coeffs
    residual_rms = float(np.sqrt(np.mean(residuals**2)))
    if include_global_phase:
        alphas, gp = coeffs[:n], float(coeffs[n])
    else:
        alphas, gp = coeffs, None
    return FitResult(
        alphas=alphas,
        global_phase_rate=gp,
        residual_rms=residual_rms,
        per_index_rates=rates,
        residuals=residuals,
    )


def fit_system(
    trajectories: Sequence[PhaseTrajectory],
    layout: SubsystemLayout,
    dt: float,
    include_global_phase: bool = False,
    masks: Optional[Sequence[Optional[np.ndarray]]] = None,
):
    """Fit every subsystem independently and assemble the block Hamiltonian.

    Returns (hamiltonian, fit_results, diagnostics); rates recovered per step
    are converted to radians per unit time through dt inside fit_alphas'
    design matrix, so the returned alphas match the evolution convention.
    """
    h = layout.subsystem_count
    if len(trajectories) != h:
        raise FitError(f"need {h} phase trajectories, got {len(trajectories)}")
    if masks is None:
        masks = [None] * h
    results = []
    for j, (traj, mask) in enumerate(zip(trajectories, masks), start=1):
        if traj.phases.shape[1] != layout.dims[j - 1]:
            raise ShapeError(
                f"trajectory {j} has width {traj.phases.shape[1]}, "
                f"layout expects {layout.dims[j - 1]}"
            )
        rates = estimate_rates(unwrap_phases(traj))
        results.append(
            fit_alphas(rates, layout, j, dt, include_global_phase=include_global_phase, mask=mask)
        )
    hamiltonian = DiagonalHamiltonian(
        layout=layout, alphas=tuple(res.alphas for res in results)
    )
    diagnostics = {
        "residual_rms": [res.residual_rms for res in results],
        "worst_index_residual": [
            float(np.max(np.abs(res.residuals))) if res.residuals.size else 0.0
            for res in results
        ],
    }
    return hamiltonian, results, diagnostics
