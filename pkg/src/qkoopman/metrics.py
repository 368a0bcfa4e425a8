"""Loss functions, the relative L2 error, and statistical diagnostics.

The loss trio mirrors the training objectives the fit module replaces:
reconstruction (auto-encode round trip), prediction (one-shot rollouts from
the initial snapshot) and the pair form over the index set
I = {(l,0)} u {(0,l)}, which equals their sample-count-weighted combination.
All relative errors are squared-norm ratios; the conventional (rooted) value
is the default reporting mode.
"""

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import DegenerateError, DomainError, FitError, ShapeError
from .model import KoopmanModel
from .trajio import TrajectoryDataset
from .unitary import DiagonalHamiltonian

__all__ = [
    "LossReport",
    "SpectrumReport",
    "relative_l2",
    "reconstruction_loss",
    "prediction_loss",
    "pair_loss",
    "loss_report",
    "energy_spectrum",
    "pdf_estimate",
    "structure_functions",
    "scaling_exponents",
]


def relative_l2(pred, truth, squared: bool = False) -> float:
    """||pred - truth||^2 / ||truth||^2 (squared mode) or its square root."""
    pred = np.asarray(pred, dtype=np.float64)
    truth = np.asarray(truth, dtype=np.float64)
    if pred.shape != truth.shape:
        raise ShapeError(f"shape mismatch: {pred.shape} vs {truth.shape}")
    denom = float(np.sum(truth * truth))
    if denom == 0.0:
        raise DomainError("relative L2 error undefined for zero-norm truth")
    ratio = float(np.sum((pred - truth) ** 2)) / denom
    return ratio if squared else float(np.sqrt(ratio))


def _as_model(model) -> KoopmanModel:
    if isinstance(model, KoopmanModel):
        return model
    if isinstance(model, DiagonalHamiltonian):
        return KoopmanModel(hamiltonian=model)
    raise ShapeError(f"expected KoopmanModel or DiagonalHamiltonian, got {type(model)}")


def reconstruction_loss(encoder, trajectory: TrajectoryDataset) -> float:
    """Mean over all snapshots of the squared relative auto-encode error."""
    errs = [
        relative_l2(encoder.decode(encoder.encode(snap)), snap, squared=True)
        for snap in trajectory.snapshots
    ]
    return float(np.mean(errs))


def prediction_loss(encoder, model, trajectory: TrajectoryDataset) -> float:
    """Mean over k=1..T of the squared relative one-shot prediction error."""
    model = _as_model(model)
    if trajectory.steps < 1:
        raise ShapeError("prediction loss needs at least one step")
    obs0 = encoder.encode(trajectory.snapshots[0])
    errs = []
    for k in range(1, trajectory.steps + 1):
        pred = encoder.decode(model.evolve(obs0, k * trajectory.dt))
        errs.append(relative_l2(pred, trajectory.snapshots[k], squared=True))
    return float(np.mean(errs))


def pair_loss(encoder, model, trajectory: TrajectoryDataset) -> float:
    """Mean squared relative error over I = {(l,0): l=0..T} u {(0,l): l=1..T}."""
    model = _as_model(model)
    errs = []
    for k in range(trajectory.steps + 1):  # zero-step transitions
        pred = encoder.decode(encoder.encode(trajectory.snapshots[k]))
        errs.append(relative_l2(pred, trajectory.snapshots[k], squared=True))
    obs0 = encoder.encode(trajectory.snapshots[0])
    for k in range(1, trajectory.steps + 1):  # initial rollouts
        pred = encoder.decode(model.evolve(obs0, k * trajectory.dt))
        errs.append(relative_l2(pred, trajectory.snapshots[k], squared=True))
    return float(np.mean(errs))


@dataclass(frozen=True)
class LossReport:
    reconstruction: float
    prediction: float
    pair: float
    zero_step_count: int
    rollout_count: int

    def summary(self) -> str:
        return (
            f"reconstruction_loss {self.reconstruction:.17g}\n"
            f"prediction_loss {self.prediction:.17g}\n"
            f"pair_loss {self.pair:.17g}\n"
            f"zero_step_count {self.zero_step_count}\n"
            f"rollout_count {self.rollout_count}\n"
        )


def loss_report(encoder, model, trajectory: TrajectoryDataset) -> LossReport:
    t_steps = trajectory.steps
    rec = reconstruction_loss(encoder, trajectory)
    pred = prediction_loss(encoder, model, trajectory) if t_steps >= 1 else 0.0
    pair = pair_loss(encoder, model, trajectory)
    return LossReport(
        reconstruction=rec,
        prediction=pred,
        pair=pair,
        zero_step_count=t_steps + 1,
        rollout_count=t_steps,
    )


@dataclass(frozen=True)
class SpectrumReport:
    """Shell-averaged energy over unit-width integer wavenumber annuli."""

    kappa: np.ndarray
    energy: np.ndarray
    occupancy: np.ndarray

    @property
    def total_energy(self) -> float:
        return float(np.sum(self.energy * self.occupancy))

    def to_csv(self) -> str:
        lines = ["kappa,energy,occupancy"]
        lines.extend(
            f"{int(k)},{e:.17g},{int(o)}"
            for k, e, o in zip(self.kappa, self.energy, self.occupancy)
        )
        return "\n".join(lines) + "\n"


def energy_spectrum(field) -> SpectrumReport:
    """Shell-average the 2D spectral energy density |X|^2 / (2 N^2) * N.

    Normalization keeps Parseval bookkeeping closed: summing energy times
    occupancy over all shells recovers the grid-space energy sum(u^2)/2.
    """
    u = np.asarray(field, dtype=np.float64)
    if u.ndim != 2:
        raise ShapeError(f"energy_spectrum expects a 2D field, got shape {u.shape}")
    ny, nx = u.shape
    total = ny * nx
    spectrum = np.fft.fft2(u)
    density = np.abs(spectrum) ** 2 / (2.0 * total)
    kx = np.fft.fftfreq(nx, 1.0 / nx)
    ky = np.fft.fftfreq(ny, 1.0 / ny)
    kmag = np.sqrt(kx[None, :] ** 2 + ky[:, None] ** 2)
    shell = np.rint(kmag).astype(np.int64)
    nshell = int(shell.max()) + 1
    occupancy = np.bincount(shell.ravel(), minlength=nshell)
    sums = np.bincount(shell.ravel(), weights=density.ravel(), minlength=nshell)
    with np.errstate(invalid="ignore"):
        avg = np.where(occupancy > 0, sums / np.maximum(occupancy, 1), 0.0)
    return SpectrumReport(
        kappa=np.arange(nshell), energy=avg, occupancy=occupancy
    )


def pdf_estimate(samples, bins: int = 50, kde: bool = False):
    """Density-normalized histogram, optionally with a Gaussian-kernel KDE.

    Returns (edges, density) or (edges, density, (grid, kde_density)); the KDE
    bandwidth is Silverman's 1.06 * std * n^(-1/5).
    """
    x = np.asarray(samples, dtype=np.float64).ravel()
    if x.size < 1:
        raise ShapeError("pdf_estimate needs at least one sample")
    density, edges = np.histogram(x, bins=bins, density=True)
    if not kde:
        return edges, density
    if x.size < 2:
        raise DegenerateError("KDE needs at least two samples")
    sigma = float(np.std(x, ddof=1))
    if sigma == 0.0:
        raise DegenerateError("KDE undefined for zero-variance samples")
    bandwidth = 1.06 * sigma * x.size ** (-0.2)
    grid = np.linspace(x.min() - 3 * bandwidth, x.max() + 3 * bandwidth, 512)
    z = (grid[:, None] - x[None, :]) / bandwidth
    kde_density = np.exp(-0.5 * z * z).sum(axis=1) / (
        x.size * bandwidth * np.sqrt(2.0 * np.pi)
    )
    return edges, density, (grid, kde_density)


def structure_functions(u, orders: Sequence[float], separations: Sequence[int]) -> np.ndarray:
    """S_p(r): mean of |u(x + r e) - u(x)|^p over positions and both grid axes."""
    u = np.asarray(u, dtype=np.float64)
    if u.ndim != 2:
        raise ShapeError(f"structure_functions expects a 2D field, got shape {u.shape}")
    orders = np.asarray(orders, dtype=np.float64)
    table = np.empty((orders.size, len(separations)))
    for ri, r in enumerate(separations):
        r = int(r)
        inc_x = np.abs(np.roll(u, -r, axis=1) - u)
        inc_y = np.abs(np.roll(u, -r, axis=0) - u)
        inc = np.concatenate([inc_x.ravel(), inc_y.ravel()])
        for pi, p in enumerate(orders):
            table[pi, ri] = np.mean(inc**p)
    return table


def scaling_exponents(
    table: np.ndarray,
    separations: Sequence[int],
    fit_min: Optional[float] = None,
    fit_max: Optional[float] = None,
) -> np.ndarray:
    """Least-squares slope of log S_p versus log r over [fit_min, fit_max]."""
    r = np.asarray(separations, dtype=np.float64)
    lo = fit_min if fit_min is not None else r.min()
    hi = fit_max if fit_max is not None else r.max()
    sel = (r >= lo) & (r <= hi)
    if sel.sum() < 2:
        raise FitError(f"fitting range [{lo}, {hi}] selects fewer than two separations")
    log_r = np.log(r[sel])
    exponents = np.empty(table.shape[0])
    for pi in range(table.shape[0]):
        s = table[pi, sel]
        if np.any(s <= 0):
            raise FitError(f"structure function of order index {pi} is non-positive in range")
        exponents[pi] = np.polyfit(log_r, np.log(s), 1)[0]
    return exponents
