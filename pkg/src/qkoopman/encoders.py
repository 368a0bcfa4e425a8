"""Analytic observable encoders and a loader for precomputed latents.

Each encoder realizes the modulus-phase observable map f(x) = r * exp(i*phi)
exactly, together with its inverse, standing in for a learned autoencoder.
Index ordering inside a subsystem is encoder-defined: the identity encoder
keeps the state's own order, the Fourier encoder uses natural DFT frequency
order.  Multi-dimensional fields are flattened row-major before encoding.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import DomainError, FormatError, LayoutError, ShapeError, SymmetryError
from .layout import ObservableState, SubsystemLayout, build_layout, wrap_phase
from .trajio import TrajectoryDataset

__all__ = [
    "IdentityPhaseEncoder",
    "FourierEncoder",
    "LatentTrajectory",
    "load_latent_trajectory",
    "encode_trajectory",
    "get_encoder",
]


class IdentityPhaseEncoder:
    """Torus angles as phases with unit modulus; exact inverse up to wrapping."""

    def __init__(self, d: int):
        self.layout = build_layout(d, 1, 1)
        self.d = d

    def encode(self, angles) -> ObservableState:
        phi = np.asarray(angles, dtype=np.float64).reshape(-1)
        if phi.size != self.d:
            raise LayoutError(f"expected {self.d} angles, got {phi.size}")
        return ObservableState(
            layout=self.layout, modulus=np.ones(self.d), phase=phi
        )

    def decode(self, obs: ObservableState):
        if obs.layout != self.layout:
            raise LayoutError("observable layout does not match this encoder")
        return wrap_phase(obs.phase)

    def modulus_mask(self, obs: ObservableState) -> np.ndarray:
        return np.ones(self.d, dtype=bool)

    def prediction_error(self, pred, truth, squared: bool = False) -> float:
        """Relative L2 error on the torus: differences taken modulo 2*pi."""
        pred = np.asarray(pred, dtype=np.float64).reshape(-1)
        truth = np.asarray(truth, dtype=np.float64).reshape(-1)
        if pred.shape != truth.shape:
            raise ShapeError(f"shape mismatch: {pred.shape} vs {truth.shape}")
        diff = wrap_phase(pred - truth)
        denom = float(np.sum(wrap_phase(truth) ** 2))
        if denom == 0.0:
            raise DomainError("relative error undefined for all-zero wrapped truth")
        ratio = float(np.sum(diff**2)) / denom
        return ratio if squared else float(np.sqrt(ratio))


class FourierEncoder:
    """DFT modulus/phase of a real field (unnormalized forward, 1/d inverse).

    Moduli below zero_tol (relative to the largest bin) are snapped to exact
    zero with phase 0, so that numerically empty bins carry no fake phase
    information; negative real spectral values become (|v|, pi).
    """

    def __init__(self, d: int, field_shape: Optional[tuple] = None, zero_tol: float = 1e-12):
        self.layout = build_layout(d, 1, 1)
        self.d = d
        self.field_shape = tuple(field_shape) if field_shape is not None else (d,)
        if int(np.prod(self.field_shape)) != d:
            raise LayoutError(f"field shape {field_shape} does not flatten to {d}")
        self.zero_tol = zero_tol

    def encode(self, field) -> ObservableState:
        x = np.asarray(field, dtype=np.float64).reshape(-1)
        if x.size != self.d:
            raise ShapeError(f"expected a field of {self.d} samples, got {x.size}")
        spectrum = np.fft.fft(x)
        r = np.abs(spectrum)
        phi = np.angle(spectrum)
        scale = r.max(initial=0.0)
        dead = r <= self.zero_tol * scale
        r = np.where(dead, 0.0, r)
        phi = np.where(dead, 0.0, phi)
        return ObservableState(layout=self.layout, modulus=r, phase=phi)

    def decode(self, obs: ObservableState):
        field, _ = self.decode_with_residue(obs)
        return field

    def decode_with_residue(self, obs: ObservableState):
        if obs.layout != self.layout:
            raise LayoutError("observable layout does not match this encoder")
        spectrum = obs.to_complex()
        z = np.fft.ifft(spectrum)
        residue = float(np.max(np.abs(z.imag)))
        tol = 1e-9 * max(1.0, float(np.max(obs.modulus, initial=0.0)))
        if residue > tol:
            raise SymmetryError(
                f"inverse transform has imaginary residue {residue:.3e} "
                f"(tolerance {tol:.3e}); the spectrum broke conjugate symmetry"
            )
        return z.real.reshape(self.field_shape), residue

    def modulus_mask(self, obs: ObservableState) -> np.ndarray:
        return obs.modulus > 0.0

    def prediction_error(self, pred, truth, squared: bool = False) -> float:
        from .metrics import relative_l2

        return relative_l2(pred, truth, squared=squared)


@dataclass(frozen=True)
class LatentTrajectory:
    """Externally produced (r, phi) planes over time, with a drift diagnostic."""

    layout: SubsystemLayout
    dt: float
    modulus: np.ndarray  # (T+1, N)
    phase: np.ndarray  # (T+1, N)
    modulus_drift: float

    def state_at(self, k: int) -> ObservableState:
        return ObservableState(
            layout=self.layout, modulus=self.modulus[k], phase=self.phase[k]
        )


def load_latent_trajectory(ds: TrajectoryDataset, layout: SubsystemLayout) -> LatentTrajectory:
    """Validate a latent-kind dataset against a layout; report modulus drift."""
    if ds.kind != "latent":
        raise FormatError(f"dataset kind is {ds.kind!r}, expected 'latent'")
    n = layout.total
    if ds.shape != (2, n):
        raise FormatError(
            f"latent snapshots must have shape (2, {n}), got {ds.shape}"
        )
    modulus = ds.snapshots[:, 0, :]
    phase = ds.snapshots[:, 1, :]
    if np.any(modulus < 0):
        raise FormatError("latent modulus plane has negative entries")
    drift = float(np.max(np.abs(modulus - modulus[0])))
    return LatentTrajectory(
        layout=layout, dt=ds.dt, modulus=modulus, phase=phase, modulus_drift=drift
    )


def encode_trajectory(encoder, snapshots):
    """Encode every snapshot; returns (T+1, N) modulus and phase stacks."""
    states = [encoder.encode(snap) for snap in np.asarray(snapshots)]
    r = np.stack([s.modulus for s in states])
    phi = np.stack([s.phase for s in states])
    return r, phi


def get_encoder(name: str, d: int, field_shape: Optional[tuple] = None):
    """Encoder factory used by the CLI: 'identity' or 'fourier'."""
    name = name.lower()
    if name == "identity":
        return IdentityPhaseEncoder(d)
    if name == "fourier":
        return FourierEncoder(d, field_shape=field_shape)
    raise LayoutError(f"unknown encoder {name!r}")
