"""Subsystem hierarchy and the modulus-phase observable representation.

A hierarchy of h subsystems carries dimensions N_j = 2^(1-j) * c * d for
j = 1..h, each a power of two so that subsystem j fits in n_j qubits.
Observables are stored as a nonnegative modulus vector r and an unconstrained
phase vector phi (radians, deliberately not wrapped: the fitting module needs
unwrapped phases; wrapping happens only at encoding/comparison boundaries).
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, LayoutError, ShapeError

__all__ = [
    "SubsystemLayout",
    "ObservableState",
    "build_layout",
    "assemble_observable",
    "split_observable",
    "wrap_phase",
]


def wrap_phase(phi):
    """Wrap phases to the half-open interval (-pi, pi]."""
    phi = np.asarray(phi, dtype=np.float64)
    return np.pi - np.mod(np.pi - phi, 2.0 * np.pi)


@dataclass(frozen=True)
class SubsystemLayout:
    """Immutable description of the subsystem hierarchy."""

    state_dim: int
    channels: int
    subsystem_count: int
    dims: tuple
    qubits: tuple

    @property
    def total(self) -> int:
        return sum(self.dims)

    def offsets(self):
        """Start index of each subsystem block in the concatenated vectors."""
        starts = np.concatenate(([0], np.cumsum(self.dims)))
        return tuple(int(s) for s in starts)

    def block_slice(self, j: int) -> slice:
        """Slice of subsystem j (1-based) within the concatenated vectors."""
        if not 1 <= j <= self.subsystem_count:
            raise IndexError(f"subsystem index {j} out of range 1..{self.subsystem_count}")
        starts = self.offsets()
        return slice(starts[j - 1], starts[j])


def build_layout(d: int, c: int, h: int) -> SubsystemLayout:
    """Build the hierarchy with N_j = 2^(1-j)*c*d and check its invariants."""
    d, c, h = int(d), int(c), int(h)
    if d < 1 or c < 1 or h < 1:
        raise LayoutError(f"d, c, h must be positive, got ({d}, {c}, {h})")
    n1 = c * d
    if n1 & (n1 - 1) != 0:
        raise LayoutError(f"c*d = {n1} must be a power of two")
    dims = []
    for j in range(1, h + 1):
        nj, rem = divmod(n1, 2 ** (j - 1))
        if rem or nj < 2:
            raise LayoutError(
                f"h={h} too deep for c*d={n1}: subsystem {j} would have dimension < 2"
            )
        dims.append(nj)
    qubits = tuple(nj.bit_length() - 1 for nj in dims)
    return SubsystemLayout(
        state_dim=d,
        channels=c,
        subsystem_count=h,
        dims=tuple(dims),
        qubits=qubits,
    )


@dataclass(frozen=True)
class ObservableState:
    """Concatenated modulus/phase pair f(x) = r * exp(i*phi) over all subsystems."""

    layout: SubsystemLayout
    modulus: np.ndarray
    phase: np.ndarray
    _frozen: bool = field(default=False, repr=False)

    def __post_init__(self):
        r = np.asarray(self.modulus, dtype=np.float64)
        phi = np.asarray(self.phase, dtype=np.float64)
        n = self.layout.total
        if r.shape != (n,) or phi.shape != (n,):
            raise ShapeError(
                f"modulus/phase must have length {n}, got {r.shape} and {phi.shape}"
            )
        if np.any(r < 0):
            raise DomainError("modulus entries must be nonnegative")
        r = r.copy()
        phi = phi.copy()
        r.setflags(write=False)
        phi.setflags(write=False)
        object.__setattr__(self, "modulus", r)
        object.__setattr__(self, "phase", phi)

    def block(self, j: int):
        """(r_j, phi_j) views for subsystem j (1-based)."""
        sl = self.layout.block_slice(j)
        return self.modulus[sl], self.phase[sl]

    def to_complex(self) -> np.ndarray:
        return assemble_observable(self.modulus, self.phase)


def assemble_observable(r, phi) -> np.ndarray:
    """Element-wise r * exp(i*phi)."""
    r = np.asarray(r, dtype=np.float64)
    phi = np.asarray(phi, dtype=np.float64)
    if r.shape != phi.shape:
        raise ShapeError(f"modulus shape {r.shape} != phase shape {phi.shape}")
    if np.any(r < 0):
        raise DomainError("modulus entries must be nonnegative")
    return r * np.exp(1j * phi)


def split_observable(state: ObservableState, j: int):
    """Contiguous (r_j, phi_j) slices for subsystem j; IndexError if out of range."""
    return state.block(j)
