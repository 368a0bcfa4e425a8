"""Diagonal Hamiltonians and their factorized unitary evolution.

The generator of each subsystem is H = -(1/2) * sum_k alpha_k Z_k (Pauli-Z on
qubit k, identity elsewhere), so exp(iHt) factorizes into a tensor product of
single-qubit R_z(alpha_k t) rotations.  Acting on a phase-encoded state it
shifts basis phase l by lambda_l * t where lambda_l is the corresponding
eigenvalue of H; the modulus never changes.

Qubit convention: qubit k = 1..n addresses the bit of weight 2^(n-k) in the
basis index (big-endian), matching l = sum_m l_m 2^(n-m).
"""

from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import LayoutError, OracleSizeError, ShapeError
from .layout import ObservableState, SubsystemLayout, wrap_phase

__all__ = [
    "DENSE_ORACLE_MAX_QUBITS",
    "DiagonalHamiltonian",
    "PhaseEncodedState",
    "CircuitDescription",
    "basis_parity",
    "hamiltonian_eigenvalue",
    "eigenvalue_table",
    "evolve_phase",
    "multi_step_operator",
    "apply_circuit",
    "dense_operator",
    "block_evolve",
    "encode_quantum_state",
    "decode_quantum_state",
]

DENSE_ORACLE_MAX_QUBITS = 12


@dataclass(frozen=True)
class DiagonalHamiltonian:
    """Per-subsystem R_z generator coefficients (radians per unit time)."""

    layout: SubsystemLayout
    alphas: tuple

    def __post_init__(self):
        if len(self.alphas) != self.layout.subsystem_count:
            raise LayoutError(
                f"need {self.layout.subsystem_count} coefficient blocks, "
                f"got {len(self.alphas)}"
            )
        blocks = []
        for j, (block, nj) in enumerate(zip(self.alphas, self.layout.qubits), start=1):
            arr = np.asarray(block, dtype=np.float64)
            if arr.shape != (nj,):
                raise LayoutError(
                    f"subsystem {j} needs {nj} coefficients, got shape {arr.shape}"
                )
            if not np.all(np.isfinite(arr)):
                raise LayoutError(f"subsystem {j} has non-finite coefficients")
            arr = arr.copy()
            arr.setflags(write=False)
            blocks.append(arr)
        object.__setattr__(self, "alphas", tuple(blocks))

    def block(self, j: int) -> np.ndarray:
        if not 1 <= j <= self.layout.subsystem_count:
            raise IndexError(f"subsystem index {j} out of range")
        return self.alphas[j - 1]


@dataclass(frozen=True)
class PhaseEncodedState:
    """Uniform-modulus statevector (1/sqrt(N)) sum_l exp(i*phi_l)|l>."""

    n: int
    phases: np.ndarray

    def __post_init__(self):
        phi = np.asarray(self.phases, dtype=np.float64)
        if self.n < 1 or phi.shape != (1 << self.n,):
            raise ShapeError(f"need 2^{self.n} phases, got shape {phi.shape}")
        phi = phi.copy()
        phi.setflags(write=False)
        object.__setattr__(self, "phases", phi)

    def statevector(self) -> np.ndarray:
        size = 1 << self.n
        return np.exp(1j * self.phases) / np.sqrt(size)


@dataclass(frozen=True)
class CircuitDescription:
    """One R_z gate per qubit: list of (qubit index, rotation angle) pairs."""

    n: int
    gates: tuple

    def angles(self) -> np.ndarray:
        out = np.zeros(self.n, dtype=np.float64)
        for qubit, theta in self.gates:
            out[qubit - 1] = theta
        return out

    def serialize(self) -> str:
        lines = [f"qubits {self.n}"]
        lines.extend(f"rz {qubit} {theta:.17g}" for qubit, theta in self.gates)
        return "\n".join(lines) + "\n"

    @classmethod
    def parse(cls, text: str) -> "CircuitDescription":
        lines = [ln for ln in text.splitlines() if ln.strip()]
        if not lines or not lines[0].startswith("qubits "):
            raise ShapeError("circuit text must start with a 'qubits <n>' header")
        n = int(lines[0].split()[1])
        gates = []
        for ln in lines[1:]:
            op, qubit, theta = ln.split()
            if op != "rz":
                raise ShapeError(f"unsupported gate {op!r}")
            gates.append((int(qubit), float(theta)))
        return cls(n=n, gates=tuple(gates))


def basis_parity(l: int, k: int, n: int) -> int:
    """Eigenvalue of Z on qubit k for basis state |l>: +1 for bit 0, -1 for bit 1."""
    if not 0 <= l < (1 << n):
        raise IndexError(f"basis index {l} out of range for {n} qubits")
    if not 1 <= k <= n:
        raise IndexError(f"qubit index {k} out of range 1..{n}")
    return -1 if (l >> (n - k)) & 1 else 1


def hamiltonian_eigenvalue(H: DiagonalHamiltonian, j: int, l: int) -> float:
    """lambda_l = -(1/2) sum_k alpha_jk z_k(l), computed in O(n_j)."""
    alphas = H.block(j)
    n = H.layout.qubits[j - 1]
    if not 0 <= l < (1 << n):
        raise IndexError(f"basis index {l} out of range for {n} qubits")
    return float(kernels.lazy_phase(l, alphas, n, 1.0))


def eigenvalue_table(H: DiagonalHamiltonian, j: int) -> np.ndarray:
    """All 2^n_j eigenvalues of subsystem j's Hamiltonian."""
    n = H.layout.qubits[j - 1]
    return kernels.eigenvalue_table(np.ascontiguousarray(H.block(j)), n)


def evolve_phase(phase, H: DiagonalHamiltonian, j: int, t: float) -> np.ndarray:
    """phi_l -> phi_l + lambda_l * t for subsystem j.  Modulus is not an input."""
    phi = np.asarray(phase, dtype=np.float64)
    nj = H.layout.dims[j - 1]
    if phi.shape != (nj,):
        raise ShapeError(f"subsystem {j} phase must have length {nj}, got {phi.shape}")
    return phi + eigenvalue_table(H, j) * t


def multi_step_operator(H: DiagonalHamiltonian, j: int, dt: float, k: int) -> CircuitDescription:
    """One-shot k-step circuit: n_j R_z gates with angles alpha_jm * k * dt."""
    if k < 0:
        raise ValueError("step count must be nonnegative")
    alphas = H.block(j)
    n = H.layout.qubits[j - 1]
    gates = tuple((m + 1, alphas[m] * k * dt) for m in range(n))
    return CircuitDescription(n=n, gates=gates)


def apply_circuit(circuit: CircuitDescription, phase) -> np.ndarray:
    """Apply a tensor-product R_z circuit to a phase vector of length 2^n."""
    phi = np.asarray(phase, dtype=np.float64)
    if phi.shape != (1 << circuit.n,):
        raise ShapeError(f"phase vector must have length {1 << circuit.n}")
    shifts = kernels.eigenvalue_table(np.ascontiguousarray(circuit.angles()), circuit.n)
    return phi + shifts


def dense_operator(H: DiagonalHamiltonian, j: int, t: float) -> np.ndarray:
    """Brute-force oracle: exp(iHt) built from explicit Kronecker products.

    The Hamiltonian diagonal is assembled by Kronecker products of diag(Z) with
    identity diagonals, then exponentiated elementwise; deliberately independent
    of the bit-twiddling fast path.  Capped at n_j <= 12.
    """
    n = H.layout.qubits[j - 1]
    if n > DENSE_ORACLE_MAX_QUBITS:
        raise OracleSizeError(
            f"dense oracle capped at {DENSE_ORACLE_MAX_QUBITS} qubits, got {n}"
        )
    alphas = H.block(j)
    z_diag = np.array([1.0, -1.0])
    h_diag = np.zeros(1 << n)
    for k in range(1, n + 1):
        term = np.kron(
            np.ones(1 << (k - 1)), np.kron(z_diag, np.ones(1 << (n - k)))
        )
        h_diag += -0.5 * alphas[k - 1] * term
    return np.diag(np.exp(1j * h_diag * t))


def block_evolve(state: ObservableState, H: DiagonalHamiltonian, t: float) -> ObservableState:
    """Evolve every subsystem's phase independently; modulus copied verbatim."""
    if state.layout != H.layout:
        raise LayoutError("observable state and Hamiltonian layouts differ")
    phi = state.phase.copy()
    for j in range(1, state.layout.subsystem_count + 1):
        sl = state.layout.block_slice(j)
        phi[sl] = evolve_phase(state.phase[sl], H, j, t)
    return ObservableState(layout=state.layout, modulus=state.modulus, phase=phi)


def encode_quantum_state(phase) -> PhaseEncodedState:
    phi = np.asarray(phase, dtype=np.float64)
    size = phi.shape[0] if phi.ndim == 1 else 0
    if size < 2 or size & (size - 1) != 0:
        raise ShapeError(f"phase vector length must be a power of two >= 2, got {phi.shape}")
    return PhaseEncodedState(n=size.bit_length() - 1, phases=phi)


def decode_quantum_state(state: PhaseEncodedState) -> np.ndarray:
    """Phases recovered modulo 2*pi (principal value in (-pi, pi]).

    Goes through the amplitudes rather than the stored phases, so the result
    is what a measurement-free readout of the statevector would see.
    """
    amps = state.statevector()
    phi = np.angle(amps)
    # np.angle can return -pi for amplitudes with a tiny negative imaginary
    # part; fold onto the half-open convention (-pi, pi].
    phi[phi <= -np.pi] = np.pi
    return phi
