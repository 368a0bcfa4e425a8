"""Unitary Koopman evolution of modulus-phase observables.

Evolves observables of nonlinear systems under block-diagonal unitary
operators built from diagonal (Pauli-Z) Hamiltonians, fits the rotation
coefficients from phase trajectories by least squares, and ships reference
systems plus a metric suite for end-to-end verification.
"""

from ._backend import NUMBA_ENABLED
from .encoders import FourierEncoder, IdentityPhaseEncoder, get_encoder
from .errors import (
    DegenerateError,
    DomainError,
    FitError,
    FormatError,
    IntegrationError,
    LayoutError,
    OracleSizeError,
    QkmError,
    ShapeError,
    SymmetryError,
)
from .fitting import FitResult, PhaseTrajectory, estimate_rates, fit_alphas, fit_system, unwrap_phases
from .layout import (
    ObservableState,
    SubsystemLayout,
    assemble_observable,
    build_layout,
    split_observable,
    wrap_phase,
)
from .metrics import (
    LossReport,
    SpectrumReport,
    energy_spectrum,
    loss_report,
    pair_loss,
    pdf_estimate,
    prediction_loss,
    reconstruction_loss,
    relative_l2,
    scaling_exponents,
    structure_functions,
)
from .model import KoopmanModel
from .systems import (
    GrayScottParams,
    advection_trajectory,
    advection_wavenumbers,
    gray_scott_trajectory,
    torus_rotation_trajectory,
)
from .trajio import TrajectoryDataset, read_csv_manifest, read_trajectory, write_trajectory
from .unitary import (
    CircuitDescription,
    DiagonalHamiltonian,
    PhaseEncodedState,
    basis_parity,
    block_evolve,
    decode_quantum_state,
    dense_operator,
    encode_quantum_state,
    evolve_phase,
    hamiltonian_eigenvalue,
    multi_step_operator,
)

__version__ = "0.1.0"
