"""Phase structure of quadratic bosonic Hamiltonians.

Builds the Hopfield-Bogoliubov (HB) matrix of a multi-mode quadratic bosonic
Hamiltonian, computes its complex spectrum, classifies normal (all real) and
superradiant (some complex) phases, locates exceptional and degenerate points
along parameter sweeps, and evaluates the quantum Fisher information of the
squeezed ground state near criticality.
"""
__version__ = "0.1.0"

from .errors import (
    AtExceptionalPoint, ConvergenceError, HBError, InvalidHamiltonian, NumericError,
    PairingError, PreconditionError, TruncationError,
)
from .model import (
    MODEL_TYPES, RING_MOMENTA, QuadraticHamiltonian, RabiParams, ThreeRingParams, Violation,
    complete_description, from_description, from_rabi, from_three_ring, from_two_rabi,
    hamiltonian, single_mode, symmetric, two_mode, validate, with_param,
)
from .hbmatrix import HBMatrix, build, determinant, symmetry_residual
from .eigen import (
    BogoliubovVector, PairedSpectrum, SolverOptions, SpectralPair, eigenvalues, eigenvector,
    pair, pair_and_label, particle_energies, spectrum,
)
from .phase import (
    FAILED, NP, SP, CriticalPoint, ParamPath, PhasePoint, PhaseSequence, SamplingWarning,
    classify, critical_points, locate_dps, locate_eps, phase_sequence, scan,
)
from .gaussian import Family, QfiResult, ScalingResult, fock_vector, qfi, scaling_exponent
from .oracle import fock_diagonalize, gap_check, small_eigenvalues
