"""Factoring biprimes with feedback-driven (FALQON) state preparation on simulated qubits."""

__version__ = "0.1.0"

from ._kernels import BACKEND as KERNEL_BACKEND
from .encoder import (
    BooleanPolynomial,
    DecodingRule,
    FactorInstance,
    bit_decompose,
    boolean_to_zpoly,
    brute_force_ground_states,
    build_cost,
    catalog_hamiltonian,
    decode_factors,
    encode,
    solution_states,
    verify_truncation,
)
from .falqon import FalqonConfig, TrajectoryRecord, falqon_step, run_falqon
from .pauli import PauliSum, ZPolynomial, commutator_with_drive, tomography_groups, zpoly_diagonal
from .simulator import (
    NoiseModel,
    QuantumState,
    RfModel,
    apply_drive,
    apply_problem_phase,
    basis_probabilities,
    expectation_commutator,
    expectation_energy,
    init_state,
)
from .baselines import QaoaSchedule, RampSchedule, run_adiabatic, run_qaoa
from .daqc import DaqcSchedule, daqc_schedule, daqc_unitary, ensemble_fidelity, unitary_fidelity
