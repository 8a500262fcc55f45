"""Spin-star open-system simulator with an entanglement-based non-Markovianity witness."""

from .errors import (
    BracketError,
    ConfigError,
    ContractError,
    DimensionError,
    DomainError,
    EngineError,
    SpinstarError,
)
from .linalg import (
    DEFAULT_TOLERANCES,
    Tolerances,
    hermitian_eigensystem,
    kron,
    partial_trace,
    pt_min_eigenvalue,
    unitary_from_generator,
)
from .model import (
    CouplingSpec,
    ModelConfig,
    SitesConstant,
    SiteTimeExponential,
    SiteTimePower,
    Tabulated,
    ThermalSectorWeights,
    TimeExponential,
    TimePolynomial,
    build_hamiltonian_full,
    coupling_norm_energy,
    coupling_slice_integral,
    coupling_value,
    excitation_probability,
    structured_eigensystem,
    thermal_env_state_full,
    thermal_sector_weights,
)
from .propagate import (
    StateSeries,
    TimeGrid,
    assemble_rho_as,
    brute_force_propagate,
    closed_form_rho_as,
    fast_state_series,
    lambda_closed_form,
    omega_phase,
    propagate_active,
    slice_unitary_active,
)
from .witness import (
    EntanglementTrace,
    TransitionResult,
    Verdict,
    WitnessReport,
    detect_revival,
    entanglement_trace,
    find_transition,
    negativity,
    transition_curve,
    witness_verdict,
)

__version__ = "0.1.0"
