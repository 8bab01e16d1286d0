"""Dissipative preparation of multimode Gaussian states with modulated lossy qubits."""

__version__ = "0.1.0"

from gausscool.chain import (
    ChainSpec,
    FeasibilityReport,
    NormalModeBasis,
    chain_modes,
    chain_synthesize_plan,
    closed_chain_modes,
    frequency_planner,
    open_chain_modes,
    transform_target,
)
from gausscool.dynamics import (
    LinearDissipator,
    cooled_state,
    cooled_state_report,
    cooling_operators,
    dark_state_covariance,
    evolve_covariance,
    moment_generators,
    steady_state_covariance,
)
from gausscool.estimators import CoolingSimulator, ModulationSynthesizer
from gausscool.exceptions import (
    AmplitudeOverflow,
    ComplexityRefusal,
    CorrectionBreakdown,
    DegenerateDispersion,
    GaussCoolError,
    InvalidInput,
    NoUniqueSteadyState,
    NumericalInconsistency,
    SynthesisInfeasible,
)
from gausscool.gaussian import (
    GaussianMap,
    compose_maps,
    covariance_from_map,
    fidelity_pure,
    fidelity_with_pure,
    gaussian_overlap,
    identity_map,
    inverse_map,
    symplectic_form,
    validate_gaussian_map,
)
from gausscool.modulation import (
    HardwareSpec,
    ModulationPlan,
    cooling_rates,
    ghz_plan_closed_form,
    modulation_frequencies,
    synthesize_plan,
)
from gausscool.resonances import (
    audit_fidelity,
    audit_ghz,
    audit_plan,
    corrected_map,
    enumerate_resonances,
    squeezing_threshold,
)
from gausscool.states import GhzSpec, beam_splitter, ghz_covariance, ghz_map, squeezer

__all__ = [name for name in dir() if not name.startswith("_")]
