"""Van Hove algebra of a continuous-spectrum Hamiltonian, discretized.

Observables are ``a_hat delta + a_r``: a diagonal symbol on the spectrum plus
a smooth kernel. States pair with them through a density and a kernel, the
time evolution multiplies kernels by energy phases, and the kernel part of
any expectation dies away, leaving the decohered diagonal state and its
pointer basis.
"""

from ._validation import (BandError, ConfigError, DegenerateCurveError, GridMismatchError,
                          NonDiagonalError, ShapeError, StateConditionError, VanHoveError)
from .algebra import (RegularityReport, RegularityThresholds, VanHoveElement,
                      classify_regularity, commutator, diagonal_observable, hamiltonian,
                      identity, is_symmetric, make_element, multiply, random_element, star,
                      zero)
from .config import ScenarioConfig, parse_config, parse_text
from .evolution import (AntiDiagonalCorrelation, DecayCurve, DecoherenceEstimate,
                        antidiagonal_values, asymptotic_expectation, decay_curve,
                        estimate_decoherence_time, evolve_observable, evolve_state,
                        offdiagonal_expectation, offdiagonal_values, refinement_check)
from .grid import (AxisSpec, SampledFunction, SpectralGrid, integrate, product_grid,
                   seminorm_estimate)
from .pointer import (PointerBasis, PointerSpace, build_pointer_space, full_diagonal_check,
                      gns_inner_product, pointer_basis, pointer_representation,
                      spectral_resolution_residual, verify_gns_identity)
from .scenario import RunSummary, build_scenario, emit_outputs, run_scenario
from .states import VanHoveState, expectation, make_state, positivity_probe, trace

__all__ = [
    "BandError",
    "ConfigError",
    "DegenerateCurveError",
    "GridMismatchError",
    "NonDiagonalError",
    "ShapeError",
    "StateConditionError",
    "VanHoveError",
    "RegularityReport",
    "RegularityThresholds",
    "VanHoveElement",
    "classify_regularity",
    "commutator",
    "diagonal_observable",
    "hamiltonian",
    "identity",
    "is_symmetric",
    "make_element",
    "multiply",
    "random_element",
    "star",
    "zero",
    "ScenarioConfig",
    "parse_config",
    "parse_text",
    "AntiDiagonalCorrelation",
    "DecayCurve",
    "DecoherenceEstimate",
    "antidiagonal_values",
    "asymptotic_expectation",
    "decay_curve",
    "estimate_decoherence_time",
    "evolve_observable",
    "evolve_state",
    "offdiagonal_expectation",
    "offdiagonal_values",
    "refinement_check",
    "AxisSpec",
    "SampledFunction",
    "SpectralGrid",
    "integrate",
    "product_grid",
    "seminorm_estimate",
    "PointerBasis",
    "PointerSpace",
    "build_pointer_space",
    "full_diagonal_check",
    "gns_inner_product",
    "pointer_basis",
    "pointer_representation",
    "spectral_resolution_residual",
    "verify_gns_identity",
    "RunSummary",
    "build_scenario",
    "emit_outputs",
    "run_scenario",
    "VanHoveState",
    "expectation",
    "make_state",
    "positivity_probe",
    "trace",
]

__version__ = "0.1.0"
