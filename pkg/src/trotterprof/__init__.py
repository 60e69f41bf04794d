"""Trotter-error profiling and multi-product extrapolation for small spin chains."""

from __future__ import annotations

from ._version import __version__
from .errors import (
    CalibrationError,
    ConfigError,
    DegenerateInputError,
    DimensionMismatchError,
    ExtractionError,
    FormulaError,
    HermiticityError,
    ResourceLimitError,
    SingularFitError,
    TrotterProfError,
)
from .pauli import (
    DenseOperator,
    OperatorSum,
    PauliTerm,
    commutator,
    mutually_commuting,
    pauli_product,
    to_dense,
)
from .simulator import (
    Circuit,
    GaussianJitter,
    PauliRotation,
    StateVector,
    apply_circuit,
    apply_pauli_rotation,
    exact_evolve,
    expectation,
    init_product_state,
)
from .formulas import (
    Fragment,
    PartitionedHamiltonian,
    ProductFormula,
    builtin_formula,
    compile_circuit,
    empirical_order,
    invert_circuit,
)
from .profiling import (
    BasisSpec,
    CalibrationOptions,
    CompositeSpec,
    ErrorSeries,
    FitResult,
    ProfileSample,
    ProfilingConfig,
    averaged_expectation,
    calibrate_basis,
    composite_circuit,
    default_a_grid,
    extract_error_operators,
    fit_profile,
    matrix_element_m,
    mitigated_estimate,
    profile_sweep,
)
from .mpf import MPFWeights, critical_n, mpf_estimate, mpf_weights
from .config import (
    ConfigDocument,
    parse_config,
    parse_document,
    preset_config,
    serialize_config,
)
from .report import ResultRow, ResultTable, read_csv, write_csv
from .experiments import (
    CostReport,
    ErrorCurve,
    ExperimentConfig,
    MPFOptions,
    ProfilingOptions,
    circuit_cost,
    profiling_setup,
    run_error_curve,
    sign_stable_mask,
    slope_fit,
    stable_slope_fit,
    tfim_config,
    xxz_config,
)

__all__ = [
    "__version__",
    "BasisSpec",
    "CalibrationError",
    "CalibrationOptions",
    "Circuit",
    "CompositeSpec",
    "ConfigDocument",
    "ConfigError",
    "CostReport",
    "DegenerateInputError",
    "DenseOperator",
    "DimensionMismatchError",
    "ErrorCurve",
    "ErrorSeries",
    "ExperimentConfig",
    "ExtractionError",
    "FitResult",
    "FormulaError",
    "Fragment",
    "GaussianJitter",
    "HermiticityError",
    "MPFOptions",
    "MPFWeights",
    "OperatorSum",
    "PartitionedHamiltonian",
    "PauliRotation",
    "PauliTerm",
    "ProductFormula",
    "ProfileSample",
    "ProfilingConfig",
    "ProfilingOptions",
    "ResourceLimitError",
    "ResultRow",
    "ResultTable",
    "SingularFitError",
    "StateVector",
    "TrotterProfError",
    "apply_circuit",
    "apply_pauli_rotation",
    "averaged_expectation",
    "builtin_formula",
    "calibrate_basis",
    "circuit_cost",
    "commutator",
    "compile_circuit",
    "composite_circuit",
    "critical_n",
    "default_a_grid",
    "empirical_order",
    "exact_evolve",
    "expectation",
    "extract_error_operators",
    "fit_profile",
    "init_product_state",
    "invert_circuit",
    "matrix_element_m",
    "mitigated_estimate",
    "mpf_estimate",
    "mpf_weights",
    "mutually_commuting",
    "parse_config",
    "parse_document",
    "pauli_product",
    "preset_config",
    "profile_sweep",
    "profiling_setup",
    "read_csv",
    "run_error_curve",
    "serialize_config",
    "sign_stable_mask",
    "slope_fit",
    "stable_slope_fit",
    "tfim_config",
    "to_dense",
    "write_csv",
    "xxz_config",
]
