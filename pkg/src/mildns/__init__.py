"""Pseudo-spectral laboratory for mild Navier-Stokes solutions on the
periodic box: heat/Leray/Riesz multipliers, the scaling-adapted norms,
the singular Duhamel quadrature, the Picard construction with measured
smallness thresholds, and a reproducible experiment runner.
"""
from .duhamel import (
    QuadratureSpec,
    BilinearEstimateReport,
    beta_integral,
    bilinear_B,
    bilinear_estimate_report,
    bilinear_trajectory,
    volterra_nodes,
)
from .errors import (
    CalibrationError,
    ConfigError,
    DataError,
    DivergenceError,
    MeshError,
    MildNSError,
    NonConvergenceError,
    NumericalError,
    SmallnessError,
    WindowError,
)
from .lattice import (
    DatumSpec,
    Field,
    Lattice,
    ScalarField,
    TensorField,
    VectorField,
    field_from_bytes,
    field_to_bytes,
    hermitian_defect,
    load_field,
    make_lattice,
    realize_datum,
    save_field,
    to_physical,
    to_spectral,
)
from .lab import ResultTable, default_config, list_experiments, run
from .multipliers import (
    KernelProfile,
    composite_apply,
    divergence_defect,
    divergence_of_tensor,
    fractional_laplacian,
    heat_flow,
    kernel_profile,
    leray_project,
    riesz_transform,
)
from .norms import (
    DecayFit,
    EmbeddingReport,
    ExponentBook,
    NormReport,
    Trajectory,
    VanishingReport,
    besov_norm_heat,
    decay_exponent_fit,
    dyadic_grid,
    heat_trajectory,
    kato_norm,
    lebesgue_norm,
    n_norm,
    quadratic_mesh,
    sobolev_embedding_check,
    sobolev_norm,
    vanishing_at_zero,
)
from .picard import (
    CorpusSpec,
    FluctuationReport,
    LadderReport,
    MildSolution,
    PicardTrace,
    SmallnessReport,
    abstract_fixed_point,
    build_exponent_book,
    calibrate_thresholds,
    fluctuation_analysis,
    load_calibration,
    regularity_ladder,
    save_solution,
    smallness_lhs,
    solve_mild,
)
from .runtime import VERSION as __version__

__all__ = [
    "__version__",
    # errors
    "MildNSError",
    "ConfigError",
    "DataError",
    "MeshError",
    "WindowError",
    "SmallnessError",
    "CalibrationError",
    "NumericalError",
    "DivergenceError",
    "NonConvergenceError",
    # lattice
    "Lattice",
    "make_lattice",
    "Field",
    "ScalarField",
    "VectorField",
    "TensorField",
    "to_spectral",
    "to_physical",
    "hermitian_defect",
    "DatumSpec",
    "realize_datum",
    "field_to_bytes",
    "field_from_bytes",
    "save_field",
    "load_field",
    # multipliers
    "heat_flow",
    "fractional_laplacian",
    "riesz_transform",
    "leray_project",
    "divergence_of_tensor",
    "divergence_defect",
    "composite_apply",
    "KernelProfile",
    "kernel_profile",
    # norms
    "ExponentBook",
    "Trajectory",
    "quadratic_mesh",
    "heat_trajectory",
    "dyadic_grid",
    "NormReport",
    "lebesgue_norm",
    "sobolev_norm",
    "besov_norm_heat",
    "kato_norm",
    "n_norm",
    "VanishingReport",
    "vanishing_at_zero",
    "DecayFit",
    "decay_exponent_fit",
    "EmbeddingReport",
    "sobolev_embedding_check",
    # duhamel
    "QuadratureSpec",
    "volterra_nodes",
    "beta_integral",
    "bilinear_B",
    "bilinear_trajectory",
    "BilinearEstimateReport",
    "bilinear_estimate_report",
    # picard
    "PicardTrace",
    "abstract_fixed_point",
    "build_exponent_book",
    "SmallnessReport",
    "smallness_lhs",
    "CorpusSpec",
    "calibrate_thresholds",
    "load_calibration",
    "MildSolution",
    "solve_mild",
    "save_solution",
    "LadderReport",
    "regularity_ladder",
    "FluctuationReport",
    "fluctuation_analysis",
    # lab
    "ResultTable",
    "run",
    "default_config",
    "list_experiments",
]
