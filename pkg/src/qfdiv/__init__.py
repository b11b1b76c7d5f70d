"""Quantum f-divergences of PSD matrices and a laboratory for their preservers."""

from .divergence import (
    DivergenceResult,
    LimitReport,
    Term,
    divergence_epsilon,
    divergence_limit,
    divergence_spectral,
    divergence_superoperator,
    divergence_superoperator_explicit,
    hellinger_sq,
    tsallis_closed,
    umegaki,
)
from .errors import (
    ConvergenceError,
    DimensionError,
    DomainError,
    HermiticityError,
    NotAConjugationError,
    NotPsdError,
    ParameterError,
    QfdivError,
    SupportViolationError,
)
from .extreal import INF, ExtendedReal
from .generator import (
    GeneratorFunction,
    certify_strict_convexity,
    estimate_omega,
    make_affine,
    make_custom,
    make_entropy,
    make_exp_decay,
    make_sqrt_deviation,
    make_tsallis,
    parse_generator,
)
from .matrix_io import load_matrix, save_matrix
from .preserver import (
    TransformSpec,
    check_preservation,
    falsify,
    recover_operator,
)

__version__ = "0.1.0"

__all__ = [
    "certify_strict_convexity",
    "check_preservation",
    "ConvergenceError",
    "DimensionError",
    "divergence_epsilon",
    "divergence_limit",
    "divergence_spectral",
    "divergence_superoperator",
    "divergence_superoperator_explicit",
    "DivergenceResult",
    "DomainError",
    "estimate_omega",
    "ExtendedReal",
    "falsify",
    "GeneratorFunction",
    "hellinger_sq",
    "HermiticityError",
    "INF",
    "LimitReport",
    "load_matrix",
    "make_affine",
    "make_custom",
    "make_entropy",
    "make_exp_decay",
    "make_sqrt_deviation",
    "make_tsallis",
    "NotAConjugationError",
    "NotPsdError",
    "ParameterError",
    "parse_generator",
    "QfdivError",
    "recover_operator",
    "save_matrix",
    "SupportViolationError",
    "Term",
    "TransformSpec",
    "tsallis_closed",
    "umegaki",
]
