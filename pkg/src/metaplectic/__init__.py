"""Metaplectic operators, quadratic Schrodinger propagation and Wiener amalgam norms."""

from .errors import (
    AliasingRiskError,
    FactorizationError,
    MetaplecticError,
    NotFreeError,
    NumericalError,
    ValidationError,
)
from .operators import (
    FreeMetaplecticOp,
    apply,
    apply_free,
    compose_and_compare,
    gaussian_oracle,
    maslov_phase,
)
from .symplectic import (
    QuadraticGeneratingFunction,
    QuadraticHamiltonian,
    SymplecticMatrix,
    factor_free,
    generating_function,
    hamiltonian_flow,
    is_free,
    is_symplectic,
    random_symplectic,
    standard_symplectic_form,
)
from .wavefunction import Axis, SampledWavefunction, gaussian

__version__ = "0.1.0"

__all__ = [
    "AliasingRiskError",
    "Axis",
    "FactorizationError",
    "FreeMetaplecticOp",
    "MetaplecticError",
    "NotFreeError",
    "NumericalError",
    "QuadraticGeneratingFunction",
    "QuadraticHamiltonian",
    "SampledWavefunction",
    "SymplecticMatrix",
    "ValidationError",
    "apply",
    "apply_free",
    "compose_and_compare",
    "factor_free",
    "gaussian",
    "gaussian_oracle",
    "generating_function",
    "hamiltonian_flow",
    "is_free",
    "is_symplectic",
    "maslov_phase",
    "random_symplectic",
    "standard_symplectic_form",
]
