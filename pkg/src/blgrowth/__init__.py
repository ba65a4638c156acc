"""Growth exponents of regularized Brascamp-Lieb data and multilinear
Kakeya tube-overlap simulations."""

__version__ = "0.1.0"

from .datum import BLDatum, PerturbationSpec, operator_norm, perturb, validate
from .errors import InvalidInputError, ResourceError, SelectionFailedError
from .exponent import (CandidateOptions, bl_polytope_contains, candidate_subspaces, gamma_of,
                       gamma_sup, locbd_exponent, nu_estimate, stability_scan)
from .subspace import Subspace

__all__ = [
    "BLDatum", "PerturbationSpec", "operator_norm", "perturb", "validate",
    "InvalidInputError", "ResourceError", "SelectionFailedError",
    "CandidateOptions", "bl_polytope_contains", "candidate_subspaces", "gamma_of",
    "gamma_sup", "locbd_exponent", "nu_estimate", "stability_scan", "Subspace",
]
