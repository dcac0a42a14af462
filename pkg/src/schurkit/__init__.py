"""schurkit: operator Schur algorithm, Kreĭn shorted operators and the Schur interpolation problem."""
from .cfsolver import SchurProblem, central_next, central_solution, extend, uniqueness, validate
from .colligation import Colligation, associated_system, random_colligation, transfer_coeffs, verify_main1
from .matcore import DEFAULT_TOL, Tolerances
from .schur import ChoiceSequence, operator_schur_params, params_to_coeffs, scalar_schur_params
from .series import MatSeries
from .shorted import Subspace, shorted_operator
from .toeplitz import build_toeplitz, defect_shorted_M, defect_shorted_N, product_formula

__version__ = "0.1.0"

__all__ = [
    "ChoiceSequence", "Colligation", "DEFAULT_TOL", "MatSeries", "SchurProblem", "Subspace", "Tolerances",
    "__version__", "associated_system", "build_toeplitz", "central_next", "central_solution",
    "defect_shorted_M", "defect_shorted_N", "extend", "operator_schur_params", "params_to_coeffs",
    "product_formula", "random_colligation", "scalar_schur_params", "shorted_operator", "transfer_coeffs",
    "uniqueness", "validate", "verify_main1",
]
