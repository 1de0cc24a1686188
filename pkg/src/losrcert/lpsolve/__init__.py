from .certificate import certificate_gap, read_certificate, validate_certificate, write_certificate
from .presolve import PresolvedLp, presolve
from .problem import LpFormatError, LpProblem, read_lp, write_lp
from .solve import FEASIBLE, INFEASIBLE, NUMERICAL_FAILURE, SolverResult, solve_feasibility

__all__ = [
    "FEASIBLE",
    "INFEASIBLE",
    "NUMERICAL_FAILURE",
    "LpFormatError",
    "LpProblem",
    "PresolvedLp",
    "SolverResult",
    "certificate_gap",
    "presolve",
    "read_certificate",
    "read_lp",
    "solve_feasibility",
    "validate_certificate",
    "write_certificate",
    "write_lp",
]
