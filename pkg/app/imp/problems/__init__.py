from .nlls_logistic import NllsLogisticProblem
from .quadratic import QuadraticProblem, make_quadratic_problem

__all__ = [
    "NllsLogisticProblem",
    "QuadraticProblem",
    "make_quadratic_problem",
]
