from .dual import Dual2, DomainViolation, grad_hess
from .fdiff import fd_check, max_relative_deviation
from .integrate import Integrator, NonFiniteDerivative, Scheme, step
from .linalg import SingularHessian, solve_linear

__all__ = [
    "Dual2",
    "DomainViolation",
    "grad_hess",
    "fd_check",
    "max_relative_deviation",
    "Integrator",
    "NonFiniteDerivative",
    "Scheme",
    "step",
    "SingularHessian",
    "solve_linear",
]
