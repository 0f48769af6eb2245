"""Dense linear solves with a conditioning guard."""
from __future__ import annotations

import warnings

import numpy as np
import scipy.linalg

COND_LIMIT = 1e12


class SingularHessian(np.linalg.LinAlgError):
    def __init__(self, cond: float):
        super().__init__(f"matrix is numerically singular (condition estimate {cond:.3g})")
        self.cond = cond


def solve_linear(A, b, cond_limit: float = COND_LIMIT) -> np.ndarray:
    """Solve ``A x = b`` by LU with partial pivoting.

    Raises :class:`SingularHessian` when the 1-norm condition estimate exceeds
    ``cond_limit``; recovery is left to the caller.
    """
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {A.shape}")
    if b.shape[0] != A.shape[0]:
        raise ValueError(f"dimension mismatch: A is {A.shape}, b is {b.shape}")
    if not np.all(np.isfinite(A)):
        raise SingularHessian(np.inf)
    with warnings.catch_warnings():
        # exact singularity is reported below through the condition estimate
        warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
        lu, piv = scipy.linalg.lu_factor(A, check_finite=False)
    # reciprocal condition estimate from LAPACK gecon
    gecon = scipy.linalg.get_lapack_funcs("gecon", (lu,))
    rcond, info = gecon(lu, np.linalg.norm(A, 1), norm="1")
    cond = np.inf if rcond == 0.0 else 1.0 / rcond
    if cond > cond_limit:
        raise SingularHessian(cond)
    return scipy.linalg.lu_solve((lu, piv), b, check_finite=False)
