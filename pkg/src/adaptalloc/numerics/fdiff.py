"""Central finite differences, used as an independent check on :mod:`dual`."""
from __future__ import annotations

from typing import Callable

import numpy as np


def fd_check(f: Callable, point, h: float = 1e-4) -> tuple[np.ndarray, np.ndarray]:
    """Central-difference gradient and Hessian of ``f`` at ``point``.

    ``f`` receives a list of floats. Errors are O(h^2) plus rounding of order
    ``eps * |f| / h^2`` on the Hessian.
    """
    if h <= 0:
        raise ValueError("step must be positive")
    x = np.asarray(point, dtype=float)
    n = x.shape[0]

    def ev(dx):
        return float(f(list(x + dx)))

    f0 = ev(np.zeros(n))
    e = np.eye(n) * h
    fp = np.array([ev(e[i]) for i in range(n)])
    fm = np.array([ev(-e[i]) for i in range(n)])
    grad = (fp - fm) / (2.0 * h)

    hess = np.empty((n, n))
    for i in range(n):
        hess[i, i] = (fp[i] - 2.0 * f0 + fm[i]) / (h * h)
        for j in range(i + 1, n):
            v = (
                ev(e[i] + e[j]) - ev(e[i] - e[j]) - ev(-e[i] + e[j]) + ev(-e[i] - e[j])
            ) / (4.0 * h * h)
            hess[i, j] = hess[j, i] = v
    return grad, hess


def max_relative_deviation(ad, fd) -> float:
    """``max|ad - fd| / (1 + max|ad|)`` over all entries."""
    ad = np.asarray(ad, dtype=float)
    fd = np.asarray(fd, dtype=float)
    return float(np.max(np.abs(ad - fd)) / (1.0 + np.max(np.abs(ad))))
