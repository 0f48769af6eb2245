"""High-level laws: the slow tracking law, the epsilon-scaled fast reference
system and the fast feedback law the allocator has to realize."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Protocol, Sequence

import numpy as np

from .system import Dimensions, companion


class ReferenceSignal(Protocol):
    """``at(t) -> (x_r, r, z1_r)``; must accept a :class:`Dual2` time."""

    def at(self, t) -> tuple[list, list, list]: ...


@dataclass(frozen=True)
class ConstantReference:
    """Frozen reference: fixed ``x_r``, forcing ``r`` and preferred ``z_1``."""

    x_r: tuple
    r: tuple
    z1_r: tuple

    def at(self, t):
        return list(self.x_r), list(self.r), list(self.z1_r)


def time_scaling(epsilon: float, d: int, n_z: int) -> np.ndarray:
    return np.kron(np.diag(epsilon ** np.arange(d, dtype=float)), np.eye(n_z))


@dataclass(frozen=True)
class TimescaleGains:
    epsilon: float
    K_rx: np.ndarray
    K_rz: np.ndarray
    T: np.ndarray
    A_rx: np.ndarray
    A_rz: np.ndarray


def build_timescale(K_rx: Sequence[float], epsilon: float, dims: Dimensions) -> TimescaleGains:
    if not epsilon > 0:
        raise ValueError(f"epsilon must be positive, got {epsilon}")
    K_rx = np.asarray(K_rx, dtype=float)
    if K_rx.shape != (dims.d,) or np.any(K_rx <= 0):
        raise ValueError("K_rx needs d strictly positive entries")
    d = dims.d
    K_rz = K_rx / epsilon ** np.arange(d, 0, -1, dtype=float)
    T = time_scaling(epsilon, d, dims.n_z)
    A_rx = companion(K_rx, dims.n_x)
    A_rx_bar = companion(K_rx, dims.n_z)
    A_rz = np.linalg.solve(T, A_rx_bar @ T) / epsilon
    if np.max(np.linalg.eigvals(A_rx).real) >= 0:
        raise ValueError("K_rx does not give a Hurwitz reference matrix")
    return TimescaleGains(float(epsilon), K_rx, K_rz, T, A_rx, A_rz)


def pi_x(x, x_hat, x_r, r, K_sx, K_rx, n_x: int) -> list:
    """``r - K_sx (x - x_hat) - K_rx (x_hat - x_r)`` per degree of freedom."""
    out = []
    for j in range(n_x):
        acc = r[j]
        for i, (ks, kr) in enumerate(zip(K_sx, K_rx)):
            k = i * n_x + j
            if ks:
                acc = acc - ks * (x[k] - x_hat[k])
            acc = acc - kr * (x_hat[k] - x_r[k])
        out.append(acc)
    return out


def pi_z(z, z_hat, vartheta, K_sz, K_rz, n_z: int) -> list:
    """``k_rz1 (vartheta - (z_1 - z_hat_1)) - K_sz (z - z_hat) - K_rz z_hat``."""
    out = []
    for j in range(n_z):
        acc = K_rz[0] * (vartheta[j] - (z[j] - z_hat[j]))
        for i, (ks, kr) in enumerate(zip(K_sz, K_rz)):
            k = i * n_z + j
            if ks:
                acc = acc - ks * (z[k] - z_hat[k])
            acc = acc - kr * z_hat[k]
        out.append(acc)
    return out
