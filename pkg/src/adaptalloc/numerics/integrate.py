"""Fixed-step explicit integrators."""
from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Callable

import numpy as np


class NonFiniteDerivative(FloatingPointError):
    def __init__(self, t: float):
        super().__init__(f"non-finite state derivative at t={t:.6g}")
        self.t = t


class Scheme(str, enum.Enum):
    EULER = "euler"
    RK4 = "rk4"


@dataclass(frozen=True)
class Integrator:
    dt: float
    scheme: Scheme = Scheme.EULER

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError(f"dt must be positive, got {self.dt}")
        object.__setattr__(self, "scheme", Scheme(self.scheme))


def _rate(deriv, t, y):
    k = np.asarray(deriv(t, y), dtype=float)
    if not np.all(np.isfinite(k)):
        raise NonFiniteDerivative(t)
    return k


def step(deriv: Callable, state, t: float, integrator: Integrator) -> np.ndarray:
    """Advance ``state`` by one step of ``integrator``; ``deriv(t, y)`` gives the rate."""
    y = np.asarray(state, dtype=float)
    dt = integrator.dt
    if integrator.scheme is Scheme.EULER:
        return y + dt * _rate(deriv, t, y)
    k1 = _rate(deriv, t, y)
    k2 = _rate(deriv, t + 0.5 * dt, y + 0.5 * dt * k1)
    k3 = _rate(deriv, t + 0.5 * dt, y + 0.5 * dt * k2)
    k4 = _rate(deriv, t + dt, y + dt * k3)
    return y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
