"""Uncertain systems in controllable canonical form.

The state is split into a slow part ``x`` (``n_x`` degrees of freedom) and a
fast part ``z`` (``n_z`` degrees of freedom), each a chain of ``d``
integrators driven by a force-like function ``tau(x, z, u)``. States are stored
derivative-major: ``x = [x_1, ..., x_d]`` with ``x_i`` holding the ``i``-th
derivative block of all degrees of freedom.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np


@dataclass(frozen=True)
class Dimensions:
    d: int
    n_x: int
    n_z: int
    m: int
    w: int
    n_c: int

    def __post_init__(self):
        for name in ("d", "n_x", "n_z", "m", "w", "n_c"):
            v = getattr(self, name)
            if not isinstance(v, (int, np.integer)) or v <= 0:
                raise ValueError(f"{name} must be a positive integer, got {v!r}")

    @property
    def nx_state(self) -> int:
        return self.d * self.n_x

    @property
    def nz_state(self) -> int:
        return self.d * self.n_z

    @property
    def n_chi(self) -> int:
        return self.d * (self.n_x + self.n_z)

    @property
    def n_tau(self) -> int:
        return self.n_x + self.n_z

    @property
    def n_ubar(self) -> int:
        return self.m + self.n_z


@dataclass(frozen=True)
class CanonicalForm:
    A_x: np.ndarray
    B_x: np.ndarray
    A_z: np.ndarray
    B_z: np.ndarray
    A_chi: np.ndarray
    B_chi: np.ndarray


def chain_matrices(d: int) -> tuple[np.ndarray, np.ndarray]:
    A = np.eye(d, k=1)
    B = np.zeros((d, 1))
    B[-1, 0] = 1.0
    return A, B


def companion(gains: Sequence[float], n: int) -> np.ndarray:
    """Chain-integrator matrix whose last block row is ``-gains ⊗ I_n``."""
    k = np.asarray(gains, dtype=float)
    d = k.shape[0]
    A, _ = chain_matrices(d)
    A = A.copy()
    A[-1, :] = -k
    return np.kron(A, np.eye(n))


def build_canonical(dims: Dimensions) -> CanonicalForm:
    A, B = chain_matrices(dims.d)
    A_x, B_x = np.kron(A, np.eye(dims.n_x)), np.kron(B, np.eye(dims.n_x))
    A_z, B_z = np.kron(A, np.eye(dims.n_z)), np.kron(B, np.eye(dims.n_z))
    A_chi = np.block(
        [
            [A_x, np.zeros((A_x.shape[0], A_z.shape[1]))],
            [np.zeros((A_z.shape[0], A_x.shape[1])), A_z],
        ]
    )
    B_chi = np.block(
        [
            [B_x, np.zeros((B_x.shape[0], B_z.shape[1]))],
            [np.zeros((B_z.shape[0], B_x.shape[1])), B_z],
        ]
    )
    return CanonicalForm(A_x, B_x, A_z, B_z, A_chi, B_chi)


@dataclass(frozen=True)
class InputPolytope:
    """``{u : C u <= c}``."""

    C: np.ndarray
    c: np.ndarray

    @classmethod
    def box(cls, lower: Sequence[float], upper: Sequence[float]) -> "InputPolytope":
        lo = np.asarray(lower, dtype=float)
        hi = np.asarray(upper, dtype=float)
        if np.any(hi <= lo):
            raise ValueError("box must have nonempty interior")
        n = lo.shape[0]
        # rows alternate (upper bound, lower bound) per coordinate
        C = np.zeros((2 * n, n))
        c = np.zeros(2 * n)
        for i in range(n):
            C[2 * i, i], c[2 * i] = 1.0, hi[i]
            C[2 * i + 1, i], c[2 * i + 1] = -1.0, -lo[i]
        return cls(C, c)

    @property
    def n_rows(self) -> int:
        return self.C.shape[0]

    def bounds(self) -> tuple[np.ndarray, np.ndarray]:
        """Per-coordinate bounds for axis-aligned boxes built by :meth:`box`."""
        n = self.C.shape[1]
        return -self.c[1::2][:n], self.c[0::2][:n]


def polytope_margin(poly: InputPolytope, point) -> np.ndarray:
    """Slack ``c - C @ point`` per row; all positive iff strictly interior."""
    return poly.c - poly.C @ np.asarray(point, dtype=float)


def augment(poly: InputPolytope, theta_lower, theta_upper) -> InputPolytope:
    """Augmented polytope over ``(u, vartheta)`` with box limits on ``vartheta``."""
    tb = InputPolytope.box(theta_lower, theta_upper)
    m, k = poly.C.shape[1], tb.C.shape[1]
    C = np.block(
        [
            [poly.C, np.zeros((poly.n_rows, k))],
            [np.zeros((tb.n_rows, m)), tb.C],
        ]
    )
    return InputPolytope(C, np.concatenate([poly.c, tb.c]))


Regressor = Callable[[Sequence, Sequence, Sequence], tuple[list, list]]


@dataclass(frozen=True)
class SystemDescription:
    """The plant contract.

    ``regress(x, z, u)`` returns ``(tau0, phi)`` where ``tau0`` is a list of
    ``n_x + n_z`` scalars and ``phi`` a list of ``n_x + n_z`` rows of ``w``
    scalars. It must be written against :mod:`adaptalloc.numerics.dual`
    primitives so it can be differentiated. ``delta(x, z, u)`` is the
    non-parametric part of the true plant and is only ever evaluated on floats.
    """

    name: str
    dims: Dimensions
    canonical: CanonicalForm
    regress: Regressor
    delta: Callable
    delta_max: float
    W_true: np.ndarray
    W_box: np.ndarray
    input_poly: InputPolytope
    aug_poly: InputPolytope
    param_names: tuple[str, ...] = ()
    state_names: tuple[str, ...] = ()
    input_names: tuple[str, ...] = ()
    envelope: dict = field(default_factory=dict)
    # optional independent plant model; defaults to tau0 + phi W_true + delta
    truth: Callable | None = None

    def __post_init__(self):
        W_box = np.asarray(self.W_box, dtype=float)
        if W_box.shape != (self.dims.w, 2):
            raise ValueError(f"W_box must be ({self.dims.w}, 2), got {W_box.shape}")
        if not np.all((W_box[:, 0] <= self.W_true) & (self.W_true <= W_box[:, 1])):
            raise ValueError("W_true must lie in W_box")


def combine(tau0, phi, W) -> list:
    """``tau0 + phi @ W`` on generic scalars."""
    out = []
    for t0, row in zip(tau0, phi):
        acc = t0
        for p, w in zip(row, W):
            if isinstance(p, float) and p == 0.0:
                continue
            acc = acc + p * w
        out.append(acc)
    return out


def tau_hat(model: SystemDescription, x, z, u, W_hat) -> list:
    tau0, phi = model.regress(x, z, u)
    return combine(tau0, phi, W_hat)


def tau_true(model: SystemDescription, x, z, u) -> np.ndarray:
    if model.truth is not None:
        return np.asarray(model.truth(x, z, u), dtype=float)
    th = np.array(tau_hat(model, x, z, u, model.W_true), dtype=float)
    return th + np.asarray(model.delta(x, z, u), dtype=float)


def regressor_matrix(model: SystemDescription, x, z, u) -> tuple[np.ndarray, np.ndarray]:
    tau0, phi = model.regress(x, z, u)
    return np.array(tau0, dtype=float), np.array(phi, dtype=float)


def split_tau(model: SystemDescription, tau) -> tuple:
    return tau[: model.dims.n_x], tau[model.dims.n_x :]
