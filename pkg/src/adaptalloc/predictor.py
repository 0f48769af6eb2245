"""Series-parallel state predictors and the projected parameter update."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .system import Dimensions, SystemDescription, companion, tau_hat


class ProjectionFault(RuntimeError):
    """The parameter estimate left its admissible box."""


@dataclass(frozen=True)
class PredictorGains:
    K_sx: np.ndarray
    K_sz: np.ndarray
    A_sx: np.ndarray
    A_sz: np.ndarray
    A_s: np.ndarray

    @classmethod
    def build(cls, K_sx, K_sz, dims: Dimensions) -> "PredictorGains":
        K_sx = np.asarray(K_sx, dtype=float)
        K_sz = np.asarray(K_sz, dtype=float)
        for K in (K_sx, K_sz):
            if K.shape != (dims.d,) or np.any(K < 0):
                raise ValueError("predictor gains need d non-negative entries")
        A_sx = companion(K_sx, dims.n_x)
        A_sz = companion(K_sz, dims.n_z)
        A_s = np.block(
            [
                [A_sx, np.zeros((A_sx.shape[0], A_sz.shape[1]))],
                [np.zeros((A_sz.shape[0], A_sx.shape[1])), A_sz],
            ]
        )
        return cls(K_sx, K_sz, A_sx, A_sz, A_s)

    def is_hurwitz(self) -> bool:
        return bool(np.max(np.linalg.eigvals(self.A_s).real) < 0)


@dataclass(frozen=True)
class AdaptationGains:
    Gamma_W: np.ndarray
    Gamma_e: np.ndarray

    def __post_init__(self):
        for name in ("Gamma_W", "Gamma_e"):
            G = np.asarray(getattr(self, name), dtype=float)
            if not np.allclose(G, G.T) or np.min(np.linalg.eigvalsh(G)) <= 0:
                raise ValueError(f"{name} must be symmetric positive-definite")


def predictor_rate(model: SystemDescription, gains: PredictorGains, x, z, u, x_hat, z_hat, W_hat):
    """Rates of ``(x_hat, z_hat)``; the drift uses the measured state."""
    cf = model.canonical
    x, z = np.asarray(x, float), np.asarray(z, float)
    tau = np.array(tau_hat(model, x, z, u, W_hat), dtype=float)
    n_x = model.dims.n_x
    xh_rate = cf.A_x @ x + cf.B_x @ tau[:n_x] - gains.A_sx @ (x - x_hat)
    zh_rate = cf.A_z @ z + cf.B_z @ tau[n_x:] - gains.A_sz @ (z - z_hat)
    return xh_rate, zh_rate


def proj(W_hat, raw_update, W_box, band: float = 0.05) -> np.ndarray:
    """Smooth box projection of a (gain-scaled) update.

    Inside the inner box (``1 - band`` of each half-width) the update passes
    unchanged; across the band the outward component is scaled linearly down
    to zero at the face. Inward components are never modified.
    """
    W_hat = np.asarray(W_hat, dtype=float)
    y = np.array(raw_update, dtype=float)
    box = np.asarray(W_box, dtype=float)
    c = 0.5 * (box[:, 0] + box[:, 1])
    h = 0.5 * (box[:, 1] - box[:, 0])
    s = np.abs(W_hat - c) / h
    if np.any(s > 1.0 + 1e-9):
        bad = int(np.argmax(s))
        raise ProjectionFault(f"W_hat[{bad}]={W_hat[bad]!r} outside {box[bad].tolist()}")
    f = np.clip((s - (1.0 - band)) / band, 0.0, 1.0)
    outward = y * np.sign(W_hat - c) > 0.0
    scale = np.where(outward, 1.0 - f, 1.0)
    return y * scale


def w_update_rate(
    phi,
    e_s,
    foo,
    L_chi_alloc,
    gains: AdaptationGains,
    B_chi,
    W_hat,
    W_box,
    band: float = 0.05,
) -> np.ndarray:
    """``Proj(W_hat, Gamma_W phi^T B_chi^T (Gamma_e e_s + L_chi^T foo))``.

    ``L_chi_alloc`` is the block of mixed second derivatives of the Lagrangian
    with rows over the allocation variables and columns over the measured
    state.
    """
    inner = gains.Gamma_e @ e_s + np.asarray(L_chi_alloc).T @ foo
    raw = gains.Gamma_W @ (np.asarray(phi).T @ (np.asarray(B_chi).T @ inner))
    return proj(W_hat, raw, W_box, band)
