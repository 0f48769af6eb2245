"""Three-degree-of-freedom planar VTOL quadplane.

Frame conventions: the inertial frame is x forward, z up (so ``pz`` is
altitude and gravity is ``(0, -g)``); pitch ``theta`` is positive nose-up and
the body second axis points along the vertical rotors. The angle of attack is
``alpha = theta - atan2(vz, vx)``; aerodynamic forces are rotated from the
wind frame into the body frame through ``-alpha``.

Inputs are ``u = (u_f, u_r, u_p, u_e)``: front and rear vertical rotors, pusher
and elevator, normalized to ``[0, 1]^3 x [-1, 1]``.
"""
from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import yaml

from ..numerics import dual
from ..system import (
    Dimensions,
    InputPolytope,
    SystemDescription,
    augment,
    build_canonical,
)

STATE_NAMES = ("px", "pz", "vx", "vz", "theta", "omega")
INPUT_NAMES = ("u_f", "u_r", "u_p", "u_e")
# adapted parameters, in regressor column order
PARAM_NAMES = (
    "C_De",
    "C_Dalpha",
    "C_Dt",
    "C_Le",
    "C_Lalpha",
    "C_Me",
    "C_Malpha",
    "C_Momega",
    "rear_loss",
)
V_EPS2 = 1e-12


@dataclass(frozen=True)
class QuadplaneParams:
    """Vehicle and aerodynamic constants (SI units).

    The defaults describe a plausible 10 kg quadplane; they are not the values
    of any particular airframe.
    """

    m: float = 10.0
    J: float = 3.0
    g_z: float = 9.81
    rho: float = 1.225
    S: float = 0.8
    c_bar: float = 0.25
    l_v: float = 0.5
    T_max_v: float = 100.0
    T_max_p: float = 80.0
    V_max: float = 30.0
    C_pr_nom: float = 0.8
    C_D0: float = 0.2
    C_Dalpha: float = 0.3
    C_De: float = 0.002
    C_Dt: float = 0.3
    C_L0: float = 0.2
    C_Lalpha: float = 4.5
    C_Le: float = 0.02
    C_Lomega: float = 0.05
    C_M0: float = 0.02
    C_Malpha: float = -0.5
    C_Me: float = -0.6
    C_Momega: float = -0.1
    M_blend: float = 20.0
    alpha0: float = 0.45
    # constant fractional rear-thrust loss of the simplified slipstream model,
    # midway through the true loss range [0, 1 - C_pr_nom]
    rear_loss: float = 0.1

    def __post_init__(self):
        for name in ("m", "J", "rho", "S", "T_max_v", "T_max_p", "V_max"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if not 0.0 < self.C_pr_nom <= 1.0:
            raise ValueError("C_pr_nom must lie in (0, 1]")
        if not 0.0 < self.rear_loss < 1.0:
            raise ValueError("rear_loss must lie in (0, 1)")
        for name in ("C_D0", "C_Dalpha", "C_Dt"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative")

    @classmethod
    def from_mapping(cls, data: dict) -> "QuadplaneParams":
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown quadplane parameters: {sorted(unknown)}")
        return cls(**{k: float(v) for k, v in data.items()})

    @classmethod
    def load(cls, path) -> "QuadplaneParams":
        with open(Path(path), encoding="utf-8") as fh:
            data = yaml.safe_load(fh) or {}
        return cls.from_mapping(data.get("quadplane", data))

    def adapted(self) -> np.ndarray:
        return np.array([getattr(self, n) for n in PARAM_NAMES])


def wrap_angle(a):
    """Wrap to ``[-pi, pi)``; shifts by constants so derivatives pass through."""
    v = dual.value(a)
    k = math.floor((v + math.pi) / (2.0 * math.pi))
    return a - 2.0 * math.pi * k if k else a


def sigma(alpha, p: QuadplaneParams):
    """Stall blending weight: ~0 in the linear range, ~1 beyond ``+-alpha0``."""
    a = dual.exp(-p.M_blend * (alpha - p.alpha0))
    b = dual.exp(p.M_blend * (alpha + p.alpha0))
    return (1.0 + a + b) / ((1.0 + a) * (1.0 + b))


def flat_plate(alpha):
    s = dual.sin(alpha)
    return 2.0 * dual.sign(alpha) * s * s * dual.cos(alpha)


def c_pr(V, u_p, p: QuadplaneParams):
    """Rear-rotor degradation factor caused by the pusher slipstream."""
    if dual.value(V) > p.V_max:
        V = p.V_max
    elif dual.value(V) < 0.0:
        V = 0.0
    return 1.0 - (1.0 - p.C_pr_nom) * (1.0 - V / p.V_max) * u_p * u_p


def lift_drag_moment_coeffs(alpha, omega, u, p: QuadplaneParams):
    """Full aerodynamic coefficients ``(C_L, C_D, C_M)``."""
    uf, ur, _, ue = u
    sg = sigma(alpha, p)
    fp = flat_plate(alpha)
    C_D = p.C_D0 + p.C_Dalpha * alpha * alpha + p.C_De * ue + p.C_Dt * (uf + ur)
    C_L = (
        p.C_Le * ue
        + p.C_Lomega * omega
        + (1.0 - sg) * (p.C_L0 + p.C_Lalpha * alpha)
        + sg * fp
    )
    C_M = (
        p.C_Me * ue
        + p.C_Momega * omega
        + (1.0 - sg) * (p.C_M0 + p.C_Malpha * alpha)
        - sg * fp
    )
    return C_L, C_D, C_M


def airspeed_alpha(v, theta):
    vx, vz = v
    V2 = vx * vx + vz * vz
    if dual.value(V2) < V_EPS2:
        return 0.0, 0.0, wrap_angle(theta)
    V = dual.sqrt(V2)
    return V, V2, wrap_angle(theta - dual.atan2(vz, vx))


def quadplane_forces(state, u, p: QuadplaneParams) -> np.ndarray:
    """Body-frame force ``R(-alpha) q S [-C_D, C_L] + thrust`` (floats)."""
    _, _, vx, vz, theta, omega = state
    uf, ur, up, _ = u
    V, V2, alpha = airspeed_alpha((vx, vz), theta)
    if V2 == 0.0:
        aero = np.zeros(2)
    else:
        C_L, C_D, _ = lift_drag_moment_coeffs(alpha, omega, u, p)
        q = 0.5 * p.rho * V2 * p.S
        ca, sa = math.cos(alpha), math.sin(alpha)
        # wind -> body: rotate by -alpha
        aero = q * np.array([-C_D * ca + C_L * sa, C_D * sa + C_L * ca])
    thrust = np.array(
        [p.T_max_p * up * up, p.T_max_v * (uf * uf + c_pr(V, up, p) * ur * ur)]
    )
    return aero + thrust


def quadplane_moment(state, u, p: QuadplaneParams) -> float:
    _, _, vx, vz, theta, omega = state
    uf, ur, up, _ = u
    V, V2, alpha = airspeed_alpha((vx, vz), theta)
    aero = 0.0
    if V2 > 0.0:
        _, _, C_M = lift_drag_moment_coeffs(alpha, omega, u, p)
        aero = 0.5 * p.rho * V2 * p.S * p.c_bar * C_M
    return aero + p.l_v * p.T_max_v * (uf * uf - c_pr(V, up, p) * ur * ur)


def rotation(theta) -> np.ndarray:
    c, s = math.cos(theta), math.sin(theta)
    return np.array([[c, -s], [s, c]])


def quadplane_tau(state, u, p: QuadplaneParams) -> np.ndarray:
    """True ``(a_x, a_z, omega_dot)`` from the full nonlinear model."""
    theta = state[4]
    acc = np.array([0.0, -p.g_z]) + rotation(theta) @ quadplane_forces(state, u, p) / p.m
    return np.array([acc[0], acc[1], quadplane_moment(state, u, p) / p.J])


def quadplane_as_system(
    p: QuadplaneParams = QuadplaneParams(),
    theta_limit: float = math.radians(30.0),
    W_scale_box=(0.25, 2.0),
    speed_max: float = 25.0,
    omega_max: float = 0.5,
) -> SystemDescription:
    """Linear-in-parameters form over the nine adapted coefficients.

    Each unknown is the ratio of a coefficient to its nominal value, so
    ``W_true`` is all ones and every regressor column is the force or moment
    produced by a 100% change of that coefficient. This keeps the columns on
    comparable scales, which a scalar adaptation gain relies on.

    The model omits the pitch-rate lift term and replaces the slipstream
    degradation ``C_pr(V, u_p)`` by a constant fractional rear-thrust loss
    ``rear_loss``; both differences land in ``delta``. Adapting the loss
    rather than the whole rear thrust keeps that column small in hover, where
    the full rear thrust carries half the weight.

    ``delta_max`` bounds ``delta`` over the flight envelope
    ``V <= speed_max``, ``|omega| <= omega_max``.
    """
    dims = Dimensions(d=2, n_x=2, n_z=1, m=4, w=9, n_c=8)
    nominal = [float(v) for v in p.adapted()]
    if any(v == 0.0 for v in nominal):
        raise ValueError("adapted coefficients must be nonzero to normalize them")

    def regress(x, z, u):
        vx, vz = x[2], x[3]
        theta, omega = z[0], z[1]
        uf, ur, up, ue = u
        V, V2, alpha = airspeed_alpha((vx, vz), theta)
        c, s = dual.cos(theta), dual.sin(theta)
        Tv_m = p.T_max_v / p.m
        Tp_m = p.T_max_p / p.m
        rear = ur * ur
        net = uf * uf + rear
        diff = uf * uf - rear
        tau0 = [
            Tp_m * up * up * c - Tv_m * net * s,
            -p.g_z + Tp_m * up * up * s + Tv_m * net * c,
            p.l_v * p.T_max_v * diff / p.J,
        ]
        kr = nominal[8]
        # the loss removes rear thrust, so its column opposes the rear rotor
        col_rear = [kr * Tv_m * rear * s, -kr * Tv_m * rear * c, kr * p.l_v * p.T_max_v * rear / p.J]
        if dual.value(V2) == 0.0:
            phi = [[0.0] * 8 + [col_rear[i]] for i in range(3)]
            return tau0, phi
        kD = 0.5 * p.rho * p.S * V / p.m
        kM = 0.5 * p.rho * V2 * p.S * p.c_bar / p.J
        # inertial drag and lift directions scaled by q S / m
        dx, dz = -kD * vx, -kD * vz
        lx, lz = -kD * vz, kD * vx
        sg = sigma(alpha, p)
        lin = 1.0 - sg
        fp = flat_plate(alpha)
        cl_known = lin * p.C_L0 + sg * fp
        tau0[0] = tau0[0] + dx * p.C_D0 + lx * cl_known
        tau0[1] = tau0[1] + dz * p.C_D0 + lz * cl_known
        tau0[2] = tau0[2] + kM * (lin * p.C_M0 - sg * fp)
        a2 = alpha * alpha
        ut = uf + ur
        la = lin * alpha
        De, Da, Dt, Le, La, Me, Ma, Mw, _ = nominal
        phi = [
            [De * dx * ue, Da * dx * a2, Dt * dx * ut, Le * lx * ue, La * lx * la, 0.0, 0.0, 0.0, col_rear[0]],
            [De * dz * ue, Da * dz * a2, Dt * dz * ut, Le * lz * ue, La * lz * la, 0.0, 0.0, 0.0, col_rear[1]],
            [0.0, 0.0, 0.0, 0.0, 0.0, Me * kM * ue, Ma * kM * la, Mw * kM * omega, col_rear[2]],
        ]
        return tau0, phi

    def delta(x, z, u):
        vx, vz = x[2], x[3]
        theta, omega = z[0], z[1]
        uf, ur, up, _ = u
        V, V2, _ = airspeed_alpha((vx, vz), theta)
        out = np.zeros(3)
        if V2 > 0.0:
            kD = 0.5 * p.rho * p.S * V / p.m
            out[0] += -kD * vz * p.C_Lomega * omega
            out[1] += kD * vx * p.C_Lomega * omega
        err = (c_pr(V, up, p) - (1.0 - p.rear_loss)) * p.T_max_v * ur * ur
        out[0] += -err * math.sin(theta) / p.m
        out[1] += err * math.cos(theta) / p.m
        out[2] += -p.l_v * err / p.J
        return out

    W_true = np.ones(dims.w)
    box = np.column_stack([W_true * W_scale_box[0], W_true * W_scale_box[1]])
    poly = InputPolytope.box([0.0, 0.0, 0.0, -1.0], [1.0, 1.0, 1.0, 1.0])
    # worst-case slipstream error plus pitch-rate lift over the envelope
    # c_pr lies in [C_pr_nom, 1]; the model uses 1 - rear_loss
    loss_err = max(p.rear_loss, abs(p.C_pr_nom - 1.0 + p.rear_loss))
    dmax_rear = loss_err * p.T_max_v * math.hypot(1.0 / p.m, p.l_v / p.J)
    dmax_lift = 0.5 * p.rho * p.S * speed_max**2 * abs(p.C_Lomega) * omega_max / p.m
    return SystemDescription(
        name="quadplane",
        dims=dims,
        canonical=build_canonical(dims),
        regress=regress,
        delta=delta,
        delta_max=float(dmax_rear + dmax_lift),
        W_true=W_true,
        W_box=box,
        input_poly=poly,
        aug_poly=augment(poly, [-theta_limit], [theta_limit]),
        param_names=PARAM_NAMES,
        state_names=STATE_NAMES,
        input_names=INPUT_NAMES,
        envelope={"V": (0.0, speed_max), "omega": (-omega_max, omega_max)},
        truth=lambda x, z, u: quadplane_tau(np.concatenate([x, z]), u, p),
    )
