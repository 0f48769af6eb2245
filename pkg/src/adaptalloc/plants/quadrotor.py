"""Planar quadrotor with two vertical rotors and one pusher propeller.

Normalized model: gravity is ``+1`` along the (downward) second axis and the
vertical rotors push along ``-y`` in the body frame. Three gains (vertical
thrust, pusher thrust, differential moment) are treated as unknown
parameters; at their nominal value of one the model reduces to the
closed form

    tau = [R(theta) [u3, -u1 - u2] + [0, 1],  u1 - u2].
"""
from __future__ import annotations

import math

import numpy as np

from ..numerics import dual
from ..system import (
    Dimensions,
    InputPolytope,
    SystemDescription,
    augment,
    build_canonical,
)

PARAM_NAMES = ("k_thrust", "k_pusher", "k_moment")
STATE_NAMES = ("px", "py", "vx", "vy", "theta", "omega")
INPUT_NAMES = ("u1", "u2", "u3")


def quadrotor_tau(x, z, u) -> np.ndarray:
    """Closed-form force/moment of the nominal model."""
    th = z[0]
    c, s = math.cos(th), math.sin(th)
    fx, fy = u[2], -u[0] - u[1]
    return np.array([c * fx - s * fy, s * fx + c * fy + 1.0, u[0] - u[1]])


def regress(x, z, u):
    c, s = dual.cos(z[0]), dual.sin(z[0])
    T = u[0] + u[1]
    tau0 = [0.0, 1.0, 0.0]
    # columns: R(theta) [0, -T], R(theta) [u3, 0], differential moment
    phi = [
        [s * T, c * u[2], 0.0],
        [-c * T, s * u[2], 0.0],
        [0.0, 0.0, u[0] - u[1]],
    ]
    return tau0, phi


def _no_delta(x, z, u):
    return np.zeros(3)


def quadrotor_system(
    W_true=(1.0, 1.0, 1.0),
    theta_limit: float = math.radians(30.0),
    W_scale_box=(0.25, 2.0),
) -> SystemDescription:
    dims = Dimensions(d=2, n_x=2, n_z=1, m=3, w=3, n_c=6)
    W_true = np.asarray(W_true, dtype=float)
    box = np.column_stack([W_true * W_scale_box[0], W_true * W_scale_box[1]])
    poly = InputPolytope.box([0.0, 0.0, 0.0], [1.0, 1.0, 1.0])
    return SystemDescription(
        name="quadrotor",
        dims=dims,
        canonical=build_canonical(dims),
        regress=regress,
        delta=_no_delta,
        delta_max=0.0,
        W_true=W_true,
        W_box=box,
        input_poly=poly,
        aug_poly=augment(poly, [-theta_limit], [theta_limit]),
        param_names=PARAM_NAMES,
        state_names=STATE_NAMES,
        input_names=INPUT_NAMES,
    )
