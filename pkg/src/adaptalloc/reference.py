"""Landing reference: cruise, decelerating descent, hover descent.

Segments are joined with ``tanh`` switches. Velocity and acceleration are the
exact derivatives of the blended position, and every expression accepts a
:class:`~adaptalloc.numerics.dual.Dual2` time so the allocator can
differentiate through the reference.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from .numerics import dual


def switch(t, t_k: float, width: float):
    """``(s, s', s'')`` of ``0.5 (1 + tanh((t - t_k) / width))``."""
    th = dual.tanh((t - t_k) / width)
    sech2 = 1.0 - th * th
    return 0.5 * (1.0 + th), 0.5 * sech2 / width, -th * sech2 / (width * width)


def _blend(base, segments, t, width):
    """Blend ``base`` into successive segments; each is ``(t_k, (f, f', f''))``."""
    p, v, a = base
    prev = base
    for t_k, seg in segments:
        s, s1, s2 = switch(t, t_k, width)
        d0, d1, d2 = (seg[0] - prev[0], seg[1] - prev[1], seg[2] - prev[2])
        p = p + s * d0
        v = v + s1 * d0 + s * d1
        a = a + s2 * d0 + 2.0 * s1 * d1 + s * d2
        prev = seg
    return p, v, a


@dataclass(frozen=True)
class LandingReference:
    """Position reference (x forward, z up) and preferred pitch.

    ``p_x``: ``x0 + V0 t`` until ``t1``, then decelerating at ``decel`` until
    ``t2``, then held at the deceleration endpoint. ``p_z``: ``z0`` until
    ``t1``, then descending at ``sink``. Pitch preference switches from
    ``theta_cruise`` to ``theta_hover`` at ``t2``.
    """

    x0: float = 260.0
    V0: float = 20.0
    z0: float = 100.0
    decel: float = 1.0
    sink: float = 0.75
    t1: float = 3.0
    t2: float = 23.0
    theta_hover: float = math.radians(15.0)
    theta_cruise: float = 0.0
    width: float = 0.25

    # analytic segments, each returning (f, f', f'')
    def cruise_x(self, t):
        return self.x0 + self.V0 * t, self.V0, 0.0

    def decel_x(self, t):
        tau = t - self.t1
        return self.x0 + self.V0 * t - 0.5 * self.decel * tau * tau, self.V0 - self.decel * tau, -self.decel

    def hover_x(self, t):
        tau = self.t2 - self.t1
        return self.x0 + self.V0 * self.t2 - 0.5 * self.decel * tau * tau, 0.0, 0.0

    def level_z(self, t):
        return self.z0, 0.0, 0.0

    def descent_z(self, t):
        return self.z0 - self.sink * (t - self.t1), -self.sink, 0.0

    def signals(self, t):
        """``((px, vx, ax), (pz, vz, az), theta_r)``."""
        sx = _blend(
            self.cruise_x(t),
            [(self.t1, self.decel_x(t)), (self.t2, self.hover_x(t))],
            t,
            self.width,
        )
        sz = _blend(self.level_z(t), [(self.t1, self.descent_z(t))], t, self.width)
        s, _, _ = switch(t, self.t2, self.width)
        return sx, sz, self.theta_cruise + (self.theta_hover - self.theta_cruise) * s

    def at(self, t):
        (px, vx, ax), (pz, vz, az), th = self.signals(t)
        return [px, pz, vx, vz], [ax, az], [th]


def landing_reference(t, ref: LandingReference | None = None):
    """``(p_r, v_r, a_r, theta_r)`` at time ``t``."""
    if t < 0:
        raise ValueError("reference is defined for t >= 0")
    ref = ref or LandingReference()
    (px, vx, ax), (pz, vz, az), th = ref.signals(t)
    return (px, pz), (vx, vz), (ax, az), th


@dataclass(frozen=True)
class HoverReference:
    """Hold a fixed position with a fixed preferred fast state."""

    p: tuple = (0.0, 0.0)
    z1: tuple = (0.0,)

    def at(self, t):
        return list(self.p) + [0.0] * len(self.p), [0.0] * len(self.p), list(self.z1)
