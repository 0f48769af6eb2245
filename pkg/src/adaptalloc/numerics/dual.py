"""Second-order forward-mode automatic differentiation.

A :class:`Dual2` carries a value, its gradient and its Hessian with respect to
``n`` seeded variables. Functions written against the elementary functions in
this module (``exp``, ``log``, ``sin`` ...) accept plain floats as well, so the
same code path is used for fast float evaluation and for differentiation.
"""
from __future__ import annotations

import math
from typing import Callable, Sequence

import numpy as np


class DomainViolation(ValueError):
    """An elementary function was evaluated outside its domain."""

    def __init__(self, primitive: str, value: float):
        super().__init__(f"{primitive} evaluated outside its domain at {value!r}")
        self.primitive = primitive
        self.value = value


class Dual2:
    __slots__ = ("v", "g", "h")
    # make numpy scalars defer to the reflected operators below
    __array_ufunc__ = None

    def __init__(self, v: float, g: np.ndarray, h: np.ndarray):
        self.v = v
        self.g = g
        self.h = h

    @classmethod
    def variable(cls, value: float, index: int, n: int) -> "Dual2":
        g = np.zeros(n)
        g[index] = 1.0
        return cls(float(value), g, np.zeros((n, n)))

    @property
    def n(self) -> int:
        return self.g.shape[0]

    def _chain(self, f0: float, f1: float, f2: float) -> "Dual2":
        # f(a) with f' = f1, f'' = f2
        return Dual2(f0, f1 * self.g, f1 * self.h + f2 * np.outer(self.g, self.g))

    def __add__(self, o):
        if isinstance(o, Dual2):
            return Dual2(self.v + o.v, self.g + o.g, self.h + o.h)
        return Dual2(self.v + o, self.g, self.h)

    __radd__ = __add__

    def __sub__(self, o):
        if isinstance(o, Dual2):
            return Dual2(self.v - o.v, self.g - o.g, self.h - o.h)
        return Dual2(self.v - o, self.g, self.h)

    def __rsub__(self, o):
        return Dual2(o - self.v, -self.g, -self.h)

    def __neg__(self):
        return Dual2(-self.v, -self.g, -self.h)

    def __pos__(self):
        return self

    def __mul__(self, o):
        if isinstance(o, Dual2):
            cross = np.outer(self.g, o.g)
            return Dual2(
                self.v * o.v,
                self.v * o.g + o.v * self.g,
                self.v * o.h + o.v * self.h + (cross + cross.T),
            )
        return Dual2(self.v * o, o * self.g, o * self.h)

    __rmul__ = __mul__

    def reciprocal(self) -> "Dual2":
        if self.v == 0.0:
            raise DomainViolation("division", self.v)
        r = 1.0 / self.v
        return self._chain(r, -r * r, 2.0 * r * r * r)

    def __truediv__(self, o):
        if isinstance(o, Dual2):
            return self * o.reciprocal()
        if o == 0:
            raise DomainViolation("division", 0.0)
        return self * (1.0 / o)

    def __rtruediv__(self, o):
        return self.reciprocal() * o

    def __pow__(self, p):
        if isinstance(p, Dual2):
            return exp(p * log(self))
        if p == 2:
            return self * self
        if self.v == 0.0 and p < 2:
            raise DomainViolation("power", self.v)
        if self.v < 0.0 and float(p) != int(p):
            raise DomainViolation("power", self.v)
        return self._chain(self.v**p, p * self.v ** (p - 1), p * (p - 1) * self.v ** (p - 2))

    def __abs__(self):
        return -self if self.v < 0.0 else self

    # comparisons act on the value so piecewise code branches naturally
    def __lt__(self, o):
        return self.v < value(o)

    def __le__(self, o):
        return self.v <= value(o)

    def __gt__(self, o):
        return self.v > value(o)

    def __ge__(self, o):
        return self.v >= value(o)

    def __float__(self):
        return float(self.v)

    def __repr__(self):
        return f"Dual2(v={self.v!r}, n={self.n})"


def value(a) -> float:
    return a.v if isinstance(a, Dual2) else a


def exp(a):
    if isinstance(a, Dual2):
        e = math.exp(a.v)
        return a._chain(e, e, e)
    return math.exp(a)


def log(a):
    if isinstance(a, Dual2):
        if a.v <= 0.0:
            raise DomainViolation("log", a.v)
        r = 1.0 / a.v
        return a._chain(math.log(a.v), r, -r * r)
    if a <= 0.0:
        raise DomainViolation("log", a)
    return math.log(a)


def sqrt(a):
    if isinstance(a, Dual2):
        if a.v <= 0.0:
            raise DomainViolation("sqrt", a.v)
        s = math.sqrt(a.v)
        return a._chain(s, 0.5 / s, -0.25 / (s * a.v))
    if a < 0.0:
        raise DomainViolation("sqrt", a)
    return math.sqrt(a)


def sin(a):
    if isinstance(a, Dual2):
        s, c = math.sin(a.v), math.cos(a.v)
        return a._chain(s, c, -s)
    return math.sin(a)


def cos(a):
    if isinstance(a, Dual2):
        s, c = math.sin(a.v), math.cos(a.v)
        return a._chain(c, -s, -c)
    return math.cos(a)


def tanh(a):
    if isinstance(a, Dual2):
        th = math.tanh(a.v)
        d = 1.0 - th * th
        return a._chain(th, d, -2.0 * th * d)
    return math.tanh(a)


def atan2(y, x):
    """Two-argument arctangent; undefined (and rejected) at the origin."""
    if not isinstance(y, Dual2) and not isinstance(x, Dual2):
        if x == 0.0 and y == 0.0:
            raise DomainViolation("atan2", 0.0)
        return math.atan2(y, x)
    yv, xv = value(y), value(x)
    r2 = xv * xv + yv * yv
    if r2 == 0.0:
        raise DomainViolation("atan2", 0.0)
    n = y.n if isinstance(y, Dual2) else x.n
    zero_g, zero_h = np.zeros(n), np.zeros((n, n))
    yg, yh = (y.g, y.h) if isinstance(y, Dual2) else (zero_g, zero_h)
    xg, xh = (x.g, x.h) if isinstance(x, Dual2) else (zero_g, zero_h)
    # partials of atan2(y, x)
    fy, fx = xv / r2, -yv / r2
    r4 = r2 * r2
    fyy = -2.0 * xv * yv / r4
    fxx = 2.0 * xv * yv / r4
    fxy = (yv * yv - xv * xv) / r4
    g = fy * yg + fx * xg
    cross = fxy * np.outer(xg, yg)
    h = (
        fy * yh
        + fx * xh
        + fyy * np.outer(yg, yg)
        + fxx * np.outer(xg, xg)
        + (cross + cross.T)
    )
    return Dual2(math.atan2(yv, xv), g, h)


def sign(a) -> float:
    """Sign of the value; piecewise constant, so it carries no derivative."""
    v = value(a)
    return float(v > 0.0) - float(v < 0.0)


def seed(point: Sequence[float]) -> list[Dual2]:
    n = len(point)
    return [Dual2.variable(p, i, n) for i, p in enumerate(point)]


def grad_hess(f: Callable, point) -> tuple[float, np.ndarray, np.ndarray]:
    """Value, gradient and Hessian of a scalar field ``f(list_of_scalars)``.

    Derivatives are exact up to floating point. A constant result yields a zero
    gradient and Hessian.
    """
    point = np.asarray(point, dtype=float)
    n = point.shape[0]
    out = f(seed(point))
    if not isinstance(out, Dual2):
        return float(out), np.zeros(n), np.zeros((n, n))
    return out.v, out.g, out.h
