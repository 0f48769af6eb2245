"""Dynamic control allocation.

The allocation problem picks the augmented input ``ubar = (u, vartheta)``
minimizing a barrier-augmented cost subject to ``tau_hat = pi`` for both the
slow and the fast high-level commands. Instead of solving it at every sample,
``(ubar, lambda)`` follow the flow

    d/dt [ubar; lambda] = -H^{-1} (Gamma [L_u; L_lambda] + u_ff)

where ``H`` is the bordered Hessian and ``u_ff`` compensates for the motion of
the optimum through time, states, predictor states and parameter estimates.

All derivatives come from one second-order forward-mode pass over the
concatenated argument ``(t, x, z, x_hat, z_hat, W_hat, ubar, lambda)``.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .highlevel import ReferenceSignal, TimescaleGains, pi_x, pi_z
from .numerics import dual
from .numerics.linalg import SingularHessian, solve_linear
from .predictor import PredictorGains
from .system import InputPolytope, SystemDescription, polytope_margin, tau_hat

log = logging.getLogger(__name__)

MU_START, MU_FACTOR, MU_MAX = 1e-8, 10.0, 1e-2


class BoundaryHit(ValueError):
    """``ubar`` reached (or crossed) a face of the augmented input polytope."""

    def __init__(self, row: int, slack: float):
        super().__init__(f"barrier row {row} has non-positive slack {slack:.3g}")
        self.row = row
        self.slack = slack


class OracleFailure(RuntimeError):
    pass


@dataclass(frozen=True)
class AllocObjective:
    """``J = 1/2 u'Qu + alpha |vartheta - z1_r(t)|^2 - beta sum log(c - C ubar)``."""

    Q: np.ndarray
    alpha: float
    beta: float
    poly: InputPolytope

    def __post_init__(self):
        Q = np.asarray(self.Q, dtype=float)
        if not np.allclose(Q, Q.T) or np.min(np.linalg.eigvalsh(Q)) <= 0:
            raise ValueError("Q must be symmetric positive-definite")
        if not self.alpha > 0:
            raise ValueError("alpha must be positive")
        if not 0 < self.beta < 1:
            raise ValueError("beta must lie in (0, 1)")

    @cached_property
    def _rows(self):
        C = self.poly.C
        return [
            (float(self.poly.c[i]), [(j, float(C[i, j])) for j in np.flatnonzero(C[i])])
            for i in range(C.shape[0])
        ]

    @cached_property
    def _Q_entries(self):
        Q = np.asarray(self.Q, dtype=float)
        return [(i, j, float(Q[i, j])) for i, j in zip(*np.nonzero(Q))]


@dataclass(frozen=True)
class Layout:
    """Index map of the concatenated Lagrangian argument."""

    n_xs: int
    n_zs: int
    w: int
    n_ub: int
    n_lam: int

    def _bounds(self):
        sizes = [1, self.n_xs, self.n_zs, self.n_xs, self.n_zs, self.w, self.n_ub, self.n_lam]
        edges = np.cumsum([0] + sizes)
        return [slice(int(a), int(b)) for a, b in zip(edges[:-1], edges[1:])]

    @property
    def n(self) -> int:
        return 1 + 2 * (self.n_xs + self.n_zs) + self.w + self.n_ub + self.n_lam

    @property
    def t(self):
        return self._bounds()[0]

    @property
    def chi(self):
        b = self._bounds()
        return slice(b[1].start, b[2].stop)

    @property
    def chi_hat(self):
        b = self._bounds()
        return slice(b[3].start, b[4].stop)

    @property
    def W(self):
        return self._bounds()[5]

    @property
    def ub(self):
        return self._bounds()[6]

    @property
    def lam(self):
        return self._bounds()[7]

    @property
    def alloc(self):
        b = self._bounds()
        return slice(b[6].start, b[7].stop)

    def split(self, vec):
        parts = [vec[s] for s in self._bounds()]
        parts[0] = parts[0][0]
        return parts


@dataclass(frozen=True)
class AllocationProblem:
    """Everything the Lagrangian depends on besides its arguments."""

    model: SystemDescription
    objective: AllocObjective
    timescale: TimescaleGains
    predictor: PredictorGains
    reference: ReferenceSignal
    # True: slow constraint uses the reduced model (fast state at its command
    # vartheta). False: it uses the measured fast state, which makes the slow
    # force exact and is used for ideal-loop checks.
    reduced: bool = True

    @cached_property
    def layout(self) -> Layout:
        d = self.model.dims
        return Layout(d.nx_state, d.nz_state, d.w, d.n_ubar, d.n_tau)


def _constraint_forces(prob: AllocationProblem, x, z, u, th, W):
    dims = prob.model.dims
    n_x = dims.n_x
    if prob.reduced:
        # reduced model: fast state sits at its command (vartheta, 0, ..., 0)
        z_slow = list(th) + [0.0] * (dims.nz_state - dims.n_z)
        tau_x = tau_hat(prob.model, x, z_slow, u, W)[:n_x]
        tau_z = tau_hat(prob.model, x, z, u, W)[n_x:]
        return tau_x, tau_z
    tau = tau_hat(prob.model, x, z, u, W)
    return tau[:n_x], tau[n_x:]


def lagrangian_value(prob: AllocationProblem, t, x, z, x_hat, z_hat, W, ub, lam):
    """``J + lambda' (pi - tau_hat)`` on generic scalars (floats or Dual2)."""
    dims = prob.model.dims
    obj = prob.objective
    m, n_x, n_z = dims.m, dims.n_x, dims.n_z
    u, th = ub[:m], ub[m:]

    slacks = []
    for row, (ci, terms) in enumerate(obj._rows):
        s = ci
        for j, cij in terms:
            s = s - cij * ub[j]
        if dual.value(s) <= 0.0:
            raise BoundaryHit(row, float(dual.value(s)))
        slacks.append(s)

    x_r, r, z1_r = prob.reference.at(t)
    pix = pi_x(x, x_hat, x_r, r, prob.predictor.K_sx, prob.timescale.K_rx, n_x)
    piz = pi_z(z, z_hat, th, prob.predictor.K_sz, prob.timescale.K_rz, n_z)

    tau_x, tau_z = _constraint_forces(prob, x, z, u, th, W)

    J = 0.0
    for i, j, q in obj._Q_entries:
        J = J + 0.5 * q * u[i] * u[j]
    for k in range(n_z):
        e = th[k] - z1_r[k]
        J = J + obj.alpha * e * e
    barrier = 0.0
    for s in slacks:
        barrier = barrier + dual.log(s)
    J = J - obj.beta * barrier

    L = J
    for lk, pk, tk in zip(lam, pix + piz, tau_x + tau_z):
        L = L + lk * (pk - tk)
    return L


def constraint_violation(prob: AllocationProblem, t, x, z, x_hat, z_hat, W, ub) -> np.ndarray:
    """``pi - tau_hat`` in floats."""
    dims = prob.model.dims
    m, n_x, n_z = dims.m, dims.n_x, dims.n_z
    u, th = list(ub[:m]), list(ub[m:])
    x_r, r, _ = prob.reference.at(t)
    pix = pi_x(x, x_hat, x_r, r, prob.predictor.K_sx, prob.timescale.K_rx, n_x)
    piz = pi_z(z, z_hat, th, prob.predictor.K_sz, prob.timescale.K_rz, n_z)
    tau_x, tau_z = _constraint_forces(prob, x, z, u, th, W)
    return np.array(pix + piz, dtype=float) - np.array(tau_x + tau_z, dtype=float)


def objective_value(prob: AllocationProblem, t, ub) -> float:
    dims = prob.model.dims
    obj = prob.objective
    u, th = np.asarray(ub[: dims.m]), np.asarray(ub[dims.m :])
    _, _, z1_r = prob.reference.at(t)
    slack = polytope_margin(obj.poly, ub)
    if np.any(slack <= 0):
        return np.inf
    return float(
        0.5 * u @ obj.Q @ u
        + obj.alpha * np.sum((th - np.asarray(z1_r, float)) ** 2)
        - obj.beta * np.sum(np.log(slack))
    )


def pack(t, x, z, x_hat, z_hat, W, ub, lam) -> np.ndarray:
    return np.concatenate([[t], x, z, x_hat, z_hat, W, ub, lam]).astype(float)


@dataclass
class LagrangianBundle:
    """Value and derivatives of the allocation Lagrangian at one point.

    ``grad``/``hess`` run over the full argument when built by
    :func:`lagrangian_bundle`; the KKT-only variant carries just the
    allocation block.
    """

    value: float
    grad: np.ndarray
    hess: np.ndarray
    layout: Layout
    full: bool = True
    _alloc: slice = field(init=False, repr=False)

    def __post_init__(self):
        lay = self.layout
        if self.full:
            self._alloc = lay.alloc
        else:
            self._alloc = slice(0, lay.n_ub + lay.n_lam)

    @property
    def foo(self) -> np.ndarray:
        return self.grad[self._alloc]

    @property
    def L_u(self) -> np.ndarray:
        return self.foo[: self.layout.n_ub]

    @property
    def L_lambda(self) -> np.ndarray:
        return self.foo[self.layout.n_ub :]

    @property
    def H(self) -> np.ndarray:
        """Bordered Hessian ``[[L_uu, L_lu], [L_ul, 0]]``."""
        return self.hess[self._alloc, self._alloc]

    @property
    def L_uu(self) -> np.ndarray:
        k = self.layout.n_ub
        return self.H[:k, :k]

    @property
    def L_lambda_u(self) -> np.ndarray:
        k = self.layout.n_ub
        return self.H[:k, k:]

    @property
    def L_u_lambda(self) -> np.ndarray:
        k = self.layout.n_ub
        return self.H[k:, :k]

    def _cross(self, cols: slice) -> np.ndarray:
        if not self.full:
            raise ValueError("cross derivatives need a full bundle")
        return self.hess[self._alloc, cols]

    @property
    def L_t(self) -> np.ndarray:
        """``[L_tu; L_tlambda]`` as a vector over the allocation variables."""
        return self._cross(self.layout.t)[:, 0]

    @property
    def L_chi(self) -> np.ndarray:
        return self._cross(self.layout.chi)

    @property
    def L_chi_hat(self) -> np.ndarray:
        return self._cross(self.layout.chi_hat)

    @property
    def L_W(self) -> np.ndarray:
        return self._cross(self.layout.W)


def lagrangian_bundle(prob: AllocationProblem, t, x, x_hat, z, z_hat, ub, lam, W_hat) -> LagrangianBundle:
    """Full second-order pass over every argument group."""
    lay = prob.layout
    point = pack(t, x, z, x_hat, z_hat, W_hat, ub, lam)

    def f(v):
        return lagrangian_value(prob, *lay.split(v))

    value, grad, hess = dual.grad_hess(f, point)
    return LagrangianBundle(value, grad, hess, lay, full=True)


def kkt_bundle(prob: AllocationProblem, t, x, x_hat, z, z_hat, ub, lam, W_hat) -> LagrangianBundle:
    """Derivatives with respect to ``(ubar, lambda)`` only; much cheaper."""
    lay = prob.layout
    k = lay.n_ub

    def f(v):
        return lagrangian_value(prob, t, list(x), list(z), list(x_hat), list(z_hat), list(W_hat), v[:k], v[k:])

    value, grad, hess = dual.grad_hess(f, np.concatenate([ub, lam]))
    return LagrangianBundle(value, grad, hess, lay, full=False)


@dataclass
class RateResult:
    ub_rate: np.ndarray
    lam_rate: np.ndarray
    mu: float = 0.0


def regularized_solve(H, rhs) -> tuple[np.ndarray, float]:
    """Solve ``H s = rhs``; on near-singularity retry with ``H + mu I``."""
    try:
        return solve_linear(H, rhs), 0.0
    except SingularHessian as exc:
        mu = MU_START
        while mu <= MU_MAX * (1 + 1e-12):
            try:
                sol = solve_linear(H + mu * np.eye(H.shape[0]), rhs)
                log.info("bordered Hessian regularized with mu=%.1e (cond %.2e)", mu, exc.cond)
                return sol, mu
            except SingularHessian:
                mu *= MU_FACTOR
        raise


def alloc_rate(bundle: LagrangianBundle, Gamma_ul, u_ff=None) -> RateResult:
    """``-H^{-1} (Gamma foo + u_ff)`` via one linear solve."""
    foo = bundle.foo
    G = np.asarray(Gamma_ul, dtype=float)
    rhs = G @ foo if G.ndim == 2 else G * foo
    if u_ff is not None:
        rhs = rhs + u_ff
    step, mu = regularized_solve(bundle.H, rhs)
    k = bundle.layout.n_ub
    return RateResult(-step[:k], -step[k:], mu)


def feed_forward(bundle: LagrangianBundle, chi_rate_known, chi_hat_rate, W_rate) -> np.ndarray:
    """``L_t + L_chi chi_dot + L_chihat chihat_dot + L_W W_dot`` over the
    allocation variables. ``chi_rate_known`` must be the model drift
    ``A chi + B tau_hat``, never the true plant rate."""
    return (
        bundle.L_t
        + bundle.L_chi @ chi_rate_known
        + bundle.L_chi_hat @ chi_hat_rate
        + bundle.L_W @ W_rate
    )


def static_flow(
    prob: AllocationProblem,
    t,
    x,
    x_hat,
    z,
    z_hat,
    W_hat,
    ub0,
    lam0,
    Gamma_ul,
    dt: float = 0.01,
    max_steps: int = 5000,
    tol: float = 1e-9,
    max_step: float = 0.05,
):
    """Euler-integrate the allocation flow with frozen states and ``u_ff = 0``.

    Each step is shortened so that ``ubar`` stays strictly interior and no
    variable moves by more than ``max_step``. Stops once ``|FOO|`` drops
    below ``tol``. Returns ``(ub, lam, foo_norm, steps)``.
    """
    k = prob.layout.n_ub
    poly = prob.objective.poly
    ub, lam = np.asarray(ub0, dtype=float).copy(), np.asarray(lam0, dtype=float).copy()
    b = kkt_bundle(prob, t, x, x_hat, z, z_hat, ub, lam, W_hat)
    n = 0
    while n < max_steps and np.linalg.norm(b.foo) >= tol:
        rate = alloc_rate(b, Gamma_ul)
        dub, dlam = dt * rate.ub_rate, dt * rate.lam_rate
        scale = max_interior_step(poly, ub, dub)
        peak = float(np.max(np.abs(np.concatenate([dub, dlam]))))
        if peak * scale > max_step:
            scale = max_step / peak
        ub, lam = ub + scale * dub, lam + scale * dlam
        b = kkt_bundle(prob, t, x, x_hat, z, z_hat, ub, lam, W_hat)
        n += 1
    return ub, lam, float(np.linalg.norm(b.foo)), n


def initial_allocation(prob: AllocationProblem, t=0.0) -> tuple[np.ndarray, np.ndarray]:
    """Box midpoints for ``u``; ``vartheta`` at the preferred fast command."""
    dims = prob.model.dims
    lo, hi = prob.objective.poly.bounds()
    ub = 0.5 * (lo + hi)
    _, _, z1_r = prob.reference.at(t)
    th_lo, th_hi = lo[dims.m :], hi[dims.m :]
    margin = 0.05 * (th_hi - th_lo)
    ub[dims.m :] = np.clip(np.asarray(z1_r, float), th_lo + margin, th_hi - margin)
    return ub, np.zeros(dims.n_tau)


def max_interior_step(poly: InputPolytope, ub, dub, keep: float = 0.01) -> float:
    """Largest ``a <= 1`` keeping each slack above ``keep`` times its current value."""
    slack = polytope_margin(poly, ub)
    rate = poly.C @ dub
    a = 1.0
    moving = rate > 0
    if np.any(moving):
        a = min(a, float(np.min((1.0 - keep) * slack[moving] / rate[moving])))
    return a


def _is_local_min(H: np.ndarray, n_ub: int, n_lam: int) -> bool:
    ev = np.linalg.eigvalsh(0.5 * (H + H.T))
    return int(np.sum(ev > 0)) == n_ub and int(np.sum(ev < 0)) == n_lam


def newton_kkt(prob, t, x, x_hat, z, z_hat, W_hat, ub0, lam0, tol=1e-10, max_iter=200):
    """Damped Newton on the KKT system from one start. Returns ``(ub, lam, res)``."""
    lay = prob.layout
    k = lay.n_ub
    poly = prob.objective.poly
    y = np.concatenate([ub0, lam0]).astype(float)

    def F(y):
        return kkt_bundle(prob, t, x, x_hat, z, z_hat, y[:k], y[k:], W_hat)

    b = F(y)
    res = np.linalg.norm(b.foo, np.inf)
    short_steps = 0
    for _ in range(max_iter):
        if res < tol:
            break
        try:
            step, _ = regularized_solve(b.H, -b.foo)
        except SingularHessian:
            break
        a = max_interior_step(poly, y[:k], step[:k])
        merit = np.linalg.norm(b.foo)
        while a > 1e-12:
            try:
                bn = F(y + a * step)
            except BoundaryHit:
                a *= 0.5
                continue
            if np.linalg.norm(bn.foo) <= (1.0 - 1e-4 * a) * merit:
                break
            a *= 0.5
        else:
            break
        y = y + a * step
        b = bn
        res = np.linalg.norm(b.foo, np.inf)
        # a run of heavily damped steps means the merit has stalled
        short_steps = short_steps + 1 if a < 1e-3 else 0
        if short_steps >= 5:
            break
    return y[:k], y[k:], res, b


def oracle_solve(
    prob: AllocationProblem,
    t,
    x,
    x_hat,
    z,
    z_hat,
    W_hat,
    starts=None,
    n_random: int = 8,
    seed: int = 0,
    tol: float = 1e-10,
):
    """Reference solution of the frozen allocation problem (test use only).

    Runs damped Newton on the KKT system from the box centre and
    ``n_random`` random interior points (or from ``starts``), keeps the
    converged strict local minima and returns the one with the lowest cost.
    """
    lay = prob.layout
    if starts is None:
        ub_c, lam_c = initial_allocation(prob, t)
        lo, hi = prob.objective.poly.bounds()
        rng = np.random.default_rng(seed)
        starts = [(ub_c, lam_c)]
        for _ in range(n_random):
            starts.append((lo + (hi - lo) * rng.uniform(0.1, 0.9, lo.shape), np.zeros(lay.n_lam)))
    best = None
    for ub0, lam0 in starts:
        try:
            ub, lam, res, b = newton_kkt(prob, t, x, x_hat, z, z_hat, W_hat, ub0, lam0, tol=tol)
        except BoundaryHit:
            continue
        if res >= tol or not _is_local_min(b.H, lay.n_ub, lay.n_lam):
            continue
        J = objective_value(prob, t, ub)
        if best is None or J < best[0]:
            best = (J, ub, lam)
    if best is None:
        raise OracleFailure("no start converged to a strict local minimum")
    return best[1], best[2]
