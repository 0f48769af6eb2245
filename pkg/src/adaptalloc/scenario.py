"""Closed-loop scenarios: plant, predictors, high-level laws and allocator.

One explicit Euler loop integrates the plant (true force model), the
series-parallel predictors, the projected parameter update and the
allocation flow at a single rate. Within a step the parameter rate is
computed first and then fed to the allocation feed-forward.
"""
from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass, field, fields, replace
from pathlib import Path
from typing import Sequence

import numpy as np
import yaml

from .allocator import (
    AllocationProblem,
    AllocObjective,
    BoundaryHit,
    alloc_rate,
    feed_forward,
    initial_allocation,
    kkt_bundle,
    lagrangian_bundle,
    max_interior_step,
    newton_kkt,
)
from .highlevel import build_timescale
from .numerics.dual import DomainViolation
from .numerics.linalg import SingularHessian
from .plants import QuadplaneParams, quadplane_as_system, quadrotor_system
from .predictor import AdaptationGains, PredictorGains, predictor_rate, w_update_rate
from .reference import HoverReference, LandingReference
from .system import SystemDescription, polytope_margin, regressor_matrix, tau_hat, tau_true

log = logging.getLogger(__name__)

PLANTS = ("quadplane", "quadrotor")
ALLOCATION_MODES = ("flow", "exact")
DISTURBANCE_KINDS = ("none", "constant", "random")
# generic names of the planar slow/fast states, in storage order
STATE_COLUMNS = ("px", "pz", "vx", "vz", "theta", "omega")


class ConfigError(ValueError):
    """Invalid scenario configuration."""


class AllocationFailure(RuntimeError):
    """The exact allocation solve did not converge."""


@dataclass(frozen=True)
class Disturbance:
    """Additive force disturbance injected into the true plant only.

    ``magnitude`` is absolute, or a multiple of the plant's ``delta_max``
    when ``relative`` is set. ``constant`` applies it along ``direction``;
    ``random`` draws a fresh uniformly random direction every ``hold``
    seconds from the scenario seed.
    """

    kind: str = "none"
    magnitude: float = 0.0
    relative: bool = True
    direction: tuple | None = None
    hold: float = 0.5

    def __post_init__(self):
        if self.kind not in DISTURBANCE_KINDS:
            raise ConfigError(f"disturbance kind must be one of {DISTURBANCE_KINDS}")
        if not self.magnitude >= 0:
            raise ConfigError("disturbance magnitude must be non-negative")
        if not self.hold > 0:
            raise ConfigError("disturbance hold must be positive")


@dataclass(frozen=True)
class ScenarioConfig:
    plant: str = "quadplane"
    epsilon: float = 0.2
    dt: float = 0.01
    duration: float = 40.0
    K_rx: tuple = (0.5, 0.707)
    K_s: tuple = (5.0, 5.0)
    Gamma_W: float | tuple = 0.1
    Gamma_e: float | tuple = 100.0
    Gamma_ul: float | tuple = 50.0
    Q: tuple | None = None
    alpha: float | None = None
    beta: float = 0.01
    theta_limit_deg: float = 30.0
    param_scale: float = 1.5
    structural_delta: bool = True
    feed_forward: bool = True
    allocation: str = "flow"
    # polish the midpoint initial allocation with a Newton solve before the run
    warm_start: bool = False
    # initial offset from the reference: (px, pz, vx, vz)
    initial_error: tuple = (0.0, 0.0, 0.0, 0.0)
    # initial pitch; None trims it to the reference
    theta0: float | None = None
    disturbance: Disturbance = field(default_factory=Disturbance)
    seed: int = 0
    proj_band: float = 0.05
    # largest rate of any allocation variable, per second (same units as ubar)
    max_alloc_rate: float = 5.0
    divergence_threshold: float = 10.0
    metric_start: float = 2.0
    reference: dict = field(default_factory=dict)
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.plant not in PLANTS:
            raise ConfigError(f"plant must be one of {PLANTS}, got {self.plant!r}")
        if self.allocation not in ALLOCATION_MODES:
            raise ConfigError(f"allocation must be one of {ALLOCATION_MODES}")
        if not self.dt > 0:
            raise ConfigError("dt must be positive")
        if not self.duration >= 0:
            raise ConfigError("duration must be non-negative")
        if not 0 < self.epsilon <= 1:
            raise ConfigError("epsilon must lie in (0, 1]")
        if not self.param_scale > 0:
            raise ConfigError("param_scale must be positive")
        if len(self.initial_error) != 4:
            raise ConfigError("initial_error needs (px, pz, vx, vz)")
        if not self.max_alloc_rate > 0:
            raise ConfigError("max_alloc_rate must be positive")
        if not self.divergence_threshold > 0:
            raise ConfigError("divergence_threshold must be positive")

    @classmethod
    def from_mapping(cls, data: dict) -> "ScenarioConfig":
        data = dict(data or {})
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        if isinstance(data.get("disturbance"), dict):
            try:
                data["disturbance"] = Disturbance(**data["disturbance"])
            except TypeError as exc:
                raise ConfigError(f"bad disturbance spec: {exc}") from exc
        for key in ("K_rx", "K_s", "Q", "initial_error", "Gamma_W", "Gamma_e", "Gamma_ul"):
            if isinstance(data.get(key), list):
                data[key] = tuple(data[key])
        try:
            return cls(**data)
        except TypeError as exc:
            raise ConfigError(str(exc)) from exc

    @classmethod
    def load(cls, path) -> "ScenarioConfig":
        try:
            with open(path) as fh:
                data = yaml.safe_load(fh)
        except (OSError, yaml.YAMLError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        if data is not None and not isinstance(data, dict):
            raise ConfigError(f"config {path} must be a mapping")
        data = dict(data or {})
        if isinstance(data.get("params"), str):
            # a parameter file path, resolved against the config's directory
            pfile = Path(path).parent / data["params"]
            try:
                with open(pfile) as fh:
                    pdata = yaml.safe_load(fh) or {}
            except (OSError, yaml.YAMLError) as exc:
                raise ConfigError(f"cannot read parameter file {pfile}: {exc}") from exc
            if not isinstance(pdata, dict):
                raise ConfigError(f"parameter file {pfile} must be a mapping")
            data["params"] = pdata.get("quadplane", pdata)
        return cls.from_mapping(data)

    @property
    def n_steps(self) -> int:
        return int(round(self.duration / self.dt))


def _gain_matrix(spec, n: int, name: str) -> np.ndarray:
    G = np.asarray(spec, dtype=float)
    if G.ndim == 0:
        G = float(G) * np.eye(n)
    elif G.ndim == 1:
        if G.shape[0] != n:
            raise ConfigError(f"{name} needs {n} diagonal entries")
        G = np.diag(G)
    if G.shape != (n, n):
        raise ConfigError(f"{name} must be {n}x{n}")
    if not np.allclose(G, G.T) or np.min(np.linalg.eigvalsh(G)) <= 0:
        raise ConfigError(f"{name} must be symmetric positive-definite")
    return G


@dataclass
class Scenario:
    """A configuration turned into concrete plant, gains and problem."""

    config: ScenarioConfig
    model: SystemDescription
    problem: AllocationProblem
    predictor: PredictorGains
    adaptation: AdaptationGains
    Gamma_ul: np.ndarray


def _build_model(cfg: ScenarioConfig) -> SystemDescription:
    theta_limit = math.radians(cfg.theta_limit_deg)
    if cfg.plant == "quadplane":
        try:
            params = QuadplaneParams.from_mapping(cfg.params)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"bad quadplane params: {exc}") from exc
        model = quadplane_as_system(params, theta_limit=theta_limit)
    else:
        if cfg.params:
            raise ConfigError("the quadrotor takes no plant parameters")
        model = quadrotor_system(theta_limit=theta_limit)
    if not cfg.structural_delta:
        # truth becomes exactly the parametric model
        model = replace(model, truth=None, delta=lambda x, z, u: np.zeros(model.dims.n_tau))
    return model


def _build_reference(cfg: ScenarioConfig):
    try:
        if cfg.plant == "quadplane":
            return LandingReference(**cfg.reference)
        ref = dict(cfg.reference)
        return HoverReference(p=tuple(ref.pop("p", (0.0, 0.0))), z1=tuple(ref.pop("z1", (0.0,))), **ref)
    except TypeError as exc:
        raise ConfigError(f"bad reference spec: {exc}") from exc


def build_scenario(cfg: ScenarioConfig) -> Scenario:
    model = _build_model(cfg)
    dims = model.dims
    if cfg.plant == "quadplane":
        Q_default, alpha_default = (10.0, 10.0, 1.0, 0.1), 25.0
    else:
        Q_default, alpha_default = (1.0, 1.0, 1.0), 1.0
    Q = _gain_matrix(cfg.Q if cfg.Q is not None else Q_default, dims.m, "Q")
    alpha = cfg.alpha if cfg.alpha is not None else alpha_default
    try:
        objective = AllocObjective(Q, alpha, cfg.beta, model.aug_poly)
        timescale = build_timescale(cfg.K_rx, cfg.epsilon, dims)
        predictor = PredictorGains.build(cfg.K_s, cfg.K_s, dims)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    adaptation = AdaptationGains(
        _gain_matrix(cfg.Gamma_W, dims.w, "Gamma_W"),
        _gain_matrix(cfg.Gamma_e, dims.n_chi, "Gamma_e"),
    )
    Gamma_ul = _gain_matrix(cfg.Gamma_ul, dims.n_ubar + dims.n_tau, "Gamma_ul")
    problem = AllocationProblem(
        model, objective, timescale, predictor, _build_reference(cfg), reduced=cfg.allocation == "flow"
    )
    return Scenario(cfg, model, problem, predictor, adaptation, Gamma_ul)


@dataclass
class RunLog:
    """Per-step records on a uniform time grid, one row per step."""

    columns: tuple[str, ...]
    rows: list = field(default_factory=list)
    events: list = field(default_factory=list)

    def append(self, row: Sequence[float]) -> None:
        self.rows.append(np.asarray(row, dtype=float))

    def table(self) -> dict[str, np.ndarray]:
        data = np.array(self.rows, dtype=float).reshape(len(self.rows), len(self.columns))
        return {name: data[:, i] for i, name in enumerate(self.columns)}

    def __len__(self) -> int:
        return len(self.rows)


@dataclass(frozen=True)
class Metrics:
    max_tracking_error: float
    diverged: bool
    final_W_err_norm: float
    steady_es_norm: float
    reason: str = ""


def log_columns(model: SystemDescription) -> tuple[str, ...]:
    dims = model.dims
    cols = ["t", *STATE_COLUMNS]
    cols += [f"{c}_hat" for c in STATE_COLUMNS]
    cols += ["px_ref", "pz_ref", "vx_ref", "vz_ref", "theta_ref"]
    cols += list(model.input_names) + ["vartheta"]
    cols += [f"lambda_{i}" for i in range(dims.n_tau)]
    cols += [f"W_hat_{n}" for n in model.param_names]
    cols += [f"W_err_{n}" for n in model.param_names]
    cols += [f"e_s_{i}" for i in range(dims.n_chi)]
    cols += ["foo_u_norm", "foo_lambda_norm", "min_slack", "reg_mu", "step_scale"]
    return tuple(cols)


def compute_metrics(table: dict[str, np.ndarray], config: ScenarioConfig, param_names) -> Metrics:
    """Metrics from logged columns; used for live runs and parsed CSVs alike."""
    t = table["t"]
    if t.shape[0] == 0:
        return Metrics(math.inf, True, math.nan, math.nan, "empty log")
    err = np.hypot(table["px"] - table["px_ref"], table["pz"] - table["pz_ref"])
    state = np.column_stack([table[c] for c in STATE_COLUMNS])
    finite = np.all(np.isfinite(state), axis=1)
    reason = ""
    if not np.all(finite):
        reason = "non-finite state"
    elif np.any(err > config.divergence_threshold):
        reason = "tracking error above threshold"
    elif t.shape[0] < config.n_steps + 1:
        reason = "run terminated early"
    diverged = bool(reason)

    W_err = np.column_stack([table[f"W_err_{n}"] for n in param_names])
    es_cols = sorted((c for c in table if c.startswith("e_s_")), key=lambda c: int(c[4:]))
    e_s = np.linalg.norm(np.column_stack([table[c] for c in es_cols]), axis=1)
    final_W = float(np.linalg.norm(W_err[-1]))
    # steady prediction error: mean norm over the final quarter of the run
    tail = t >= t[-1] - 0.25 * (t[-1] - t[0])
    steady_es = float(np.mean(e_s[tail]))
    if diverged:
        return Metrics(math.inf, True, final_W, steady_es, reason)
    window = t >= config.metric_start
    max_err = float(np.max(err[window])) if np.any(window) else 0.0
    return Metrics(max_err, False, final_W, steady_es, "")


class _DisturbanceSource:
    def __init__(self, spec: Disturbance, model: SystemDescription, seed: int):
        self.spec = spec
        n = model.dims.n_tau
        mag = spec.magnitude * (model.delta_max if spec.relative else 1.0)
        self.magnitude = mag
        if spec.direction is not None:
            d = np.asarray(spec.direction, dtype=float)
            if d.shape != (n,) or not np.linalg.norm(d) > 0:
                raise ConfigError(f"disturbance direction needs {n} entries, not all zero")
        else:
            d = np.ones(n)
        self.direction = d / np.linalg.norm(d)
        self.rng = np.random.default_rng(seed)
        self._slot = -1
        self._current = np.zeros(n)

    def __call__(self, t: float) -> np.ndarray:
        if self.spec.kind == "none" or self.magnitude == 0.0:
            return np.zeros_like(self.direction)
        if self.spec.kind == "constant":
            return self.magnitude * self.direction
        slot = int(math.floor(t / self.spec.hold + 1e-9))
        while self._slot < slot:
            v = self.rng.standard_normal(self.direction.shape[0])
            self._current = self.magnitude * v / np.linalg.norm(v)
            self._slot += 1
        return self._current


def _initial_state(sc: Scenario) -> tuple[np.ndarray, np.ndarray]:
    cfg = sc.config
    x_r, _, _ = sc.problem.reference.at(0.0)
    x = np.asarray(x_r, dtype=float) + np.asarray(cfg.initial_error, dtype=float)
    theta0 = cfg.theta0 if cfg.theta0 is not None else trim_pitch(sc, x)
    z = np.array([theta0, 0.0])
    return x, z


def trim_pitch(sc: Scenario, x, iterations: int = 6) -> float:
    """Pitch at which the true plant's optimal allocation asks for the same pitch.

    A short fixed-point iteration on the oracle-free Newton solve at ``t = 0``
    with exact parameters; returns 0 when no trim is found.
    """
    prob = replace(sc.problem, reduced=True)
    W = sc.model.W_true
    theta = 0.0
    ub, lam = initial_allocation(prob, 0.0)
    for _ in range(iterations):
        z = np.array([theta, 0.0])
        try:
            ub, lam, res, _ = newton_kkt(prob, 0.0, x, x, z, z, W, ub, lam, tol=1e-10)
        except (BoundaryHit, SingularHessian, DomainViolation):
            return 0.0
        if res > 1e-8:
            return 0.0
        theta = float(ub[sc.model.dims.m])
    return theta


def run_scenario(config: ScenarioConfig) -> tuple[RunLog, Metrics]:
    sc = build_scenario(config)
    return simulate(sc)


# numerical failures that end a run early and mark it diverged
_STOPPING_ERRORS = (BoundaryHit, SingularHessian, DomainViolation, AllocationFailure)


def simulate(sc: Scenario) -> tuple[RunLog, Metrics]:
    cfg = sc.config
    model, prob = sc.model, sc.problem
    dims = model.dims
    cf = model.canonical
    poly = model.aug_poly
    n_x, m = dims.n_x, dims.m
    W_box = np.asarray(model.W_box, dtype=float)
    disturbance = _DisturbanceSource(cfg.disturbance, model, cfg.seed)

    x, z = _initial_state(sc)
    x_hat, z_hat = x.copy(), z.copy()
    W_hat = np.clip(model.W_true * cfg.param_scale, W_box[:, 0], W_box[:, 1])
    ub, lam = initial_allocation(prob, 0.0)
    runlog = RunLog(log_columns(model))
    reason = ""
    if cfg.allocation == "exact" or cfg.warm_start:
        try:
            ub, lam = _exact_allocation(prob, 0.0, x, z, x_hat, z_hat, W_hat, ub, lam)
        except _STOPPING_ERRORS as exc:
            reason = f"{type(exc).__name__}: {exc}"
            runlog.events.append((0.0, reason))
    for k in range(cfg.n_steps + 1 if not reason else 0):
        t = k * cfg.dt
        try:
            rec = _step_rates(sc, t, x, z, x_hat, z_hat, W_hat, ub, lam, disturbance)
        except _STOPPING_ERRORS as exc:
            reason = f"{type(exc).__name__}: {exc}"
            runlog.events.append((t, reason))
            log.warning("run stopped at t=%.2f: %s", t, reason)
            break
        x_r, _, z1_r = prob.reference.at(t)
        e_s = np.concatenate([x - x_hat, z - z_hat])
        scale = 1.0
        if cfg.allocation == "flow":
            dub = cfg.dt * rec["ub_rate"]
            scale = max_interior_step(poly, ub, dub)
            peak = float(np.max(np.abs(dub)))
            limit = cfg.max_alloc_rate * cfg.dt
            if peak * scale > limit:
                scale = limit / peak
        runlog.append(
            np.concatenate(
                [
                    [t],
                    x,
                    z,
                    x_hat,
                    z_hat,
                    x_r,
                    [z1_r[0]],
                    ub,
                    lam,
                    W_hat,
                    W_hat - model.W_true,
                    e_s,
                    [
                        np.linalg.norm(rec["foo"][: dims.n_ubar]),
                        np.linalg.norm(rec["foo"][dims.n_ubar :]),
                        float(np.min(polytope_margin(poly, ub))),
                        rec["mu"],
                        scale,
                    ],
                ]
            )
        )
        if rec["mu"] > 0:
            runlog.events.append((t, f"regularized mu={rec['mu']:.1e}"))
        err = math.hypot(x[0] - x_r[0], x[1] - x_r[1])
        state_ok = np.all(np.isfinite(x)) and np.all(np.isfinite(z))
        if not state_ok or err > cfg.divergence_threshold:
            reason = "diverged"
            break
        if k == cfg.n_steps:
            break

        dt = cfg.dt
        x = x + dt * rec["x_rate"]
        z = z + dt * rec["z_rate"]
        z[0] = math.remainder(z[0], 2.0 * math.pi)
        x_hat = x_hat + dt * rec["xh_rate"]
        z_hat = z_hat + dt * rec["zh_rate"]
        # discrete-time safeguard: Euler can overshoot the smooth projection
        W_hat = np.clip(W_hat + dt * rec["W_rate"], W_box[:, 0], W_box[:, 1])
        if cfg.allocation == "flow":
            if scale < 1.0:
                runlog.events.append((t, f"allocation step scaled by {scale:.3g}"))
            ub = ub + scale * dt * rec["ub_rate"]
            lam = lam + scale * dt * rec["lam_rate"]
        else:
            try:
                ub, lam = _exact_allocation(prob, t + dt, x, z, x_hat, z_hat, W_hat, ub, lam)
            except _STOPPING_ERRORS as exc:
                reason = f"{type(exc).__name__}: {exc}"
                runlog.events.append((t + dt, reason))
                log.warning("run stopped at t=%.2f: %s", t + dt, reason)
                break

    metrics = compute_metrics(runlog.table(), cfg, model.param_names)
    if reason and not metrics.diverged:
        metrics = replace(metrics, max_tracking_error=math.inf, diverged=True, reason=reason)
    return runlog, metrics


def _exact_allocation(prob, t, x, z, x_hat, z_hat, W_hat, ub0, lam0):
    ub, lam, res, _ = newton_kkt(prob, t, x, x_hat, z, z_hat, W_hat, ub0, lam0, tol=1e-11)
    if res > 1e-8:
        raise AllocationFailure(f"exact allocation did not converge (residual {res:.2e})")
    return ub, lam


def _step_rates(sc: Scenario, t, x, z, x_hat, z_hat, W_hat, ub, lam, disturbance) -> dict:
    cfg = sc.config
    model, prob = sc.model, sc.problem
    dims = model.dims
    cf = model.canonical
    n_x, m = dims.n_x, dims.m
    u = ub[:m]

    tau = tau_true(model, x, z, u) + disturbance(t)
    x_rate = cf.A_x @ x + cf.B_x @ tau[:n_x]
    z_rate = cf.A_z @ z + cf.B_z @ tau[n_x:]
    xh_rate, zh_rate = predictor_rate(model, sc.predictor, x, z, u, x_hat, z_hat, W_hat)
    chi = np.concatenate([x, z])
    e_s = chi - np.concatenate([x_hat, z_hat])
    _, phi = regressor_matrix(model, x, z, u)

    if cfg.allocation == "exact":
        b = kkt_bundle(prob, t, x, x_hat, z, z_hat, ub, lam, W_hat)
        zeros = np.zeros((dims.n_ubar + dims.n_tau, dims.n_chi))
        W_rate = w_update_rate(
            phi, e_s, np.zeros_like(b.foo), zeros, sc.adaptation, cf.B_chi, W_hat, model.W_box, cfg.proj_band
        )
        return dict(
            x_rate=x_rate, z_rate=z_rate, xh_rate=xh_rate, zh_rate=zh_rate, W_rate=W_rate,
            foo=b.foo, mu=0.0, ub_rate=np.zeros_like(ub), lam_rate=np.zeros_like(lam),
        )

    b = lagrangian_bundle(prob, t, x, x_hat, z, z_hat, ub, lam, W_hat)
    W_rate = w_update_rate(phi, e_s, b.foo, b.L_chi, sc.adaptation, cf.B_chi, W_hat, model.W_box, cfg.proj_band)
    u_ff = None
    if cfg.feed_forward:
        tau_known = np.array(tau_hat(model, x, z, u, W_hat), dtype=float)
        chi_known = cf.A_chi @ chi + cf.B_chi @ tau_known
        u_ff = feed_forward(b, chi_known, np.concatenate([xh_rate, zh_rate]), W_rate)
    rate = alloc_rate(b, sc.Gamma_ul, u_ff)
    return dict(
        x_rate=x_rate, z_rate=z_rate, xh_rate=xh_rate, zh_rate=zh_rate, W_rate=W_rate,
        foo=b.foo, mu=rate.mu, ub_rate=rate.ub_rate, lam_rate=rate.lam_rate,
    )


@dataclass(frozen=True)
class SweepRow:
    epsilon: float
    metrics: Metrics


def sweep_config(config: ScenarioConfig, epsilon: float) -> ScenarioConfig:
    """Configuration for one sweep entry: 1 m initial vertical error."""
    err = tuple(config.initial_error)
    return replace(config, epsilon=epsilon, initial_error=(err[0], 1.0, err[2], err[3]))


def eps_sweep(config: ScenarioConfig, eps_list: Sequence[float], workers: int = 1) -> list[SweepRow]:
    eps_list = [float(e) for e in eps_list]
    if any(a < b for a, b in zip(eps_list, eps_list[1:])):
        raise ConfigError("eps_list must be descending")
    configs = [sweep_config(config, e) for e in eps_list]
    if workers > 1 and len(configs) > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_sweep_one, configs))
    else:
        results = [_sweep_one(c) for c in configs]
    return [SweepRow(e, met) for e, met in zip(eps_list, results)]


def _sweep_one(config: ScenarioConfig) -> Metrics:
    return run_scenario(config)[1]


def _fmt(v: float) -> str:
    return "%.17g" % v


def export_csv(runlog: RunLog, path) -> None:
    path = Path(path)
    try:
        with path.open("w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(runlog.columns)
            for row in runlog.rows:
                w.writerow([_fmt(v) for v in row])
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror or exc}") from exc


def read_csv(path) -> dict[str, np.ndarray]:
    with Path(path).open(newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        data = [[float(v) for v in row] for row in reader]
    arr = np.array(data, dtype=float).reshape(len(data), len(header))
    return {name: arr[:, i] for i, name in enumerate(header)}


METRIC_COLUMNS = ("epsilon", "max_tracking_error", "diverged", "final_W_err_norm", "steady_es_norm")


def export_metrics(rows: Sequence[SweepRow], path) -> None:
    path = Path(path)
    try:
        with path.open("w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(METRIC_COLUMNS)
            for r in rows:
                m = r.metrics
                w.writerow(
                    [
                        _fmt(r.epsilon),
                        _fmt(m.max_tracking_error),
                        int(m.diverged),
                        _fmt(m.final_W_err_norm),
                        _fmt(m.steady_es_norm),
                    ]
                )
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror or exc}") from exc
