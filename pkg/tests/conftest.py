import math

import numpy as np
import pytest

from adaptalloc.plants.quadplane import QuadplaneParams, quadplane_as_system
from adaptalloc.plants.quadrotor import quadrotor_system


# criterion number -> list of (part, passed, detail), filled by the acceptance tests
ACCEPTANCE: dict = {}


def record(criterion: int, part: str, passed: bool, detail: str) -> None:
    ACCEPTANCE.setdefault(criterion, []).append((part, bool(passed), detail))


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        parts = ACCEPTANCE[n]
        verdict = "PASS" if all(ok for _, ok, _ in parts) else "FAIL"
        detail = "; ".join(f"{name}: {'ok' if ok else 'not met'} ({d})" for name, ok, d in parts)
        terminalreporter.write_line(f"criterion {n}: {verdict} - {detail}")


@pytest.fixture(scope="session")
def qp_params():
    return QuadplaneParams()


@pytest.fixture(scope="session")
def quadplane(qp_params):
    return quadplane_as_system(qp_params)


@pytest.fixture(scope="session")
def quadrotor():
    return quadrotor_system()


def sample_envelope(model, rng, n):
    """Random (x, z, u) triples inside the model's declared flight envelope."""
    V_lo, V_hi = model.envelope.get("V", (0.0, 25.0))
    w_lo, w_hi = model.envelope.get("omega", (-0.5, 0.5))
    th_lo, th_hi = model.aug_poly.bounds()[0][-1], model.aug_poly.bounds()[1][-1]
    lo, hi = model.input_poly.bounds()
    for _ in range(n):
        V = rng.uniform(V_lo, V_hi)
        gamma = rng.uniform(-math.pi, math.pi)
        x = np.array([rng.uniform(-100, 100), rng.uniform(0, 100), V * math.cos(gamma), V * math.sin(gamma)])
        z = np.array([rng.uniform(th_lo, th_hi), rng.uniform(w_lo, w_hi)])
        u = rng.uniform(lo, hi)
        yield x, z, u


@pytest.fixture(scope="session")
def landing_run():
    """The default landing: quadplane, epsilon 0.2, 1.5x parameter error."""
    from adaptalloc.scenario import ScenarioConfig, build_scenario, simulate

    sc = build_scenario(ScenarioConfig())
    runlog, metrics = simulate(sc)
    return sc, runlog.table(), metrics


def logged_point(table, k, model):
    """``(t, x, x_hat, z, z_hat, ub, lam, W_hat)`` at row ``k`` of a run table."""
    slow, fast = ("px", "pz", "vx", "vz"), ("theta", "omega")
    row = lambda names: np.array([table[n][k] for n in names])
    ub = row(list(model.input_names) + ["vartheta"])
    lam = row([f"lambda_{i}" for i in range(model.dims.n_tau)])
    W = row([f"W_hat_{n}" for n in model.param_names])
    return (
        table["t"][k],
        row(slow),
        row([f"{n}_hat" for n in slow]),
        row(fast),
        row([f"{n}_hat" for n in fast]),
        ub,
        lam,
        W,
    )


def random_frozen_problem(sc, rng):
    """A frozen-state allocation problem with a known feasible interior point.

    Draws a state, a parameter estimate and an interior input, then picks the
    fast command that makes the fast constraint hold and a constant reference
    whose forcing equals the reduced-model slow force. Returns
    ``(problem, x, z, W_hat)`` with ``x_hat = x`` and ``z_hat = z``.
    """
    from dataclasses import replace

    from adaptalloc.highlevel import ConstantReference
    from adaptalloc.system import tau_hat

    model, prob = sc.model, sc.problem
    n_x, m = model.dims.n_x, model.dims.m
    lo, hi = model.aug_poly.bounds()
    K0, K1 = prob.timescale.K_rz[:2]
    box = np.asarray(model.W_box, dtype=float)
    width = box[:, 1] - box[:, 0]
    while True:
        if sc.config.plant == "quadplane":
            V, gamma = rng.uniform(0.0, 25.0), rng.uniform(-0.3, 0.3)
            x = np.array([rng.uniform(-50, 50), rng.uniform(20, 100), V * math.cos(gamma), V * math.sin(gamma)])
        else:
            x = np.concatenate([rng.uniform(-5, 5, 2), rng.uniform(-2, 2, 2)])
        z = np.array([rng.uniform(0.6 * lo[m], 0.6 * hi[m]), rng.uniform(-0.3, 0.3)])
        u = lo[:m] + (hi[:m] - lo[:m]) * rng.uniform(0.15, 0.85, m)
        W = model.W_true + width * rng.uniform(-0.1, 0.1, width.shape)
        W = np.clip(W, box[:, 0] + 0.05 * width, box[:, 1] - 0.05 * width)
        # with z_hat = z the fast command is K0 (vartheta - z1) - K1 z2
        tau_z = tau_hat(model, x, z, u, W)[n_x:]
        theta = z[0] + (tau_z[0] + K1 * z[1]) / K0
        if not 0.8 * lo[m] < theta < 0.8 * hi[m]:
            continue
        tau_x = tau_hat(model, x, [theta, 0.0], u, W)[:n_x]
        ref = ConstantReference(tuple(x), tuple(tau_x), (theta + rng.uniform(-0.05, 0.05),))
        return replace(prob, reference=ref), x, z, W


SWEEP_EPS = (1.0, 0.5, 0.33, 0.25, 0.2)


@pytest.fixture(scope="session")
def default_sweep():
    """The shipped sweep configuration over the standard epsilon list.

    Returns ``(rows, seconds)``; runs serially so the time is a fair budget check.
    """
    import time
    from pathlib import Path

    from adaptalloc.scenario import ScenarioConfig, eps_sweep

    cfg = ScenarioConfig.load(Path(__file__).resolve().parents[1] / "configs" / "sweep.yaml")
    start = time.perf_counter()
    rows = eps_sweep(cfg, SWEEP_EPS)
    return rows, time.perf_counter() - start
