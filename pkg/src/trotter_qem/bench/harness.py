"""Noisy-state simulation, trace-distance tables and MSE-vs-shots sweeps."""

from __future__ import annotations

import logging
import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from ..errors import QemError
from ..estimators import (
    NodeSet,
    PhysicalityReport,
    data_efficient_nodes,
    physicality_diagnostics,
    sequential_physical_then_trotter,
)
from ..noise import NoiseSpec, local_to_global_rate
from ..qsim import pauli_trace, trace_distance, zero_state
from ..shots import CircuitPlan, linear_plan, tse_plan
from ..traces import split_observable, trace_table
from ..trotter import build_tfim, build_trotter_circuit, exact_evolve, run_noisy_trotter
from .config import ESTIMATORS, ExperimentConfig

log = logging.getLogger(__name__)

StateKey = tuple[float, int]


def state_key(p2: float, M: int) -> StateKey:
    # 3 * 1e-4 != 3e-4 in binary; keys are compared at 12 significant digits
    return (float(f"{p2:.12g}"), int(M))


def thread_count() -> int:
    env = os.environ.get("QEM_BENCH_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            log.warning("ignoring non-integer QEM_BENCH_THREADS=%r", env)
    return os.cpu_count() or 1


@dataclass(frozen=True)
class StateRow:
    p2: float
    M: int
    trace_distance: float
    expectation: float


@dataclass(frozen=True)
class BenchRow:
    estimator: str
    N: float
    mse_mean: float
    mse_stderr: float
    bias_sq: float
    n_failures: int
    nodes: str = ""


@dataclass
class Simulation:
    """Every noisy state an experiment needs, plus the exact reference."""

    config: ExperimentConfig
    exact_state: np.ndarray
    exact_value: float
    states: dict[StateKey, np.ndarray]
    distances: dict[StateKey, float]
    nodes: NodeSet
    node_keys: tuple[StateKey, ...]
    raw_key: StateKey
    seconds: float = 0.0

    def grid_keys(self) -> list[StateKey]:
        return [state_key(p, M) for p, M in self.config.grid]

    def expectation(self, key: StateKey) -> float:
        return observable_value(self.states[key], self.config)


def observable_value(rho: np.ndarray, cfg: ExperimentConfig) -> float:
    paulis, coeffs = split_observable(cfg.pauli())
    return float(sum(c * pauli_trace(rho, p).real for p, c in zip(paulis, coeffs)))


def noise_for(cfg: ExperimentConfig, p2: float) -> NoiseSpec:
    if cfg.noise_mode == "global":
        return NoiseSpec.global_(local_to_global_rate(cfg.n_qubits, p2))
    return NoiseSpec.local(cfg.p1, p2)


def node_set(cfg: ExperimentConfig) -> NodeSet:
    """Nodes of the data-efficient method; rates are register-wide, n * p2."""
    nodes = data_efficient_nodes(cfg.c, cfg.lambdas, cfg.n_qubits * cfg.base_p2)
    if cfg.node_trotter_numbers is not None:
        nodes = nodes.with_trotter_numbers(cfg.node_trotter_numbers)
    return nodes


def simulate_state(cfg: ExperimentConfig, key: StateKey) -> np.ndarray:
    H = build_tfim(cfg.n_qubits)
    circ = build_trotter_circuit(H, cfg.t, key[1], cfg.layer_order)
    return run_noisy_trotter(circ, noise_for(cfg, key[0]), zero_state(cfg.n_qubits))


def simulate(cfg: ExperimentConfig, threads: int | None = None) -> Simulation:
    """Simulate the grid, the data-efficient nodes and the raw state concurrently."""
    start = time.perf_counter()
    nodes = node_set(cfg)
    node_keys = tuple(state_key(r / cfg.n_qubits, M) for r, M in zip(nodes.rates, nodes.trotter_numbers))
    grid_keys = [state_key(p, M) for p, M in cfg.grid]
    wanted = list(dict.fromkeys(grid_keys + list(node_keys)))
    if cfg.raw_state is not None:
        wanted = list(dict.fromkeys(wanted + [state_key(*cfg.raw_state)]))

    H = build_tfim(cfg.n_qubits)
    exact = exact_evolve(H, cfg.t, zero_state(cfg.n_qubits))
    workers = min(threads or thread_count(), len(wanted))
    log.info("simulating %d states on %d threads", len(wanted), workers)
    with ThreadPoolExecutor(max_workers=workers) as pool:
        results = list(pool.map(lambda k: simulate_state(cfg, k), wanted))
        states = dict(zip(wanted, results))
        dists = list(pool.map(lambda k: trace_distance(states[k], exact), wanted))
    distances = dict(zip(wanted, dists))

    if cfg.raw_state is not None:
        raw_key = state_key(*cfg.raw_state)
    else:
        pool_keys = grid_keys or wanted
        raw_key = min(pool_keys, key=lambda k: distances[k])
    return Simulation(
        cfg,
        exact,
        observable_value(exact, cfg),
        states,
        distances,
        nodes,
        node_keys,
        raw_key,
        time.perf_counter() - start,
    )


def run_state_table(cfg: ExperimentConfig, sim: Simulation | None = None) -> list[StateRow]:
    sim = sim or simulate(cfg)
    return [StateRow(k[0], k[1], sim.distances[k], sim.expectation(k)) for k in sim.grid_keys()]


# -- estimator circuit plans ----------------------------------------------------------


def _term_means(sim: Simulation, keys) -> np.ndarray:
    paulis, _ = split_observable(sim.config.pauli())
    return np.array([[pauli_trace(sim.states[k], p).real for p in paulis] for k in keys])


def _sequential_plan(name: str, sim: Simulation, mode: str) -> CircuitPlan:
    keys = sim.grid_keys()
    means = _term_means(sim, keys)
    _, coeffs = split_observable(sim.config.pauli())
    shape = means.shape

    def assemble(x):
        values = x.reshape(shape) @ coeffs
        return sequential_physical_then_trotter(dict(zip(keys, values)), mode).value

    return CircuitPlan(name, means.ravel(), assemble)


def build_plans(sim: Simulation, names=None) -> dict[str, CircuitPlan]:
    """Ideal circuit means and assembly rule of every enabled estimator."""
    cfg = sim.config
    A = cfg.pauli()
    _, coeffs = split_observable(A)
    g = np.array(sim.nodes.coefficients)
    node_states = [sim.states[k] for k in sim.node_keys]
    plans = {}
    for name in names or cfg.estimators:
        if name == "raw":
            plans[name] = linear_plan(name, _term_means(sim, [sim.raw_key]), [1.0], coeffs)
        elif name == "vd":
            plans[name] = tse_plan(name, trace_table([sim.states[sim.raw_key]], None, A), [1.0])
        elif name == "data_efficient":
            plans[name] = linear_plan(name, _term_means(sim, sim.node_keys), g, coeffs)
        elif name == "tse":
            plans[name] = tse_plan(name, trace_table(node_states, None, A), g)
        elif name == "seq_poly":
            plans[name] = _sequential_plan(name, sim, "poly")
        elif name == "seq_exp":
            plans[name] = _sequential_plan(name, sim, "exp")
        else:
            raise QemError(f"unknown estimator {name!r}")
    return plans


def describe_nodes(sim: Simulation, name: str) -> str:
    def fmt(keys):
        return ";".join(f"({p!r},{M})" for p, M in keys)

    if name in ("raw", "vd"):
        return fmt([sim.raw_key])
    if name in ("data_efficient", "tse"):
        return fmt(sim.node_keys)
    return fmt(sim.grid_keys())


# -- MSE sweep ------------------------------------------------------------------------


@dataclass
class SweepResult:
    rows: list[BenchRow]
    bias_sq: dict[str, float]
    values: dict[str, float]
    physicality: PhysicalityReport
    seconds: float
    failures: dict[str, int] = field(default_factory=dict)


def trial_rng(seed: int, estimator: str, n_index: int, trial: int) -> np.random.Generator:
    """Independent stream per (seed, estimator, N, trial); stable when estimators are toggled."""
    return np.random.default_rng(np.random.SeedSequence([seed, ESTIMATORS.index(estimator), n_index, trial]))


def _sweep_one(name: str, plan: CircuitPlan, sim: Simulation, cfg: ExperimentConfig, bias_sq: float) -> list[BenchRow]:
    nodes = describe_nodes(sim, name)
    rows = []
    for k, N in enumerate(cfg.N_sweep):
        errors = []
        failures = 0
        for trial in range(cfg.trials):
            try:
                est = plan.sample(N, trial_rng(cfg.master_seed, name, k, trial))
            except QemError:
                failures += 1
                continue
            if not math.isfinite(est):
                failures += 1
                continue
            errors.append((est - sim.exact_value) ** 2)
        e = np.array(errors)
        mean = float(e.mean()) if len(e) else math.nan
        stderr = float(e.std(ddof=1) / math.sqrt(len(e))) if len(e) > 1 else (0.0 if len(e) else math.nan)
        rows.append(BenchRow(name, float(N), mean, stderr, bias_sq, failures, nodes))
    rows.append(BenchRow(name, math.inf, bias_sq, 0.0, bias_sq, 0, nodes))
    return rows


def run_mse_sweep(cfg: ExperimentConfig, sim: Simulation | None = None, threads: int | None = None) -> SweepResult:
    """MSE of every enabled estimator at each N, plus its infinite-shot bias^2 row.

    A precomputed ``sim`` supplies the states; estimators, shots, trials and
    seed always come from ``cfg``.
    """
    sim = sim or simulate(cfg, threads)
    start = time.perf_counter()
    plans = build_plans(sim, cfg.estimators)
    values = {name: plan.ideal_value() for name, plan in plans.items()}
    bias_sq = {name: (v - sim.exact_value) ** 2 for name, v in values.items()}
    names = list(plans)
    workers = min(threads or thread_count(), len(names))
    with ThreadPoolExecutor(max_workers=workers) as pool:
        per_est = list(pool.map(lambda n: _sweep_one(n, plans[n], sim, cfg, bias_sq[n]), names))
    rows = [r for block in per_est for r in block]
    phys = physicality_diagnostics(sim.nodes.coefficients, [sim.states[k] for k in sim.node_keys], sim.config.pauli())
    failures = {name: sum(r.n_failures for r in block) for name, block in zip(names, per_est)}
    return SweepResult(rows, bias_sq, values, phys, time.perf_counter() - start, failures)


def bias_ratios(bias_sq: dict[str, float], reference: str = "data_efficient") -> dict[str, float]:
    ref = bias_sq.get(reference)
    if not ref:
        return {}
    return {name: b / ref for name, b in bias_sq.items() if name != reference}


def converged_mse_ratios(rows: list[BenchRow], reference: str = "data_efficient") -> dict[str, float]:
    """mse(X) / mse(reference) at the largest finite N."""
    finite = [r for r in rows if math.isfinite(r.N)]
    if not finite:
        return {}
    top = max(r.N for r in finite)
    at_top = {r.estimator: r.mse_mean for r in finite if r.N == top}
    ref = at_top.get(reference)
    if not ref:
        return {}
    return {name: m / ref for name, m in at_top.items() if name != reference}
