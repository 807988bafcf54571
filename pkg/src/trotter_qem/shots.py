"""Finite-measurement statistics.

Every estimator is described by a :class:`CircuitPlan`: the ideal mean of
each distinct circuit it runs (each a +-1-valued Pauli measurement) and a
function assembling the estimate from those means.  Shot noise is modelled
as Gaussian with variance (1 - mean**2) / N_circ per circuit.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Callable, Sequence

import numpy as np

from .errors import (
    DegenerateDenominator,
    InsufficientShots,
    InvalidShots,
    LengthMismatch,
    OutOfRange,
)
from .qsim import Observable

if TYPE_CHECKING:
    from .traces import TraceTable

MEAN_RANGE_ATOL = 1e-9


def single_shot_var_pauli(mean: float) -> float:
    if abs(mean) > 1 + MEAN_RANGE_ATOL:
        raise OutOfRange(f"mean {mean} of a +-1 outcome is outside [-1, 1]")
    return max(0.0, 1.0 - mean * mean)


@dataclass(frozen=True)
class NoisySample:
    ideal: float
    sampled: float
    var_single: float
    shots: int
    seed: int | None = None


def _generator(rng) -> tuple[np.random.Generator, int | None]:
    if isinstance(rng, np.random.Generator):
        return rng, None
    return np.random.default_rng(rng), rng


def inject_shot_noise(ideal: float, var_single: float, n_shots: int, rng) -> NoisySample:
    """ideal + Normal(0, var_single / n_shots); ``rng`` is a Generator or an int seed."""
    if int(n_shots) != n_shots or n_shots < 1:
        raise InvalidShots(f"shot count must be a positive integer, got {n_shots}")
    if var_single < 0:
        raise OutOfRange(f"negative single-shot variance {var_single}")
    gen, seed = _generator(rng)
    if var_single == 0:
        return NoisySample(ideal, ideal, 0.0, int(n_shots), seed)
    sampled = ideal + gen.normal(0.0, np.sqrt(var_single / n_shots))
    return NoisySample(ideal, float(sampled), var_single, int(n_shots), seed)


def var_extrapolation(variances: Sequence[float], coeffs: Sequence[float]) -> float:
    if len(variances) != len(coeffs):
        raise LengthMismatch(f"{len(variances)} variances for {len(coeffs)} coefficients")
    c = np.asarray(coeffs, dtype=float)
    return float(np.sum(c * c * np.asarray(variances, dtype=float)))


def var_tse_from_table(table: "TraceTable", g: Sequence[float], estimate: float) -> float:
    """Ratio-approximation variance of the subspace-expansion estimator.

    Numerator terms are measured once per unordered pair (weight 2 g_i g_j
    off the diagonal), denominator terms once per ordered pair.
    """
    g = np.asarray(g, dtype=float)
    k = len(g)
    gg = np.outer(g, g)
    den = float(np.sum(gg * table.overlap))
    if abs(den) <= 1e-14:
        raise DegenerateDenominator(f"denominator {den:.3e}")
    g2 = g * g
    iu = np.triu_indices(k, 1)
    numer = 0.0
    for c, S in zip(table.coeffs, table.symmetric):
        numer += c * c * np.sum(g2 * g2 * (1.0 - np.diag(S) ** 2))
        numer += 4.0 * c * c * np.sum(np.outer(g2, g2)[iu] * (1.0 - S[iu] ** 2))
    numer += estimate**2 * np.sum(np.outer(g2, g2) * (1.0 - table.overlap**2))
    return float(max(numer, 0.0) / den**2)


def var_tse(
    states: Sequence[np.ndarray],
    g: Sequence[float],
    A: Observable,
    estimate: float | None = None,
) -> float:
    from .estimators import tse_from_table
    from .traces import trace_table

    table = trace_table(states, None, A)
    if estimate is None:
        num, den = tse_from_table(table, g)
        if den <= 1e-14:
            raise DegenerateDenominator(f"denominator {den:.3e}")
        estimate = num / den
    return var_tse_from_table(table, g, estimate)


def var_vd(rho: np.ndarray, A: Observable, estimate: float | None = None) -> float:
    """(1/Tr(rho^2)^2) [sum_a c_a^2 (1 - Tr(rho^2 P_a)^2) + est^2 (1 - Tr(rho^2)^2)]."""
    from .traces import trace_table

    table = trace_table([rho], None, A)
    d = table.overlap[0, 0]
    if d <= 1e-14:
        raise DegenerateDenominator(f"Tr(rho^2) = {d:.3e}")
    t = table.symmetric[:, 0, 0]
    if estimate is None:
        estimate = float(np.dot(table.coeffs, t) / d)
    numer = np.sum(table.coeffs**2 * (1.0 - t**2)) + estimate**2 * (1.0 - d * d)
    return float(max(numer, 0.0) / d**2)


# -- shot budgets and circuit plans ------------------------------------------------


@dataclass(frozen=True)
class ShotBudget:
    total: int
    per_circuit: int
    n_circuits: int
    remainder: int
    policy: str = "equal_split"


def allocate_shots(total: int, n_circuits: int) -> ShotBudget:
    if total < 1 or n_circuits < 1:
        raise InvalidShots(f"shot total {total} and circuit count {n_circuits} must be positive")
    if total < n_circuits:
        raise InsufficientShots(f"{total} shots cannot cover {n_circuits} circuits")
    per = total // n_circuits
    return ShotBudget(int(total), int(per), int(n_circuits), int(total - per * n_circuits))


@dataclass
class CircuitPlan:
    """Distinct circuits of one estimator and how to combine their outcomes."""

    name: str
    means: np.ndarray
    assemble: Callable[[np.ndarray], float]
    labels: list[str] = field(default_factory=list)

    @property
    def n_circuits(self) -> int:
        return len(self.means)

    def ideal_value(self) -> float:
        return float(self.assemble(self.means))

    def single_shot_variances(self) -> np.ndarray:
        return np.array([single_shot_var_pauli(m) for m in self.means])

    def sample(self, total_shots: int, rng: np.random.Generator) -> float:
        """One noisy realisation under an equal split of ``total_shots``."""
        budget = allocate_shots(total_shots, self.n_circuits)
        sd = np.sqrt(self.single_shot_variances() / budget.per_circuit)
        noisy = self.means + rng.normal(0.0, 1.0, size=self.n_circuits) * sd
        return float(self.assemble(noisy))


def linear_plan(name: str, node_means: np.ndarray, coeffs: Sequence[float], weights: Sequence[float]) -> CircuitPlan:
    """sum_i coeffs_i sum_a weights_a <P_a>_i with one circuit per (node, Pauli term).

    ``node_means`` has shape (n_nodes, n_terms).
    """
    node_means = np.atleast_2d(np.asarray(node_means, dtype=float))
    c = np.asarray(coeffs, dtype=float)
    w = np.asarray(weights, dtype=float)
    shape = node_means.shape

    def assemble(x):
        return float(c @ (x.reshape(shape) @ w))

    return CircuitPlan(name, node_means.ravel(), assemble)


def tse_plan(name: str, table: "TraceTable", g: Sequence[float]) -> CircuitPlan:
    """Swap-test circuits: Tr(sym(rho_i rho_j) P_a) for i <= j, Tr(rho_i rho_j) for all (i, j)."""
    g = np.asarray(g, dtype=float)
    k = len(g)
    iu = np.triu_indices(k)
    n_terms = len(table.coeffs)
    num_means = np.concatenate([S[iu] for S in table.symmetric])
    den_means = table.overlap.ravel()
    weights = np.where(iu[0] == iu[1], 1.0, 2.0) * g[iu[0]] * g[iu[1]]
    gg = np.outer(g, g).ravel()
    coeffs = table.coeffs
    n_num = n_terms * len(weights)

    def assemble(x):
        num = sum(coeffs[a] * np.dot(weights, x[a * len(weights):(a + 1) * len(weights)]) for a in range(n_terms))
        den = float(np.dot(gg, x[n_num:]))
        if den <= 1e-14:
            raise DegenerateDenominator(f"sampled denominator {den:.3e}")
        return float(num / den)

    labels = [f"num[{a}]({i},{j})" for a in range(n_terms) for i, j in zip(*iu)]
    labels += [f"den({i},{j})" for i in range(k) for j in range(k)]
    return CircuitPlan(name, np.concatenate([num_means, den_means]), assemble, labels)
