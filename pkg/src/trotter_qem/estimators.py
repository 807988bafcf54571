"""Error-mitigation estimators.

Linear extrapolations (Trotter, polynomial, data-efficient) share one
Lagrange-weight routine evaluated at zero in their own variable: 1/M, p, or
sqrt(lambda).  Purification-type estimators (VD, subspace expansion, dual
variants) are assembled from the pairwise traces in :mod:`traces`.
"""

from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass, field
from enum import Enum
from typing import Mapping, Sequence

import numpy as np

from . import shots
from .errors import (
    DegenerateDenominator,
    DegenerateLambdas,
    DuplicateNode,
    InsufficientGrid,
    InvalidRate,
    LengthMismatch,
    QemError,
    SignMismatch,
    ZeroTrotter,
    ZeroValue,
)
from .qsim import (
    IMAG_ATOL,
    Observable,
    n_qubits_of,
    observable_matrix,
    pauli_trace,
    trace_norm,
    trace_product,
)
from .traces import TraceTable, split_observable, trace_table

DENOMINATOR_ATOL = 1e-14
UNPHYSICAL_ATOL = 1e-8


class Method(str, Enum):
    RAW = "raw"
    TROTTER = "trotter"
    POLY = "poly"
    EXP = "exp"
    SEQ_POLY = "seq_poly"
    SEQ_EXP = "seq_exp"
    DATA_EFFICIENT = "data_efficient"
    VD = "vd"
    TSE = "tse"
    DUAL1 = "dual1"
    DUAL2 = "dual2"


@dataclass
class EstimateReport:
    value: float
    predicted_variance: float | None
    method: Method
    nodes: object = None
    bias_proxy: float | None = None
    details: dict = field(default_factory=dict)

    def with_exact(self, exact: float) -> "EstimateReport":
        self.bias_proxy = abs(self.value - exact)
        return self


def lagrange_weights_at_zero(xs: Sequence[float]) -> np.ndarray:
    """w_i = prod_{j != i} x_j / (x_j - x_i): the interpolating polynomial's value at 0."""
    xs = np.asarray(xs, dtype=float)
    w = np.ones(len(xs))
    for i in range(len(xs)):
        for j in range(len(xs)):
            if j != i:
                w[i] *= xs[j] / (xs[j] - xs[i])
    return w


def _linear_report(values, weights, variances, method, nodes=None, **details) -> EstimateReport:
    values = np.asarray(values, dtype=float)
    value = float(np.dot(weights, values))
    var = None
    if variances is not None:
        var = shots.var_extrapolation(variances, weights)
    return EstimateReport(value, var, method, nodes, details={"coefficients": weights, **details})


def _check_distinct(xs, what):
    if len(set(xs)) != len(xs):
        raise DuplicateNode(f"duplicate {what} in {list(xs)}")


def trotter_extrapolate(
    points: Sequence[tuple[int, float]],
    variances: Sequence[float] | None = None,
) -> EstimateReport:
    """Richardson extrapolation in eps_M = 1/M."""
    if len(points) < 2:
        raise InsufficientGrid("Trotter extrapolation needs at least two points")
    Ms = [int(m) for m, _ in points]
    _check_distinct(Ms, "Trotter numbers")
    w = lagrange_weights_at_zero([1.0 / m for m in Ms])
    return _linear_report([v for _, v in points], w, variances, Method.TROTTER, Ms)


def poly_physical_extrapolate(
    points: Sequence[tuple[float, float]],
    variances: Sequence[float] | None = None,
) -> EstimateReport:
    if len(points) < 2:
        raise InsufficientGrid("polynomial extrapolation needs at least two points")
    ps = [float(p) for p, _ in points]
    _check_distinct(ps, "error rates")
    if min(ps) <= 0:
        raise InvalidRate("extrapolation nodes need positive error rates")
    w = lagrange_weights_at_zero(ps)
    return _linear_report([v for _, v in points], w, variances, Method.POLY, ps)


def exp_physical_extrapolate(
    v1: float,
    v2: float,
    r: float,
    var1: float | None = None,
    var2: float | None = None,
) -> EstimateReport:
    """Zero-noise intercept of v(p) = v0 exp(-beta p) from values at p and r*p.

    v0 = sign * |v1|**(r/(r-1)) * |v2|**(1/(1-r)); the variance is propagated
    to first order.
    """
    if r <= 1:
        raise QemError(f"rate ratio r must exceed 1, got {r}")
    if v1 == 0 or v2 == 0:
        raise ZeroValue("exponential fit is undefined for a zero value")
    if (v1 > 0) != (v2 > 0):
        raise SignMismatch(f"values {v1} and {v2} have opposite signs")
    sign = 1.0 if v1 > 0 else -1.0
    a, b = r / (r - 1.0), 1.0 / (1.0 - r)
    value = sign * abs(v1) ** a * abs(v2) ** b
    var = None
    if var1 is not None and var2 is not None:
        d1, d2 = a * value / v1, b * value / v2
        var = d1 * d1 * var1 + d2 * d2 * var2
    return EstimateReport(value, var, Method.EXP, (1.0, r), details={"exponents": (a, b)})


def sequential_physical_then_trotter(
    table: Mapping[tuple[float, int], float],
    mode: str = "poly",
    variances: Mapping[tuple[float, int], float] | None = None,
) -> EstimateReport:
    """Extrapolate each Trotter-number column to zero noise, then in 1/M.

    ``table`` maps (p, M) to a measured value.  Exponential mode needs
    exactly two rates per column.
    """
    if mode not in ("poly", "exp"):
        raise QemError(f"unknown physical extrapolation mode {mode!r}")
    columns: dict[int, list[tuple[float, float]]] = defaultdict(list)
    for (p, M), v in table.items():
        columns[int(M)].append((float(p), float(v)))
    if len(columns) < 2:
        raise InsufficientGrid("sequential extrapolation needs at least two Trotter numbers")
    intercepts, stage_vars, stage1 = [], [], {}
    for M in sorted(columns):
        col = sorted(columns[M])
        if len(col) < 2:
            raise InsufficientGrid(f"Trotter number {M} has fewer than two error rates")
        col_vars = None if variances is None else [variances[(p, M)] for p, _ in col]
        if mode == "poly":
            rep = poly_physical_extrapolate(col, col_vars)
        else:
            if len(col) != 2:
                raise InsufficientGrid(f"exponential extrapolation needs exactly two rates at M={M}")
            (p_lo, v_lo), (p_hi, v_hi) = col
            rep = exp_physical_extrapolate(
                v_lo, v_hi, p_hi / p_lo, *(col_vars if col_vars is not None else (None, None))
            )
        stage1[M] = rep
        intercepts.append((M, rep.value))
        stage_vars.append(rep.predicted_variance)
    final = trotter_extrapolate(intercepts, None if variances is None else stage_vars)
    method = Method.SEQ_POLY if mode == "poly" else Method.SEQ_EXP
    return EstimateReport(
        final.value,
        final.predicted_variance,
        method,
        sorted(table),
        details={"intercepts": dict(intercepts), "trotter_coefficients": final.details["coefficients"], "stage1": stage1},
    )


# -- data-efficient 1D extrapolation -----------------------------------------------


@dataclass(frozen=True)
class NodeSet:
    """Extrapolation nodes on the curve M = floor(c / sqrt(p))."""

    p_base: float
    lambdas: tuple[float, ...]
    rates: tuple[float, ...]
    trotter_numbers: tuple[int, ...]
    coefficients: tuple[float, ...]
    c: float
    on_rule: bool = True

    def __len__(self) -> int:
        return len(self.lambdas)

    def with_trotter_numbers(self, Ms: Sequence[int]) -> "NodeSet":
        """Same rates and coefficients with explicit Trotter numbers (off the rule)."""
        if len(Ms) != len(self):
            raise LengthMismatch(f"{len(Ms)} Trotter numbers for {len(self)} nodes")
        return NodeSet(self.p_base, self.lambdas, self.rates, tuple(int(m) for m in Ms), self.coefficients, self.c, False)


def optimal_trotter_number(c: float, p: float) -> int:
    # relative slack keeps exact squares such as p = (c/20)**2 from rounding down
    return int(math.floor(c / math.sqrt(p) * (1 + 1e-12)))


def data_efficient_nodes(c: float, lambdas: Sequence[float], p_base: float) -> NodeSet:
    if c <= 0:
        raise QemError(f"c must be positive, got {c}")
    if not (0 < p_base <= 1):
        raise InvalidRate(f"p_base={p_base} is outside (0, 1]")
    lam = tuple(float(x) for x in lambdas)
    if len(lam) < 1 or abs(lam[0] - 1.0) > 1e-12:
        raise QemError("the first scale factor must be 1")
    if len(set(lam)) != len(lam):
        raise DegenerateLambdas(f"repeated scale factors in {lam}")
    if any(b <= a for a, b in zip(lam, lam[1:])):
        raise QemError(f"scale factors must be strictly ascending, got {lam}")
    rates = tuple(x * p_base for x in lam)
    if rates[-1] > 1:
        raise InvalidRate(f"scaled rate {rates[-1]} exceeds 1")
    Ms = tuple(optimal_trotter_number(c, p) for p in rates)
    if min(Ms) < 1:
        raise ZeroTrotter(f"floor(c/sqrt(p)) gives Trotter numbers {Ms}")
    if len(set(Ms)) != len(Ms):
        raise DegenerateLambdas(f"scale factors {lam} map to repeated Trotter numbers {Ms}")
    g = lagrange_weights_at_zero(np.sqrt(lam))
    if abs(g.sum() - 1.0) > 1e-10:
        raise QemError(f"coefficients sum to {g.sum()!r}, not 1")
    return NodeSet(float(p_base), lam, rates, Ms, tuple(float(x) for x in g), float(c))


def data_efficient_estimate(
    nodes: NodeSet,
    values: Sequence[float],
    variances: Sequence[float] | None = None,
) -> EstimateReport:
    if len(values) != len(nodes):
        raise LengthMismatch(f"{len(values)} values for {len(nodes)} nodes")
    if variances is not None and len(variances) != len(nodes):
        raise LengthMismatch(f"{len(variances)} variances for {len(nodes)} nodes")
    return _linear_report(values, np.array(nodes.coefficients), variances, Method.DATA_EFFICIENT, nodes)


# -- purification-based estimators ----------------------------------------------


def vd_estimate(rho: np.ndarray, A: Observable, L: int = 2) -> EstimateReport:
    """Tr(rho^L A) / Tr(rho^L); the predicted variance is given for L = 2."""
    if int(L) != L or L < 2:
        raise QemError(f"number of copies L must be an integer >= 2, got {L}")
    rho_L = np.linalg.matrix_power(rho, int(L))
    den = np.trace(rho_L).real
    if den < DENOMINATOR_ATOL:
        raise DegenerateDenominator(f"Tr(rho^L) = {den:.3e}")
    num = _observable_trace(rho_L, A)
    value = num / den
    var = shots.var_vd(rho, A, value) if L == 2 else None
    return EstimateReport(value, var, Method.VD, details={"denominator": den, "copies": int(L)})


def _observable_trace(M: np.ndarray, A: Observable) -> float:
    if isinstance(A, np.ndarray):
        val = trace_product(M, A)
    else:
        paulis, coeffs = split_observable(A)
        val = sum(c * pauli_trace(M, p) for p, c in zip(paulis, coeffs))
    return float(np.real(val))


def _check_lengths(g, *seqs):
    for s in seqs:
        if len(s) != len(g):
            raise LengthMismatch(f"{len(s)} states for {len(g)} coefficients")
    if len(g) == 0:
        raise LengthMismatch("at least one state is required")


def tse_from_table(table: TraceTable, g: Sequence[float]) -> tuple[float, float]:
    """(numerator, denominator) of the subspace-expansion estimator."""
    g = np.asarray(g, dtype=float)
    gg = np.outer(g, g)
    den = float(np.sum(gg * table.overlap))
    num = float(sum(c * np.sum(gg * s) for c, s in zip(table.coeffs, table.symmetric)))
    return num, den


def tse_estimate(
    states: Sequence[np.ndarray],
    g: Sequence[float],
    A: Observable,
    check_state: bool = True,
) -> EstimateReport:
    """Expectation of A in rho_TS^2 / Tr(rho_TS^2) with rho_TS = sum_i g_i rho_i."""
    _check_lengths(g, states)
    table = trace_table(states, None, A)
    num, den = tse_from_table(table, g)
    if den <= DENOMINATOR_ATOL:
        raise DegenerateDenominator(f"sum g_i g_j Tr(rho_i rho_j) = {den:.3e}")
    value = num / den
    details = {"numerator": num, "denominator": den, "table": table}
    if check_state:
        rho_ts = sum(gi * r for gi, r in zip(g, states))
        rho_qem = rho_ts @ rho_ts / den
        eig = np.linalg.eigvalsh(0.5 * (rho_qem + rho_qem.conj().T))
        details["effective_trace"] = float(np.trace(rho_qem).real)
        details["effective_min_eigenvalue"] = float(eig[0])
    var = shots.var_tse_from_table(table, g, value)
    return EstimateReport(value, var, Method.TSE, tuple(g), details=details)


def _dual_parts(states, duals, g, A):
    _check_lengths(g, states, duals)
    table = trace_table(states, duals, A)
    gg = np.outer(np.asarray(g, dtype=float), np.asarray(g, dtype=float))
    den = float(np.sum(gg * table.overlap))
    if den <= DENOMINATOR_ATOL:
        raise DegenerateDenominator(f"sum g_i g_j Tr(rho_i dual_j) = {den:.3e}")
    num = complex(sum(c * np.sum(gg * P) for c, P in zip(table.coeffs, table.products)))
    return table, num, den


def dual_estimate_v1(
    states: Sequence[np.ndarray],
    duals: Sequence[np.ndarray],
    g: Sequence[float],
    A: Observable,
) -> EstimateReport:
    """A in the symmetrised dual ansatz (rho_TS dual_TS + dual_TS rho_TS) / 2Tr(rho_TS dual_TS)."""
    table, num, den = _dual_parts(states, duals, g, A)
    return EstimateReport(num.real / den, None, Method.DUAL1, tuple(g), details={"numerator": num.real, "denominator": den, "table": table})


def dual_estimate_v2(
    states: Sequence[np.ndarray],
    duals: Sequence[np.ndarray],
    g: Sequence[float],
    A: Observable,
    strict: bool = False,
) -> EstimateReport:
    """A in rho_TS dual_TS / Tr(rho_TS dual_TS).

    The numerator sum g_i g_j Tr(rho_i dual_j A) is complex unless the
    products commute; its imaginary part is reported in ``details`` and only
    raises when ``strict`` is set.
    """
    table, num, den = _dual_parts(states, duals, g, A)
    if strict and abs(num.imag) > IMAG_ATOL:
        raise QemError(f"dual numerator has imaginary part {num.imag:.3e}")
    return EstimateReport(
        num.real / den,
        None,
        Method.DUAL2,
        tuple(g),
        details={"numerator": num, "numerator_imag": num.imag, "denominator": den, "table": table},
    )


# -- physicality ------------------------------------------------------------------


@dataclass(frozen=True)
class PhysicalityReport:
    min_eigenvalue: float
    trace: float
    operator_norm: float
    unphysical: bool
    expectation: float | None = None
    bound: float | None = None


def physicality_diagnostics(
    g: Sequence[float],
    states: Sequence[np.ndarray],
    A: Observable | None = None,
) -> PhysicalityReport:
    """Spectrum of rho_extra = sum_i g_i rho_i and the bound |Tr(A rho)| <= ||rho||_op Tr|A|."""
    _check_lengths(g, states)
    rho = sum(gi * r for gi, r in zip(g, states))
    rho = 0.5 * (rho + rho.conj().T)
    eig = np.linalg.eigvalsh(rho)
    op = float(np.max(np.abs(eig)))
    ev = bound = None
    if A is not None:
        ev = abs(_observable_trace(rho, A))
        bound = op * _trace_norm_of(A, n_qubits_of(rho))
    return PhysicalityReport(float(eig[0]), float(np.trace(rho).real), op, bool(eig[0] < -UNPHYSICAL_ATOL), ev, bound)


def _trace_norm_of(A: Observable, n: int) -> float:
    if not isinstance(A, np.ndarray):
        paulis, coeffs = split_observable(A)
        if len(paulis) == 1:
            # Tr|c P| = |c| 2**n for a Pauli string
            return abs(float(coeffs[0])) * 2**n
    return trace_norm(observable_matrix(A))


__all__ = [
    "EstimateReport",
    "Method",
    "NodeSet",
    "PhysicalityReport",
    "data_efficient_estimate",
    "data_efficient_nodes",
    "dual_estimate_v1",
    "dual_estimate_v2",
    "exp_physical_extrapolate",
    "lagrange_weights_at_zero",
    "optimal_trotter_number",
    "physicality_diagnostics",
    "poly_physical_extrapolate",
    "sequential_physical_then_trotter",
    "trotter_extrapolate",
    "tse_estimate",
    "tse_from_table",
    "vd_estimate",
]
