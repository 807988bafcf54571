"""Density-matrix simulation and error mitigation for noisy Trotter circuits.

Modules: :mod:`qsim` (states, Pauli strings, gate embedding), :mod:`noise`
(depolarizing channels, reverse process, dual states), :mod:`trotter` (TFIM
and first-order Trotter circuits), :mod:`estimators` (extrapolation and
purification estimators), :mod:`shots` (finite-measurement statistics) and
:mod:`bench` (configuration, sweeps and reports).
"""

from .errors import ConfigError, QemError
from .estimators import (
    EstimateReport,
    Method,
    NodeSet,
    data_efficient_estimate,
    data_efficient_nodes,
    dual_estimate_v1,
    dual_estimate_v2,
    exp_physical_extrapolate,
    lagrange_weights_at_zero,
    optimal_trotter_number,
    physicality_diagnostics,
    poly_physical_extrapolate,
    sequential_physical_then_trotter,
    trotter_extrapolate,
    tse_estimate,
    vd_estimate,
)
from .noise import (
    KrausSet,
    NoiseMode,
    NoiseSpec,
    apply_global_depolarizing,
    apply_local_depolarizing,
    build_reverse_process,
    depolarizing_kraus,
    dual_state,
)
from .qsim import PauliString, expectation, trace_distance, zero_state
from .shots import CircuitPlan, allocate_shots, inject_shot_noise, var_tse, var_vd
from .traces import TraceTable, trace_table
from .trotter import (
    Hamiltonian,
    LayerOrder,
    TrotterCircuit,
    build_tfim,
    build_trotter_circuit,
    exact_evolve,
    run_noisy_trotter,
)

__version__ = "0.1.0"
