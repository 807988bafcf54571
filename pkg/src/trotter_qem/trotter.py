"""Hamiltonians, first-order Trotter circuits and their (noisy) execution."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import InvalidQubitCount, InvalidTrotterNumber, QemError
from .noise import NoiseMode, NoiseSpec, apply_global_depolarizing, apply_local_depolarizing
from .qsim import (
    PauliString,
    apply_unitary,
    embed_operator,
    matexp_hermitian,
    pauli_to_matrix,
    zero_state,
)


@dataclass(frozen=True)
class Hamiltonian:
    """H = sum of weighted Pauli strings, grouped into ordered Trotter layers."""

    n_qubits: int
    terms: tuple[PauliString, ...]
    layers: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        covered = sorted(i for layer in self.layers for i in layer)
        if covered != list(range(len(self.terms))):
            raise QemError("layers must cover every term exactly once")
        for t in self.terms:
            if t.n_qubits != self.n_qubits:
                raise QemError(f"term {t.letters} does not act on {self.n_qubits} qubits")

    def matrix(self) -> np.ndarray:
        return sum(pauli_to_matrix(t) for t in self.terms)


def build_tfim(n: int) -> Hamiltonian:
    """Periodic 1D transverse-field Ising model H = -sum Z_i Z_{i+1} - sum X_i."""
    if n < 2:
        raise InvalidQubitCount(f"TFIM needs at least 2 qubits, got {n}")
    zz = []
    for i in range(n):
        letters = ["I"] * n
        letters[i] = "Z"
        letters[(i + 1) % n] = "Z"
        zz.append(PauliString("".join(letters), -1.0))
    xs = [PauliString.single(n, i, "X", -1.0) for i in range(n)]
    terms = tuple(zz + xs)
    layers = (tuple(range(n)), tuple(range(n, 2 * n)))
    return Hamiltonian(n, terms, layers)


def exact_evolve(H: Hamiltonian, t: float, rho0: np.ndarray | None = None) -> np.ndarray:
    if rho0 is None:
        rho0 = zero_state(H.n_qubits)
    U = matexp_hermitian(H.matrix(), -1j * t)
    return U @ rho0 @ U.conj().T


class LayerOrder(str, Enum):
    # Operator-product reading: the rightmost factor (last layer) acts first.
    PRODUCT = "product"
    # Layers applied in the order they are listed.
    LISTED = "listed"


@dataclass(frozen=True)
class Gate:
    unitary: np.ndarray
    support: tuple[int, ...]
    term: PauliString


@dataclass(frozen=True)
class TrotterCircuit:
    n_qubits: int
    step_gates: tuple[Gate, ...]
    trotter_number: int
    total_time: float

    @property
    def gates(self) -> list[Gate]:
        return list(self.step_gates) * self.trotter_number

    def unitary(self) -> np.ndarray:
        """Dense product of every gate; only sensible for small n."""
        step = np.eye(2**self.n_qubits, dtype=np.complex128)
        for g in self.step_gates:
            step = embed_operator(g.unitary, g.support, self.n_qubits) @ step
        return np.linalg.matrix_power(step, self.trotter_number)


def build_trotter_circuit(
    H: Hamiltonian,
    t: float,
    M: int,
    layer_order: LayerOrder | str = LayerOrder.LISTED,
) -> TrotterCircuit:
    """First-order Trotter circuit: per step, one gate exp(-i (t/M) c P) per term."""
    if int(M) != M or M < 1:
        raise InvalidTrotterNumber(f"Trotter number must be a positive integer, got {M}")
    M = int(M)
    layers = list(H.layers)
    if LayerOrder(layer_order) is LayerOrder.PRODUCT:
        layers = layers[::-1]
    gates = []
    for layer in layers:
        for i in layer:
            term = H.terms[i]
            local = term.local()
            U = matexp_hermitian(pauli_to_matrix(local), -1j * t / M)
            gates.append(Gate(U, term.support, term))
    return TrotterCircuit(H.n_qubits, tuple(gates), M, float(t))


def run_noisy_trotter(
    circ: TrotterCircuit,
    noise: NoiseSpec,
    rho0: np.ndarray | None = None,
) -> np.ndarray:
    """Execute the circuit with depolarizing noise.

    Local mode: each gate is followed by depolarizing noise on its support
    (rate p1 or p2).  Global mode: every Trotter step, including the last,
    is followed by one global depolarizing channel.
    """
    if rho0 is None:
        rho0 = zero_state(circ.n_qubits)
    rho = np.array(rho0, dtype=np.complex128, copy=True)
    local = noise.mode is NoiseMode.LOCAL
    for _ in range(circ.trotter_number):
        for g in circ.step_gates:
            rho = apply_unitary(rho, g.unitary, g.support)
            if local:
                p = noise.gate_rate(len(g.support))
                if p > 0:
                    rho = apply_local_depolarizing(rho, p, g.support)
        if not local:
            rho = apply_global_depolarizing(rho, noise.p_global)
    return 0.5 * (rho + rho.conj().T)
