"""Depolarizing noise, Kraus sets, and the reversed (uncompute) process.

Local depolarizing noise acts on the support of the gate it follows:
``rho -> (1-p) rho + p * Tr_S(rho) (x) I_S / 2**|S|``.  Global noise mixes
the whole register toward ``I / 2**n`` once per Trotter step.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from enum import Enum
from typing import TYPE_CHECKING, Sequence

import numpy as np

from .errors import InvalidRate, QemError, UnsupportedSupportSize
from .qsim import (
    PAULI_MATRICES,
    apply_operator,
    apply_unitary,
    n_qubits_of,
)

if TYPE_CHECKING:
    from .trotter import Gate, TrotterCircuit


class NoiseMode(str, Enum):
    GLOBAL = "global"
    LOCAL = "local"


@dataclass(frozen=True)
class NoiseSpec:
    """Error-rate configuration; only the fields of ``mode`` are consumed."""

    mode: NoiseMode = NoiseMode.LOCAL
    p_global: float = 0.0
    p1: float = 0.0
    p2: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "mode", NoiseMode(self.mode))
        for name in ("p_global", "p1", "p2"):
            _check_rate(getattr(self, name), name)

    @classmethod
    def noiseless(cls) -> "NoiseSpec":
        return cls(NoiseMode.LOCAL)

    @classmethod
    def global_(cls, p: float) -> "NoiseSpec":
        return cls(NoiseMode.GLOBAL, p_global=p)

    @classmethod
    def local(cls, p1: float, p2: float) -> "NoiseSpec":
        return cls(NoiseMode.LOCAL, p1=p1, p2=p2)

    def gate_rate(self, support_size: int) -> float:
        if support_size == 1:
            return self.p1
        if support_size == 2:
            return self.p2
        raise UnsupportedSupportSize(f"no local noise rate for a {support_size}-qubit gate")


def _check_rate(p: float, name: str = "p") -> None:
    if not (0.0 <= p <= 1.0) or np.isnan(p):
        raise InvalidRate(f"{name}={p!r} is outside [0, 1]")


def apply_global_depolarizing(rho: np.ndarray, p: float) -> np.ndarray:
    _check_rate(p)
    dim = rho.shape[0]
    out = (1.0 - p) * rho
    out[np.diag_indices(dim)] += p / dim
    return out


def _support_view_shape(n: int, support: Sequence[int]) -> tuple[list[int], list[int]]:
    """Per-side reshape exposing each support qubit as its own length-2 axis."""
    shape, axes = [], []
    prev = 0
    for q in sorted(support):
        shape.append(2 ** (q - prev))
        axes.append(len(shape))
        shape.append(2)
        prev = q + 1
    shape.append(2 ** (n - prev))
    return shape, axes


def apply_local_depolarizing(rho: np.ndarray, p: float, support: Sequence[int]) -> np.ndarray:
    _check_rate(p)
    k = len(support)
    if k not in (1, 2):
        raise UnsupportedSupportSize(f"local depolarizing supports 1 or 2 qubits, got {k}")
    if len(set(support)) != k:
        raise QemError(f"repeated qubit in support {support}")
    if p == 0.0:
        return rho.copy()
    n = n_qubits_of(rho)
    shape, axes = _support_view_shape(n, support)
    t = rho.reshape(shape + shape)
    col_axes = [len(shape) + a for a in axes]

    def index(s):
        idx = [slice(None)] * (2 * len(shape))
        for a, ca, b in zip(axes, col_axes, s):
            idx[a] = b
            idx[ca] = b
        return tuple(idx)

    basis = list(itertools.product((0, 1), repeat=k))
    reduced = sum(t[index(s)] for s in basis)
    out = (1.0 - p) * rho
    ot = out.reshape(shape + shape)
    for s in basis:
        ot[index(s)] += (p / 2**k) * reduced
    return out


def local_to_global_rate(n: int, p_local: float) -> float:
    if n < 1:
        raise QemError(f"n must be positive, got {n}")
    _check_rate(p_local, "p_local")
    return min(n * p_local, 1.0)


# -- Kraus representation -----------------------------------------------------


@dataclass(frozen=True)
class KrausSet:
    """Kraus operators acting on ``support`` (qubits in ascending order)."""

    operators: tuple[np.ndarray, ...]
    support: tuple[int, ...]

    def __post_init__(self):
        dim = 2 ** len(self.support)
        acc = np.zeros((dim, dim), dtype=np.complex128)
        for K in self.operators:
            if K.shape != (dim, dim):
                raise QemError(f"Kraus operator shape {K.shape} does not match support {self.support}")
            acc += K.conj().T @ K
        if np.max(np.abs(acc - np.eye(dim))) > 1e-10:
            raise QemError("Kraus operators are not trace preserving")

    def apply(self, rho: np.ndarray) -> np.ndarray:
        return sum(apply_operator(rho, K, self.support) for K in self.operators)

    def apply_adjoint(self, rho: np.ndarray) -> np.ndarray:
        return sum(apply_operator(rho, K.conj().T, self.support) for K in self.operators)


def depolarizing_kraus(p: float, support: Sequence[int]) -> KrausSet:
    """Pauli Kraus operators: sqrt(1 - p + p/4**k) I and sqrt(p/4**k) P for P != I."""
    _check_rate(p)
    k = len(support)
    ops = []
    for letters in itertools.product("IXYZ", repeat=k):
        P = np.array([[1.0]], dtype=np.complex128)
        for c in letters:
            P = np.kron(P, PAULI_MATRICES[c])
        w = p / 4**k + (1.0 - p if set(letters) == {"I"} else 0.0)
        if w > 0:
            ops.append(np.sqrt(w) * P)
    return KrausSet(tuple(ops), tuple(sorted(support)))


# -- reverse process and dual state --------------------------------------------


@dataclass(frozen=True)
class _Channel:
    """A depolarizing channel; ``support`` is None for the global channel."""

    p: float
    support: tuple[int, ...] | None

    def apply(self, rho: np.ndarray) -> np.ndarray:
        if self.support is None:
            return apply_global_depolarizing(rho, self.p)
        return apply_local_depolarizing(rho, self.p, self.support)

    def kraus(self, n: int) -> KrausSet:
        return depolarizing_kraus(self.p, self.support if self.support is not None else range(n))


@dataclass(frozen=True)
class _Inverse:
    """Conjugation by the inverse of a gate."""

    gate: "Gate"

    def apply(self, rho: np.ndarray) -> np.ndarray:
        return apply_unitary(rho, self.gate.unitary.conj().T, self.gate.support)

    def apply_adjoint(self, rho: np.ndarray) -> np.ndarray:
        return apply_unitary(rho, self.gate.unitary, self.gate.support)


@dataclass(frozen=True)
class ReverseProcess:
    """Uncompute process: inverse gates in reverse order, each unit followed
    by the same noise channel as its forward counterpart.

    ``ops`` is in application order.
    """

    n_qubits: int
    ops: tuple = field(repr=False)

    def apply(self, rho: np.ndarray) -> np.ndarray:
        for op in self.ops:
            rho = op.apply(rho)
        return rho

    def apply_adjoint(self, rho: np.ndarray, method: str = "channel") -> np.ndarray:
        """E_rev^dagger(rho).

        ``method="channel"`` uses that depolarizing channels are self-adjoint;
        ``method="kraus"`` applies sum_i K_i^dagger rho K_i for every channel
        (cost grows as 16**|support|, so keep global-mode use to small n).
        """
        if method not in ("channel", "kraus"):
            raise QemError(f"unknown adjoint method {method!r}")
        for op in reversed(self.ops):
            if isinstance(op, _Inverse):
                rho = op.apply_adjoint(rho)
            elif method == "channel":
                rho = op.apply(rho)
            else:
                rho = op.kraus(self.n_qubits).apply_adjoint(rho)
        return rho


def forward_units(circ: "TrotterCircuit", noise: NoiseSpec) -> list[tuple[list, _Channel | None]]:
    """Split a noisy circuit into (gates, trailing channel) units in time order."""
    units = []
    for _ in range(circ.trotter_number):
        if noise.mode is NoiseMode.GLOBAL:
            units.append((list(circ.step_gates), _Channel(noise.p_global, None)))
        else:
            for g in circ.step_gates:
                units.append(([g], _Channel(noise.gate_rate(len(g.support)), g.support)))
    return units


def build_reverse_process(circ: "TrotterCircuit", noise: NoiseSpec) -> ReverseProcess:
    ops = []
    for gates, channel in reversed(forward_units(circ, noise)):
        ops.extend(_Inverse(g) for g in reversed(gates))
        ops.append(channel)
    return ReverseProcess(circ.n_qubits, tuple(ops))


def dual_state(
    circ: "TrotterCircuit",
    noise: NoiseSpec,
    rho0: np.ndarray | None = None,
    method: str = "channel",
) -> np.ndarray:
    """rho_bar = E_rev^dagger(rho0).

    Depolarizing channels are unital and self-adjoint and the inverse gates
    are unitary, so the adjoint process is trace preserving and the result is
    a density matrix.
    """
    from .qsim import zero_state

    if rho0 is None:
        rho0 = zero_state(circ.n_qubits)
    return build_reverse_process(circ, noise).apply_adjoint(rho0, method=method)
