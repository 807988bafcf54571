"""Pairwise trace quantities measured by swap-test and dual-state circuits.

For states rho_i and partners sigma_j (copies, or dual states) the circuits
measure Tr(rho_i sigma_j) and Tr(rho_i sigma_j P_a).  Here they are computed
directly from the density matrices instead of simulating ancilla registers.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import LengthMismatch
from .qsim import Observable, PauliString, pauli_terms, pauli_trace, trace_product


@dataclass(frozen=True)
class TraceTable:
    """overlap[i, j] = Re Tr(rho_i sigma_j); products[a, i, j] = Tr(rho_i sigma_j P_a).

    ``paulis`` carry unit coefficients; ``coeffs`` holds the c_a of A.
    """

    overlap: np.ndarray
    products: np.ndarray
    paulis: tuple[PauliString, ...]
    coeffs: np.ndarray

    @property
    def symmetric(self) -> np.ndarray:
        """Tr((rho_i sigma_j + sigma_j rho_i)/2 P_a), i.e. the real part of ``products``."""
        return self.products.real

    @property
    def size(self) -> int:
        return self.overlap.shape[0]


def split_observable(A: Observable) -> tuple[tuple[PauliString, ...], np.ndarray]:
    terms = pauli_terms(A)
    paulis = tuple(PauliString(t.letters) for t in terms)
    return paulis, np.array([t.coeff for t in terms], dtype=float)


def trace_table(
    states: Sequence[np.ndarray],
    partners: Sequence[np.ndarray] | None,
    A: Observable,
) -> TraceTable:
    partners = states if partners is None else partners
    if len(states) != len(partners):
        raise LengthMismatch(f"{len(states)} states vs {len(partners)} partner states")
    paulis, coeffs = split_observable(A)
    k = len(states)
    same = partners is states
    overlap = np.zeros((k, k))
    products = np.zeros((len(paulis), k, k), dtype=np.complex128)
    for i in range(k):
        for j in range(k):
            if same and j < i:
                # Tr(rho_j rho_i P) = conj(Tr(rho_i rho_j P)) for Hermitian factors
                overlap[i, j] = overlap[j, i]
                products[:, i, j] = products[:, j, i].conj()
                continue
            overlap[i, j] = trace_product(states[i], partners[j]).real
            prod = states[i] @ partners[j]
            for a, p in enumerate(paulis):
                products[a, i, j] = pauli_trace(prod, p)
    return TraceTable(overlap, products, paulis, coeffs)
