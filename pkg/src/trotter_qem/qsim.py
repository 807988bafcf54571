"""Dense linear algebra, Pauli strings and state metrics.

Conventions used everywhere in the package:

* qubit 0 is the most significant tensor factor (leftmost letter of a
  Pauli string, leftmost factor of a Kronecker product);
* density matrices are plain ``complex128`` numpy arrays of shape
  ``(2**n, 2**n)``;
* the trace distance carries the factor 1/2, so it lies in [0, 1].
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import reduce
from typing import Sequence, Union

import numpy as np

from .errors import (
    DimensionMismatch,
    NonHermitianInput,
    NonHermitianObservable,
    QemError,
)

HERMITIAN_RTOL = 1e-12
TRACE_ATOL = 1e-10
PSD_ATOL = 1e-10
IMAG_ATOL = 1e-9

PAULI_MATRICES = {
    "I": np.eye(2, dtype=np.complex128),
    "X": np.array([[0, 1], [1, 0]], dtype=np.complex128),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=np.complex128),
    "Z": np.array([[1, 0], [0, -1]], dtype=np.complex128),
}


@dataclass(frozen=True)
class PauliString:
    """A real-weighted tensor product of single-qubit Paulis, e.g. ``PauliString("XZI", 0.5)``."""

    letters: str
    coeff: float = 1.0

    def __post_init__(self):
        if not self.letters:
            raise QemError("Pauli string must have at least one letter")
        bad = set(self.letters) - set("IXYZ")
        if bad:
            raise QemError(f"invalid Pauli letters {sorted(bad)} in {self.letters!r}")

    @property
    def n_qubits(self) -> int:
        return len(self.letters)

    @property
    def support(self) -> tuple[int, ...]:
        return tuple(i for i, c in enumerate(self.letters) if c != "I")

    def local(self) -> "PauliString":
        """Restriction to the support, letters in ascending qubit order."""
        return PauliString("".join(self.letters[q] for q in self.support) or "I", self.coeff)

    def to_matrix(self) -> np.ndarray:
        return pauli_to_matrix(self)

    @classmethod
    def single(cls, n: int, qubit: int, letter: str, coeff: float = 1.0) -> "PauliString":
        letters = ["I"] * n
        letters[qubit] = letter
        return cls("".join(letters), coeff)


Observable = Union[PauliString, Sequence[PauliString], np.ndarray]


def pauli_to_matrix(p: PauliString) -> np.ndarray:
    mats = [PAULI_MATRICES[c] for c in p.letters]
    return p.coeff * reduce(np.kron, mats)


def pauli_trace(M: np.ndarray, p: PauliString) -> complex:
    """Tr(M P) in O(2**n) using the monomial structure of P.

    P|b> = phase(b)|b xor flip>, so Tr(M P) = sum_b M[b, b xor flip] * phase(b).
    """
    n = p.n_qubits
    if M.shape != (2**n, 2**n):
        raise DimensionMismatch(f"matrix shape {M.shape} vs {n}-qubit Pauli string")
    idx = np.arange(2**n)
    flip = 0
    phase = np.ones(2**n, dtype=np.complex128)
    for q, c in enumerate(p.letters):
        if c == "I":
            continue
        bit = (idx >> (n - 1 - q)) & 1
        if c in "XY":
            flip |= 1 << (n - 1 - q)
        if c == "Z":
            phase *= 1 - 2 * bit
        elif c == "Y":
            # Y|0> = i|1>, Y|1> = -i|0>
            phase *= 1j * (1 - 2 * bit)
    return complex(p.coeff * np.sum(M[idx, idx ^ flip] * phase))


def pauli_terms(A: Observable, n: int | None = None) -> list[PauliString]:
    """Normalise an observable to a list of weighted Pauli strings.

    Dense matrices are decomposed exactly, which costs O(16**n); keep n small.
    """
    if isinstance(A, PauliString):
        return [A]
    if isinstance(A, np.ndarray):
        return pauli_decompose(A)
    terms = list(A)
    if not terms or not all(isinstance(t, PauliString) for t in terms):
        raise QemError("observable must be a PauliString, a list of them, or a matrix")
    if len({t.n_qubits for t in terms}) != 1:
        raise DimensionMismatch("Pauli terms act on different qubit counts")
    return terms


def pauli_decompose(A: np.ndarray, atol: float = 1e-14) -> list[PauliString]:
    """Hermitian A = sum_a c_a P_a with c_a = Tr(A P_a) / 2**n."""
    n = _n_qubits(A)
    if not is_hermitian(A):
        raise NonHermitianObservable("cannot decompose a non-Hermitian observable into real Pauli terms")
    out = []
    for letters in itertools.product("IXYZ", repeat=n):
        p = PauliString("".join(letters))
        c = pauli_trace(A, p).real / 2**n
        if abs(c) > atol:
            out.append(PauliString(p.letters, c))
    return out


def observable_matrix(A: Observable) -> np.ndarray:
    if isinstance(A, np.ndarray):
        return A
    return sum(pauli_to_matrix(t) for t in pauli_terms(A))


def _n_qubits(A: np.ndarray) -> int:
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise DimensionMismatch(f"expected a square matrix, got shape {A.shape}")
    n = int(A.shape[0]).bit_length() - 1
    if 2**n != A.shape[0]:
        raise DimensionMismatch(f"dimension {A.shape[0]} is not a power of two")
    return n


def n_qubits_of(A: np.ndarray) -> int:
    return _n_qubits(A)


def is_hermitian(A: np.ndarray, rtol: float = HERMITIAN_RTOL) -> bool:
    scale = max(float(np.max(np.abs(A))), 1.0) if A.size else 1.0
    return bool(np.max(np.abs(A - A.conj().T)) <= rtol * scale)


def check_density_matrix(
    rho: np.ndarray,
    trace_atol: float = TRACE_ATOL,
    psd_atol: float = PSD_ATOL,
) -> None:
    """Raise QemError unless ``rho`` is a unit-trace Hermitian PSD matrix."""
    _n_qubits(rho)
    if not is_hermitian(rho):
        raise NonHermitianInput("density matrix is not Hermitian")
    tr = np.trace(rho).real
    if abs(tr - 1.0) > trace_atol:
        raise QemError(f"density matrix trace {tr!r} differs from 1")
    lmin = float(np.linalg.eigvalsh(rho)[0])
    if lmin < -psd_atol:
        raise QemError(f"density matrix has negative eigenvalue {lmin:.3e}")


def zero_state(n: int) -> np.ndarray:
    rho = np.zeros((2**n, 2**n), dtype=np.complex128)
    rho[0, 0] = 1.0
    return rho


def pure_state(psi: np.ndarray) -> np.ndarray:
    psi = np.asarray(psi, dtype=np.complex128)
    psi = psi / np.linalg.norm(psi)
    return np.outer(psi, psi.conj())


def maximally_mixed(n: int) -> np.ndarray:
    return np.eye(2**n, dtype=np.complex128) / 2**n


def matexp_hermitian(H: np.ndarray, scale: complex) -> np.ndarray:
    """exp(scale * H) through the eigendecomposition of Hermitian H."""
    if H.ndim != 2 or H.shape[0] != H.shape[1]:
        raise DimensionMismatch(f"expected a square matrix, got shape {H.shape}")
    if not is_hermitian(H):
        raise NonHermitianInput("matexp_hermitian requires a Hermitian matrix")
    w, V = np.linalg.eigh(H)
    return (V * np.exp(scale * w)) @ V.conj().T


def trace_distance(rho: np.ndarray, sigma: np.ndarray) -> float:
    if rho.shape != sigma.shape:
        raise DimensionMismatch(f"shapes {rho.shape} and {sigma.shape} differ")
    diff = rho - sigma
    if is_hermitian(diff, rtol=1e-9):
        diff = 0.5 * (diff + diff.conj().T)
        return 0.5 * float(np.sum(np.abs(np.linalg.eigvalsh(diff))))
    return 0.5 * float(np.sum(np.linalg.svd(diff, compute_uv=False)))


def trace_product(A: np.ndarray, B: np.ndarray) -> complex:
    """Tr(A B) without forming the product."""
    return complex(np.sum(A * B.T))


def expectation(rho: np.ndarray, A: Observable) -> float:
    """Re Tr(rho A); the discarded imaginary part must be below IMAG_ATOL."""
    n = _n_qubits(rho)
    if isinstance(A, np.ndarray):
        if A.shape != rho.shape:
            raise DimensionMismatch(f"observable shape {A.shape} vs state shape {rho.shape}")
        if not is_hermitian(A):
            raise NonHermitianObservable("observable is not Hermitian")
        val = trace_product(rho, A)
    else:
        terms = pauli_terms(A)
        if terms[0].n_qubits != n:
            raise DimensionMismatch(f"{terms[0].n_qubits}-qubit observable on {n}-qubit state")
        val = sum(pauli_trace(rho, t) for t in terms)
    if abs(val.imag) > IMAG_ATOL:
        raise NonHermitianInput(f"Tr(rho A) has imaginary part {val.imag:.3e}")
    return float(val.real)


def operator_norm(A: np.ndarray) -> float:
    if is_hermitian(A, rtol=1e-9):
        return float(np.max(np.abs(np.linalg.eigvalsh(0.5 * (A + A.conj().T)))))
    return float(np.linalg.svd(A, compute_uv=False)[0])


def trace_norm(A: np.ndarray) -> float:
    """Tr|A|, the sum of singular values (no factor 1/2)."""
    if is_hermitian(A, rtol=1e-9):
        return float(np.sum(np.abs(np.linalg.eigvalsh(0.5 * (A + A.conj().T)))))
    return float(np.sum(np.linalg.svd(A, compute_uv=False)))


# -- gate embedding ---------------------------------------------------------


def embedded_diagonal(diag: np.ndarray, support: Sequence[int], n: int) -> np.ndarray:
    """Full 2**n diagonal of a diagonal operator acting on ``support``."""
    idx = np.arange(2**n)
    local = np.zeros(2**n, dtype=np.int64)
    for q in support:
        local = (local << 1) | ((idx >> (n - 1 - q)) & 1)
    return np.asarray(diag)[local]


def apply_operator(
    rho: np.ndarray,
    K: np.ndarray,
    support: Sequence[int],
    right: np.ndarray | None = None,
) -> np.ndarray:
    """K rho R^dagger with K, R acting on ``support`` (R defaults to K).

    The 2**k x 2**k operators are contracted against the tensor axes of the
    support qubits; no 2**n x 2**n embedding is ever built.
    """
    n = _n_qubits(rho)
    support = list(support)
    k = len(support)
    if K.shape != (2**k, 2**k):
        raise DimensionMismatch(f"operator shape {K.shape} does not match support {support}")
    if right is None:
        right = K
    dim = 2**n
    t = rho.reshape((2,) * (2 * n))
    kl = K.reshape((2,) * (2 * k))
    kr = right.conj().reshape((2,) * (2 * k))
    t = np.tensordot(kl, t, axes=(list(range(k, 2 * k)), support))
    t = np.moveaxis(t, list(range(k)), support)
    cols = [n + q for q in support]
    t = np.tensordot(t, kr, axes=(cols, list(range(k, 2 * k))))
    t = np.moveaxis(t, list(range(2 * n - k, 2 * n)), cols)
    return np.ascontiguousarray(t).reshape(dim, dim)


def embed_operator(K: np.ndarray, support: Sequence[int], n: int) -> np.ndarray:
    """Dense 2**n x 2**n matrix of K acting on ``support`` (small n only)."""
    eye = np.eye(2**n, dtype=np.complex128)
    return apply_operator(eye, K, support, right=np.eye(K.shape[0]))


def apply_unitary(rho: np.ndarray, U: np.ndarray, support: Sequence[int]) -> np.ndarray:
    """U rho U^dagger on ``support``; diagonal U takes an elementwise fast path."""
    if np.count_nonzero(U - np.diag(np.diag(U))) == 0:
        d = embedded_diagonal(np.diag(U), support, _n_qubits(rho))
        return rho * np.outer(d, d.conj())
    return apply_operator(rho, U, support)


def partial_trace(rho: np.ndarray, keep: Sequence[int]) -> np.ndarray:
    """Reduced state on the qubits in ``keep`` (returned in ascending order)."""
    n = _n_qubits(rho)
    keep = sorted(keep)
    drop = [q for q in range(n) if q not in keep]
    t = rho.reshape((2,) * (2 * n))
    t = np.transpose(t, keep + drop + [n + q for q in keep] + [n + q for q in drop])
    dk, dd = 2 ** len(keep), 2 ** len(drop)
    t = t.reshape(dk, dd, dk, dd)
    return np.einsum("ajbj->ab", t)
