import numpy as np
import pytest

from trotter_qem.errors import InvalidQubitCount, InvalidTrotterNumber
from trotter_qem.noise import NoiseSpec
from trotter_qem.qsim import PAULI_MATRICES, expectation, PauliString, trace_distance, zero_state
from trotter_qem.trotter import (
    LayerOrder,
    build_tfim,
    build_trotter_circuit,
    exact_evolve,
    run_noisy_trotter,
)


def kron_pauli(letters):
    out = np.array([[1.0]], dtype=complex)
    for c in letters:
        out = np.kron(out, PAULI_MATRICES[c])
    return out


def site(n, i, c, j=None):
    letters = ["I"] * n
    letters[i] = c
    if j is not None:
        letters[j] = c
    return kron_pauli(letters)


def tfim_oracle(n):
    zz = [site(n, i, "Z", (i + 1) % n) for i in range(n)]
    xs = [site(n, i, "X") for i in range(n)]
    return zz, xs


def pauli_rotation(P, angle):
    # exp(-i angle P) for an involutory P
    return np.cos(angle) * np.eye(P.shape[0]) - 1j * np.sin(angle) * P


def trotter_oracle(n, t, M, zz_first=True):
    zz, xs = tfim_oracle(n)
    dt = t / M
    U_zz = np.eye(2**n, dtype=complex)
    for P in zz:
        U_zz = pauli_rotation(-P, dt) @ U_zz
    U_x = np.eye(2**n, dtype=complex)
    for P in xs:
        U_x = pauli_rotation(-P, dt) @ U_x
    step = U_x @ U_zz if zz_first else U_zz @ U_x
    return np.linalg.matrix_power(step, M)


def test_tfim_structure():
    H = build_tfim(4)
    assert len(H.terms) == 8
    zz, xs = tfim_oracle(4)
    assert np.allclose(H.matrix(), -sum(zz) - sum(xs))
    assert all(t.coeff == -1.0 for t in H.terms)
    with pytest.raises(InvalidQubitCount):
        build_tfim(1)


def test_two_site_ring_counts_bond_twice():
    H = build_tfim(2)
    assert [t.letters for t in H.terms[:2]] == ["ZZ", "ZZ"]


@pytest.mark.parametrize("order,zz_first", [(LayerOrder.LISTED, True), (LayerOrder.PRODUCT, False)])
def test_noiseless_circuit_matches_dense_product(order, zz_first):
    n, t, M = 3, 0.9, 4
    circ = build_trotter_circuit(build_tfim(n), t, M, order)
    U = trotter_oracle(n, t, M, zz_first)
    assert np.allclose(circ.unitary(), U, atol=1e-12)
    rho = run_noisy_trotter(circ, NoiseSpec.noiseless())
    assert np.allclose(rho, U @ zero_state(n) @ U.conj().T, atol=1e-12)


def test_default_order_applies_zz_layer_first():
    circ = build_trotter_circuit(build_tfim(3), 1.0, 2)
    assert [len(g.support) for g in circ.step_gates] == [2, 2, 2, 1, 1, 1]
    assert len(circ.gates) == 12


def test_invalid_trotter_number():
    H = build_tfim(2)
    for M in (0, -1, 2.5):
        with pytest.raises(InvalidTrotterNumber):
            build_trotter_circuit(H, 1.0, M)


def test_exact_evolution_is_pure_and_matches_eigendecomposition():
    H = build_tfim(3)
    rho = exact_evolve(H, 0.8)
    assert np.isclose(np.trace(rho @ rho).real, 1.0)
    w, V = np.linalg.eigh(H.matrix())
    U = V @ np.diag(np.exp(-0.8j * w)) @ V.conj().T
    assert np.allclose(rho, U[:, [0]] @ U[:, [0]].conj().T, atol=1e-12)


def test_noiseless_distance_to_exact_decreases_with_M():
    n, t = 4, 1.0
    H = build_tfim(n)
    exact = exact_evolve(H, t)
    Ms = np.array([4, 8, 16, 32, 64])
    errs = [trace_distance(run_noisy_trotter(build_trotter_circuit(H, t, M), NoiseSpec.noiseless()), exact) for M in Ms]
    assert all(b <= a + 1e-6 for a, b in zip(errs, errs[1:]))
    slope = np.polyfit(np.log(Ms), np.log(errs), 1)[0]
    assert -1.3 <= slope <= -0.7


def test_trotter_error_is_first_order():
    """log-log slope of |<X_1>_M - <X_1>_exact| over every M in 8..64 (n = 4, t = 1)."""
    n, t = 4, 1.0
    H = build_tfim(n)
    A = PauliString("XIII")
    exact = expectation(exact_evolve(H, t), A)
    Ms = np.arange(8, 65)
    errs = [abs(expectation(run_noisy_trotter(build_trotter_circuit(H, t, M), NoiseSpec.noiseless()), A) - exact) for M in Ms]
    slope = np.polyfit(np.log(Ms), np.log(errs), 1)[0]
    assert -1.3 <= slope <= -0.7


def test_two_qubit_unitary_gap_halves_when_M_doubles():
    H = build_tfim(2)
    w, V = np.linalg.eigh(H.matrix())
    U = (V * np.exp(-1j * w)) @ V.conj().T
    gaps = [np.linalg.norm(build_trotter_circuit(H, 1.0, M).unitary() - U, 2) for M in (32, 64, 128)]
    for a, b in zip(gaps, gaps[1:]):
        assert a / b == pytest.approx(2.0, rel=0.05)


def test_commuting_hamiltonian_is_trotter_exact():
    from trotter_qem.trotter import Hamiltonian

    n = 3
    terms = tuple(PauliString.single(n, i, "X", -1.0) for i in range(n))
    H = Hamiltonian(n, terms, (tuple(range(n)),))
    w, V = np.linalg.eigh(H.matrix())
    U = (V * np.exp(-0.7j * w)) @ V.conj().T
    for M in (1, 2, 5):
        assert np.allclose(build_trotter_circuit(H, 0.7, M).unitary(), U, atol=1e-9)
    rho_M1 = run_noisy_trotter(build_trotter_circuit(H, 0.7, 1), NoiseSpec.noiseless())
    assert np.allclose(exact_evolve(H, 0.7), rho_M1, atol=1e-12)


def test_exact_evolution_edge_cases():
    H = build_tfim(2)
    assert np.allclose(exact_evolve(H, 0.0), zero_state(2))
    # independent 4x4 oracle: H = -2 ZZ - XI - IX in the computational basis
    Hm = -2 * kron_pauli("ZZ") - kron_pauli("XI") - kron_pauli("IX")
    w, V = np.linalg.eigh(Hm)
    psi = (V * np.exp(-1j * w)) @ V.conj().T[:, 0]
    x1 = np.real(psi.conj() @ kron_pauli("XI") @ psi)
    assert expectation(exact_evolve(H, 1.0), PauliString("XI")) == pytest.approx(x1, abs=1e-12)


def test_benchmark_circuit_gate_count():
    assert len(build_trotter_circuit(build_tfim(10), 1.0, 31).gates) == 620


def test_global_noise_follows_each_step():
    n, t, M, p = 3, 0.5, 3, 0.1
    circ = build_trotter_circuit(build_tfim(n), t, M)
    # one noiseless step unitary
    U1 = trotter_oracle(n, t / M, 1)
    rho = zero_state(n)
    for _ in range(M):
        rho = U1 @ rho @ U1.conj().T
        rho = (1 - p) * rho + p * np.eye(2**n) / 2**n
    assert np.allclose(run_noisy_trotter(circ, NoiseSpec.global_(p)), rho, atol=1e-12)


def test_noise_pulls_expectation_towards_zero():
    H = build_tfim(3)
    circ = build_trotter_circuit(H, 1.0, 5)
    X0 = PauliString("XII")
    clean = expectation(run_noisy_trotter(circ, NoiseSpec.noiseless()), X0)
    noisy = expectation(run_noisy_trotter(circ, NoiseSpec.global_(0.05)), X0)
    assert np.isclose(noisy, 0.95**5 * clean)


def test_full_global_noise_gives_maximally_mixed_output():
    circ = build_trotter_circuit(build_tfim(3), 1.0, 2)
    assert np.allclose(run_noisy_trotter(circ, NoiseSpec.global_(1.0)), np.eye(8) / 8, atol=1e-14)


@pytest.mark.parametrize("M", [1, 3, 6])
@pytest.mark.parametrize("p", [0.01, 0.1, 0.4])
def test_global_noise_closed_form(M, p):
    n = 3
    circ = build_trotter_circuit(build_tfim(n), 0.8, M)
    U = trotter_oracle(n, 0.8, M)
    ideal = U @ zero_state(n) @ U.conj().T
    closed = (1 - p) ** M * ideal + (1 - (1 - p) ** M) * np.eye(2**n) / 2**n
    assert np.allclose(run_noisy_trotter(circ, NoiseSpec.global_(p)), closed, atol=1e-10)


@pytest.mark.parametrize("p1,p2", [(0.0, 0.0), (0.3, 0.9), (1.0, 1.0)])
def test_noisy_output_is_a_density_matrix(p1, p2):
    rho = run_noisy_trotter(build_trotter_circuit(build_tfim(3), 1.0, 3), NoiseSpec.local(p1, p2))
    assert abs(np.trace(rho).real - 1) <= 1e-10
    assert np.linalg.eigvalsh(rho)[0] >= -1e-10
