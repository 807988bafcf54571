import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from trotter_qem.errors import InvalidRate, QemError, UnsupportedSupportSize
from trotter_qem.noise import (
    KrausSet,
    NoiseSpec,
    apply_global_depolarizing,
    apply_local_depolarizing,
    build_reverse_process,
    depolarizing_kraus,
    dual_state,
    local_to_global_rate,
)
from trotter_qem.qsim import (
    PAULI_MATRICES,
    maximally_mixed,
    partial_trace,
    pure_state,
    trace_distance,
    trace_product,
    zero_state,
)
from trotter_qem.trotter import build_tfim, build_trotter_circuit, run_noisy_trotter

from conftest import embed_by_basis, random_density, random_unitary

N_RANDOM_STATES = 50


def pauli_twirl_oracle(rho, p, support, n):
    """(1 - p) rho + p / 4**k sum_P P rho P, with P embedded entry by entry."""
    k = len(support)
    acc = np.zeros_like(rho)
    for letters in itertools.product("IXYZ", repeat=k):
        P = np.array([[1.0]], dtype=complex)
        for c in letters:
            P = np.kron(P, PAULI_MATRICES[c])
        E = embed_by_basis(P, list(support), n)
        acc += E @ rho @ E.conj().T
    return (1 - p) * rho + p / 4**k * acc


def assert_cptp_output(rho, trace_atol=1e-10, psd_atol=1e-10):
    assert abs(np.trace(rho).real - 1) <= trace_atol
    assert np.allclose(rho, rho.conj().T, atol=1e-12)
    assert np.linalg.eigvalsh(rho)[0] >= -psd_atol


def test_global_depolarizing_formula(rng):
    rho = random_density(2, rng)
    out = apply_global_depolarizing(rho, 0.3)
    assert np.allclose(out, 0.7 * rho + 0.3 * np.eye(4) / 4)
    assert np.allclose(apply_global_depolarizing(rho, 1.0), maximally_mixed(2))
    assert np.allclose(apply_global_depolarizing(rho, 0.0), rho)


@pytest.mark.parametrize("support", [(0,), (2,), (0, 2), (2, 0), (1, 2)])
def test_local_depolarizing_matches_pauli_twirl(rng, support):
    rho = random_density(3, rng)
    out = apply_local_depolarizing(rho, 0.37, support)
    assert np.allclose(out, pauli_twirl_oracle(rho, 0.37, support, 3), atol=1e-13)


def test_full_local_depolarizing_replaces_marginal(rng):
    rho = random_density(3, rng)
    out = apply_local_depolarizing(rho, 1.0, (1,))
    # qubit 1 becomes I/2 and is uncorrelated from the rest
    assert np.allclose(partial_trace(out, [1]), np.eye(2) / 2)
    assert np.allclose(partial_trace(out, [0, 2]), partial_trace(rho, [0, 2]))


@pytest.mark.parametrize(
    "channel",
    [
        lambda r: apply_global_depolarizing(r, 0.2),
        lambda r: apply_local_depolarizing(r, 0.2, (1,)),
        lambda r: apply_local_depolarizing(r, 0.35, (0, 2)),
        lambda r: depolarizing_kraus(0.35, (2, 1)).apply(r),
    ],
    ids=["global", "local-1q", "local-2q", "kraus-2q"],
)
def test_channels_are_cptp_on_random_states(channel):
    rng = np.random.default_rng(99)
    for _ in range(N_RANDOM_STATES):
        rank = int(rng.integers(1, 9))
        assert_cptp_output(channel(random_density(3, rng, rank)))


def test_kraus_form_matches_channel(rng):
    rho = random_density(3, rng)
    for support in [(0,), (1, 2)]:
        K = depolarizing_kraus(0.4, support)
        assert np.allclose(K.apply(rho), apply_local_depolarizing(rho, 0.4, support), atol=1e-14)
        # depolarizing channels are self-adjoint
        assert np.allclose(K.apply_adjoint(rho), K.apply(rho), atol=1e-14)


def test_kraus_set_rejects_non_trace_preserving():
    with pytest.raises(QemError):
        KrausSet((np.eye(2) * 0.5,), (0,))


def test_rate_validation():
    rho = zero_state(2)
    for bad in (-0.1, 1.5, float("nan")):
        with pytest.raises(InvalidRate):
            apply_global_depolarizing(rho, bad)
        with pytest.raises(InvalidRate):
            NoiseSpec.local(bad, 0.1)
    with pytest.raises(UnsupportedSupportSize):
        apply_local_depolarizing(zero_state(3), 0.1, (0, 1, 2))
    with pytest.raises(UnsupportedSupportSize):
        NoiseSpec.local(0.1, 0.1).gate_rate(3)


def test_local_to_global_rate():
    assert local_to_global_rate(10, 1e-4) == pytest.approx(1e-3)
    assert local_to_global_rate(10, 0.5) == 1.0


def _circuit(n=3, M=2, t=0.7):
    return build_trotter_circuit(build_tfim(n), t, M)


@pytest.mark.parametrize("noise", [NoiseSpec.noiseless(), NoiseSpec.local(0.01, 0.03), NoiseSpec.global_(0.05)])
def test_noiseless_dual_equals_forward_state_and_adjoint_identity(noise, rng):
    circ = _circuit()
    rev = build_reverse_process(circ, noise)
    X, Y = random_density(3, rng), random_density(3, rng)
    # <X, E(Y)> = <E^dagger(X), Y> for the Hilbert-Schmidt inner product
    lhs = trace_product(X.conj().T, rev.apply(Y))
    rhs = trace_product(rev.apply_adjoint(X).conj().T, Y)
    assert np.isclose(lhs, rhs, atol=1e-12)
    assert np.allclose(rev.apply_adjoint(X, method="kraus"), rev.apply_adjoint(X), atol=1e-12)


def test_noiseless_dual_state_is_forward_state():
    circ = _circuit(n=4, M=3)
    forward = run_noisy_trotter(circ, NoiseSpec.noiseless())
    assert np.allclose(dual_state(circ, NoiseSpec.noiseless()), forward, atol=1e-9)


def test_reverse_process_undoes_noiseless_circuit(rng):
    circ = _circuit()
    rho = random_density(3, rng)
    forward = run_noisy_trotter(circ, NoiseSpec.noiseless(), rho)
    assert np.allclose(build_reverse_process(circ, NoiseSpec.noiseless()).apply(forward), rho, atol=1e-12)


@settings(max_examples=15, deadline=None)
@given(p1=st.floats(0, 0.05), p2=st.floats(0, 0.1), M=st.integers(1, 3))
def test_dual_state_is_a_density_matrix(p1, p2, M):
    circ = _circuit(M=M)
    assert_cptp_output(dual_state(circ, NoiseSpec.local(p1, p2)))


def test_unknown_adjoint_method():
    rev = build_reverse_process(_circuit(), NoiseSpec.noiseless())
    with pytest.raises(QemError):
        rev.apply_adjoint(zero_state(3), method="bogus")


def test_global_depolarizing_purity_formula(rng):
    psi = rng.normal(size=8) + 1j * rng.normal(size=8)
    rho = pure_state(psi)
    p, d = 0.5, 8
    out = apply_global_depolarizing(rho, p)
    expected = (1 - p) ** 2 + 2 * (1 - p) * p / d + p**2 / d
    assert np.trace(out @ out).real == pytest.approx(expected, abs=1e-12)


def test_global_depolarizing_composes_multiplicatively(rng):
    rho = random_density(3, rng)
    p, q = 0.13, 0.29
    twice = apply_global_depolarizing(apply_global_depolarizing(rho, p), q)
    assert np.allclose(twice, apply_global_depolarizing(rho, 1 - (1 - p) * (1 - q)), atol=1e-10)


def test_local_depolarizing_on_disjoint_supports_commutes(rng):
    rho = random_density(4, rng)
    ab = apply_local_depolarizing(apply_local_depolarizing(rho, 0.2, (0, 3)), 0.4, (1,))
    ba = apply_local_depolarizing(apply_local_depolarizing(rho, 0.4, (1,)), 0.2, (0, 3))
    assert np.allclose(ab, ba, atol=1e-10)


def test_full_local_noise_on_bell_state_gives_identity():
    bell = pure_state(np.array([1, 0, 0, 1]))
    once = apply_local_depolarizing(bell, 1.0, (0,))
    assert np.allclose(once, np.eye(4) / 4, atol=1e-14)
    assert np.allclose(apply_local_depolarizing(bell, 0.0, (1,)), bell)


def test_full_global_noise_in_reverse_process_gives_identity(rng):
    circ = build_trotter_circuit(build_tfim(3), 0.4, 1)
    rev = build_reverse_process(circ, NoiseSpec.global_(1.0))
    assert np.allclose(rev.apply(random_density(3, rng)), maximally_mixed(3), atol=1e-12)


def test_dual_state_of_identity_circuit_is_psd():
    circ = build_trotter_circuit(build_tfim(2), 0.0, 2)
    bar = dual_state(circ, NoiseSpec.local(0.1, 0.2))
    assert_cptp_output(bar)


def test_dual_state_two_ways_on_two_qubits():
    circ = build_trotter_circuit(build_tfim(2), 1.0, 3)
    for noise in (NoiseSpec.local(0.02, 0.05), NoiseSpec.global_(0.04)):
        a = dual_state(circ, noise, method="channel")
        b = dual_state(circ, noise, method="kraus")
        assert np.allclose(a, b, atol=1e-9)


@pytest.mark.parametrize("noise", [NoiseSpec.local(0.01, 0.03), NoiseSpec.global_(0.05)])
def test_support_matched_depolarizing_dual_equals_output(noise):
    """Depolarizing noise on a gate's own support commutes with the gate, so the
    dual state coincides with the noisy output at every depth."""
    H = build_tfim(3)
    for M in (1, 3, 6):
        circ = build_trotter_circuit(H, 1.0, M)
        assert trace_distance(run_noisy_trotter(circ, noise), dual_state(circ, noise)) <= 1e-12


def test_dual_differs_from_output_when_noise_covers_part_of_a_gate(rng):
    """Single-qubit noise inside a two-qubit gate's support does not commute with it."""
    from trotter_qem.noise import ReverseProcess, _Channel, _Inverse
    from trotter_qem.trotter import Gate

    U = random_unitary(2, rng)
    gate = Gate(U, (0, 1), None)
    channel = _Channel(0.3, (0,))
    rho0 = random_density(2, rng)
    forward = channel.apply(U @ rho0 @ U.conj().T)
    dual = ReverseProcess(2, (_Inverse(gate), channel)).apply_adjoint(rho0)
    assert np.allclose(dual, U @ channel.apply(rho0) @ U.conj().T, atol=1e-12)
    assert trace_distance(dual, forward) > 1e-3
