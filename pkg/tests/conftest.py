import numpy as np
import pytest

from trotter_qem.bench import load_config, simulate


def random_density(n, rng, rank=None):
    d = 2**n
    rank = rank or d
    G = rng.normal(size=(d, rank)) + 1j * rng.normal(size=(d, rank))
    rho = G @ G.conj().T
    return rho / np.trace(rho).real


def random_unitary(k, rng):
    Z = rng.normal(size=(2**k, 2**k)) + 1j * rng.normal(size=(2**k, 2**k))
    Q, R = np.linalg.qr(Z)
    return Q * (np.diag(R) / np.abs(np.diag(R)))


def embed_by_basis(K, support, n):
    """Dense embedding built entry by entry from bit strings; independent of tensordot."""
    d = 2**n
    k = len(support)
    out = np.zeros((d, d), dtype=np.complex128)
    for row in range(d):
        for col in range(d):
            rbits = [(row >> (n - 1 - q)) & 1 for q in range(n)]
            cbits = [(col >> (n - 1 - q)) & 1 for q in range(n)]
            if any(rbits[q] != cbits[q] for q in range(n) if q not in support):
                continue
            li = lj = 0
            for q in support:
                li = (li << 1) | rbits[q]
                lj = (lj << 1) | cbits[q]
            out[row, col] = K[li, lj]
    assert K.shape == (2**k, 2**k)
    return out


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture(scope="session")
def full_simulation():
    """All n = 10 states of the default experiment (about two minutes)."""
    return simulate(load_config(profile="full"))


ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def record():
    """Log one acceptance verdict line; the lines are repeated in the terminal summary."""

    def _record(label, ok, detail):
        line = f"ACCEPTANCE {label}: {'PASS' if ok else 'FAIL'} | {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)
        return ok

    return _record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
