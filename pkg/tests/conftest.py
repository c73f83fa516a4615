import numpy as np
import pytest

from sloccflow.statespace import PureState, distinguishable, normalize


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


def haar_unitary(rng, n: int, special: bool = False) -> np.ndarray:
    """Haar-distributed U(n) (or SU(n)) matrix via QR with phase fixing."""
    z = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    q, r = np.linalg.qr(z)
    q = q * (np.diagonal(r) / np.abs(np.diagonal(r)))
    if special:
        q = q / np.linalg.det(q) ** (1.0 / n)
    return q


def random_special_linear(rng, n: int, spread: float = 0.6) -> np.ndarray:
    """Random invertible matrix normalized to unit determinant."""
    m = np.eye(n) + spread * (
        rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    )
    det = np.linalg.det(m)
    return m / det ** (1.0 / n)


def qubits(amplitudes, parties: int) -> PureState:
    return normalize(
        PureState(distinguishable(parties, 2), np.asarray(amplitudes, dtype=complex))
    )


@pytest.fixture
def ghz3():
    return qubits([1, 0, 0, 0, 0, 0, 0, 1], 3)


@pytest.fixture
def w3():
    return qubits([0, 1, 1, 0, 1, 0, 0, 0], 3)


@pytest.fixture
def sep3():
    return qubits([1, 0, 0, 0, 0, 0, 0, 0], 3)


@pytest.fixture
def bell():
    return qubits([1, 0, 0, 1], 2)


@pytest.fixture
def b1_3():
    # |000> + |011> over sqrt(2): party 1 pure, parties 2-3 maximally mixed.
    return qubits([1, 0, 0, 1, 0, 0, 0, 0], 3)
