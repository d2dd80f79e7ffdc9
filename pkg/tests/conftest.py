import numpy as np
import pytest

from cpdilate.chan import KrausFamily, identity_channel

PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Z = np.diag([1.0, -1.0]).astype(complex)


def random_unitary(n: int, rng: np.random.Generator) -> np.ndarray:
    z = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


class CommutingFamily:
    """Unitaries sharing one random eigenbasis; all members commute."""

    def __init__(self, n: int, rng: np.random.Generator):
        self.n = n
        self.rng = rng
        self.basis = random_unitary(n, rng)

    def member(self) -> np.ndarray:
        phases = np.exp(1j * self.rng.uniform(0, 2 * np.pi, size=self.n))
        return self.basis @ np.diag(phases) @ self.basis.conj().T


def mix_of_unitaries(family: CommutingFamily, count: int) -> KrausFamily:
    """Unital CP map sum_i p_i U_i . U_i^* as a Kraus family of length count."""
    weights = family.rng.dirichlet(np.ones(count))
    ops = tuple(np.sqrt(w) * family.member() for w in weights)
    return KrausFamily(family.n, ops)


def corner_collapse_channel() -> KrausFamily:
    """a |-> a_00 I on M_2, Kraus {e0 e0^*, e1 e0^*}."""
    t1 = np.zeros((2, 2), dtype=complex)
    t1[0, 0] = 1.0
    t2 = np.zeros((2, 2), dtype=complex)
    t2[1, 0] = 1.0
    return KrausFamily(2, (t1, t2))


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240817)


@pytest.fixture
def zx_pair() -> tuple[KrausFamily, KrausFamily]:
    return KrausFamily(2, (PAULI_Z,)), KrausFamily(2, (PAULI_X,))


@pytest.fixture
def corner_pair() -> tuple[KrausFamily, KrausFamily]:
    return corner_collapse_channel(), identity_channel(2)
