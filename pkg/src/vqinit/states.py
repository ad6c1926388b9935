"""Dense statevector representation and 1-/2-qubit gate application.

Bit convention: qubit 0 is the least-significant bit of the amplitude index,
so basis state |b_{N-1} ... b_1 b_0> sits at index sum_k b_k 2^k.
"""
from __future__ import annotations

import numpy as np

MAX_QUBITS = 20
NORM_ATOL = 1e-10
UNITARY_ATOL = 1e-12

# Pauli matrices, indexed 0..3 as sigma_0..sigma_3.
I2 = np.eye(2, dtype=complex)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
Z = np.array([[1, 0], [0, -1]], dtype=complex)
PAULIS = (I2, X, Y, Z)

CZ = np.diag([1.0, 1.0, 1.0, -1.0]).astype(complex)

_s = 1.0 / np.sqrt(2.0)
SQRT_ISWAP = np.array(
    [[1, 0, 0, 0],
     [0, _s, 1j * _s, 0],
     [0, 1j * _s, _s, 0],
     [0, 0, 0, 1]], dtype=complex)


def rotation(theta: float, generator: np.ndarray) -> np.ndarray:
    """e^{-i theta G} = cos(theta) I - i sin(theta) G for G hermitian unitary."""
    generator = np.asarray(generator, dtype=complex)
    dim = generator.shape[0]
    eye = np.eye(dim, dtype=complex)
    if np.abs(generator @ generator - eye).max() > UNITARY_ATOL or \
            np.abs(generator - generator.conj().T).max() > UNITARY_ATOL:
        raise ValueError("generator must be hermitian with G^2 = I")
    return np.cos(theta) * eye - 1j * np.sin(theta) * generator


def rx(theta: float) -> np.ndarray:
    return rotation(theta, X)


def ry(theta: float) -> np.ndarray:
    return rotation(theta, Y)


def rz(theta: float) -> np.ndarray:
    return rotation(theta, Z)


def givens_matrix(theta: float) -> np.ndarray:
    """Rotation in the span of |01>, |10>; identity on |00> and |11>."""
    c, s = np.cos(theta), np.sin(theta)
    return np.array(
        [[1, 0, 0, 0],
         [0, c, -s, 0],
         [0, s, c, 0],
         [0, 0, 0, 1]], dtype=complex)


def is_unitary(u: np.ndarray, atol: float = UNITARY_ATOL) -> bool:
    return u.shape[0] == u.shape[1] and np.abs(
        u.conj().T @ u - np.eye(u.shape[0])).max() <= atol


class StateVector:
    """Pure N-qubit state as 2^N complex amplitudes."""

    __slots__ = ("num_qubits", "amplitudes")

    def __init__(self, num_qubits: int, amplitudes: np.ndarray):
        if not 1 <= num_qubits <= MAX_QUBITS:
            raise ValueError(f"num_qubits must be in [1, {MAX_QUBITS}], got {num_qubits}")
        amplitudes = np.asarray(amplitudes, dtype=complex)
        if amplitudes.shape != (2 ** num_qubits,):
            raise ValueError(
                f"expected {2 ** num_qubits} amplitudes, got shape {amplitudes.shape}")
        norm = np.linalg.norm(amplitudes)
        if abs(norm - 1.0) > NORM_ATOL:
            raise ValueError(f"state norm {norm} deviates from 1 beyond {NORM_ATOL}")
        self.num_qubits = num_qubits
        self.amplitudes = amplitudes

    def copy(self) -> "StateVector":
        return StateVector(self.num_qubits, self.amplitudes.copy())

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def __repr__(self) -> str:
        return f"StateVector(num_qubits={self.num_qubits})"


def basis_state(num_qubits: int, bitstring) -> StateVector:
    """Computational basis state; bitstring[k] is the value of qubit k.

    Accepts an iterable of 0/1 or a string like "0110".
    """
    bits = [int(b) for b in bitstring]
    if len(bits) != num_qubits:
        raise ValueError(f"bitstring length {len(bits)} != num_qubits {num_qubits}")
    index = 0
    for k, b in enumerate(bits):
        if b not in (0, 1):
            raise ValueError(f"bit {k} is {b}, expected 0 or 1")
        index |= b << k
    amps = np.zeros(2 ** num_qubits, dtype=complex)
    amps[index] = 1.0
    return StateVector(num_qubits, amps)


def zero_state(num_qubits: int) -> StateVector:
    return basis_state(num_qubits, [0] * num_qubits)


# ---------------------------------------------------------------------------
# Raw kernels. They accept amplitude arrays of shape (..., 2^N) so the same
# code serves single states and batches of Monte-Carlo rows; a gate matrix of
# shape (B, 2, 2) / (B, 4, 4) applies row b to batch row b.
# ---------------------------------------------------------------------------

def apply_1q_raw(amps: np.ndarray, num_qubits: int, qubit: int,
                 u: np.ndarray) -> np.ndarray:
    low = 1 << qubit
    view = amps.reshape(amps.shape[:-1] + (-1, 2, low))
    # contraction over the qubit axis is a broadcast matmul; batched u gains
    # a groups axis so (B, 2, 2) lines up against (B, groups, 2, low)
    out = np.matmul(u if u.ndim == 2 else u[:, None], view)
    return out.reshape(amps.shape)


def apply_2q_raw(amps: np.ndarray, num_qubits: int, qubit_a: int, qubit_b: int,
                 u: np.ndarray) -> np.ndarray:
    # 4x4 index convention: row/col = 2*bit_a + bit_b.
    hi, lo = max(qubit_a, qubit_b), min(qubit_a, qubit_b)
    shape = amps.shape[:-1] + (-1, 2, 1 << (hi - lo - 1), 2, 1 << lo)
    view = amps.reshape(shape)
    u4 = u.reshape(u.shape[:-2] + (2, 2, 2, 2))
    if u.ndim == 2:
        if qubit_a == hi:
            out = np.einsum("rscd,...xcydz->...xrysz", u4, view)
        else:
            out = np.einsum("rscd,...xdycz->...xsyrz", u4, view)
    else:
        if qubit_a == hi:
            out = np.einsum("Brscd,Bxcydz->Bxrysz", u4, view)
        else:
            out = np.einsum("Brscd,Bxdycz->Bxsyrz", u4, view)
    return out.reshape(amps.shape)


def _check_qubit(q: int, num_qubits: int) -> None:
    if not 0 <= q < num_qubits:
        raise ValueError(f"qubit {q} out of range for {num_qubits} qubits")


def apply_1q(state: StateVector, qubit: int, u: np.ndarray) -> StateVector:
    """Apply a 2x2 unitary to one qubit; returns a new state."""
    _check_qubit(qubit, state.num_qubits)
    u = np.asarray(u, dtype=complex)
    if u.shape != (2, 2) or not is_unitary(u):
        raise ValueError("u must be a 2x2 unitary")
    return StateVector(state.num_qubits,
                       apply_1q_raw(state.amplitudes, state.num_qubits, qubit, u))


def apply_2q(state: StateVector, qubit_a: int, qubit_b: int,
             u: np.ndarray) -> StateVector:
    """Apply a 4x4 unitary to the ordered qubit pair (a, b); returns a new state."""
    _check_qubit(qubit_a, state.num_qubits)
    _check_qubit(qubit_b, state.num_qubits)
    if qubit_a == qubit_b:
        raise ValueError("qubit_a and qubit_b must differ")
    u = np.asarray(u, dtype=complex)
    if u.shape != (4, 4) or not is_unitary(u):
        raise ValueError("u must be a 4x4 unitary")
    return StateVector(state.num_qubits,
                       apply_2q_raw(state.amplitudes, state.num_qubits,
                                    qubit_a, qubit_b, u))


def inner_product(a: StateVector, b: StateVector) -> complex:
    """<a|b>."""
    if a.num_qubits != b.num_qubits:
        raise ValueError("states live on different qubit counts")
    return complex(np.vdot(a.amplitudes, b.amplitudes))
