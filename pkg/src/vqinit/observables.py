"""Pauli-string observables, Hamiltonians, and exact diagonalization."""
from __future__ import annotations

import numpy as np

from .states import PAULIS, StateVector

_LETTER_TO_CODE = {"I": 0, "X": 1, "Y": 2, "Z": 3}
_CODE_TO_LETTER = "IXYZ"

EXPECTATION_IMAG_ATOL = 1e-10
DENSE_MAX_QUBITS = 12


class HamiltonianFormatError(ValueError):
    pass


class PauliString:
    """Tensor product of single-qubit Paulis; letter k acts on qubit k."""

    __slots__ = ("codes",)

    def __init__(self, codes):
        codes = np.asarray(codes, dtype=np.int8)
        if codes.ndim != 1 or codes.size == 0:
            raise ValueError("codes must be a non-empty 1d sequence")
        if codes.min() < 0 or codes.max() > 3:
            raise ValueError("codes must be in 0..3 (I, X, Y, Z)")
        self.codes = codes

    @classmethod
    def from_string(cls, letters: str) -> "PauliString":
        try:
            return cls([_LETTER_TO_CODE[c] for c in letters.upper()])
        except KeyError as exc:
            raise ValueError(f"invalid Pauli letter {exc.args[0]!r}") from None

    @property
    def num_qubits(self) -> int:
        return self.codes.size

    def locality(self) -> int:
        return int(np.count_nonzero(self.codes))

    def __str__(self) -> str:
        return "".join(_CODE_TO_LETTER[c] for c in self.codes)

    def __repr__(self) -> str:
        return f"PauliString({str(self)!r})"

    def __eq__(self, other) -> bool:
        return isinstance(other, PauliString) and np.array_equal(self.codes, other.codes)

    def __hash__(self) -> int:
        return hash(str(self))

    def dense(self) -> np.ndarray:
        """Full 2^N x 2^N matrix; qubit 0 varies fastest, so kron from the top."""
        if self.num_qubits > DENSE_MAX_QUBITS:
            raise ValueError(f"dense matrix limited to {DENSE_MAX_QUBITS} qubits")
        m = np.array([[1.0 + 0j]])
        for code in self.codes[::-1]:
            m = np.kron(m, PAULIS[code])
        return m


def _pauli_action(p: PauliString):
    """Index permutation mask and phase vector for sigma|i> = w(i) |i ^ mask>.

    With w indexed by the *source* basis state: X contributes 1, Z contributes
    (-1)^bit, Y contributes i(-1)^bit and flips the bit.
    """
    n = p.num_qubits
    dim = 1 << n
    mask = 0
    w = np.ones(dim, dtype=complex)
    idx = np.arange(dim)
    for q, code in enumerate(p.codes):
        if code == 0:
            continue
        bit = (idx >> q) & 1
        if code == 1:
            mask |= 1 << q
        elif code == 2:
            mask |= 1 << q
            w = w * (1j * (1.0 - 2.0 * bit))
        else:
            w = w * (1.0 - 2.0 * bit)
    return mask, w


class Hamiltonian:
    """Real linear combination of Pauli strings on a fixed qubit count."""

    def __init__(self, num_qubits: int, terms):
        terms = [(float(c), p) for c, p in terms]
        for c, p in terms:
            if not isinstance(p, PauliString):
                raise TypeError("terms must pair coefficients with PauliString")
            if p.num_qubits != num_qubits:
                raise ValueError(
                    f"term {p} acts on {p.num_qubits} qubits, expected {num_qubits}")
            if not np.isfinite(c):
                raise ValueError(f"non-finite coefficient {c}")
        self.num_qubits = num_qubits
        self.terms = terms
        self._action = None  # lazy (mask, w_permuted) per term

    def __len__(self) -> int:
        return len(self.terms)

    def __repr__(self) -> str:
        return f"Hamiltonian(num_qubits={self.num_qubits}, terms={len(self.terms)})"

    def _compiled(self):
        if self._action is None:
            compiled = []
            for c, p in self.terms:
                mask, w = _pauli_action(p)
                # store w indexed by *target* so <psi|sigma|psi> = sum conj(psi) wt psi[perm]
                idx = np.arange(w.size)
                compiled.append((c, mask, w[idx ^ mask]))
            self._action = compiled
        return self._action

    def dense(self) -> np.ndarray:
        if self.num_qubits > DENSE_MAX_QUBITS:
            raise ValueError(f"dense matrix limited to {DENSE_MAX_QUBITS} qubits")
        m = np.zeros((2 ** self.num_qubits,) * 2, dtype=complex)
        for c, p in self.terms:
            m += c * p.dense()
        return m

    def coefficient_norm(self) -> float:
        return float(sum(abs(c) for c, _ in self.terms))


def expectation_raw(ham: Hamiltonian, amps: np.ndarray) -> np.ndarray:
    """<psi|H|psi> for amplitude rows of shape (..., 2^N); returns real parts."""
    idx = np.arange(amps.shape[-1])
    total = np.zeros(amps.shape[:-1], dtype=complex)
    conj = amps.conj()
    for c, mask, wt in ham._compiled():
        total += c * np.sum(conj * wt * amps[..., idx ^ mask], axis=-1)
    return total.real


def expectation_pauli(state: StateVector, pauli: PauliString) -> float:
    """<psi|sigma|psi> for a single Pauli string."""
    if pauli.num_qubits != state.num_qubits:
        raise ValueError("Pauli string and state qubit counts differ")
    mask, w = _pauli_action(pauli)
    idx = np.arange(w.size)
    val = np.sum(state.amplitudes.conj() * w[idx ^ mask] * state.amplitudes[idx ^ mask])
    if abs(val.imag) > EXPECTATION_IMAG_ATOL:
        raise ValueError(f"expectation has imaginary part {val.imag}")
    return float(val.real)


def expectation_hamiltonian(state: StateVector, ham: Hamiltonian) -> float:
    if ham.num_qubits != state.num_qubits:
        raise ValueError("Hamiltonian and state qubit counts differ")
    return float(expectation_raw(ham, state.amplitudes))


def heisenberg(num_qubits: int) -> Hamiltonian:
    """Open-chain sum of XX + YY + ZZ on neighbouring qubits, unit couplings."""
    if num_qubits < 2:
        raise ValueError("chain needs at least 2 qubits")
    terms = []
    for i in range(num_qubits - 1):
        for code in (1, 2, 3):
            codes = np.zeros(num_qubits, dtype=np.int8)
            codes[i] = code
            codes[i + 1] = code
            terms.append((1.0, PauliString(codes)))
    return Hamiltonian(num_qubits, terms)


def max_locality(ham: Hamiltonian) -> int:
    """Largest number of non-identity letters in any term; 0 if empty."""
    return max((p.locality() for _, p in ham.terms), default=0)


def exact_ground_energy(ham: Hamiltonian) -> float:
    """Smallest eigenvalue by dense diagonalization; capped at 12 qubits."""
    if ham.num_qubits > DENSE_MAX_QUBITS:
        raise ValueError(
            f"exact diagonalization limited to {DENSE_MAX_QUBITS} qubits, "
            f"got {ham.num_qubits}")
    return float(np.linalg.eigvalsh(ham.dense())[0])


def spectral_norm(ham: Hamiltonian) -> float:
    """Operator 2-norm; exact up to 12 qubits, else the sum of |coefficients|."""
    if ham.num_qubits <= DENSE_MAX_QUBITS:
        eig = np.linalg.eigvalsh(ham.dense())
        return float(max(abs(eig[0]), abs(eig[-1])))
    return ham.coefficient_norm()


def parse_hamiltonian(text: str, num_qubits: int | None = None) -> Hamiltonian:
    """Parse `<coefficient> <pauli letters>` lines.

    Letter k of the word acts on qubit k. Blank lines and text after `#` are
    ignored. All words must agree on length, and match num_qubits if given.
    """
    terms = []
    width = num_qubits
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 2:
            raise HamiltonianFormatError(
                f"line {lineno}: expected '<coefficient> <paulis>', got {raw!r}")
        try:
            coeff = float(parts[0])
        except ValueError:
            raise HamiltonianFormatError(
                f"line {lineno}: bad coefficient {parts[0]!r}") from None
        try:
            pauli = PauliString.from_string(parts[1])
        except ValueError as exc:
            raise HamiltonianFormatError(f"line {lineno}: {exc}") from None
        if width is None:
            width = pauli.num_qubits
        elif pauli.num_qubits != width:
            raise HamiltonianFormatError(
                f"line {lineno}: term has {pauli.num_qubits} letters, expected {width}")
        terms.append((coeff, pauli))
    if not terms:
        raise HamiltonianFormatError("no terms found")
    return Hamiltonian(width, terms)


def load_hamiltonian(path) -> Hamiltonian:
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    return parse_hamiltonian(text)


BUILTIN_HAMILTONIANS = {"ec4": "ec_test_4q.txt", "ec6": "ec_test_6q.txt"}


def builtin_hamiltonian(name: str) -> Hamiltonian:
    """Bundled test Hamiltonians; currently 'ec4' and 'ec6'."""
    try:
        fname = BUILTIN_HAMILTONIANS[name]
    except KeyError:
        raise ValueError(f"unknown builtin Hamiltonian {name!r}; "
                         f"have {sorted(BUILTIN_HAMILTONIANS)}") from None
    from importlib import resources
    text = resources.files("vqinit.data").joinpath(fname).read_text("utf-8")
    return parse_hamiltonian(text)
