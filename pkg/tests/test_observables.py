"""Pauli strings, Hamiltonians, expectations, and the text file format."""

import numpy as np
import pytest

from vqinit.observables import (BUILTIN_HAMILTONIANS, Hamiltonian,
                                HamiltonianFormatError, PauliString,
                                builtin_hamiltonian, exact_ground_energy,
                                expectation_hamiltonian, expectation_pauli,
                                expectation_raw, heisenberg, load_hamiltonian,
                                max_locality, parse_hamiltonian, spectral_norm)
from vqinit.circuits import hf_state
from vqinit.states import StateVector, basis_state, zero_state

GROUND_N2 = -3.0
GROUND_N4 = -6.464101615137755   # frozen from dense diagonalization
GROUND_N8 = -13.499730394751577  # frozen from dense diagonalization


def random_state(num_qubits, seed):
    rng = np.random.default_rng(seed)
    amps = rng.normal(size=2 ** num_qubits) + 1j * rng.normal(size=2 ** num_qubits)
    return StateVector(num_qubits, amps / np.linalg.norm(amps))


def test_pauli_string_from_string_roundtrip():
    p = PauliString.from_string("IXYZ")
    assert str(p) == "IXYZ"
    assert p.num_qubits == 4
    assert p.locality() == 3


def test_pauli_string_rejects_bad_letter():
    with pytest.raises(ValueError, match="Q"):
        PauliString.from_string("XQ")


def test_pauli_dense_matches_kron():
    # letter k acts on qubit k and qubit 0 is the low bit of the index
    p = PauliString.from_string("XZ")
    x = np.array([[0, 1], [1, 0]], dtype=complex)
    z = np.diag([1.0, -1.0]).astype(complex)
    np.testing.assert_allclose(p.dense(), np.kron(z, x), atol=0)


def test_expectation_z_on_zero():
    z = PauliString.from_string("Z")
    assert expectation_pauli(zero_state(1), z) == 1


def test_expectation_x_on_zero():
    x = PauliString.from_string("X")
    assert expectation_pauli(zero_state(1), x) == 0


def test_expectation_zz_antialigned():
    zz = PauliString.from_string("ZZ")
    assert expectation_pauli(basis_state(2, [0, 1]), zz) == -1


def test_expectation_matches_dense_oracle():
    n = 5
    s = random_state(n, 8)
    rng = np.random.default_rng(1)
    for _ in range(10):
        codes = rng.integers(0, 4, size=n).astype(np.int8)
        p = PauliString(codes)
        want = (s.amplitudes.conj() @ p.dense() @ s.amplitudes).real
        assert np.isclose(expectation_pauli(s, p), want, atol=1e-12)


def test_heisenberg_term_count_and_locality():
    h2 = heisenberg(2)
    assert sorted(str(p) for _, p in h2.terms) == ["XX", "YY", "ZZ"]
    assert all(c == 1.0 for c, _ in h2.terms)
    assert len(heisenberg(3)) == 6
    assert len(heisenberg(15)) == 42
    assert max_locality(heisenberg(15)) == 2
    assert max_locality(heisenberg(8)) == 2


def test_heisenberg_expectations():
    h2 = heisenberg(2)
    assert np.isclose(expectation_hamiltonian(zero_state(2), h2), 1.0)
    amps = np.zeros(4, complex)
    amps[1], amps[2] = 1 / np.sqrt(2), -1 / np.sqrt(2)
    singlet = StateVector(2, amps)
    assert np.isclose(expectation_hamiltonian(singlet, h2), GROUND_N2)


def test_empty_hamiltonian_expectation_is_zero():
    h = Hamiltonian(3, [])
    assert expectation_hamiltonian(random_state(3, 2), h) == 0.0
    assert max_locality(h) == 0


def test_hamiltonian_expectation_matches_dense():
    n = 4
    s = random_state(n, 3)
    ham = heisenberg(n)
    want = (s.amplitudes.conj() @ ham.dense() @ s.amplitudes).real
    assert np.isclose(expectation_hamiltonian(s, ham), want, atol=1e-12)


def test_expectation_raw_batched():
    ham = heisenberg(3)
    rng = np.random.default_rng(4)
    amps = rng.normal(size=(6, 8)) + 1j * rng.normal(size=(6, 8))
    amps /= np.linalg.norm(amps, axis=1, keepdims=True)
    vals = expectation_raw(ham, amps)
    for r in range(6):
        want = (amps[r].conj() @ ham.dense() @ amps[r]).real
        assert np.isclose(vals[r], want, atol=1e-12)


def test_locality_single_term():
    assert max_locality(Hamiltonian(3, [(1.0, PauliString.from_string("ZII"))])) == 1
    assert max_locality(Hamiltonian(3, [(1.0, PauliString.from_string("XYZ"))])) == 3


def test_ground_energies():
    assert np.isclose(exact_ground_energy(heisenberg(2)), GROUND_N2, atol=1e-12)
    z = Hamiltonian(1, [(1.0, PauliString.from_string("Z"))])
    assert np.isclose(exact_ground_energy(z), -1.0, atol=1e-12)
    assert np.isclose(exact_ground_energy(heisenberg(4)), GROUND_N4, atol=1e-12)
    assert np.isclose(exact_ground_energy(heisenberg(8)), GROUND_N8, atol=1e-12)


def test_ground_energy_qubit_cap():
    with pytest.raises(ValueError):
        exact_ground_energy(heisenberg(13))


def test_parse_heisenberg_two_site():
    ham = parse_hamiltonian("1.0 XX\n1.0 YY\n1.0 ZZ\n")
    ref = heisenberg(2)
    s = random_state(2, 6)
    assert np.isclose(expectation_hamiltonian(s, ham),
                      expectation_hamiltonian(s, ref), atol=1e-12)


def test_parse_single_term():
    ham = parse_hamiltonian("-0.5 ZIII")
    assert len(ham) == 1
    assert ham.terms[0][0] == -0.5
    assert max_locality(ham) == 1


def test_parse_comments_and_blanks():
    ham = parse_hamiltonian("# leading comment\n\n0.5 XX  # trailing\n")
    assert len(ham) == 1


def test_parse_error_reports_line_number():
    with pytest.raises(HamiltonianFormatError, match="line 2"):
        parse_hamiltonian("0.25 XYZI\nbadline\n")


def test_parse_error_bad_coefficient():
    with pytest.raises(HamiltonianFormatError, match="line 1"):
        parse_hamiltonian("x XY\n")


def test_parse_error_bad_letter():
    with pytest.raises(HamiltonianFormatError, match="line 3"):
        parse_hamiltonian("1 XX\n1 YY\n1 QQ\n")


def test_parse_error_ragged_width():
    with pytest.raises(HamiltonianFormatError, match="line 2"):
        parse_hamiltonian("1 XX\n1 XXX\n")


def test_parse_error_empty():
    with pytest.raises(HamiltonianFormatError):
        parse_hamiltonian("# nothing here\n")


def test_parse_error_is_value_error():
    # callers that only know ValueError still catch format problems
    assert issubclass(HamiltonianFormatError, ValueError)


def test_load_hamiltonian(tmp_path):
    path = tmp_path / "h.txt"
    path.write_text("1.0 XX\n1.0 YY\n1.0 ZZ\n", encoding="utf-8")
    ham = load_hamiltonian(path)
    assert len(ham) == 3
    assert ham.num_qubits == 2


def test_spectral_norm_small_is_exact():
    z = Hamiltonian(1, [(2.0, PauliString.from_string("Z"))])
    assert np.isclose(spectral_norm(z), 2.0, atol=1e-12)
    # exact operator norm, not the coefficient sum
    ham = parse_hamiltonian("1.0 XI\n1.0 IX\n")
    assert np.isclose(spectral_norm(ham), 2.0, atol=1e-12)


def test_spectral_norm_large_uses_coefficient_sum():
    ham = heisenberg(14)
    assert np.isclose(spectral_norm(ham), sum(abs(c) for c, _ in ham.terms))


def test_builtin_hamiltonians():
    assert set(BUILTIN_HAMILTONIANS) == {"ec4", "ec6"}
    ec4 = builtin_hamiltonian("ec4")
    ec6 = builtin_hamiltonian("ec6")
    assert ec4.num_qubits == 4 and ec6.num_qubits == 6
    # frozen regression values from dense diagonalization
    assert np.isclose(exact_ground_energy(ec4), -3.718499903471549, atol=1e-12)
    assert np.isclose(exact_ground_energy(ec6), -6.059175745388488, atol=1e-12)
    assert np.isclose(expectation_hamiltonian(hf_state(4, 2), ec4), 0.8, atol=1e-12)
    assert np.isclose(expectation_hamiltonian(hf_state(6, 3), ec6), 1.2, atol=1e-12)


def test_builtin_unknown_name():
    with pytest.raises(ValueError):
        builtin_hamiltonian("ec99")


def test_hamiltonian_rejects_mismatched_width():
    with pytest.raises(ValueError):
        Hamiltonian(3, [(1.0, PauliString.from_string("XX"))])


def test_hamiltonian_rejects_nonfinite_coefficient():
    with pytest.raises(ValueError):
        Hamiltonian(2, [(float("nan"), PauliString.from_string("XX"))])
