"""Loss and gradients for circuit-Hamiltonian expectation problems.

Gradients use the parameter-shift rule. Every rotation implements
e^{-i x G} with G^2 = I (enforced at circuit construction), so the loss is a
frequency-2 sinusoid in each occurrence angle x and
df/dx = f(x + pi/4) - f(x - pi/4) holds exactly. A parameter shared by h_j
occurrences with scale a_j sums the occurrence derivatives divided by a_j.
"""
from __future__ import annotations

import numpy as np

from .circuits import Circuit, apply_circuit, occurrence_angles, run_rows
from .observables import Hamiltonian, expectation_hamiltonian, expectation_raw
from .states import StateVector

SHIFT = np.pi / 4
# target rows per kernel call; keeps batch work inside ~64 MB of amplitudes
_TARGET_ROWS = 32768


class LossProblem:
    """Loss f(theta) = <psi_in| U(theta)^dag H U(theta) |psi_in>."""

    __slots__ = ("circuit", "hamiltonian", "input_state")

    def __init__(self, circuit: Circuit, hamiltonian: Hamiltonian,
                 input_state: StateVector):
        if circuit.num_qubits != hamiltonian.num_qubits:
            raise ValueError("circuit and Hamiltonian qubit counts differ")
        if circuit.num_qubits != input_state.num_qubits:
            raise ValueError("circuit and input state qubit counts differ")
        self.circuit = circuit
        self.hamiltonian = hamiltonian
        self.input_state = input_state

    @property
    def num_params(self) -> int:
        return self.circuit.num_params

    def __repr__(self) -> str:
        return (f"LossProblem(num_qubits={self.circuit.num_qubits}, "
                f"num_params={self.circuit.num_params})")


def loss(problem: LossProblem, params) -> float:
    out = apply_circuit(problem.circuit, params, problem.input_state)
    return expectation_hamiltonian(out, problem.hamiltonian)


def loss_rows(problem: LossProblem, angle_rows: np.ndarray) -> np.ndarray:
    """Loss for a batch of occurrence-angle rows of shape (B, num_occurrences)."""
    amps = run_rows(problem.circuit, angle_rows, problem.input_state.amplitudes)
    return expectation_raw(problem.hamiltonian, amps)


def _shift_rows(base: np.ndarray, occs: np.ndarray) -> np.ndarray:
    """Stack +-SHIFT single-occurrence shifts of one base angle row."""
    k = occs.size
    rows = np.tile(base, (2 * k, 1))
    rows[np.arange(k), occs] += SHIFT
    rows[np.arange(k, 2 * k), occs] -= SHIFT
    return rows


def grad_parameter_shift(problem: LossProblem, params) -> np.ndarray:
    """Exact gradient via parameter shifts; 2 * num_occurrences circuit runs."""
    c = problem.circuit
    base = occurrence_angles(c, np.asarray(params, dtype=float))
    if c.num_occurrences == 0:
        return np.zeros(0)
    rows = _shift_rows(base, np.arange(c.num_occurrences))
    vals = loss_rows(problem, rows)
    diffs = vals[:c.num_occurrences] - vals[c.num_occurrences:]
    g = np.bincount(c.occurrence_param, weights=diffs, minlength=c.num_params)
    return g / c.scales


def grad_and_loss(problem: LossProblem, params) -> tuple[np.ndarray, float]:
    """Gradient plus the loss at params from one batched kernel sweep."""
    c = problem.circuit
    base = occurrence_angles(c, np.asarray(params, dtype=float))
    k = c.num_occurrences
    if k == 0:
        return np.zeros(0), float(loss_rows(problem, base[None, :])[0])
    rows = np.vstack([_shift_rows(base, np.arange(k)), base[None, :]])
    vals = loss_rows(problem, rows)
    diffs = vals[:k] - vals[k:2 * k]
    g = np.bincount(c.occurrence_param, weights=diffs, minlength=c.num_params)
    return g / c.scales, float(vals[-1])


def grad_many(problem: LossProblem, params_mat: np.ndarray,
              target_rows: int = _TARGET_ROWS) -> np.ndarray:
    """Parameter-shift gradients for a (B, num_params) batch, chunked."""
    c = problem.circuit
    params_mat = np.asarray(params_mat, dtype=float)
    batch, k = params_mat.shape[0], c.num_occurrences
    if k == 0:
        return np.zeros((batch, 0))
    base = occurrence_angles(c, params_mat)  # (B, k)
    onehot = (c.occurrence_param[:, None] == np.arange(c.num_params)).astype(float)
    onehot /= c.scales
    out = np.empty((batch, c.num_params))
    step = max(1, target_rows // (2 * k))
    for lo in range(0, batch, step):
        chunk = base[lo:lo + step]
        b = chunk.shape[0]
        rows = np.repeat(chunk, k, axis=0)
        occ = np.tile(np.arange(k), b)
        plus = rows.copy()
        plus[np.arange(b * k), occ] += SHIFT
        rows[np.arange(b * k), occ] -= SHIFT
        vals = loss_rows(problem, np.vstack([plus, rows]))
        diffs = (vals[:b * k] - vals[b * k:]).reshape(b, k)
        out[lo:lo + step] = diffs @ onehot
    return out


def grad_component_many(problem: LossProblem, index: int, params_mat: np.ndarray,
                        target_rows: int = _TARGET_ROWS) -> np.ndarray:
    """df/dtheta_index for a (B, num_params) batch; only touches that
    parameter's occurrences, so each sample costs 2 h_index circuit runs."""
    c = problem.circuit
    if not 0 <= index < c.num_params:
        raise ValueError(f"parameter index {index} out of range")
    params_mat = np.asarray(params_mat, dtype=float)
    batch = params_mat.shape[0]
    base = occurrence_angles(c, params_mat)
    occs = np.flatnonzero(c.occurrence_param == index)
    k = occs.size
    out = np.empty(batch)
    step = max(1, target_rows // (2 * k))
    for lo in range(0, batch, step):
        chunk = base[lo:lo + step]
        b = chunk.shape[0]
        rows = np.repeat(chunk, k, axis=0)
        occ = np.tile(occs, b)
        plus = rows.copy()
        plus[np.arange(b * k), occ] += SHIFT
        rows[np.arange(b * k), occ] -= SHIFT
        vals = loss_rows(problem, np.vstack([plus, rows]))
        diffs = (vals[:b * k] - vals[b * k:]).reshape(b, k)
        out[lo:lo + step] = diffs.sum(axis=1)
    return out / c.scales[index]


def grad_finite_diff(problem: LossProblem, params, step: float = 1e-5) -> np.ndarray:
    """Central finite differences in the parameters; reference, not exact."""
    params = np.asarray(params, dtype=float)
    n = problem.circuit.num_params
    if n == 0:
        return np.zeros(0)
    mat = np.tile(params, (2 * n, 1))
    mat[np.arange(n), np.arange(n)] += step
    mat[np.arange(n, 2 * n), np.arange(n)] -= step
    vals = loss_rows(problem, occurrence_angles(problem.circuit, mat))
    return (vals[:n] - vals[n:]) / (2.0 * step)


def grad_norm_sq(grad: np.ndarray) -> float:
    grad = np.asarray(grad, dtype=float)
    return float(grad @ grad)
