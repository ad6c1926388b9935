"""Parameterized circuits built from fixed gates and Pauli-word rotations.

A parameterized gate with parameter j, scale a and generator G applies
e^{-i (theta_j / a) G}. The same parameter index may appear in several gates
(h_j occurrences), but every occurrence must use the same scale.
"""
from __future__ import annotations

import json

import numpy as np

from .states import (CZ, MAX_QUBITS, SQRT_ISWAP, StateVector, UNITARY_ATOL, X, Y, Z,
                     apply_1q_raw, apply_2q_raw, basis_state, is_unitary)

GENERATOR_ATOL = 1e-12
ANTICOMMUTE_ATOL = 1e-10
_DIAG_ATOL = 1e-15

NAMED_GENERATORS = {
    "X": X, "Y": Y, "Z": Z, "-X": -X, "-Y": -Y, "-Z": -Z,
}


def _check_generator(g: np.ndarray) -> np.ndarray:
    g = np.asarray(g, dtype=complex)
    if g.shape not in ((2, 2), (4, 4)):
        raise ValueError(f"generator must be 2x2 or 4x4, got {g.shape}")
    if np.abs(g - g.conj().T).max() > GENERATOR_ATOL:
        raise ValueError("generator must be hermitian")
    if np.abs(g @ g - np.eye(g.shape[0])).max() > GENERATOR_ATOL:
        raise ValueError("generator must square to the identity")
    return g


class GateSpec:
    """One gate: either a fixed unitary or a rotation tied to a parameter."""

    __slots__ = ("kind", "qubits", "matrix", "generator", "generator_name",
                 "param_index", "scale")

    def __init__(self, kind, qubits, matrix=None, generator=None,
                 generator_name=None, param_index=None, scale=None):
        qubits = tuple(int(q) for q in qubits)
        if len(qubits) not in (1, 2) or len(set(qubits)) != len(qubits):
            raise ValueError(f"qubits must be 1 or 2 distinct indices, got {qubits}")
        dim = 2 ** len(qubits)
        if kind == "fixed":
            matrix = np.asarray(matrix, dtype=complex)
            if matrix.shape != (dim, dim) or not is_unitary(matrix, UNITARY_ATOL):
                raise ValueError(f"fixed gate needs a {dim}x{dim} unitary")
            if generator is not None or param_index is not None:
                raise ValueError("fixed gate cannot carry a generator or parameter")
        elif kind == "rot":
            if generator is None and generator_name is not None:
                generator = NAMED_GENERATORS[generator_name]
            generator = _check_generator(generator)
            if generator.shape != (dim, dim):
                raise ValueError("generator dimension does not match qubit count")
            if param_index is None or int(param_index) < 0:
                raise ValueError("rotation gate needs a non-negative param_index")
            param_index = int(param_index)
            scale = 1.0 if scale is None else float(scale)
            if scale == 0.0 or not np.isfinite(scale):
                raise ValueError(f"scale must be finite and non-zero, got {scale}")
        else:
            raise ValueError(f"unknown gate kind {kind!r}")
        self.kind = kind
        self.qubits = qubits
        self.matrix = matrix
        self.generator = generator
        self.generator_name = generator_name
        self.param_index = param_index
        self.scale = scale

    def __repr__(self) -> str:
        if self.kind == "fixed":
            return f"GateSpec(fixed, qubits={self.qubits})"
        return (f"GateSpec(rot, qubits={self.qubits}, param={self.param_index}, "
                f"scale={self.scale})")


def fixed_gate(matrix, qubits) -> GateSpec:
    return GateSpec("fixed", qubits, matrix=matrix)


def rotation_gate(generator, qubits, param_index, scale=1.0) -> GateSpec:
    name = generator if isinstance(generator, str) else None
    if name is not None:
        generator = NAMED_GENERATORS[name]
    return GateSpec("rot", qubits, generator=generator, generator_name=name,
                    param_index=param_index, scale=scale)


class Circuit:
    """Ordered gate list with validated parameter bookkeeping.

    Attributes derived at construction: num_params, occurrence_param (which
    parameter each rotation occurrence reads, in gate order), occurrence_scale,
    h (occurrences per parameter) and scales (per-parameter scale a_j).
    """

    def __init__(self, num_qubits: int, gates):
        if not 1 <= num_qubits <= MAX_QUBITS:
            raise ValueError(f"num_qubits must be in [1, {MAX_QUBITS}]")
        gates = tuple(gates)
        occ_param, occ_scale = [], []
        for g in gates:
            if not isinstance(g, GateSpec):
                raise TypeError("gates must be GateSpec instances")
            if max(g.qubits) >= num_qubits:
                raise ValueError(f"gate on {g.qubits} exceeds {num_qubits} qubits")
            if g.kind == "rot":
                occ_param.append(g.param_index)
                occ_scale.append(g.scale)
        self.num_qubits = num_qubits
        self.gates = gates
        self.occurrence_param = np.asarray(occ_param, dtype=np.intp)
        self.occurrence_scale = np.asarray(occ_scale, dtype=float)
        if occ_param:
            num_params = int(self.occurrence_param.max()) + 1
            present = np.unique(self.occurrence_param)
            if present.size != num_params:
                missing = sorted(set(range(num_params)) - set(present.tolist()))
                raise ValueError(f"parameter indices must be contiguous; missing {missing}")
            scales = np.zeros(num_params)
            h = np.zeros(num_params, dtype=np.intp)
            for idx, a in zip(occ_param, occ_scale):
                if h[idx] and scales[idx] != a:
                    raise ValueError(
                        f"parameter {idx} appears with scales {scales[idx]} and {a}")
                scales[idx] = a
                h[idx] += 1
        else:
            num_params = 0
            scales = np.zeros(0)
            h = np.zeros(0, dtype=np.intp)
        self.num_params = num_params
        self.h = h
        self.scales = scales
        self._ops = None

    @property
    def num_occurrences(self) -> int:
        return self.occurrence_param.size

    def __repr__(self) -> str:
        return (f"Circuit(num_qubits={self.num_qubits}, gates={len(self.gates)}, "
                f"num_params={self.num_params})")

    # -- compiled form -----------------------------------------------------
    def _compiled(self):
        """Op list with consecutive diagonal fixed gates merged into one
        elementwise phase multiply; rebuilt only once per circuit."""
        if self._ops is not None:
            return self._ops
        dim = 1 << self.num_qubits
        idx = np.arange(dim)
        ops = []
        pending = None  # accumulated diagonal phase vector

        def flush():
            nonlocal pending
            if pending is not None:
                ops.append(("diag", pending))
                pending = None

        occ = 0
        for g in self.gates:
            if g.kind == "rot":
                flush()
                ops.append(("rot", occ, g.qubits, g.generator))
                occ += 1
                continue
            d = np.diagonal(g.matrix)
            if np.abs(g.matrix - np.diag(d)).max() <= _DIAG_ATOL:
                if len(g.qubits) == 1:
                    sub = (idx >> g.qubits[0]) & 1
                else:
                    a, b = g.qubits
                    sub = 2 * ((idx >> a) & 1) + ((idx >> b) & 1)
                phase = d[sub]
                pending = phase if pending is None else pending * phase
            else:
                flush()
                ops.append(("fix", g.qubits, g.matrix))
        flush()
        self._ops = ops
        return ops


def occurrence_angles(circuit: Circuit, params: np.ndarray) -> np.ndarray:
    """Rotation angles per occurrence: theta_j / a_j, batched over rows."""
    params = np.asarray(params, dtype=float)
    if params.shape[-1] != circuit.num_params:
        raise ValueError(
            f"expected {circuit.num_params} parameters, got {params.shape[-1]}")
    return params[..., circuit.occurrence_param] / circuit.occurrence_scale


def run_rows(circuit: Circuit, angles: np.ndarray, input_amps: np.ndarray) -> np.ndarray:
    """Run the circuit for a batch of occurrence-angle rows.

    angles has shape (B, num_occurrences); returns amplitudes (B, 2^N). The
    batch dimension shares every fixed gate and differs only in rotation
    angles, which keeps the whole sweep inside vectorized kernels.
    """
    n = circuit.num_qubits
    batch = angles.shape[0]
    amps = np.broadcast_to(input_amps, (batch, input_amps.size)).copy()
    eye2 = np.eye(2)
    eye4 = np.eye(4)
    for op in circuit._compiled():
        if op[0] == "diag":
            amps *= op[1]
        elif op[0] == "fix":
            qubits, u = op[1], op[2]
            if len(qubits) == 1:
                amps = apply_1q_raw(amps, n, qubits[0], u)
            else:
                amps = apply_2q_raw(amps, n, qubits[0], qubits[1], u)
        else:
            _, occ, qubits, gen = op
            th = angles[:, occ]
            eye = eye2 if len(qubits) == 1 else eye4
            u = (np.cos(th)[:, None, None] * eye
                 - 1j * np.sin(th)[:, None, None] * gen)
            if len(qubits) == 1:
                amps = apply_1q_raw(amps, n, qubits[0], u)
            else:
                amps = apply_2q_raw(amps, n, qubits[0], qubits[1], u)
    return amps


def apply_circuit(circuit: Circuit, params, state: StateVector,
                  occurrence_shifts: dict[int, float] | None = None) -> StateVector:
    """Apply the circuit at the given parameters.

    occurrence_shifts maps a rotation-occurrence position (gate order, 0-based)
    to an angle offset added after the 1/a_j scaling; the parameter-shift rule
    uses this to move a single occurrence of a shared parameter.
    """
    if state.num_qubits != circuit.num_qubits:
        raise ValueError("state and circuit qubit counts differ")
    params = np.asarray(params, dtype=float)
    if params.shape != (circuit.num_params,):
        raise ValueError(f"expected {circuit.num_params} parameters, got {params.shape}")
    angles = occurrence_angles(circuit, params)
    if occurrence_shifts:
        angles = angles.copy()
        for occ, offset in occurrence_shifts.items():
            if not 0 <= occ < circuit.num_occurrences:
                raise ValueError(f"occurrence {occ} out of range")
            angles[occ] += offset
    out = run_rows(circuit, angles[None, :], state.amplitudes)[0]
    return StateVector(circuit.num_qubits, out)


# ---------------------------------------------------------------------------
# Ansatz builders
# ---------------------------------------------------------------------------

def ring_pairs(num_qubits: int) -> list[tuple[int, int]]:
    """Nearest-neighbour pairs closed into a ring (open pair for 2 qubits)."""
    if num_qubits < 2:
        raise ValueError("need at least 2 qubits")
    if num_qubits == 2:
        return [(0, 1)]
    return [(i, (i + 1) % num_qubits) for i in range(num_qubits)]


def hardware_efficient(num_qubits: int, trainable_layers: int,
                       layer_generators=None, cz_pairs=None) -> Circuit:
    """Single-qubit rotation layers interleaved with CZ layers.

    Layer l rotates every qubit with generator layer_generators[l] (cycled if
    the list is shorter), then applies CZ on cz_pairs. Two more rotation
    layers (X then Y) close the circuit, so num_params = (trainable_layers+2)*N
    with every parameter used exactly once. Generators must anti-commute with
    Z so the Z-conjugation identity behind the variance analysis applies.
    """
    if trainable_layers < 0:
        raise ValueError("trainable_layers must be >= 0")
    if layer_generators is None:
        layer_generators = ["X", "Y"]
    if cz_pairs is None:
        cz_pairs = ring_pairs(num_qubits)
    resolved = []
    for gen in layer_generators:
        name = gen if isinstance(gen, str) else None
        g = _check_generator(NAMED_GENERATORS[name] if name else gen)
        if g.shape != (2, 2):
            raise ValueError("layer generators must be single-qubit")
        if np.abs(g @ Z + Z @ g).max() > ANTICOMMUTE_ATOL:
            raise ValueError("layer generator must anti-commute with Z")
        resolved.append((name, g))
    gates = []
    for layer in range(trainable_layers):
        name, g = resolved[layer % len(resolved)]
        for q in range(num_qubits):
            gates.append(GateSpec("rot", (q,), generator=g, generator_name=name,
                                  param_index=layer * num_qubits + q))
        for a, b in cz_pairs:
            gates.append(fixed_gate(CZ, (a, b)))
    base = trainable_layers * num_qubits
    for offset, name in ((0, "X"), (num_qubits, "Y")):
        for q in range(num_qubits):
            gates.append(rotation_gate(name, (q,), base + offset + q))
    return Circuit(num_qubits, gates)


def xy_block_ansatz(num_qubits: int, blocks: int, cz_pairs=None) -> Circuit:
    """Blocks of [CZ layer; X rotation layer; Y rotation layer].

    The spin-chain experiments use this shape: entanglers come first in each
    block, so the closing X and Y layers are the last block's rotations and
    the circuit has 2 * blocks * num_qubits parameters, each used once. The
    leading CZ layer fixes the all-zeros input, which is what makes the
    zero-parameter circuit act as the identity on it.
    """
    if blocks < 1:
        raise ValueError("blocks must be >= 1")
    if cz_pairs is None:
        cz_pairs = ring_pairs(num_qubits)
    gates = []
    param = 0
    for _ in range(blocks):
        for a, b in cz_pairs:
            gates.append(fixed_gate(CZ, (a, b)))
        for name in ("X", "Y"):
            for q in range(num_qubits):
                gates.append(rotation_gate(name, (q,), param))
                param += 1
    return Circuit(num_qubits, gates)


def givens_2q(qubit_a: int, qubit_b: int, param_index: int) -> list[GateSpec]:
    """Givens rotation on a qubit pair, decomposed into native gates.

    Two sqrt(iSWAP)s sandwich a Z-rotation pair; the parameter enters both
    rotations with scale 2 (angles -theta/2 and +theta/2), so h_j = 2 for the
    shared parameter. The composite equals the Givens matrix
    [[1,0,0,0],[0,c,-s,0],[0,s,c,0],[0,0,0,1]] up to a global phase of -1.
    """
    half_pi_z = np.diag([np.exp(-0.5j * np.pi), np.exp(0.5j * np.pi)])
    return [
        fixed_gate(SQRT_ISWAP, (qubit_a, qubit_b)),
        rotation_gate("-Z", (qubit_a,), param_index, scale=2.0),
        rotation_gate("Z", (qubit_b,), param_index, scale=2.0),
        fixed_gate(half_pi_z, (qubit_b,)),
        fixed_gate(SQRT_ISWAP, (qubit_a, qubit_b)),
        fixed_gate(half_pi_z, (qubit_b,)),
    ]


def electron_conserving_ansatz(num_orbitals: int, pairs) -> Circuit:
    """Chain of Givens rotations, one per pair.

    Each pair is (a, b) for an auto-assigned parameter, or (a, b, j) to share
    or reorder parameters explicitly. Every gate preserves the number of set
    bits, so occupation-number sectors never mix.
    """
    gates = []
    next_param = 0
    for entry in pairs:
        if len(entry) == 2:
            a, b = entry
            j = next_param
        else:
            a, b, j = entry
        next_param = max(next_param, j + 1)
        gates.extend(givens_2q(a, b, j))
    return Circuit(num_orbitals, gates)


def hf_state(num_orbitals: int, num_electrons: int) -> StateVector:
    """Occupation basis state with the first num_electrons orbitals filled."""
    if not 0 <= num_electrons <= num_orbitals:
        raise ValueError("num_electrons must be in [0, num_orbitals]")
    bits = [1] * num_electrons + [0] * (num_orbitals - num_electrons)
    return basis_state(num_orbitals, bits)


# ---------------------------------------------------------------------------
# Serialization
# ---------------------------------------------------------------------------

def _matrix_to_json(m: np.ndarray):
    return [[[float(v.real), float(v.imag)] for v in row] for row in m]


def _matrix_from_json(rows) -> np.ndarray:
    return np.array([[complex(re, im) for re, im in row] for row in rows])


def circuit_to_dict(circuit: Circuit) -> dict:
    gates = []
    for g in circuit.gates:
        if g.kind == "fixed":
            gates.append({"kind": "fixed", "qubits": list(g.qubits),
                          "matrix": _matrix_to_json(g.matrix)})
        else:
            entry = {"kind": "rot", "qubits": list(g.qubits),
                     "param": g.param_index, "scale": g.scale}
            if g.generator_name is not None:
                entry["generator"] = g.generator_name
            else:
                entry["generator"] = _matrix_to_json(g.generator)
            gates.append(entry)
    return {"num_qubits": circuit.num_qubits, "gates": gates}


def circuit_from_dict(data: dict) -> Circuit:
    gates = []
    for entry in data["gates"]:
        kind = entry["kind"]
        qubits = entry["qubits"]
        if kind == "fixed":
            gates.append(fixed_gate(_matrix_from_json(entry["matrix"]), qubits))
        elif kind == "rot":
            gen = entry["generator"]
            if not isinstance(gen, str):
                gen = _matrix_from_json(gen)
            gates.append(rotation_gate(gen, qubits, entry["param"],
                                       entry.get("scale", 1.0)))
        else:
            raise ValueError(f"unknown gate kind {kind!r}")
    return Circuit(data["num_qubits"], gates)


def save_circuit(circuit: Circuit, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(circuit_to_dict(circuit), fh, indent=2)


def load_circuit(path) -> Circuit:
    with open(path, encoding="utf-8") as fh:
        return circuit_from_dict(json.load(fh))
