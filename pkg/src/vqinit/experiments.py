"""Experiment harness: declarative configs, runners, sweeps, and presets."""
from __future__ import annotations

import json
import os
from typing import Annotated, Literal, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from . import __version__
from .circuits import electron_conserving_ansatz, hf_state, xy_block_ansatz
from .gradients import LossProblem, grad_finite_diff, grad_parameter_shift
from .initializers import (InitStrategy, gaussian_init, uniform_init,
                           variance_local, variance_shared_simple, zero_init)
from .observables import (builtin_hamiltonian, exact_ground_energy, heisenberg,
                          load_hamiltonian, max_locality)
from .optimize import NoiseModel, OptimizerConfig, TrainTrace, train
from .states import zero_state

DENSE_MAX_QUBITS = 12
_AUTO_EPSILON = 0.5  # retained-signal fraction behind the "auto" chemistry variance


class HeisenbergProblem(BaseModel):
    """Spin chain ground-state search with a CZ + X + Y block ansatz.

    Each block applies a CZ ring and then X and Y rotation layers, giving
    2 * blocks * num_qubits parameters. Viewed as interleaved-rotation layers
    closed by the final X and Y layers, `blocks` blocks have 2*blocks - 2
    trainable layers, the depth the matched init variance uses.
    """
    model_config = ConfigDict(extra="forbid")
    kind: Literal["heisenberg"] = "heisenberg"
    num_qubits: int = Field(8, ge=2, le=20)
    blocks: int = Field(5, ge=1)


class ChemistryProblem(BaseModel):
    """Number-conserving Givens-chain ansatz on a fixed-particle sector.

    `hamiltonian` is a file path or "builtin:<name>". `pairs` defaults to the
    nearest-neighbour ladder; `stack` repeats the pair sequence with fresh
    parameters.
    """
    model_config = ConfigDict(extra="forbid")
    kind: Literal["chemistry"] = "chemistry"
    hamiltonian: str
    num_electrons: int = Field(ge=0)
    pairs: list[tuple[int, int]] | None = None
    stack: int = Field(1, ge=1)


ProblemSpec = Annotated[Union[HeisenbergProblem, ChemistryProblem],
                        Field(discriminator="kind")]


class InitSpec(BaseModel):
    model_config = ConfigDict(extra="forbid")
    kind: Literal["zero", "uniform", "gaussian"] = "gaussian"
    gaussian_variance: Union[Literal["auto"], float] = "auto"
    variance_multiplier: float = Field(1.0, gt=0)
    low: float = 0.0
    high: float = 2.0 * np.pi


class OptimizerSpec(BaseModel):
    model_config = ConfigDict(extra="forbid")
    kind: Literal["gd", "momentum", "nag", "adagrad", "adam"] = "gd"
    learning_rate: float | None = Field(None, gt=0)
    momentum: float = 0.9
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8


class NoiseSpec(BaseModel):
    model_config = ConfigDict(extra="forbid")
    kind: Literal["none", "constant", "adaptive"] = "none"
    variance: float = Field(0.0, ge=0)
    epsilon: float = Field(0.5, gt=0, lt=1)
    formula: Literal["bound", "simple"] = "bound"


class ExperimentConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")
    problem: ProblemSpec
    init: InitSpec = InitSpec()
    optimizer: OptimizerSpec = OptimizerSpec()
    noise: NoiseSpec = NoiseSpec()
    iterations: int = Field(200, ge=0)
    seeds: list[int] = Field(default_factory=lambda: [0, 1, 2, 3, 4])
    output_dir: str | None = None


def resolve_hamiltonian(ref: str):
    if ref.startswith("builtin:"):
        return builtin_hamiltonian(ref.split(":", 1)[1])
    return load_hamiltonian(ref)


def build_problem(spec) -> tuple[LossProblem, dict]:
    """Instantiate (circuit, Hamiltonian, input) and summary metadata."""
    if spec.kind == "heisenberg":
        circuit = xy_block_ansatz(spec.num_qubits, spec.blocks)
        ham = heisenberg(spec.num_qubits)
        problem = LossProblem(circuit, ham, zero_state(spec.num_qubits))
        meta = {"kind": spec.kind, "num_qubits": spec.num_qubits,
                "trainable_layers": 2 * spec.blocks - 2,
                "locality": max_locality(ham)}
    else:
        ham = resolve_hamiltonian(spec.hamiltonian)
        n = ham.num_qubits
        pairs = spec.pairs or [(i, i + 1) for i in range(n - 1)]
        circuit = electron_conserving_ansatz(n, list(pairs) * spec.stack)
        problem = LossProblem(circuit, ham, hf_state(n, spec.num_electrons))
        meta = {"kind": spec.kind, "num_qubits": n,
                "pairs": list(map(list, pairs)), "stack": spec.stack,
                "locality": max_locality(ham)}
    meta["num_params"] = problem.num_params
    return problem, meta


def resolve_init(spec: InitSpec, problem: LossProblem, meta: dict) -> InitStrategy:
    if spec.kind == "zero":
        return zero_init()
    if spec.kind == "uniform":
        return uniform_init(spec.low, spec.high)
    if spec.gaussian_variance == "auto":
        if meta["kind"] == "heisenberg":
            base = variance_local(meta["locality"], meta["trainable_layers"])
        else:
            base = variance_shared_simple(problem.circuit.h,
                                          problem.num_params, _AUTO_EPSILON)
    else:
        base = float(spec.gaussian_variance)
    return gaussian_init(base * spec.variance_multiplier)


def resolve_optimizer(spec: OptimizerSpec, meta: dict) -> OptimizerConfig:
    lr = spec.learning_rate
    if lr is None:
        # plain-gradient steps want a larger rate on the small chemistry
        # problems; adaptive optimizers keep their usual scale
        lr = 0.01 if spec.kind == "adam" else \
            (0.1 if meta["kind"] == "chemistry" else 0.01)
    return OptimizerConfig(kind=spec.kind, learning_rate=lr,
                           momentum=spec.momentum, beta1=spec.beta1,
                           beta2=spec.beta2, epsilon=spec.epsilon)


def resolve_noise(spec: NoiseSpec) -> NoiseModel:
    return NoiseModel(kind=spec.kind, variance=spec.variance,
                      epsilon=spec.epsilon, formula=spec.formula)


def _curve(traces: list[TrainTrace], attr: str) -> list[float]:
    return np.mean([getattr(t, attr) for t in traces], axis=0).tolist()


def run_experiment(config: ExperimentConfig) -> tuple[list[TrainTrace], dict]:
    """Train once per seed; returns the traces and a summary.

    With output_dir set, writes manifest.json, one trace_seed<k>.csv per seed,
    and summary.json. A trace is a pure function of the config and seed, so
    rerunning a config reproduces every CSV byte for byte (summaries also
    carry wall times, which do vary).
    """
    problem, meta = build_problem(config.problem)
    init = resolve_init(config.init, problem, meta)
    optimizer = resolve_optimizer(config.optimizer, meta)
    noise = resolve_noise(config.noise)
    out = config.output_dir
    if out:
        os.makedirs(out, exist_ok=True)
        manifest = {"version": __version__, "config": config.model_dump()}
        with open(os.path.join(out, "manifest.json"), "w") as fh:
            json.dump(manifest, fh, indent=2)
    traces, per_seed = [], []
    for seed in config.seeds:
        trace = train(problem, init, optimizer, noise, config.iterations, seed)
        traces.append(trace)
        entry = {"seed": seed, "final_loss": trace.final_loss(),
                 "final_grad_norm": float(trace.grad_norm[-1]),
                 "initial_grad_norm": float(trace.grad_norm[0]),
                 "params_digest": trace.params_digest(),
                 "wall_time_s": trace.wall_time_s}
        if out:
            path = os.path.join(out, f"trace_seed{seed}.csv")
            trace.to_csv(path)
            entry["trace_csv"] = path
        per_seed.append(entry)
    finals = np.array([t.final_loss() for t in traces])
    summary = {
        "problem": meta,
        "config": config.model_dump(),
        "per_seed": per_seed,
        "mean_loss": _curve(traces, "loss"),
        "mean_grad_norm": _curve(traces, "grad_norm"),
        "final_loss_mean": float(finals.mean()),
        "final_loss_std": float(finals.std(ddof=1)) if finals.size > 1 else 0.0,
    }
    if meta["num_qubits"] <= DENSE_MAX_QUBITS:
        ground = exact_ground_energy(problem.hamiltonian)
        summary["ground_energy"] = ground
        summary["final_gap_mean"] = float(finals.mean() - ground)
    if out:
        with open(os.path.join(out, "summary.json"), "w") as fh:
            json.dump(summary, fh, indent=2)
        summary["output_dir"] = out
    return traces, summary


SWEEP_AXES = ("layers", "variance_multiplier", "optimizer")


def _apply_axis(config: ExperimentConfig, axis: str, value) -> ExperimentConfig:
    cfg = config.model_copy(deep=True)
    if axis == "layers":
        if cfg.problem.kind == "heisenberg":
            cfg.problem.blocks = int(value)
        else:
            cfg.problem.stack = int(value)
    elif axis == "variance_multiplier":
        cfg.init.variance_multiplier = float(value)
    elif axis == "optimizer":
        cfg.optimizer.kind = value
    else:
        raise ValueError(f"unknown sweep axis {axis!r}; have {SWEEP_AXES}")
    return cfg


def run_sweep(config: ExperimentConfig, axis: str, values) -> dict:
    """run_experiment per axis value; writes sweep.csv keyed by value."""
    if axis not in SWEEP_AXES:
        raise ValueError(f"unknown sweep axis {axis!r}; have {SWEEP_AXES}")
    out = config.output_dir
    points, rows = [], []
    for value in values:
        sub = _apply_axis(config, axis, value)
        sub.output_dir = os.path.join(out, f"{axis}={value}") if out else None
        _, summary = run_experiment(sub)
        points.append({"value": value, "summary": summary})
        for entry in summary["per_seed"]:
            rows.append((value, entry["seed"], entry["final_loss"],
                         entry["final_grad_norm"]))
    sweep = {"axis": axis, "values": list(values), "points": points}
    if out:
        os.makedirs(out, exist_ok=True)
        csv_path = os.path.join(out, "sweep.csv")
        with open(csv_path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(f"{axis},seed,final_loss,final_grad_norm\n")
            for value, seed, fl, gn in rows:
                fh.write(f"{value},{seed},{fl!r},{gn!r}\n")
        with open(os.path.join(out, "sweep_summary.json"), "w") as fh:
            json.dump(sweep, fh, indent=2)
        sweep["output_dir"] = out
        sweep["sweep_csv"] = csv_path
    return sweep


# ---------------------------------------------------------------------------
# Presets
# ---------------------------------------------------------------------------

def _preset_heisenberg_desk() -> ExperimentConfig:
    return ExperimentConfig(problem=HeisenbergProblem(num_qubits=8, blocks=5))


def _preset_heisenberg_full() -> ExperimentConfig:
    """Publication-scale run: hours of CPU, not part of any test."""
    return ExperimentConfig(problem=HeisenbergProblem(num_qubits=15, blocks=10),
                            iterations=1000,
                            seeds=list(range(10)))


def _preset_chemistry_desk() -> ExperimentConfig:
    return ExperimentConfig(
        problem=ChemistryProblem(hamiltonian="builtin:ec6", num_electrons=3,
                                 stack=2),
        noise=NoiseSpec(kind="adaptive", epsilon=0.5),
        iterations=300)


PRESETS = {
    "heisenberg-desk": _preset_heisenberg_desk,
    "heisenberg-full": _preset_heisenberg_full,
    "chemistry-desk": _preset_chemistry_desk,
}


def get_preset(name: str) -> ExperimentConfig:
    try:
        return PRESETS[name]()
    except KeyError:
        raise ValueError(f"unknown preset {name!r}; have {sorted(PRESETS)}") \
            from None


# ---------------------------------------------------------------------------
# Gradient cross-check
# ---------------------------------------------------------------------------

def _random_check_circuit(rng: np.random.Generator):
    """Small random circuit mixing plain, shared-parameter, and Givens gates
    with CZ / sqrt(iSWAP) entanglers."""
    from .circuits import (CZ, Circuit, SQRT_ISWAP, fixed_gate, givens_2q,
                           rotation_gate)
    n = int(rng.integers(2, 5))
    gates = []
    param = 0
    budget = int(rng.integers(3, 13))
    while param < budget:
        roll = rng.random()
        if roll < 0.4 and budget - param >= 1:
            q = int(rng.integers(n))
            gen = ["X", "Y", "Z"][int(rng.integers(3))]
            scale = float(rng.choice([0.5, 1.0, 2.0]))
            gates.append(rotation_gate(gen, (q,), param, scale))
            param += 1
        elif roll < 0.7 and budget - param >= 1:
            # one parameter, two occurrences on different qubits
            qs = rng.permutation(n)[:2]
            gen = ["X", "Y", "Z"][int(rng.integers(3))]
            scale = float(rng.choice([1.0, 2.0]))
            gates.append(rotation_gate(gen, (int(qs[0]),), param, scale))
            gates.append(rotation_gate(gen, (int(qs[1]),), param, scale))
            param += 1
        else:
            qs = rng.permutation(n)[:2]
            gates.extend(givens_2q(int(qs[0]), int(qs[1]), param))
            param += 1
        if rng.random() < 0.5:
            qs = rng.permutation(n)[:2]
            ent = CZ if rng.random() < 0.5 else SQRT_ISWAP
            gates.append(fixed_gate(ent, (int(qs[0]), int(qs[1]))))
    return Circuit(n, gates)


def run_grad_check(num_circuits: int = 50, seed: int = 0,
                   tolerance: float = 1e-6, fd_step: float = 1e-5) -> dict:
    """Parameter-shift vs central finite differences on random circuits.

    Uses random parameters and a random-coefficient Heisenberg-type
    observable; reports the worst absolute component difference per circuit.
    """
    from .observables import Hamiltonian, PauliString
    rng = np.random.default_rng(seed)
    reports = []
    for _ in range(num_circuits):
        circuit = _random_check_circuit(rng)
        n = circuit.num_qubits
        terms = []
        for i in range(n - 1):
            for code in (1, 2, 3):
                codes = np.zeros(n, dtype=np.int8)
                codes[i] = code
                codes[i + 1] = code
                terms.append((float(rng.uniform(-1, 1)), PauliString(codes)))
        ham = Hamiltonian(n, terms)
        problem = LossProblem(circuit, ham, zero_state(n))
        params = rng.uniform(-np.pi, np.pi, circuit.num_params)
        ps = grad_parameter_shift(problem, params)
        fd = grad_finite_diff(problem, params, fd_step)
        diff = float(np.abs(ps - fd).max()) if circuit.num_params else 0.0
        reports.append({"num_qubits": n, "num_params": circuit.num_params,
                        "max_abs_diff": diff,
                        "passed": bool(diff <= tolerance)})
    return {"check": "parameter-shift-vs-finite-difference",
            "num_circuits": num_circuits, "seed": seed,
            "tolerance": tolerance,
            "max_abs_diff": max(r["max_abs_diff"] for r in reports),
            "circuits": reports,
            "passed": all(r["passed"] for r in reports)}


def run_ground_energy(ham) -> dict:
    """Exact ground energy report for a parsed Hamiltonian."""
    return {"num_qubits": ham.num_qubits, "num_terms": len(ham),
            "ground_energy": exact_ground_energy(ham)}
