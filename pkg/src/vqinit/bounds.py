"""Monte-Carlo verification of gradient-size guarantees.

Estimates E ||grad f||^2 (or a single squared component) over random
parameter draws and compares against closed-form lower bounds and, for
single-gate circuits, exact second-moment formulas.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .circuits import (Circuit, electron_conserving_ansatz, hardware_efficient,
                       hf_state, rotation_gate)
from .gradients import (LossProblem, grad_component_many, grad_many,
                        grad_parameter_shift, loss_rows)
from .initializers import (InitStrategy, gaussian_init, sample_batch,
                           variance_global, variance_local)
from .observables import (Hamiltonian, PauliString, builtin_hamiltonian,
                          spectral_norm)
from .states import StateVector

ANTICOMMUTE_ATOL = 1e-10


@dataclass(frozen=True)
class McEstimate:
    mean: float
    std_error: float
    num_samples: int
    seed: int

    def as_dict(self) -> dict:
        return {"mean": self.mean, "std_error": self.std_error,
                "num_samples": self.num_samples, "seed": self.seed}


def _estimate(values: np.ndarray, seed: int) -> McEstimate:
    n = values.size
    se = float(np.std(values, ddof=1) / np.sqrt(n)) if n > 1 else 0.0
    return McEstimate(float(np.mean(values)), se, n, seed)


def mc_expected_grad_norm_sq(problem: LossProblem, strategy: InitStrategy,
                             num_samples: int, seed: int) -> McEstimate:
    """Sample mean of ||grad f(theta)||^2 over initial-parameter draws."""
    rng = np.random.default_rng(seed)
    params = sample_batch(strategy, problem.num_params, num_samples, rng)
    grads = grad_many(problem, params)
    return _estimate(np.einsum("ij,ij->i", grads, grads), seed)


def mc_expected_component_sq(problem: LossProblem, index: int,
                             strategy: InitStrategy, num_samples: int,
                             seed: int) -> McEstimate:
    """Sample mean of (df/dtheta_index)^2 over initial-parameter draws."""
    rng = np.random.default_rng(seed)
    params = sample_batch(strategy, problem.num_params, num_samples, rng)
    comp = grad_component_many(problem, index, params)
    return _estimate(comp ** 2, seed)


def mc_expected_loss_sq(problem: LossProblem, strategy: InitStrategy,
                        num_samples: int, seed: int) -> McEstimate:
    """Sample mean of f(theta)^2 over initial-parameter draws."""
    rng = np.random.default_rng(seed)
    params = sample_batch(strategy, problem.num_params, num_samples, rng)
    from .circuits import occurrence_angles
    vals = loss_rows(problem, occurrence_angles(problem.circuit, params))
    return _estimate(vals ** 2, seed)


# ---------------------------------------------------------------------------
# Closed forms
# ---------------------------------------------------------------------------

def grad_norm_lower_bound(locality: int, layers: int,
                          input_overlap: float = 1.0) -> float:
    """Lower bound L / (S^S (L+2)^{S+1}) * Tr[sigma rho_in]^2 on the expected
    squared gradient norm of a hardware-efficient circuit at the matched
    Gaussian variance 1/(4S(L+2)). sigma is Z on the observable's support;
    input_overlap is Tr[sigma rho_in] (1 for the all-zeros input)."""
    if locality < 1 or layers < 1:
        raise ValueError("need locality >= 1 and layers >= 1")
    s, layer_count = locality, layers
    return (layer_count / (s ** s * (layer_count + 2) ** (s + 1))
            * input_overlap ** 2)


def anticommutes(a: np.ndarray, b: np.ndarray,
                 atol: float = ANTICOMMUTE_ATOL) -> bool:
    return bool(np.abs(a @ b + b @ a).max() <= atol)


def expected_loss_sq_single_gate(tr_obs: float, tr_igo: float,
                                 variance: float) -> float:
    """E f(theta)^2 for f = <psi| e^{i theta G} O e^{-i theta G} |psi>,
    theta ~ N(0, variance), with O and G anti-commuting: the conjugation
    collapses to cos(2 theta) O + sin(2 theta) iGO, and Gaussian moments of
    cos/sin give the e^{-8 variance} factors."""
    decay = np.exp(-8.0 * variance)
    return 0.5 * (1 + decay) * tr_obs ** 2 + 0.5 * (1 - decay) * tr_igo ** 2


def expected_grad_sq_single_gate(tr_obs: float, tr_igo: float,
                                 variance: float) -> float:
    """E (df/dtheta)^2 under the same assumptions; at variance 0 this is
    (2 tr_igo)^2, the squared derivative at theta = 0."""
    decay = np.exp(-8.0 * variance)
    return 2.0 * (1 - decay) * tr_obs ** 2 + 2.0 * (1 + decay) * tr_igo ** 2


def single_gate_moment_inputs(obs: Hamiltonian, generator: np.ndarray,
                              state: StateVector) -> tuple[float, float]:
    """(Tr[O rho], Tr[iGO rho]) for a pure state, after checking {O, G} = 0.
    Inputs whose dense matrices fail the anti-commutation test are rejected."""
    o = obs.dense()
    if o.shape != generator.shape:
        raise ValueError("observable and generator dimensions differ")
    if not anticommutes(o, generator):
        raise ValueError("observable and generator must anti-commute")
    psi = state.amplitudes
    tr_obs = np.vdot(psi, o @ psi)
    tr_igo = np.vdot(psi, 1j * generator @ o @ psi)
    if abs(tr_obs.imag) > 1e-10 or abs(tr_igo.imag) > 1e-10:
        raise ValueError("moment inputs came out non-real")
    return float(tr_obs.real), float(tr_igo.real)


# ---------------------------------------------------------------------------
# End-to-end checks
# ---------------------------------------------------------------------------

def _support_pauli(num_qubits: int, locality: int) -> Hamiltonian:
    """Weight-S observable cycling X, Y, Z over the first S qubits."""
    codes = np.zeros(num_qubits, dtype=np.int8)
    for q in range(locality):
        codes[q] = 1 + q % 3
    return Hamiltonian(num_qubits, [(1.0, PauliString(codes))])


def check_grad_norm_bound(num_qubits: int, locality: int, layers: int,
                          num_samples: int, seed: int) -> dict:
    """Monte-Carlo check of the depth-scaled lower bound on E ||grad f||^2.

    Builds a hardware-efficient circuit on the all-zeros input with a
    weight-`locality` Pauli observable, draws parameters at the matched
    variance, and requires the sample mean to sit above the closed-form
    bound minus 3 standard errors.
    """
    if locality > num_qubits:
        raise ValueError("locality cannot exceed num_qubits")
    from .states import zero_state
    circuit = hardware_efficient(num_qubits, layers)
    obs = _support_pauli(num_qubits, locality)
    problem = LossProblem(circuit, obs, zero_state(num_qubits))
    gamma_sq = variance_local(locality, layers)
    est = mc_expected_grad_norm_sq(problem, gaussian_init(gamma_sq),
                                   num_samples, seed)
    bound = grad_norm_lower_bound(locality, layers)
    slack = est.mean - bound
    return {
        "check": "grad-norm-lower-bound",
        "num_qubits": num_qubits, "locality": locality, "layers": layers,
        "num_params": circuit.num_params, "gamma_sq": gamma_sq,
        "estimate": est.as_dict(), "lower_bound": bound,
        "slack": slack,
        "slack_se": slack / est.std_error if est.std_error else np.inf,
        "passed": bool(est.mean >= bound - 3.0 * est.std_error),
    }


def component_fixture() -> tuple[LossProblem, np.ndarray]:
    """Fixed 4-orbital, 3-parameter Givens-chain problem used by the
    shared-parameter component check; returns (problem, grad at zero)."""
    ham = builtin_hamiltonian("ec4")
    circuit = electron_conserving_ansatz(4, [(0, 1), (1, 2), (2, 3)])
    problem = LossProblem(circuit, ham, hf_state(4, 2))
    grad0 = grad_parameter_shift(problem, np.zeros(circuit.num_params))
    return problem, grad0


def check_component_bound(epsilon: float = 0.5, num_samples: int = 2000,
                          seed: int = 0, index: int | None = None) -> dict:
    """Monte-Carlo check that E (df/dtheta_index)^2 >= (1-eps) times its
    zero-point value when every parameter is drawn at the matched variance.

    The default index is the smallest non-zero squared component at zero: the
    most conservative choice, since its variance formula admits every other
    component too. A zero component makes the guarantee vacuous.
    """
    problem, grad0 = component_fixture()
    c = problem.circuit
    grad0_sq = grad0 ** 2
    if index is None:
        nonzero = np.flatnonzero(np.abs(grad0) > 1e-12)
        if nonzero.size == 0:
            raise ValueError("all gradient components vanish at zero")
        index = int(nonzero[np.argmin(grad0_sq[nonzero])])
    norm_obs = spectral_norm(problem.hamiltonian)
    gamma_sq = variance_global(c.scales, c.h, c.num_params, epsilon,
                               grad0_sq[index], norm_obs)
    est = mc_expected_component_sq(problem, index, gaussian_init(gamma_sq),
                                   num_samples, seed)
    bound = (1.0 - epsilon) * grad0_sq[index]
    slack = est.mean - bound
    return {
        "check": "shared-parameter-component-bound",
        "num_qubits": c.num_qubits, "num_params": c.num_params,
        "index": index, "epsilon": epsilon,
        "grad0": grad0.tolist(), "grad0_sq_index": float(grad0_sq[index]),
        "gamma_sq": np.asarray(gamma_sq).tolist(),
        "norm_obs": norm_obs,
        "estimate": est.as_dict(), "lower_bound": bound,
        "slack": slack,
        "slack_se": slack / est.std_error if est.std_error else np.inf,
        "passed": bool(est.mean >= bound - 3.0 * est.std_error),
    }


_LETTERS = "IXYZ"


def _random_anticommuting_words(rng: np.random.Generator,
                                num_qubits: int) -> tuple[str, str]:
    """Two Pauli words that anti-commute: the count of positions holding two
    distinct non-identity letters must be odd."""
    while True:
        a = rng.integers(0, 4, num_qubits)
        b = rng.integers(0, 4, num_qubits)
        if not a.any() or not b.any():
            continue
        clashes = np.count_nonzero((a != b) & (a != 0) & (b != 0))
        if clashes % 2 == 1:
            return ("".join(_LETTERS[i] for i in a),
                    "".join(_LETTERS[i] for i in b))


def random_single_gate_config(rng: np.random.Generator) -> dict:
    num_qubits = int(rng.integers(1, 3))
    o_word, g_word = _random_anticommuting_words(rng, num_qubits)
    coeff = float(rng.uniform(0.5, 2.0) * rng.choice([-1.0, 1.0]))
    dim = 2 ** num_qubits
    raw = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    return {
        "num_qubits": num_qubits, "obs_word": o_word, "obs_coeff": coeff,
        "gen_word": g_word, "variance": float(rng.uniform(0.02, 0.3)),
        "state": raw / np.linalg.norm(raw),
    }


def check_single_gate_forms(which: str, num_configs: int = 20,
                            num_samples: int = 100000, seed: int = 0) -> dict:
    """Compare Monte-Carlo second moments of single-rotation circuits against
    the closed forms, over random anti-commuting observable/generator pairs.

    which is "loss" for E f^2 or "grad" for E (df/dtheta)^2. Each config must
    agree within 4 standard errors.
    """
    if which not in ("loss", "grad"):
        raise ValueError("which must be 'loss' or 'grad'")
    rng = np.random.default_rng(seed)
    reports = []
    for _ in range(num_configs):
        cfg = random_single_gate_config(rng)
        n = cfg["num_qubits"]
        obs = Hamiltonian(n, [(cfg["obs_coeff"],
                               PauliString.from_string(cfg["obs_word"]))])
        gen = PauliString.from_string(cfg["gen_word"]).dense()
        state = StateVector(n, cfg["state"])
        # dense() indexes by amplitude (qubit 0 low bit); a 2-qubit gate takes
        # its first qubit as the high bit, so act on (1, 0)
        qubits = (0,) if n == 1 else (1, 0)
        circuit = Circuit(n, [rotation_gate(gen, qubits, 0)])
        problem = LossProblem(circuit, obs, state)
        tr_obs, tr_igo = single_gate_moment_inputs(obs, gen, state)
        strategy = gaussian_init(cfg["variance"])
        sub_seed = int(rng.integers(2 ** 31))
        if which == "loss":
            est = mc_expected_loss_sq(problem, strategy, num_samples, sub_seed)
            closed = expected_loss_sq_single_gate(tr_obs, tr_igo, cfg["variance"])
        else:
            est = mc_expected_component_sq(problem, 0, strategy, num_samples,
                                           sub_seed)
            closed = expected_grad_sq_single_gate(tr_obs, tr_igo, cfg["variance"])
        diff = abs(est.mean - closed)
        reports.append({
            "num_qubits": n, "obs_word": cfg["obs_word"],
            "obs_coeff": cfg["obs_coeff"], "gen_word": cfg["gen_word"],
            "variance": cfg["variance"], "tr_obs": tr_obs, "tr_igo": tr_igo,
            "closed_form": closed, "estimate": est.as_dict(),
            "abs_diff": diff, "tolerance": 4.0 * est.std_error,
            "passed": bool(diff <= 4.0 * est.std_error),
        })
    return {
        "check": f"single-gate-{which}-second-moment",
        "num_configs": num_configs, "num_samples": num_samples, "seed": seed,
        "configs": reports,
        "passed": all(r["passed"] for r in reports),
    }


def depth_sweep_grad_norm(num_qubits: int, layer_values, strategy: InitStrategy,
                          num_samples: int, seed: int) -> list[dict]:
    """Gradient second moments across depths for a fixed init strategy.

    Reports E ||grad f||^2 and the first component E (df/dtheta_0)^2 per
    depth. The component is the decay witness: under uniform init it falls
    toward the deep-circuit floor as layers grow, while the norm sums over a
    parameter count that itself grows with depth.
    """
    from .states import zero_state
    out = []
    for layers in layer_values:
        circuit = hardware_efficient(num_qubits, layers)
        obs = _support_pauli(num_qubits, min(2, num_qubits))
        problem = LossProblem(circuit, obs, zero_state(num_qubits))
        est = mc_expected_grad_norm_sq(problem, strategy, num_samples,
                                       seed)
        comp = mc_expected_component_sq(problem, 0, strategy, num_samples,
                                        seed)
        out.append({"layers": layers, "num_params": circuit.num_params,
                    "estimate": est.as_dict(),
                    "component_estimate": comp.as_dict()})
    return out
