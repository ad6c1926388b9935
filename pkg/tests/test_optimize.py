"""Optimizer updates, gradient perturbation, and the training loop."""

import numpy as np
import pytest

from vqinit.circuits import (Circuit, electron_conserving_ansatz,
                             hardware_efficient, hf_state, rotation_gate)
from vqinit.gradients import LossProblem, loss
from vqinit.initializers import gaussian_init, uniform_init, zero_init
from vqinit.observables import builtin_hamiltonian, heisenberg
from vqinit.optimize import (OPTIMIZER_KINDS, NoiseModel, OptimizerConfig,
                             TrainTrace, make_stepper, perturb_gradient, train,
                             write_trace_csv)
from vqinit.states import zero_state


def quadratic_trace(stepper, x0=1.0, steps=10):
    """Minimize f(x) = x^2 (gradient 2x) and return the iterate list."""
    xs = [np.array([x0])]
    for _ in range(steps):
        xs.append(stepper.step(xs[-1], 2 * xs[-1]))
    return np.array(xs).ravel()


# --- configs ---------------------------------------------------------------------

def test_optimizer_kinds_frozen():
    assert OPTIMIZER_KINDS == ("gd", "momentum", "nag", "adagrad", "adam")


def test_config_validation():
    with pytest.raises(ValueError):
        OptimizerConfig(kind="sgd")
    with pytest.raises(ValueError):
        OptimizerConfig(learning_rate=0.0)
    with pytest.raises(ValueError):
        OptimizerConfig(kind="momentum", momentum=1.0)
    with pytest.raises(ValueError):
        OptimizerConfig(kind="adam", beta1=-0.1)
    # zero betas are legal degenerate settings
    OptimizerConfig(kind="momentum", momentum=0.0)
    OptimizerConfig(kind="adam", beta1=0.0, beta2=0.0)


# --- update rules ------------------------------------------------------------------

def test_gd_single_step():
    gd = make_stepper(OptimizerConfig(kind="gd", learning_rate=0.1))
    got = gd.step(np.array([1.0]), np.array([2.0]))
    np.testing.assert_allclose(got, [0.8])


def test_gd_contracts_quadratic():
    gd = make_stepper(OptimizerConfig(kind="gd", learning_rate=0.1))
    xs = quadratic_trace(gd, steps=100)
    assert abs(xs[-1]) <= 1e-9


def test_adam_first_step_is_sign_scaled():
    cfg = OptimizerConfig(kind="adam", learning_rate=0.01)
    adam = make_stepper(cfg)
    g = np.array([3.0, -0.002])
    got = adam.step(np.zeros(2), g)
    want = -cfg.learning_rate * g / (np.abs(g) + cfg.epsilon)
    np.testing.assert_allclose(got, want, atol=1e-15)


def test_adam_degenerate_betas_track_sign_gd():
    cfg = OptimizerConfig(kind="adam", learning_rate=0.05, beta1=0.0, beta2=0.0)
    adam = make_stepper(cfg)
    x = np.array([0.7])
    for _ in range(5):
        g = 2 * x
        want = x - cfg.learning_rate * g / (np.abs(g) + cfg.epsilon)
        x = adam.step(x, g)
        np.testing.assert_allclose(x, want, atol=1e-15)


def test_momentum_zero_beta_is_gd():
    lr = 0.07
    mom = make_stepper(OptimizerConfig(kind="momentum", learning_rate=lr,
                                       momentum=0.0))
    gd = make_stepper(OptimizerConfig(kind="gd", learning_rate=lr))
    np.testing.assert_allclose(quadratic_trace(mom), quadratic_trace(gd),
                               atol=1e-15)


def test_momentum_recursion():
    lr, beta = 0.1, 0.5
    mom = make_stepper(OptimizerConfig(kind="momentum", learning_rate=lr,
                                       momentum=beta))
    x0 = np.array([1.0])
    x1 = mom.step(x0, np.array([2.0]))        # v1 = -0.2
    np.testing.assert_allclose(x1, [0.8])
    x2 = mom.step(x1, np.array([1.0]))        # v2 = 0.5*(-0.2) - 0.1 = -0.2
    np.testing.assert_allclose(x2, [0.6])


def test_nag_recursion():
    lr, beta = 0.1, 0.5
    nag = make_stepper(OptimizerConfig(kind="nag", learning_rate=lr,
                                       momentum=beta))
    x0 = np.array([1.0])
    # v1 = -lr g = -0.2; x1 = x0 + beta v1 - lr g = 1 - 0.1 - 0.2
    x1 = nag.step(x0, np.array([2.0]))
    np.testing.assert_allclose(x1, [0.7])
    # v2 = beta v1 - lr g = -0.1 - 0.1 = -0.2; x2 = x1 + beta v2 - lr g
    x2 = nag.step(x1, np.array([1.0]))
    np.testing.assert_allclose(x2, [0.7 - 0.1 - 0.1])


def test_adagrad_recursion():
    lr, eps = 0.5, 1e-8
    ada = make_stepper(OptimizerConfig(kind="adagrad", learning_rate=lr,
                                       epsilon=eps))
    x0 = np.array([1.0])
    x1 = ada.step(x0, np.array([2.0]))   # acc = 4
    np.testing.assert_allclose(x1, x0 - lr * 2.0 / (2.0 + eps))
    x2 = ada.step(x1, np.array([1.0]))   # acc = 5
    np.testing.assert_allclose(x2, x1 - lr * 1.0 / (np.sqrt(5.0) + eps))


@pytest.mark.parametrize("kind", OPTIMIZER_KINDS)
def test_all_kinds_reduce_quadratic(kind):
    stepper = make_stepper(OptimizerConfig(kind=kind, learning_rate=0.05,
                                           momentum=0.5))
    xs = quadratic_trace(stepper, steps=60)
    assert abs(xs[-1]) < abs(xs[0])


# --- gradient perturbation ------------------------------------------------------------

def test_perturb_none_passthrough():
    g = np.array([0.3, -0.4])
    out, var = perturb_gradient(g, NoiseModel(kind="none"), None, 0)
    np.testing.assert_array_equal(out, g)
    assert np.all(var == 0)


def test_perturb_constant_variance_calibrated():
    g = np.zeros(2)
    noise = NoiseModel(kind="constant", variance=0.01)
    rng = np.random.default_rng(0)
    reps = 10 ** 5
    draws = np.array([perturb_gradient(g, noise, None, rng)[0] for _ in range(reps)])
    se = 0.01 * np.sqrt(2 / (reps - 1))
    assert np.all(np.abs(draws.var(axis=0, ddof=1) - 0.01) <= 3 * se)
    assert np.all(np.abs(draws.mean(axis=0)) <= 4 * np.sqrt(0.01 / reps))


def test_perturb_adaptive_zero_prev_grad_is_identity():
    circuit = electron_conserving_ansatz(4, [(0, 1), (1, 2)])
    problem = LossProblem(circuit, builtin_hamiltonian("ec4"), hf_state(4, 2))
    noise = NoiseModel(kind="adaptive", epsilon=0.5).bind(problem)
    g = np.array([0.3, -0.1])
    out, var = perturb_gradient(g, noise, np.zeros(2), 0)
    np.testing.assert_array_equal(out, g)
    assert np.all(var == 0)


def test_perturb_adaptive_requires_binding():
    with pytest.raises(ValueError):
        perturb_gradient(np.ones(2), NoiseModel(kind="adaptive"), np.ones(2), 0)


def test_noise_model_validation():
    with pytest.raises(ValueError):
        NoiseModel(kind="loud")
    with pytest.raises(ValueError):
        NoiseModel(kind="constant", variance=-0.1)
    with pytest.raises(ValueError):
        NoiseModel(kind="adaptive", formula="exotic")


# --- training loop -----------------------------------------------------------------------

def heisenberg_problem(num_qubits=4, blocks=2):
    from vqinit.circuits import xy_block_ansatz
    circuit = xy_block_ansatz(num_qubits, blocks)
    return LossProblem(circuit, heisenberg(num_qubits), zero_state(num_qubits))


def test_train_zero_iterations_records_initial_point():
    problem = heisenberg_problem()
    trace = train(problem, zero_init(), OptimizerConfig(), NoiseModel(), 0, 0)
    assert len(trace.loss) == 1
    assert trace.iteration[0] == 0
    assert np.isclose(trace.loss[0],
                      loss(problem, np.zeros(problem.circuit.num_params)))


def test_train_row_count():
    problem = heisenberg_problem()
    trace = train(problem, uniform_init(), OptimizerConfig(), NoiseModel(), 7, 1)
    assert np.array_equal(trace.iteration, np.arange(8))


def test_train_zero_init_noiseless_is_flat():
    problem = heisenberg_problem()
    trace = train(problem, zero_init(), OptimizerConfig(), NoiseModel(), 30, 0)
    assert np.ptp(trace.loss) <= 1e-10
    assert np.all(trace.grad_norm <= 1e-12)


def test_train_zero_init_constant_noise_escapes():
    problem = heisenberg_problem()
    noise = NoiseModel(kind="constant", variance=0.01)
    trace = train(problem, zero_init(), OptimizerConfig(), noise, 30, 0)
    assert trace.grad_norm[20] > trace.grad_norm[0]


def test_train_replay_is_identical():
    problem = heisenberg_problem()
    noise = NoiseModel(kind="constant", variance=0.01)
    a = train(problem, gaussian_init(0.01), OptimizerConfig(), noise, 12, 3)
    b = train(problem, gaussian_init(0.01), OptimizerConfig(), noise, 12, 3)
    assert a.params_digest() == b.params_digest()
    np.testing.assert_array_equal(a.loss, b.loss)
    np.testing.assert_array_equal(a.noise_variance, b.noise_variance)


def test_train_seed_changes_trajectory():
    problem = heisenberg_problem()
    a = train(problem, gaussian_init(0.01), OptimizerConfig(), NoiseModel(), 5, 0)
    b = train(problem, gaussian_init(0.01), OptimizerConfig(), NoiseModel(), 5, 1)
    assert a.params_digest() != b.params_digest()


def test_train_final_row_is_measurement_only():
    problem = heisenberg_problem()
    noise = NoiseModel(kind="constant", variance=0.01)
    trace = train(problem, gaussian_init(0.01), OptimizerConfig(), noise, 6, 0)
    assert np.all(trace.noise_variance[:-1] > 0)
    assert trace.noise_variance[-1] == 0


def test_train_adaptive_noise_on_chemistry_problem():
    circuit = electron_conserving_ansatz(4, [(0, 1), (1, 2), (2, 3)])
    problem = LossProblem(circuit, builtin_hamiltonian("ec4"), hf_state(4, 2))
    noise = NoiseModel(kind="adaptive", epsilon=0.5)
    trace = train(problem, gaussian_init(1e-3),
                  OptimizerConfig(learning_rate=0.1), noise, 20, 0)
    assert np.any(trace.noise_variance > 0)
    assert trace.loss[-1] < trace.loss[0]


def test_trace_csv_format(tmp_path):
    problem = heisenberg_problem()
    trace = train(problem, gaussian_init(0.01), OptimizerConfig(),
                  NoiseModel(), 3, 0)
    path = tmp_path / "trace.csv"
    write_trace_csv(trace, path)
    lines = path.read_text().splitlines()
    assert lines[0] == "iteration,loss,grad_norm,noise_variance,measurements_equiv"
    assert len(lines) == 5
    # noiseless rows report an infinite equivalent shot count
    assert lines[1].endswith("inf")
    row = lines[2].split(",")
    assert int(row[0]) == 1
    assert float(row[1]) == trace.loss[1]


def test_trace_csv_byte_identical(tmp_path):
    problem = heisenberg_problem()
    noise = NoiseModel(kind="constant", variance=0.01)
    pa, pb = tmp_path / "a.csv", tmp_path / "b.csv"
    write_trace_csv(train(problem, gaussian_init(0.01), OptimizerConfig(),
                          noise, 8, 5), pa)
    write_trace_csv(train(problem, gaussian_init(0.01), OptimizerConfig(),
                          noise, 8, 5), pb)
    assert pa.read_bytes() == pb.read_bytes()


def test_train_iterations_must_be_nonnegative():
    with pytest.raises(ValueError):
        train(heisenberg_problem(), zero_init(), OptimizerConfig(),
              NoiseModel(), -1, 0)
