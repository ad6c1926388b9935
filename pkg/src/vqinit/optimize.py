"""First-order optimizers, gradient-noise models, and the training loop."""
from __future__ import annotations

import time
from dataclasses import dataclass, replace

import numpy as np

from .gradients import LossProblem, grad_and_loss, grad_norm_sq
from .initializers import InitStrategy, adaptive_noise_variance, sample
from .observables import spectral_norm

OPTIMIZER_KINDS = ("gd", "momentum", "nag", "adagrad", "adam")
NOISE_KINDS = ("none", "constant", "adaptive")


@dataclass(frozen=True)
class OptimizerConfig:
    kind: str = "gd"
    learning_rate: float = 0.01
    momentum: float = 0.9
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8

    def __post_init__(self):
        if self.kind not in OPTIMIZER_KINDS:
            raise ValueError(f"unknown optimizer {self.kind!r}")
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be > 0")
        # zero betas are legal: they degrade momentum to GD and Adam to its
        # sign-normalized limit
        for name in ("momentum", "beta1", "beta2"):
            v = getattr(self, name)
            if not 0 <= v < 1:
                raise ValueError(f"{name} must be in [0, 1), got {v}")


class GradientDescent:
    def __init__(self, cfg: OptimizerConfig):
        self.lr = cfg.learning_rate

    def step(self, params: np.ndarray, grad: np.ndarray) -> np.ndarray:
        return params - self.lr * grad


class Momentum:
    """Heavy-ball: v <- beta v - lr g, theta <- theta + v."""

    def __init__(self, cfg: OptimizerConfig):
        self.lr, self.beta = cfg.learning_rate, cfg.momentum
        self.v = None

    def step(self, params, grad):
        if self.v is None:
            self.v = np.zeros_like(params)
        self.v = self.beta * self.v - self.lr * grad
        return params + self.v


class Nag:
    """Nesterov accelerated gradient in its lookahead-free form:
    v <- beta v - lr g, theta <- theta + beta v - lr g."""

    def __init__(self, cfg: OptimizerConfig):
        self.lr, self.beta = cfg.learning_rate, cfg.momentum
        self.v = None

    def step(self, params, grad):
        if self.v is None:
            self.v = np.zeros_like(params)
        self.v = self.beta * self.v - self.lr * grad
        return params + self.beta * self.v - self.lr * grad


class AdaGrad:
    def __init__(self, cfg: OptimizerConfig):
        self.lr, self.eps = cfg.learning_rate, cfg.epsilon
        self.acc = None

    def step(self, params, grad):
        if self.acc is None:
            self.acc = np.zeros_like(params)
        self.acc = self.acc + grad ** 2
        return params - self.lr * grad / (np.sqrt(self.acc) + self.eps)


class Adam:
    def __init__(self, cfg: OptimizerConfig):
        self.lr = cfg.learning_rate
        self.b1, self.b2, self.eps = cfg.beta1, cfg.beta2, cfg.epsilon
        self.m = None
        self.v = None
        self.t = 0

    def step(self, params, grad):
        if self.m is None:
            self.m = np.zeros_like(params)
            self.v = np.zeros_like(params)
        self.t += 1
        self.m = self.b1 * self.m + (1 - self.b1) * grad
        self.v = self.b2 * self.v + (1 - self.b2) * grad ** 2
        m_hat = self.m / (1 - self.b1 ** self.t)
        v_hat = self.v / (1 - self.b2 ** self.t)
        return params - self.lr * m_hat / (np.sqrt(v_hat) + self.eps)


_STEPPERS = {"gd": GradientDescent, "momentum": Momentum, "nag": Nag,
             "adagrad": AdaGrad, "adam": Adam}


def make_stepper(cfg: OptimizerConfig):
    return _STEPPERS[cfg.kind](cfg)


@dataclass(frozen=True)
class NoiseModel:
    """Additive Gaussian noise on the gradient before each update.

    kind "none": exact gradients. "constant": every component gets variance
    `variance`. "adaptive": per-component variance from the previous
    gradient via adaptive_noise_variance; bind() fills the circuit- and
    observable-dependent fields before use.
    """
    kind: str = "none"
    variance: float = 0.0
    epsilon: float = 0.5
    formula: str = "bound"
    occurrences: np.ndarray | None = None
    scales: np.ndarray | None = None
    num_params: int | None = None
    norm_obs: float | None = None

    def __post_init__(self):
        if self.kind not in NOISE_KINDS:
            raise ValueError(f"unknown noise kind {self.kind!r}")
        if self.kind == "constant" and (self.variance < 0
                                        or not np.isfinite(self.variance)):
            raise ValueError("constant noise needs a finite variance >= 0")
        if self.formula not in ("bound", "simple"):
            raise ValueError(f"unknown adaptive formula {self.formula!r}")

    def bind(self, problem: LossProblem) -> "NoiseModel":
        if self.kind != "adaptive":
            return self
        c = problem.circuit
        return replace(self, occurrences=c.h, scales=c.scales,
                       num_params=c.num_params,
                       norm_obs=spectral_norm(problem.hamiltonian))


def perturb_gradient(grad: np.ndarray, noise: NoiseModel,
                     prev_grad: np.ndarray | None, seed_or_rng):
    """Returns (noisy gradient, per-component variance used)."""
    grad = np.asarray(grad, dtype=float)
    if noise.kind == "none":
        return grad, np.zeros_like(grad)
    rng = seed_or_rng if isinstance(seed_or_rng, np.random.Generator) \
        else np.random.default_rng(seed_or_rng)
    if noise.kind == "constant":
        var = np.full_like(grad, noise.variance)
    else:
        if noise.num_params is None:
            raise ValueError("adaptive noise model is unbound; call bind() first")
        if prev_grad is None:
            raise ValueError("adaptive noise needs the previous gradient")
        var = adaptive_noise_variance(
            np.asarray(prev_grad, dtype=float) ** 2, noise.occurrences,
            noise.scales, noise.num_params, noise.epsilon, noise.norm_obs,
            noise.formula)
        var = np.broadcast_to(var, grad.shape)
    return grad + rng.standard_normal(grad.shape) * np.sqrt(var), var


@dataclass
class TrainTrace:
    """Per-iteration history; row t is measured before update t, and the last
    row is the state after the final update (no noise draw happens there)."""
    iteration: np.ndarray
    loss: np.ndarray
    grad_norm: np.ndarray
    noise_variance: np.ndarray
    final_params: np.ndarray
    seed: int
    wall_time_s: float

    def final_loss(self) -> float:
        return float(self.loss[-1])

    def params_digest(self) -> str:
        """sha256 of the terminal parameter bytes; cheap equality check for
        replay tests without storing full vectors in summaries."""
        import hashlib
        return hashlib.sha256(
            np.ascontiguousarray(self.final_params).tobytes()).hexdigest()

    def to_csv(self, path) -> None:
        write_trace_csv(self, path)


def write_trace_csv(trace: TrainTrace, path) -> None:
    """measurements_equiv = 1/variance, the shot count whose sampling noise
    the added variance emulates; inf for noiseless rows."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("iteration,loss,grad_norm,noise_variance,measurements_equiv\n")
        for t, lo, gn, nv in zip(trace.iteration, trace.loss, trace.grad_norm,
                                 trace.noise_variance):
            meas = float(np.inf if nv == 0 else 1.0 / nv)
            fh.write(f"{int(t)},{float(lo)!r},{float(gn)!r},"
                     f"{float(nv)!r},{meas!r}\n")


def train(problem: LossProblem, init: InitStrategy, optimizer: OptimizerConfig,
          noise: NoiseModel, iterations: int, seed: int) -> TrainTrace:
    """Gradient descent variants with optional gradient perturbation.

    One seeded stream drives both the initial draw and every noise draw, so a
    trace is a pure function of (problem, configs, iterations, seed). The
    adaptive noise at iteration 0 has no previous gradient and uses the
    current one.
    """
    if iterations < 0:
        raise ValueError("iterations must be >= 0")
    start = time.perf_counter()
    rng = np.random.default_rng(seed)
    params = sample(init, problem.num_params, rng)
    stepper = make_stepper(optimizer)
    noise = noise.bind(problem)
    n_rows = iterations + 1
    loss_hist = np.empty(n_rows)
    norm_hist = np.empty(n_rows)
    var_hist = np.zeros(n_rows)
    prev_grad = None
    for t in range(iterations):
        grad, loss_val = grad_and_loss(problem, params)
        noisy, var = perturb_gradient(
            grad, noise, grad if prev_grad is None else prev_grad, rng)
        loss_hist[t] = loss_val
        norm_hist[t] = np.sqrt(grad_norm_sq(grad))
        var_hist[t] = float(np.mean(var))
        params = stepper.step(params, noisy)
        prev_grad = grad
    grad, loss_val = grad_and_loss(problem, params)
    loss_hist[iterations] = loss_val
    norm_hist[iterations] = np.sqrt(grad_norm_sq(grad))
    return TrainTrace(iteration=np.arange(n_rows), loss=loss_hist,
                      grad_norm=norm_hist, noise_variance=var_hist,
                      final_params=params, seed=seed,
                      wall_time_s=time.perf_counter() - start)
