"""Parameter initialization strategies and variance formulas.

The Gaussian variances shrink with circuit depth so that early gradients
keep a depth-independent (rather than exponentially small) scale.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

TWO_PI = 2.0 * np.pi


@dataclass(frozen=True)
class InitStrategy:
    """How to draw the initial parameter vector.

    kind: "zero", "uniform" (low..high), or "gaussian" (mean zero).
    variance: scalar or per-parameter array, gaussian only.
    """
    kind: str
    variance: float | np.ndarray | None = None
    low: float = 0.0
    high: float = TWO_PI

    def __post_init__(self):
        if self.kind not in ("zero", "uniform", "gaussian"):
            raise ValueError(f"unknown init kind {self.kind!r}")
        if self.kind == "gaussian":
            v = np.asarray(self.variance, dtype=float)
            if self.variance is None or np.any(v < 0) or not np.all(np.isfinite(v)):
                raise ValueError("gaussian init needs a finite variance >= 0")
        if self.kind == "uniform" and not self.high > self.low:
            raise ValueError("uniform init needs high > low")


def zero_init() -> InitStrategy:
    return InitStrategy("zero")


def uniform_init(low: float = 0.0, high: float = TWO_PI) -> InitStrategy:
    return InitStrategy("uniform", low=low, high=high)


def gaussian_init(variance) -> InitStrategy:
    return InitStrategy("gaussian", variance=variance)


def _as_rng(seed_or_rng) -> np.random.Generator:
    if isinstance(seed_or_rng, np.random.Generator):
        return seed_or_rng
    return np.random.default_rng(seed_or_rng)


def sample_batch(strategy: InitStrategy, num_params: int, num_samples: int,
                 seed_or_rng) -> np.ndarray:
    """(num_samples, num_params) parameter draws from one stream."""
    rng = _as_rng(seed_or_rng)
    shape = (num_samples, num_params)
    if strategy.kind == "zero":
        return np.zeros(shape)
    if strategy.kind == "uniform":
        return rng.uniform(strategy.low, strategy.high, size=shape)
    sigma = np.sqrt(np.broadcast_to(np.asarray(strategy.variance, dtype=float),
                                    (num_params,)))
    return rng.standard_normal(shape) * sigma


def sample(strategy: InitStrategy, num_params: int, seed_or_rng) -> np.ndarray:
    """One initial parameter vector."""
    return sample_batch(strategy, num_params, 1, seed_or_rng)[0]


# ---------------------------------------------------------------------------
# Variance formulas
# ---------------------------------------------------------------------------

def variance_local(locality: int, layers: int) -> float:
    """Gaussian variance 1 / (4 S (L + 2)) for an S-local observable and L
    trainable layers of a hardware-efficient circuit."""
    if locality < 1 or layers < 1:
        raise ValueError("need locality >= 1 and layers >= 1")
    return 1.0 / (4.0 * locality * (layers + 2))


def variance_global(scale, occurrences, num_params, epsilon, grad0_sq,
                    norm_obs) -> float:
    """Largest variance that keeps E (df/dtheta)^2 >= (1-eps) grad0_sq.

    grad0_sq is the squared derivative component at the expansion point. A
    zero value makes the guarantee vacuous; the returned variance is then 0
    and a warning flags the degenerate bound.
    """
    a = np.asarray(scale, dtype=float)
    h = np.asarray(occurrences, dtype=float)
    if np.any(h < 1):
        raise ValueError("occurrence counts must be >= 1")
    if epsilon <= 0:
        raise ValueError("epsilon must be > 0")
    if norm_obs <= 0 or num_params < 1:
        raise ValueError("need norm_obs > 0 and num_params >= 1")
    if np.all(np.asarray(grad0_sq) == 0):
        warnings.warn("grad0_sq is zero: the component bound is degenerate "
                      "and the returned variance is 0", RuntimeWarning,
                      stacklevel=2)
    denom = 16.0 * h ** 2 * (3.0 * h * (h - 1.0) + 1.0) * num_params * norm_obs ** 2
    out = a ** 2 * epsilon * np.asarray(grad0_sq, dtype=float) / denom
    return float(out) if out.ndim == 0 else out


def variance_shared_simple(occurrences, num_params, epsilon) -> float:
    """Coarser shared-parameter variance eps / (48 h^2 L), independent of the
    gradient at the expansion point; handy before any gradient is known."""
    h = np.asarray(occurrences, dtype=float)
    if np.any(h < 1):
        raise ValueError("occurrence counts must be >= 1")
    if epsilon <= 0:
        raise ValueError("epsilon must be > 0")
    if num_params < 1:
        raise ValueError("need num_params >= 1")
    out = epsilon / (48.0 * h ** 2 * num_params)
    return float(out) if out.ndim == 0 else out


def adaptive_noise_variance(grad_prev_sq, occurrences, scale, num_params,
                            epsilon, norm_obs, formula: str = "bound"):
    """Per-component variance for gradient perturbation during training.

    Scales with the previous iterate's squared gradient component so the
    perturbed update keeps most of the true signal. formula "bound" uses the
    same constant as variance_global; "simple" uses eps g^2 / (48 h^2 L |O|^2).
    """
    g2 = np.asarray(grad_prev_sq, dtype=float)
    if np.any(g2 < 0):
        raise ValueError("squared gradients must be >= 0")
    h = np.asarray(occurrences, dtype=float)
    a = np.asarray(scale, dtype=float)
    if epsilon <= 0:
        raise ValueError("epsilon must be > 0")
    if norm_obs <= 0 or num_params < 1:
        raise ValueError("need norm_obs > 0 and num_params >= 1")
    if formula == "bound":
        denom = (16.0 * h ** 2 * (3.0 * h * (h - 1.0) + 1.0)
                 * num_params * norm_obs ** 2)
        out = a ** 2 * epsilon * g2 / denom
    elif formula == "simple":
        out = epsilon * g2 / (48.0 * h ** 2 * num_params * norm_obs ** 2)
    else:
        raise ValueError(f"unknown formula {formula!r}")
    return float(out) if out.ndim == 0 else out
