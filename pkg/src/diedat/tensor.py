"""Dense numerics core: the handful of operations the classifiers need.

Vectors and matrices are plain float64 numpy arrays (row-major). Anything a
backward pass needs is cached by the caller; this module stays stateless
apart from explicit Rng handles.
"""

from dataclasses import dataclass

import numpy as np

from diedat.errors import ConfigError, ContractError, GradCheckError

# one fixed, documented generator: PCG64 seeded directly
Rng = np.random.Generator


def make_rng(seed) -> Rng:
    """Seeded PCG64 generator; identical seed gives an identical stream."""
    return np.random.Generator(np.random.PCG64(seed))


def uniform_init(rng: Rng, shape, radius: float) -> np.ndarray:
    """Uniform sample on [-radius, +radius]."""
    return rng.uniform(-radius, radius, size=shape)


def sigmoid(x):
    # tanh form stays finite for large |x|
    return 0.5 * (1.0 + np.tanh(0.5 * np.asarray(x, dtype=np.float64)))


tanh = np.tanh
add = np.add
multiply = np.multiply
concat = np.concatenate


def linear(x: np.ndarray, W: np.ndarray, b: np.ndarray) -> np.ndarray:
    """W @ x + b with shape validation."""
    if W.ndim != 2 or x.shape != (W.shape[1],) or b.shape != (W.shape[0],):
        raise ContractError(
            f"linear: shapes do not conform, x{x.shape} W{W.shape} b{b.shape}"
        )
    return W @ x + b


def softmax(v: np.ndarray) -> np.ndarray:
    """Probability distribution over v, computed with max-subtraction."""
    if v.size < 1:
        raise ContractError("softmax: empty input")
    e = np.exp(v - v.max())
    return e / e.sum()


def maxpool_over_time(H: np.ndarray) -> np.ndarray:
    """Elementwise max over the time (row) axis of H[T, d]."""
    if H.ndim != 2 or H.shape[0] < 1:
        raise ContractError(f"maxpool_over_time: need a non-empty [T, d] input, got {H.shape}")
    return H.max(axis=0)


def dropout_mask(rng: Rng, shape, p: float) -> np.ndarray:
    """Inverted-dropout mask: zeros with probability p, survivors 1/(1-p)."""
    if not 0.0 <= p < 1.0:
        raise ConfigError(f"dropout probability must be in [0, 1), got {p}")
    if p == 0.0:
        return np.ones(shape)
    return (rng.random(shape) >= p) / (1.0 - p)


def dropout(x: np.ndarray, p: float, training: bool, rng: Rng | None = None) -> np.ndarray:
    """Inverted dropout: identity in evaluation mode, mask-and-rescale in training."""
    if not 0.0 <= p < 1.0:
        raise ConfigError(f"dropout probability must be in [0, 1), got {p}")
    if not training or p == 0.0:
        return x
    return x * dropout_mask(rng, x.shape, p)


@dataclass
class GradCheckResult:
    """Worst coordinate found by grad_check."""

    max_rel_error: float
    param: str
    index: tuple
    analytic: float
    numeric: float


def grad_check(f, params: dict, epsilon: float = 1e-5) -> GradCheckResult:
    """Compare f's analytic gradients against central finite differences.

    f(params) must return (loss, grads) where grads maps every key of params
    to an array of matching shape. params is perturbed in place per
    coordinate and restored. Relative error per coordinate is
    |a - n| / max(|a|, |n|, 1e-8).
    """
    loss0, grads = f(params)
    if not np.isfinite(loss0):
        raise GradCheckError(f"loss is non-finite at the unperturbed point: {loss0}")
    worst = GradCheckResult(0.0, "", (), 0.0, 0.0)
    for name, arr in params.items():
        analytic = grads[name]
        for idx in np.ndindex(arr.shape):
            orig = arr[idx]
            arr[idx] = orig + epsilon
            lp, _ = f(params)
            arr[idx] = orig - epsilon
            lm, _ = f(params)
            arr[idx] = orig
            if not (np.isfinite(lp) and np.isfinite(lm)):
                raise GradCheckError(f"non-finite loss while perturbing {name}{idx}")
            numeric = (lp - lm) / (2.0 * epsilon)
            a = float(analytic[idx])
            rel = abs(a - numeric) / max(abs(a), abs(numeric), 1e-8)
            if rel > worst.max_rel_error:
                worst = GradCheckResult(rel, name, idx, a, numeric)
    return worst
