"""Minimal dense-network machinery: forward/backward passes, Adam, and a
finite-difference gradient checker.

Everything operates on float64 numpy arrays. An MLP is a flat list of dense
layers with per-layer activation tags ('relu' or 'linear'); the forward pass
returns a cache consumed by the backward pass.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

ACTIVATIONS = ("relu", "linear")


@dataclass
class Mlp:
    """Dense network parameters: weights[k] is (in_dim, out_dim), biases[k] is (out_dim,)."""

    weights: list[np.ndarray]
    biases: list[np.ndarray]
    activations: list[str]

    def __post_init__(self):
        if not (len(self.weights) == len(self.biases) == len(self.activations)):
            raise ValueError("weights, biases and activations must have equal length")
        for act in self.activations:
            if act not in ACTIVATIONS:
                raise ValueError(f"unknown activation {act!r}")
        for k in range(len(self.weights) - 1):
            if self.weights[k].shape[1] != self.weights[k + 1].shape[0]:
                raise ValueError("consecutive layer dimensions do not chain")
        for W, b in zip(self.weights, self.biases):
            if W.shape[1] != b.shape[0]:
                raise ValueError("bias shape inconsistent with weight matrix")

    @property
    def in_dim(self) -> int:
        return self.weights[0].shape[0]

    @property
    def out_dim(self) -> int:
        return self.weights[-1].shape[1]

    def param_list(self) -> list[np.ndarray]:
        """Flat parameter list [W0, b0, W1, b1, ...] (aliases, not copies)."""
        out = []
        for W, b in zip(self.weights, self.biases):
            out.extend((W, b))
        return out

    def copy(self) -> "Mlp":
        return Mlp(
            [W.copy() for W in self.weights],
            [b.copy() for b in self.biases],
            list(self.activations),
        )


def glorot_init(in_dim: int, out_dim: int, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    """Glorot-uniform weight matrix and zero bias for one dense layer."""
    if in_dim < 1 or out_dim < 1:
        raise ValueError("layer dimensions must be >= 1")
    limit = np.sqrt(6.0 / (in_dim + out_dim))
    W = rng.uniform(-limit, limit, size=(in_dim, out_dim))
    b = np.zeros(out_dim)
    return W, b


def build_mlp(layer_sizes: Sequence[int], rng: np.random.Generator) -> Mlp:
    """Glorot-initialized MLP: ReLU on hidden layers, linear on the last."""
    if len(layer_sizes) < 2:
        raise ValueError("need at least input and output sizes")
    weights, biases, acts = [], [], []
    n_layers = len(layer_sizes) - 1
    for k in range(n_layers):
        W, b = glorot_init(layer_sizes[k], layer_sizes[k + 1], rng)
        weights.append(W)
        biases.append(b)
        acts.append("linear" if k == n_layers - 1 else "relu")
    return Mlp(weights, biases, acts)


def mlp_forward(X: np.ndarray, mlp: Mlp) -> tuple[np.ndarray, list]:
    """Forward pass. Returns output and a cache of (layer input, pre-activation) pairs."""
    if X.ndim != 2 or X.shape[1] != mlp.in_dim:
        raise ValueError(f"input has shape {X.shape}, expected (*, {mlp.in_dim})")
    cache = []
    A = X
    for W, b, act in zip(mlp.weights, mlp.biases, mlp.activations):
        Z = A @ W + b
        cache.append((A, Z))
        A = np.maximum(Z, 0.0) if act == "relu" else Z
    return A, cache


def mlp_backward(dY: np.ndarray, cache: list, mlp: Mlp) -> tuple[np.ndarray, list[np.ndarray]]:
    """Backward pass through the cached forward.

    Returns (dX, grads) with grads ordered like Mlp.param_list().
    """
    if len(cache) != len(mlp.weights):
        raise ValueError("cache does not match network depth")
    if dY.shape != (cache[-1][1].shape):
        raise ValueError("dY shape does not match forward output")
    grads: list[np.ndarray] = [None] * (2 * len(mlp.weights))  # type: ignore[list-item]
    dA = dY
    for k in range(len(mlp.weights) - 1, -1, -1):
        A_in, Z = cache[k]
        # ReLU subgradient at 0 taken as 0
        dZ = dA * (Z > 0.0) if mlp.activations[k] == "relu" else dA
        grads[2 * k] = A_in.T @ dZ
        grads[2 * k + 1] = dZ.sum(axis=0)
        dA = dZ @ mlp.weights[k].T
    return dA, grads


def softmax(logits: np.ndarray) -> np.ndarray:
    """Row-wise softmax, stabilized by max subtraction."""
    shifted = logits - logits.max(axis=1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=1, keepdims=True)


def softmax_cross_entropy(logits: np.ndarray, labels: np.ndarray) -> tuple[float, np.ndarray]:
    """Mean cross-entropy of row-wise softmax against integer labels.

    Returns (loss, dloss/dlogits); the gradient already carries the 1/rows factor.
    """
    labels = np.asarray(labels)
    n, m = logits.shape
    if labels.shape != (n,):
        raise ValueError("labels length must equal number of logit rows")
    if labels.min() < 0 or labels.max() >= m:
        raise ValueError("label out of range")
    shifted = logits - logits.max(axis=1, keepdims=True)
    log_z = np.log(np.exp(shifted).sum(axis=1))
    log_probs = shifted[np.arange(n), labels] - log_z
    loss = float(-log_probs.mean())
    dlogits = softmax(logits)
    dlogits[np.arange(n), labels] -= 1.0
    dlogits /= n
    return loss, dlogits


@dataclass
class Adam:
    """Adam optimizer over a flat list of parameter arrays (updated in place)."""

    params: list[np.ndarray]
    lr: float = 0.001
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8
    t: int = 0
    m: list[np.ndarray] = field(default_factory=list)
    v: list[np.ndarray] = field(default_factory=list)

    def __post_init__(self):
        if not self.m:
            self.m = [np.zeros_like(p) for p in self.params]
        if not self.v:
            self.v = [np.zeros_like(p) for p in self.params]

    def step(self, grads: list[np.ndarray]) -> None:
        if len(grads) != len(self.params):
            raise ValueError("gradient list does not match parameter list")
        self.t += 1
        b1t = 1.0 - self.beta1 ** self.t
        b2t = 1.0 - self.beta2 ** self.t
        for p, g, m, v in zip(self.params, grads, self.m, self.v):
            if g.shape != p.shape:
                raise ValueError("gradient shape does not match parameter shape")
            m *= self.beta1
            m += (1.0 - self.beta1) * g
            v *= self.beta2
            v += (1.0 - self.beta2) * g * g
            p -= self.lr * (m / b1t) / (np.sqrt(v / b2t) + self.epsilon)


def gradient_check(
    f: Callable[[np.ndarray], tuple[float, np.ndarray]],
    x: np.ndarray,
    h: float = 1e-5,
) -> float:
    """Max relative error between the analytic gradient of f and central differences.

    f maps a flat parameter vector to (value, gradient). The error for each
    component is |analytic - numeric| / max(1, |analytic|, |numeric|).
    """
    if h <= 0:
        raise ValueError("h must be positive")
    x = np.asarray(x, dtype=float)
    _, analytic = f(x)
    analytic = np.asarray(analytic, dtype=float)
    worst = 0.0
    for i in range(x.size):
        xp = x.copy()
        xp[i] += h
        fp, _ = f(xp)
        xm = x.copy()
        xm[i] -= h
        fm, _ = f(xm)
        if not (np.isfinite(fp) and np.isfinite(fm)):
            raise FloatingPointError("non-finite loss during gradient check")
        numeric = (fp - fm) / (2.0 * h)
        err = abs(analytic[i] - numeric) / max(1.0, abs(analytic[i]), abs(numeric))
        worst = max(worst, err)
    return worst


def flatten_arrays(arrays: Sequence[np.ndarray]) -> np.ndarray:
    return np.concatenate([a.ravel() for a in arrays])


def unflatten_like(vec: np.ndarray, templates: Sequence[np.ndarray]) -> list[np.ndarray]:
    out, pos = [], 0
    for t in templates:
        out.append(vec[pos : pos + t.size].reshape(t.shape))
        pos += t.size
    if pos != vec.size:
        raise ValueError("vector length does not match template sizes")
    return out
