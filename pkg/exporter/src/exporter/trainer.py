"""Minimal full-batch Adam trainer for dense/ReLU classifiers."""

from __future__ import annotations

import numpy as np


class TrainingError(RuntimeError):
    """Raised when no restart reaches the required training accuracy."""


def init_params(rng: np.random.Generator, dims: list[int]):
    params = []
    for d_in, d_out in zip(dims, dims[1:]):
        params.append(
            (rng.normal(scale=np.sqrt(2.0 / d_in), size=(d_out, d_in)), np.zeros(d_out))
        )
    return params


def forward_logits(params, X: np.ndarray) -> np.ndarray:
    h = X
    for i, (W, b) in enumerate(params):
        h = h @ W.T + b
        if i < len(params) - 1:
            h = np.maximum(h, 0.0)
    return h


def accuracy(params, X, y) -> float:
    return float(np.mean(np.argmax(forward_logits(params, X), axis=1) == y))


def _gradients(params, X, y):
    activations = [X]
    pre = []
    h = X
    for i, (W, b) in enumerate(params):
        z = h @ W.T + b
        pre.append(z)
        h = np.maximum(z, 0.0) if i < len(params) - 1 else z
        activations.append(h)
    logits = activations[-1]
    shifted = logits - logits.max(axis=1, keepdims=True)
    probs = np.exp(shifted)
    probs /= probs.sum(axis=1, keepdims=True)
    delta = probs
    delta[np.arange(len(y)), y] -= 1.0
    delta /= len(y)

    grads = []
    for i in range(len(params) - 1, -1, -1):
        grads.append((delta.T @ activations[i], delta.sum(axis=0)))
        if i > 0:
            delta = (delta @ params[i][0]) * (pre[i - 1] > 0.0)
    return grads[::-1]


def train(
    X: np.ndarray,
    y: np.ndarray,
    hidden: tuple[int, ...],
    n_classes: int,
    rng: np.random.Generator,
    epochs: int = 300,
    learning_rate: float = 0.05,
    noise_amplitude: float = 0.0,
):
    """Train a dense/ReLU classifier; optional uniform input-noise augmentation."""
    dims = [X.shape[1], *hidden, n_classes]
    params = init_params(rng, dims)
    m = [(np.zeros_like(W), np.zeros_like(b)) for W, b in params]
    v = [(np.zeros_like(W), np.zeros_like(b)) for W, b in params]
    for step in range(1, epochs + 1):
        batch = X
        if noise_amplitude > 0.0:
            batch = np.clip(X + rng.uniform(-noise_amplitude, noise_amplitude, size=X.shape), 0.0, 1.0)
        grads = _gradients(params, batch, y)
        new_params = []
        for i, ((W, b), (gW, gb)) in enumerate(zip(params, grads)):
            mW = 0.9 * m[i][0] + 0.1 * gW
            mb = 0.9 * m[i][1] + 0.1 * gb
            vW = 0.999 * v[i][0] + 0.001 * gW**2
            vb = 0.999 * v[i][1] + 0.001 * gb**2
            m[i], v[i] = (mW, mb), (vW, vb)
            corr_m = 1.0 - 0.9**step
            corr_v = 1.0 - 0.999**step
            W = W - learning_rate * (mW / corr_m) / (np.sqrt(vW / corr_v) + 1e-8)
            b = b - learning_rate * (mb / corr_m) / (np.sqrt(vb / corr_v) + 1e-8)
            new_params.append((W, b))
        params = new_params
    return params
