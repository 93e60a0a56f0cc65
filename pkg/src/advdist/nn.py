"""Dense/ReLU feed-forward classifiers with exact input gradients.

Everything runs in float64. The forward pass is a plain affine/ReLU
composition over numpy arrays; gradients of scalar objectives with respect
to the input are accumulated in reverse through the same layer stack, so the
two always agree bit-for-bit with each other's arithmetic. ReLU uses the
value-0 branch at the kink (derivative 0 at exactly 0).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ShapeError


@dataclass(frozen=True)
class Dense:
    """Affine layer: output = weights @ input + bias, weights row i = output neuron i."""

    weights: np.ndarray  # (out, in)
    bias: np.ndarray  # (out,)

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=np.float64)
        b = np.asarray(self.bias, dtype=np.float64)
        if w.ndim != 2:
            raise ShapeError(f"dense weights must be 2-D, got {w.ndim}-D")
        if b.shape != (w.shape[0],):
            raise ShapeError(f"bias length {b.shape} does not match {w.shape[0]} output rows")
        w.setflags(write=False)
        b.setflags(write=False)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "bias", b)


@dataclass(frozen=True)
class Relu:
    pass


Layer = Dense | Relu


@dataclass(frozen=True)
class Network:
    """Immutable stack of Dense/Relu layers ending in `num_classes` logits."""

    layers: tuple[Layer, ...]
    num_classes: int

    def __post_init__(self):
        object.__setattr__(self, "layers", tuple(self.layers))
        width = None
        for i, layer in enumerate(self.layers):
            if isinstance(layer, Dense):
                if width is not None and layer.weights.shape[1] != width:
                    raise ShapeError(
                        f"layer {i}: input width {layer.weights.shape[1]} "
                        f"does not chain with previous output width {width}"
                    )
                width = layer.weights.shape[0]
        if width is None:
            raise ShapeError("network has no dense layers")
        if width != self.num_classes:
            raise ShapeError(
                f"final layer width {width} does not match num_classes {self.num_classes}"
            )

    @property
    def input_dim(self) -> int:
        for layer in self.layers:
            if isinstance(layer, Dense):
                return layer.weights.shape[1]
        raise ShapeError("network has no dense layers")


@dataclass(frozen=True)
class Prediction:
    logits: np.ndarray
    label: int  # argmax, ties broken by lowest index


# Scalar objectives for input gradients.


@dataclass(frozen=True)
class CrossEntropyLoss:
    label: int


@dataclass(frozen=True)
class Logit:
    index: int


@dataclass(frozen=True)
class LogitDiff:
    """f_top - f_other, the margin used by score estimation and attacks."""

    top: int
    other: int


Objective = CrossEntropyLoss | Logit | LogitDiff


def _check_input(net: Network, X: np.ndarray) -> np.ndarray:
    X = np.asarray(X, dtype=np.float64)
    if X.shape[-1] != net.input_dim:
        raise ShapeError(
            f"input width {X.shape[-1]} does not match first layer width {net.input_dim}"
        )
    return X


def _forward_trace(net: Network, X: np.ndarray) -> tuple[np.ndarray, list[np.ndarray]]:
    """Run the batch forward pass, keeping each ReLU pre-activation for backprop."""
    h = X
    relu_inputs = []
    for layer in net.layers:
        if isinstance(layer, Dense):
            h = h @ layer.weights.T + layer.bias
        else:
            relu_inputs.append(h)
            h = np.maximum(h, 0.0)
    return h, relu_inputs


def forward_batch(net: Network, X: np.ndarray) -> np.ndarray:
    """Logits for a batch of inputs, shape (n, num_classes)."""
    X = _check_input(net, np.atleast_2d(X))
    logits, _ = _forward_trace(net, X)
    return logits


def forward(net: Network, x: np.ndarray) -> Prediction:
    """Deterministic forward pass for one input."""
    logits = forward_batch(net, x)[0]
    return Prediction(logits=logits, label=int(np.argmax(logits)))


def _backprop(net: Network, X: np.ndarray, grad_logits: np.ndarray) -> np.ndarray:
    """Pull a gradient at the logits back to the input, batched."""
    _, relu_inputs = _forward_trace(net, X)
    g = grad_logits
    for layer in reversed(net.layers):
        if isinstance(layer, Dense):
            g = g @ layer.weights
        else:
            g = g * (relu_inputs.pop() > 0.0)
    return g


def _check_class(net: Network, j: int) -> None:
    if not 0 <= j < net.num_classes:
        raise IndexError(f"class index {j} out of range for {net.num_classes} classes")


def input_gradient(net: Network, x: np.ndarray, objective: Objective) -> np.ndarray:
    """Exact gradient of a scalar objective with respect to the input.

    Objectives: CrossEntropyLoss(label) on softmaxed logits (log-sum-exp
    stabilized), Logit(j), or LogitDiff(top, other).
    """
    X = _check_input(net, np.atleast_2d(x))
    logits = forward_batch(net, X)
    seed = np.zeros_like(logits)
    if isinstance(objective, CrossEntropyLoss):
        _check_class(net, objective.label)
        z = logits - np.max(logits, axis=1, keepdims=True)
        softmax = np.exp(z) / np.sum(np.exp(z), axis=1, keepdims=True)
        seed = softmax
        seed[:, objective.label] -= 1.0
    elif isinstance(objective, Logit):
        _check_class(net, objective.index)
        seed[:, objective.index] = 1.0
    elif isinstance(objective, LogitDiff):
        _check_class(net, objective.top)
        _check_class(net, objective.other)
        seed[:, objective.top] += 1.0
        seed[:, objective.other] -= 1.0
    else:
        raise TypeError(f"unknown objective {objective!r}")
    grad = _backprop(net, X, seed)
    return grad[0] if np.asarray(x).ndim == 1 else grad


def logit_diff_gradient_batch(net: Network, X: np.ndarray, top: int, other: int) -> np.ndarray:
    """Gradient of f_top - f_other for every row of X at once, shape (n, d)."""
    _check_class(net, top)
    _check_class(net, other)
    X = _check_input(net, np.atleast_2d(X))
    seed = np.zeros((X.shape[0], net.num_classes))
    seed[:, top] = 1.0
    seed[:, other] = -1.0
    return _backprop(net, X, seed)
