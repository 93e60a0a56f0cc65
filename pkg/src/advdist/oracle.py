"""Independent ground truth for tests: affine closed forms and 2-D brute force."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ShapeError
from .geometry import Norm, clip_to_box, dual_exponent, lp_distance
from .nn import Dense, Network, forward, forward_batch


@dataclass(frozen=True)
class AffineClassifier:
    """Linear classifier, logits = weights @ x + bias."""

    weights: np.ndarray  # (classes, d)
    bias: np.ndarray  # (classes,)

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=np.float64)
        b = np.asarray(self.bias, dtype=np.float64)
        if w.ndim != 2 or w.shape[0] < 2:
            raise ShapeError("affine classifier needs a (classes >= 2, d) weight matrix")
        if b.shape != (w.shape[0],):
            raise ShapeError("bias length does not match class count")
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "bias", b)

    def logits(self, x: np.ndarray) -> np.ndarray:
        return self.weights @ np.asarray(x, dtype=np.float64) + self.bias

    def as_network(self) -> Network:
        return Network(layers=(Dense(self.weights, self.bias),), num_classes=self.weights.shape[0])


def affine_min_distance(clf: AffineClassifier, x: np.ndarray, p: Norm) -> tuple[float, int | None]:
    """Exact minimal Lp distance from x to the nearest decision boundary.

    For an affine classifier the boundary to class j is the hyperplane where
    the logit margin vanishes, so the distance is margin / dual-norm of the
    weight-row difference. The [0, 1] box is ignored; callers that compare
    against box-constrained attacks must pick interior points.

    Returns (distance, nearest_class); (inf, None) if every other class has
    an identical weight row, in which case no boundary exists.
    """
    logits = clf.logits(x)
    c = int(np.argmax(logits))
    q = dual_exponent(p)
    best = math.inf
    best_class: int | None = None
    for j in range(clf.weights.shape[0]):
        if j == c:
            continue
        w_diff = clf.weights[c] - clf.weights[j]
        denom = lp_distance(np.zeros_like(w_diff), w_diff, q)
        if denom == 0.0:
            continue
        dist = (logits[c] - logits[j]) / denom
        if dist < best:
            best = dist
            best_class = j
    return best, best_class


def brute_force_min_distance(
    net: Network,
    x: np.ndarray,
    p: Norm,
    grid_step: float,
    search_radius: float,
) -> float:
    """Exhaustive minimal adversarial distance for 2-D inputs.

    Scans the axis-aligned grid of pitch `grid_step` covering the box-clipped
    square of half-width `search_radius` around x and returns the smallest
    Lp distance to any grid point the network labels differently. Exact up to
    the grid resolution. Returns inf when no flip exists within the grid.
    """
    x = np.asarray(x, dtype=np.float64).ravel()
    if x.size != 2:
        raise ValueError(f"brute force requires 2-D inputs, got dimension {x.size}")
    lo = np.maximum(x - search_radius, 0.0)
    hi = np.minimum(x + search_radius, 1.0)
    axes = [np.arange(lo[k], hi[k] + grid_step / 2, grid_step) for k in range(2)]
    n_points = len(axes[0]) * len(axes[1])
    if n_points > 10**7:
        raise ValueError(f"grid of {n_points} points exceeds the 1e7 budget")

    label = forward(net, x).label
    g0, g1 = np.meshgrid(axes[0], axes[1], indexing="ij")
    points = np.column_stack([g0.ravel(), g1.ravel()])
    best = math.inf
    for chunk in np.array_split(points, max(1, n_points // 200_000)):
        preds = np.argmax(forward_batch(net, clip_to_box(chunk)), axis=1)
        flipped = chunk[preds != label]
        if flipped.size == 0:
            continue
        delta = flipped - x
        if p is Norm.L1:
            dists = np.sum(np.abs(delta), axis=1)
        elif p is Norm.L2:
            dists = np.sqrt(np.sum(delta * delta, axis=1))
        else:
            dists = np.max(np.abs(delta), axis=1)
        best = min(best, float(np.min(dists)))
    return best
