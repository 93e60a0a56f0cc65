"""Lp norms, box clipping, and uniform sampling inside Lp balls."""

from __future__ import annotations

from enum import Enum

import numpy as np

from .errors import ShapeError


class Norm(Enum):
    L1 = "1"
    L2 = "2"
    LINF = "inf"


def lp_distance(x: np.ndarray, x_adv: np.ndarray, p: Norm) -> float:
    """Distance between two points under the given norm."""
    x = np.asarray(x, dtype=np.float64)
    x_adv = np.asarray(x_adv, dtype=np.float64)
    if x.shape != x_adv.shape:
        raise ShapeError(f"shape mismatch: {x.shape} vs {x_adv.shape}")
    delta = x_adv - x
    if p is Norm.L1:
        return float(np.sum(np.abs(delta)))
    if p is Norm.L2:
        return float(np.sqrt(np.sum(delta * delta)))
    return float(np.max(np.abs(delta))) if delta.size else 0.0


def dual_exponent(p: Norm) -> Norm:
    """Holder conjugate: 1 <-> inf, 2 <-> 2."""
    if p is Norm.L1:
        return Norm.LINF
    if p is Norm.LINF:
        return Norm.L1
    return Norm.L2


def clip_to_box(x: np.ndarray) -> np.ndarray:
    """Clamp every coordinate to the valid [0, 1] feature box."""
    return np.clip(np.asarray(x, dtype=np.float64), 0.0, 1.0)


def derive_seed(*parts: int) -> int:
    """Fold a tuple of integers into one reproducible stream seed."""
    return int(np.random.SeedSequence([int(p) & 0xFFFFFFFF for p in parts]).generate_state(1)[0])


def sample_in_ball(center: np.ndarray, radius: float, p: Norm, count: int, seed: int) -> np.ndarray:
    """Draw `count` points uniformly from the Lp ball around `center`.

    Exact constructions, no rejection: Linf is per-coordinate uniform; L2 uses
    a normalized Gaussian direction; L1 uses exponential spacings (cone
    measure on the cross-polytope surface). Both L1 and L2 scale the radius by
    U^(1/d) for uniformity over the ball volume. Points are deliberately NOT
    clipped to the feature box: clipping would pile mass onto the box boundary
    and bias downstream gradient statistics.

    Returns an array of shape (count, d), one sample per row.
    """
    if radius <= 0:
        raise ValueError(f"radius must be positive, got {radius}")
    center = np.asarray(center, dtype=np.float64).ravel()
    d = center.size
    rng = np.random.default_rng(seed)

    if p is Norm.LINF:
        offsets = rng.uniform(-radius, radius, size=(count, d))
    elif p is Norm.L2:
        directions = rng.standard_normal(size=(count, d))
        norms = np.linalg.norm(directions, axis=1, keepdims=True)
        norms[norms == 0] = 1.0
        radii = radius * rng.uniform(size=(count, 1)) ** (1.0 / d)
        offsets = directions / norms * radii
    else:
        spacings = rng.standard_exponential(size=(count, d))
        signs = rng.integers(0, 2, size=(count, d)) * 2 - 1
        surface = signs * spacings / np.sum(spacings, axis=1, keepdims=True)
        radii = radius * rng.uniform(size=(count, 1)) ** (1.0 / d)
        offsets = surface * radii

    return center[None, :] + offsets
