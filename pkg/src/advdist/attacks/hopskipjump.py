"""Decision-based boundary attack: label queries only, no gradients."""

from __future__ import annotations

import time
from typing import Callable

import numpy as np

from ..geometry import Norm, clip_to_box, lp_distance
from ..nn import Network, forward, forward_batch
from .base import AttackResult, SecondAttackConfig, finish


def bisect_to_boundary(
    is_adversarial: Callable[[np.ndarray], bool],
    x_clean: np.ndarray,
    x_adv: np.ndarray,
    p: Norm,
    theta: float,
) -> np.ndarray:
    """Binary-search the segment [x_clean, x_adv] down to the decision boundary.

    Keeps the adversarial endpoint, shrinking the bracket until the endpoints
    are within theta of each other in norm p, so the returned point sits
    within theta of the true boundary crossing along the segment.
    """
    low = np.asarray(x_clean, dtype=np.float64)
    high = np.asarray(x_adv, dtype=np.float64)
    while lp_distance(low, high, p) > theta:
        mid = (low + high) / 2.0
        if is_adversarial(mid):
            high = mid
        else:
            low = mid
    return high


def hopskipjump(net: Network, x: np.ndarray, y: int, cfg: SecondAttackConfig) -> AttackResult:
    """Boundary walk driven entirely by predicted labels.

    Starts from a uniformly drawn misclassified point (up to cfg.init_trials
    attempts, else failure), bisects onto the boundary, estimates the
    boundary-normal direction from Monte-Carlo label agreement over random
    probes, and takes a geometrically shrinking step along it; repeated
    cfg.iterations times. Distances follow cfg.p (L2 or Linf variant).
    """
    started = time.perf_counter()
    x = np.asarray(x, dtype=np.float64)
    d = x.size
    theta = 0.01 / d
    rng = np.random.default_rng(cfg.seed)

    def is_adversarial(z: np.ndarray) -> bool:
        return forward(net, z).label != y

    current = None
    for _ in range(cfg.init_trials):
        candidate = rng.uniform(0.0, 1.0, size=d)
        if is_adversarial(candidate):
            current = candidate
            break
    if current is None:
        return AttackResult(
            x_adv=x.copy(),
            success=False,
            distance=0.0,
            iterations_used=0,
            wall_time=time.perf_counter() - started,
        )

    for t in range(1, cfg.iterations + 1):
        boundary = bisect_to_boundary(is_adversarial, x, current, cfg.p, theta)
        dist = lp_distance(x, boundary, cfg.p)
        n_probes = min(1000, int(100 * np.sqrt(t)))
        probe_radius = max(theta, dist / d)

        probes = rng.standard_normal(size=(n_probes, d))
        probes /= np.linalg.norm(probes, axis=1, keepdims=True)
        queried = clip_to_box(boundary[None, :] + probe_radius * probes)
        labels = np.argmax(forward_batch(net, queried), axis=1)
        signs = np.where(labels != y, 1.0, -1.0)
        if np.all(signs == signs[0]):
            # all probes landed on one side: walk along/against their mean
            direction = signs[0] * probes.mean(axis=0)
        else:
            direction = (signs - signs.mean()) @ probes
        norm = np.linalg.norm(direction)
        if norm == 0.0:
            direction, norm = probes[0], 1.0
        direction = direction / norm
        if cfg.p is Norm.LINF:
            direction = np.sign(direction)
            direction[direction == 0.0] = 1.0

        step = dist / np.sqrt(t)
        moved = boundary
        for _ in range(30):
            candidate = clip_to_box(boundary + step * direction)
            if is_adversarial(candidate):
                moved = candidate
                break
            step /= 2.0
        current = moved

    final = bisect_to_boundary(is_adversarial, x, current, cfg.p, theta)
    return finish(net, x, y, final, cfg.p, cfg.iterations, started)
