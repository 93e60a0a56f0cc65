"""Single-step projected gradient ascent and the early-stopping attack loop."""

from __future__ import annotations

import time

import numpy as np

from ..geometry import Norm, clip_to_box, lp_distance
from ..nn import CrossEntropyLoss, Network, forward, input_gradient
from .base import AttackConfig, AttackResult, finish


def pgd_single_step(
    net: Network,
    x: np.ndarray,
    y: int,
    eps_step: float,
    p: Norm,
    l1_greedy: bool = True,
) -> np.ndarray:
    """One ascent step of size eps_step (in norm p) on the cross-entropy loss.

    Linf moves every coordinate by eps_step * sign(g); L2 moves along
    g / ||g||_2. The default L1 step puts the whole eps_step on the single
    best usable coordinate (steepest ascent under the L1 constraint), falling
    back to the next coordinate when the box pins the best one; pass
    l1_greedy=False for the dense g / ||g||_1 convention, which trades
    tightness for smoother paths. Zero gradient is a no-op. Result is
    box-clipped.
    """
    x = np.asarray(x, dtype=np.float64)
    g = input_gradient(net, x, CrossEntropyLoss(y))
    if not np.any(g):
        return x.copy()
    if p is Norm.LINF:
        return clip_to_box(x + eps_step * np.sign(g))
    if p is Norm.L2:
        return clip_to_box(x + eps_step * g / np.linalg.norm(g))
    if not l1_greedy:
        return clip_to_box(x + eps_step * g / np.sum(np.abs(g)))
    for i in np.argsort(-np.abs(g)):
        if g[i] == 0.0:
            break
        moved = min(1.0, max(0.0, x[i] + eps_step * np.sign(g[i])))
        if moved != x[i]:
            x_new = x.copy()
            x_new[i] = moved
            return x_new
    return x.copy()


def early_stopping_attack(net: Network, x: np.ndarray, y: int, cfg: AttackConfig) -> AttackResult:
    """Iterate single steps, stopping at the first predicted-label flip.

    Requires x to be classified as y. Each non-flipping iterate becomes the
    next starting point; the reported distance is always measured from the
    original x. Exhausting max_iters without a flip yields success=False with
    the final iterate attached.
    """
    started = time.perf_counter()
    x = np.asarray(x, dtype=np.float64)
    if forward(net, x).label != y:
        raise ValueError("early_stopping_attack requires an input the network classifies as y")
    current = x
    for iteration in range(1, cfg.max_iters + 1):
        current = pgd_single_step(net, current, y, cfg.eps_step, cfg.p)
        if forward(net, current).label != y:
            return finish(net, x, y, current, cfg.p, iteration, started)
    return AttackResult(
        x_adv=current,
        success=False,
        distance=lp_distance(x, current, cfg.p),
        iterations_used=cfg.max_iters,
        wall_time=time.perf_counter() - started,
    )


# A one-step gradient-sign attack iterated with early stopping is exactly the
# Linf instance of the loop above, so it is exposed as an alias rather than a
# second implementation.
fgsm_with_early_stopping = early_stopping_attack
