"""L1 minimal-perturbation attack: elastic-net objective solved by ISTA."""

from __future__ import annotations

import time

import numpy as np

from ..geometry import Norm
from ..nn import LogitDiff, Network, forward, input_gradient
from .base import AttackResult, SecondAttackConfig, finish
from .carlini_wagner import _margin_and_runner_up


def _soft_threshold(v: np.ndarray, beta: float) -> np.ndarray:
    return np.sign(v) * np.maximum(np.abs(v) - beta, 0.0)


def ead_l1(net: Network, x: np.ndarray, y: int, cfg: SecondAttackConfig) -> AttackResult:
    """Minimize c * hinge(Z) + beta * ||delta||_1 + ||delta||_2^2 by ISTA.

    Each inner iteration takes a gradient step on the smooth part (hinge plus
    squared-L2), soft-thresholds the perturbation by beta, and projects back
    into the [0, 1] box. The penalty weight c follows the same outer search as
    the L2 attack. Decision rule: the successful iterate with the smallest L1
    distance across all rounds wins; no success anywhere yields a failure
    result.
    """
    started = time.perf_counter()
    x = np.asarray(x, dtype=np.float64)
    best_dist = np.inf
    best_x = None
    steps_done = 0

    def consider(candidate: np.ndarray) -> bool:
        nonlocal best_dist, best_x
        if forward(net, candidate).label == y:
            return False
        dist = np.sum(np.abs(candidate - x))
        if dist < best_dist:
            best_dist = dist
            best_x = candidate.copy()
        return True

    consider(x)

    c = cfg.initial_const
    c_low, c_high = 0.0, np.inf
    delta = np.zeros_like(x)
    for _ in range(cfg.binary_search_steps):
        delta = np.zeros_like(x)
        round_success = False
        for _ in range(cfg.iterations):
            x_cur = x + delta
            round_success |= consider(x_cur)
            margin, runner_up = _margin_and_runner_up(net, x_cur, y)
            grad = 2.0 * delta
            if margin > -cfg.kappa:
                grad = grad + c * input_gradient(net, x_cur, LogitDiff(y, runner_up))
            delta = _soft_threshold(delta - cfg.learning_rate * grad, cfg.beta)
            delta = np.clip(delta, -x, 1.0 - x)  # keep x + delta inside the box
            steps_done += 1
        round_success |= consider(x + delta)

        if round_success:
            c_high = min(c_high, c)
        else:
            c_low = max(c_low, c)
        c = (c_low + c_high) / 2.0 if np.isfinite(c_high) else c * 2.0

    if best_x is None:
        return AttackResult(
            x_adv=x + delta,
            success=False,
            distance=float(np.sum(np.abs(delta))),
            iterations_used=steps_done,
            wall_time=time.perf_counter() - started,
        )
    return finish(net, x, y, best_x, Norm.L1, steps_done, started)
