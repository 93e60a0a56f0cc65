"""Shared attack configuration and result types."""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from ..errors import ConfigError
from ..geometry import Norm, lp_distance
from ..nn import Network, forward


@dataclass(frozen=True)
class AttackConfig:
    """Parameters of the early-stopping iterative attack."""

    p: Norm
    eps_step: float
    max_iters: int
    seed: int = 0

    def __post_init__(self):
        if self.eps_step <= 0:
            raise ConfigError(f"eps_step must be positive, got {self.eps_step}")
        if self.max_iters < 1:
            raise ConfigError(f"max_iters must be positive, got {self.max_iters}")

    @property
    def budget(self) -> float:
        """Total perturbation budget, max_iters * eps_step."""
        return self.max_iters * self.eps_step


#: Native norms per second-attack kind; dispatch validates against these.
NATIVE_NORMS = {
    "hopskipjump": (Norm.L2, Norm.LINF),
    "carlini_wagner_l2": (Norm.L2,),
    "ead_l1": (Norm.L1,),
    "deepfool_l2": (Norm.L2,),
}


@dataclass(frozen=True)
class SecondAttackConfig:
    """Parameters of the minimal-perturbation second attack.

    Only the fields relevant to `kind` are read: kappa/learning_rate/
    initial_const/binary_search_steps drive the Carlini-Wagner optimizer,
    beta additionally drives the elastic-net attack, overshoot drives
    DeepFool, and init_trials/seed drive HopSkipJump.
    """

    kind: str
    iterations: int = 40
    p: Norm = Norm.L2
    kappa: float = 0.0
    learning_rate: float = 0.01
    initial_const: float = 1e-3
    binary_search_steps: int = 9
    beta: float = 1e-3
    overshoot: float = 0.02
    init_trials: int = 100
    seed: int = 0

    def __post_init__(self):
        if self.kind not in NATIVE_NORMS:
            raise ConfigError(f"unknown second attack kind {self.kind!r}")
        if self.p not in NATIVE_NORMS[self.kind]:
            raise ConfigError(
                f"{self.kind} operates in {[n.value for n in NATIVE_NORMS[self.kind]]}, "
                f"not L{self.p.value}"
            )
        if self.iterations < 1:
            raise ConfigError(f"iterations must be positive, got {self.iterations}")


@dataclass(frozen=True)
class AttackResult:
    """Outcome of one attack on one input.

    `distance` is measured from the original input in the attack norm and is
    meaningful only when `success` is true.
    """

    x_adv: np.ndarray
    success: bool
    distance: float
    iterations_used: int
    wall_time: float


def finish(
    net: Network,
    x: np.ndarray,
    y: int,
    x_adv: np.ndarray,
    p: Norm,
    iterations_used: int,
    started: float,
) -> AttackResult:
    """Build an AttackResult, re-verifying the success invariants."""
    x_adv = np.asarray(x_adv, dtype=np.float64)
    success = forward(net, x_adv).label != y
    if success and not np.all((x_adv >= 0.0) & (x_adv <= 1.0)):
        raise RuntimeError("attack produced a successful example outside the [0,1] box")
    return AttackResult(
        x_adv=x_adv,
        success=success,
        distance=lp_distance(x, x_adv, p),
        iterations_used=iterations_used,
        wall_time=time.perf_counter() - started,
    )
