"""Upper-bound adversarial-distance attacks and the per-norm dispatch."""

from __future__ import annotations

import numpy as np

from ..errors import ConfigError
from ..geometry import Norm
from ..nn import Network
from .base import NATIVE_NORMS, AttackConfig, AttackResult, SecondAttackConfig
from .carlini_wagner import carlini_wagner_l2
from .deepfool import deepfool_l2
from .elastic_net import ead_l1
from .hopskipjump import hopskipjump
from .pgd import early_stopping_attack, fgsm_with_early_stopping, pgd_single_step

__all__ = [
    "AttackConfig",
    "AttackResult",
    "SecondAttackConfig",
    "pgd_single_step",
    "early_stopping_attack",
    "fgsm_with_early_stopping",
    "deepfool_l2",
    "carlini_wagner_l2",
    "ead_l1",
    "hopskipjump",
    "second_attack",
    "default_second_kind",
]

#: Per-norm choice of the tight second attack.
_SECOND_BY_NORM = {
    Norm.LINF: "hopskipjump",
    Norm.L2: "carlini_wagner_l2",
    Norm.L1: "ead_l1",
}

_IMPL = {
    "hopskipjump": hopskipjump,
    "carlini_wagner_l2": carlini_wagner_l2,
    "ead_l1": ead_l1,
}


def default_second_kind(p: Norm) -> str:
    return _SECOND_BY_NORM[p]


def second_attack(
    net: Network,
    x: np.ndarray,
    y: int,
    p: Norm,
    cfg: SecondAttackConfig | None = None,
) -> AttackResult:
    """Run the second attack matched to the evaluation norm.

    Defaults: Linf -> hopskipjump, L2 -> carlini_wagner_l2, L1 -> ead_l1. An
    explicit cfg overrides the kind, but its native norm must still equal p.
    """
    if cfg is None:
        cfg = SecondAttackConfig(kind=_SECOND_BY_NORM[p], p=p)
    if cfg.p is not p:
        raise ConfigError(f"second attack configured for L{cfg.p.value} but evaluating L{p.value}")
    if cfg.kind == "deepfool_l2":
        return deepfool_l2(net, x, y, iterations=cfg.iterations, overshoot=cfg.overshoot)
    try:
        impl = _IMPL[cfg.kind]
    except KeyError:
        raise ConfigError(f"unknown second attack kind {cfg.kind!r}") from None
    return impl(net, x, y, cfg)
