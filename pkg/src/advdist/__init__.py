"""Adversarial-distance estimation for dense/ReLU classifiers."""

from .attacks import (
    AttackConfig,
    AttackResult,
    SecondAttackConfig,
    carlini_wagner_l2,
    deepfool_l2,
    ead_l1,
    early_stopping_attack,
    fgsm_with_early_stopping,
    hopskipjump,
    pgd_single_step,
    second_attack,
)
from .clever import PRESETS, CleverConfig, CleverScore, WeibullFit, clever_score, reverse_weibull_mle
from .errors import ConfigError, DataError, ShapeError
from .evaluation import (
    DEFAULT_EPS_GRID,
    Dataset,
    EvaluationRecord,
    EvaluationReport,
    adversarial_accuracy,
    clever_error_ratio,
    evaluate,
    mean_adversarial_distance,
    tradeoff_study,
)
from .geometry import Norm, clip_to_box, dual_exponent, lp_distance, sample_in_ball
from .loaders import load_dataset, load_model
from .nn import (
    CrossEntropyLoss,
    Dense,
    Logit,
    LogitDiff,
    Network,
    Prediction,
    Relu,
    forward,
    forward_batch,
    input_gradient,
)
from .oracle import AffineClassifier, affine_min_distance, brute_force_min_distance
from .report import write_report, write_tradeoff

__version__ = "0.1.0"
