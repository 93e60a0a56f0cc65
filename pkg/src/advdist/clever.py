"""Attack-agnostic lower-bound scores from extreme-value gradient statistics.

For each competitor class j of the predicted class c, the local cross-
Lipschitz constant of the margin f_c - f_j over an Lp ball is estimated by
fitting a reverse Weibull distribution to per-batch maxima of dual-norm
gradient magnitudes at uniformly sampled points; the fitted right endpoint
(location) divides the margin to give a per-class score, capped at the
sampling radius. The untargeted score is the minimum over j. The estimate
carries no guarantee: the evaluation layer measures how often it exceeds the
attack distance instead of assuming soundness.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
from scipy.optimize import minimize
from scipy.special import gamma as gamma_fn

from .geometry import Norm, derive_seed, dual_exponent, sample_in_ball
from .nn import Network, forward, logit_diff_gradient_batch

#: samples-per-batch / batch-count presets, cheapest to heaviest.
PRESETS = {
    "5x5": (5, 5),
    "20x10": (20, 10),
    "100x50": (100, 50),
    "1024x500": (1024, 500),
}


@dataclass(frozen=True)
class CleverConfig:
    radius: float  # sampling radius; the evaluation layer sets it to the max attack distance
    p: Norm  # attack norm; gradients are measured in the dual norm
    nb_batches: int
    samples_per_batch: int
    seed: int = 0

    def __post_init__(self):
        if self.nb_batches < 2:
            raise ValueError("nb_batches must be >= 2: the extreme-value fit needs several maxima")
        if self.samples_per_batch < 1:
            raise ValueError("samples_per_batch must be positive")


@dataclass(frozen=True)
class WeibullFit:
    """Reverse Weibull (support (-inf, location]) maximum-likelihood fit."""

    location: float
    shape: float
    scale: float
    log_likelihood: float
    degenerate: bool


@dataclass(frozen=True)
class CleverScore:
    score: float
    target_classes: tuple[int, ...]  # ascending j != c, aligning the two vectors below
    per_class_scores: np.ndarray
    lipschitz_estimates: np.ndarray
    capped: bool  # score hit the sampling radius


def batch_gradient_maxima(net: Network, x: np.ndarray, j: int, cfg: CleverConfig) -> np.ndarray:
    """Per-batch maxima of ||grad(f_c - f_j)||_q over ball samples around x.

    c is the predicted class of x and q the dual of cfg.p. Each batch draws
    cfg.samples_per_batch points from the radius-cfg.radius ball (samples are
    not box-clipped) and keeps the largest gradient norm. Deterministic given
    cfg.seed.
    """
    x = np.asarray(x, dtype=np.float64)
    c = forward(net, x).label
    if j == c:
        raise ValueError(f"target class {j} equals the predicted class")
    q = dual_exponent(cfg.p)
    maxima = np.empty(cfg.nb_batches)
    for b in range(cfg.nb_batches):
        samples = sample_in_ball(
            x, cfg.radius, cfg.p, cfg.samples_per_batch, seed=derive_seed(cfg.seed, b)
        )
        grads = logit_diff_gradient_batch(net, samples, c, j)
        if q is Norm.L1:
            norms = np.sum(np.abs(grads), axis=1)
        elif q is Norm.L2:
            norms = np.sqrt(np.sum(grads * grads, axis=1))
        else:
            norms = np.max(np.abs(grads), axis=1)
        maxima[b] = np.max(norms)
    return maxima


def _negative_log_likelihood(params: np.ndarray, data: np.ndarray, data_max: float) -> float:
    u, log_k, log_lam = params
    location = data_max + math.exp(u)
    k = math.exp(log_k)
    lam = math.exp(log_lam)
    z = (location - data) / lam
    if np.any(z <= 0.0) or not np.isfinite(z).all():
        return 1e300
    log_pdf = math.log(k) - math.log(lam) + (k - 1.0) * np.log(z) - z**k
    total = float(np.sum(log_pdf))
    return -total if np.isfinite(total) else 1e300


def _moment_initial_guess(data: np.ndarray) -> np.ndarray:
    """Start the simplex from method-of-moments estimates of (offset, k, lambda)."""
    spread = float(np.std(data))
    offset = max(0.05 * spread, 1e-6)
    z = (np.max(data) + offset) - data
    mean_z = float(np.mean(z))
    cv_target = float(np.std(z)) / mean_z
    k_grid = np.exp(np.linspace(np.log(0.1), np.log(50.0), 400))
    cv_grid = np.sqrt(gamma_fn(1.0 + 2.0 / k_grid) / gamma_fn(1.0 + 1.0 / k_grid) ** 2 - 1.0)
    k0 = float(k_grid[np.argmin(np.abs(cv_grid - cv_target))])
    lam0 = mean_z / float(gamma_fn(1.0 + 1.0 / k0))
    return np.array([math.log(offset), math.log(k0), math.log(lam0)])


def reverse_weibull_mle(maxima: np.ndarray) -> WeibullFit:
    """Fit a three-parameter reverse Weibull to a sample of maxima.

    The data are reflected into a standard Weibull problem and the negative
    log-likelihood is minimized with a derivative-free simplex from a
    moment-based start; the location parameter is constrained above the
    sample maximum by construction. A sample with variance below 1e-12 is
    reported as a degenerate point mass at the maximum.
    """
    data = np.asarray(maxima, dtype=np.float64).ravel()
    if data.size < 2:
        raise ValueError(f"need at least 2 maxima to fit, got {data.size}")
    data_max = float(np.max(data))
    if float(np.var(data)) < 1e-12:
        return WeibullFit(
            location=data_max, shape=math.inf, scale=0.0, log_likelihood=math.inf, degenerate=True
        )
    result = minimize(
        _negative_log_likelihood,
        _moment_initial_guess(data),
        args=(data, data_max),
        method="Nelder-Mead",
        options={"maxiter": 2000, "xatol": 1e-10, "fatol": 1e-10},
    )
    u, log_k, log_lam = result.x
    return WeibullFit(
        location=data_max + math.exp(u),
        shape=math.exp(log_k),
        scale=math.exp(log_lam),
        log_likelihood=-float(result.fun),
        degenerate=False,
    )


def clever_score(net: Network, x: np.ndarray, cfg: CleverConfig) -> CleverScore:
    """Estimated lower bound on the adversarial distance of x.

    For every class j other than the predicted class c, the margin
    f_c(x) - f_j(x) is divided by the fitted cross-Lipschitz constant and
    capped at the sampling radius; a vanishing Lipschitz estimate means the
    landscape toward j is flat within the ball, so j imposes no constraint
    and the capped radius is used. The per-class seeds derive from
    (cfg.seed, j) so scores are reproducible class by class.
    """
    x = np.asarray(x, dtype=np.float64)
    pred = forward(net, x)
    c = pred.label
    targets = [j for j in range(net.num_classes) if j != c]
    scores = np.empty(len(targets))
    lipschitz = np.empty(len(targets))
    for idx, j in enumerate(targets):
        per_class_cfg = replace(cfg, seed=derive_seed(cfg.seed, j))
        fit = reverse_weibull_mle(batch_gradient_maxima(net, x, j, per_class_cfg))
        lipschitz[idx] = fit.location
        if fit.location <= 1e-12:
            scores[idx] = cfg.radius
        else:
            margin = float(pred.logits[c] - pred.logits[j])
            scores[idx] = min(margin / fit.location, cfg.radius)
    score = float(np.min(scores))
    return CleverScore(
        score=score,
        target_classes=tuple(targets),
        per_class_scores=scores,
        lipschitz_estimates=lipschitz,
        capped=score == cfg.radius,
    )
