"""Per-image attack ensemble, lower-bound pass, and aggregate robustness metrics.

The pipeline runs the early-stopping attack and the norm-matched second
attack on every correctly classified image, keeps the smaller distance, sets
the lower-bound sampling radius to the largest distance found, scores every
correctly classified image at that radius, and reports the records sorted by
ascending distance together with the mean distance, accuracy at budget
thresholds, and the fraction of lower bounds that exceed their upper bound.
"""

from __future__ import annotations

import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .attacks import AttackConfig, SecondAttackConfig, early_stopping_attack, second_attack
from .clever import CleverConfig, clever_score
from .errors import DataError
from .geometry import Norm, derive_seed
from .nn import Network, forward

#: Default budget grid for accuracy-at-epsilon, in pixel-scale steps.
DEFAULT_EPS_GRID = (1 / 255, 2 / 255, 4 / 255, 8 / 255)


@dataclass(frozen=True)
class Dataset:
    inputs: np.ndarray  # (n, d), features in [0, 1]
    labels: np.ndarray  # (n,) class indices

    def __post_init__(self):
        inputs = np.asarray(self.inputs, dtype=np.float64)
        labels = np.asarray(self.labels, dtype=np.int64)
        if inputs.ndim != 2 or labels.ndim != 1 or inputs.shape[0] != labels.shape[0]:
            raise DataError(
                f"dataset needs matching inputs/labels, got {inputs.shape} and {labels.shape}"
            )
        object.__setattr__(self, "inputs", inputs)
        object.__setattr__(self, "labels", labels)

    def __len__(self) -> int:
        return self.inputs.shape[0]


@dataclass
class EvaluationRecord:
    index: int
    true_label: int
    predicted_label: int
    initially_correct: bool
    distance_alg1: float | None
    distance_second: float | None
    distance_min: float
    winner: str  # alg1 | second | both_failed | misclassified
    clever_score: float | None = None
    clever_valid: bool | None = None


@dataclass
class EvaluationReport:
    records: list[EvaluationRecord]  # sorted ascending by distance_min
    norm: Norm
    mean_adversarial_distance: float
    adversarial_accuracy_at: dict[float, float]
    clever_error_ratio: float | None
    clever_radius: float | None
    runtime: dict[str, float] = field(default_factory=dict)
    all_attacks_failed: bool = False


def mean_adversarial_distance(report: EvaluationReport) -> float:
    """Mean of distance_min over every record (misclassified contribute 0)."""
    if not report.records:
        raise ValueError("report has no records")
    return float(np.mean([r.distance_min for r in report.records]))


def adversarial_accuracy(report: EvaluationReport, epsilon: float) -> float:
    """Fraction of records whose minimal found distance exceeds the budget."""
    if epsilon <= 0:
        raise ValueError(f"epsilon must be positive, got {epsilon}")
    hits = sum(1 for r in report.records if r.distance_min > epsilon)
    return hits / len(report.records)


def clever_error_ratio(report: EvaluationReport) -> float:
    """Fraction of scored records whose lower bound strictly exceeds the upper bound."""
    eligible = [r for r in report.records if r.initially_correct and r.clever_score is not None]
    if not eligible:
        raise ValueError("no initially-correct records carry a lower-bound score")
    return sum(1 for r in eligible if r.clever_score > r.distance_min) / len(eligible)


def _attack_one(payload) -> tuple[int, object, object]:
    net, idx, x, y, attack_cfg, second_cfg = payload
    alg1 = early_stopping_attack(net, x, y, replace(attack_cfg, seed=attack_cfg.seed ^ idx))
    second = None
    if second_cfg is not None:
        second = second_attack(
            net, x, y, attack_cfg.p, replace(second_cfg, seed=second_cfg.seed ^ idx)
        )
    return idx, alg1, second


def evaluate(
    net: Network,
    dataset: Dataset,
    attack_cfg: AttackConfig,
    second_cfg: SecondAttackConfig | None = None,
    clever_cfg: CleverConfig | None = None,
    *,
    eps_grid: tuple[float, ...] = DEFAULT_EPS_GRID,
    clever_radius_policy: str = "global_max",
    workers: int = 1,
) -> EvaluationReport:
    """Full upper/lower-bound evaluation of a classifier on a dataset.

    Misclassified images are recorded with distance 0 and skipped by both
    attacks and the scoring pass. Images where no attack succeeds receive the
    maximum distance found on any other image (the total attack budget, plus
    a warning flag, if nothing succeeded anywhere). Per-image attack seeds
    derive as cfg.seed XOR image index; per-image scoring seeds derive from
    (clever seed, image index). clever_cfg supplies the sampling preset; its
    radius is overridden by the policy: "global_max" uses the largest found
    distance everywhere, "per_point" uses each image's own distance.
    """
    if len(dataset) == 0:
        raise ValueError("dataset is empty")
    if int(np.max(dataset.labels)) >= net.num_classes:
        raise DataError(
            f"label {int(np.max(dataset.labels))} out of range for {net.num_classes} classes"
        )
    if clever_radius_policy not in ("global_max", "per_point"):
        raise ValueError(f"unknown radius policy {clever_radius_policy!r}")

    records: dict[int, EvaluationRecord] = {}
    pending = []
    for idx in range(len(dataset)):
        x = dataset.inputs[idx]
        y = int(dataset.labels[idx])
        predicted = forward(net, x).label
        if predicted != y:
            records[idx] = EvaluationRecord(
                index=idx,
                true_label=y,
                predicted_label=predicted,
                initially_correct=False,
                distance_alg1=None,
                distance_second=None,
                distance_min=0.0,
                winner="misclassified",
            )
        else:
            pending.append((net, idx, x, y, attack_cfg, second_cfg))

    t0 = time.perf_counter()
    if workers > 1 and len(pending) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(_attack_one, pending))
    else:
        outcomes = [_attack_one(p) for p in pending]
    attack_time = time.perf_counter() - t0

    alg1_time = sum(alg1.wall_time for _, alg1, _ in outcomes)
    second_time = sum(second.wall_time for _, _, second in outcomes if second is not None)
    unresolved = []
    for idx, alg1, second in outcomes:
        y = int(dataset.labels[idx])
        d1 = alg1.distance if alg1.success else None
        d2 = second.distance if second is not None and second.success else None
        if d1 is None and d2 is None:
            winner, dist = "both_failed", None
        elif d2 is None or (d1 is not None and d1 <= d2):
            winner, dist = "alg1", d1
        else:
            winner, dist = "second", d2
        record = EvaluationRecord(
            index=idx,
            true_label=y,
            predicted_label=y,
            initially_correct=True,
            distance_alg1=d1,
            distance_second=d2,
            distance_min=dist if dist is not None else np.nan,
            winner=winner,
        )
        records[idx] = record
        if dist is None:
            unresolved.append(record)

    successes = [r.distance_min for r in records.values() if r.winner in ("alg1", "second")]
    all_failed = bool(unresolved) and not successes
    substitute = max(successes) if successes else attack_cfg.budget
    for record in unresolved:
        record.distance_min = substitute

    clever_radius = None
    clever_time = 0.0
    ratio = None
    if clever_cfg is not None:
        global_radius = max((r.distance_min for r in records.values()), default=0.0)
        clever_radius = global_radius
        t0 = time.perf_counter()
        for record in records.values():
            if not record.initially_correct:
                continue
            radius = global_radius if clever_radius_policy == "global_max" else record.distance_min
            if radius <= 0.0:
                continue
            per_image = replace(
                clever_cfg, radius=radius, seed=derive_seed(clever_cfg.seed, record.index)
            )
            record.clever_score = clever_score(net, dataset.inputs[record.index], per_image).score
            record.clever_valid = record.clever_score <= record.distance_min
        clever_time = time.perf_counter() - t0

    ordered = sorted(records.values(), key=lambda r: (r.distance_min, r.index))
    report = EvaluationReport(
        records=ordered,
        norm=attack_cfg.p,
        mean_adversarial_distance=float(np.mean([r.distance_min for r in ordered])),
        adversarial_accuracy_at={},
        clever_error_ratio=None,
        clever_radius=clever_radius,
        runtime={
            "attack_phase": attack_time,
            "algorithm1": alg1_time,
            "second_attack": second_time,
            "clever": clever_time,
        },
        all_attacks_failed=all_failed,
    )
    report.adversarial_accuracy_at = {eps: adversarial_accuracy(report, eps) for eps in eps_grid}
    if clever_cfg is not None and any(r.clever_score is not None for r in ordered):
        ratio = clever_error_ratio(report)
    report.clever_error_ratio = ratio
    return report


@dataclass(frozen=True)
class TradeoffRow:
    eps_step: float
    mean_distance: float
    runtime_s: float


def tradeoff_study(
    net: Network,
    dataset: Dataset,
    eps_step_list: list[float],
    p: Norm,
    base_max_iters: int = 500,
) -> list[TradeoffRow]:
    """Mean early-stopping distance and wall time per step size.

    eps_step_list must be nonempty and descending. The iteration cap scales
    inversely with the step so every setting spends the same total budget
    (eps_step_list[0] * base_max_iters). Misclassified inputs are skipped;
    failed attacks take the maximum distance found at that setting.
    """
    if not eps_step_list:
        raise ValueError("eps_step_list is empty")
    if any(b >= a for a, b in zip(eps_step_list, eps_step_list[1:])):
        raise ValueError("eps_step_list must be strictly descending")
    budget = eps_step_list[0] * base_max_iters
    attacked = [
        (x, int(y))
        for x, y in zip(dataset.inputs, dataset.labels)
        if forward(net, x).label == int(y)
    ]
    if not attacked:
        raise ValueError("every input in the subset is misclassified")

    rows = []
    for eps in eps_step_list:
        cfg = AttackConfig(p=p, eps_step=eps, max_iters=int(np.ceil(budget / eps)))
        t0 = time.perf_counter()
        results = [early_stopping_attack(net, x, y, cfg) for x, y in attacked]
        elapsed = time.perf_counter() - t0
        found = [r.distance for r in results if r.success]
        substitute = max(found) if found else cfg.budget
        distances = [r.distance if r.success else substitute for r in results]
        rows.append(TradeoffRow(eps_step=eps, mean_distance=float(np.mean(distances)), runtime_s=elapsed))
    return rows
