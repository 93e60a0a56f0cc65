"""Command-line surface: attack, clever, evaluate, and tradeoff subcommands."""

from __future__ import annotations

import csv
import functools
import sys
from dataclasses import dataclass
from pathlib import Path

import click

from .attacks import AttackConfig, SecondAttackConfig, default_second_kind
from .clever import PRESETS, CleverConfig, clever_score
from .errors import ConfigError, DataError, ShapeError
from .evaluation import DEFAULT_EPS_GRID, evaluate, tradeoff_study
from .geometry import Norm, derive_seed
from .loaders import load_dataset, load_model
from .nn import forward
from .report import fmt_value, write_report, write_tradeoff

_NORMS = {"1": Norm.L1, "2": Norm.L2, "inf": Norm.LINF}
_DEFAULT_EPS_STEP = {Norm.LINF: 0.0003, Norm.L2: 0.005, Norm.L1: 0.2}
_SECOND_KINDS = {
    "hsj": "hopskipjump",
    "cw": "carlini_wagner_l2",
    "ead": "ead_l1",
    "deepfool": "deepfool_l2",
}


@dataclass(frozen=True)
class RunConfig:
    """Validated bundle of everything a run needs; no wall-clock seeding."""

    model_path: Path
    data_path: Path
    norm: Norm
    eps_step: float
    max_iters: int
    second: str
    second_iters: int
    clever_preset: str
    eps_grid: tuple[float, ...]
    seed: int
    out_dir: Path
    workers: int

    def __post_init__(self):
        for path in (self.model_path, self.data_path):
            if not path.exists():
                raise ConfigError(f"path does not exist: {path}")


def _guarded(fn):
    """Map domain exceptions onto the documented exit codes (2 config, 3 data)."""

    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except ConfigError as exc:
            raise click.UsageError(str(exc)) from exc
        except (DataError, ShapeError) as exc:
            click.echo(f"error: {exc}", err=True)
            sys.exit(3)

    return wrapper


def _shared_options(fn):
    for option in reversed(
        [
            click.option("--model", "model_path", required=True, type=click.Path(path_type=Path)),
            click.option("--data", "data_path", required=True, type=click.Path(path_type=Path)),
            click.option("--norm", type=click.Choice(sorted(_NORMS)), default="inf", show_default=True),
            click.option("--seed", type=int, required=True, help="Global seed; all randomness derives from it."),
            click.option("--out", "out_dir", required=True, type=click.Path(path_type=Path)),
        ]
    ):
        fn = option(fn)
    return fn


def _attack_options(fn):
    for option in reversed(
        [
            click.option("--eps-step", type=float, default=None, help="Per-iteration step; defaults per norm."),
            click.option("--max-iters", type=int, default=500, show_default=True),
            click.option("--second", type=click.Choice(["auto", "hsj", "cw", "ead", "deepfool", "none"]), default="auto", show_default=True),
            click.option("--second-iters", type=int, default=40, show_default=True),
            click.option("--eps-grid", default=None, help="Comma-separated budgets for accuracy-at-epsilon."),
            click.option("--workers", type=int, default=1, show_default=True),
        ]
    ):
        fn = option(fn)
    return fn


def _make_run_config(kwargs) -> RunConfig:
    norm = _NORMS[kwargs["norm"]]
    eps_step = kwargs.get("eps_step") or _DEFAULT_EPS_STEP[norm]
    grid = kwargs.get("eps_grid")
    if grid:
        try:
            grid = tuple(float(v) for v in grid.split(","))
        except ValueError as exc:
            raise ConfigError(f"bad --eps-grid: {exc}") from exc
    else:
        grid = DEFAULT_EPS_GRID
    return RunConfig(
        model_path=kwargs["model_path"],
        data_path=kwargs["data_path"],
        norm=norm,
        eps_step=eps_step,
        max_iters=kwargs.get("max_iters", 500),
        second=kwargs.get("second", "auto"),
        second_iters=kwargs.get("second_iters", 40),
        clever_preset=kwargs.get("clever_preset", "100x50"),
        eps_grid=grid,
        seed=kwargs["seed"],
        out_dir=kwargs["out_dir"],
        workers=kwargs.get("workers", 1),
    )


def _second_config(cfg: RunConfig) -> SecondAttackConfig | None:
    if cfg.second == "none":
        return None
    kind = default_second_kind(cfg.norm) if cfg.second == "auto" else _SECOND_KINDS[cfg.second]
    return SecondAttackConfig(kind=kind, iterations=cfg.second_iters, p=cfg.norm, seed=cfg.seed)


def _clever_config(cfg: RunConfig) -> CleverConfig:
    samples, batches = PRESETS[cfg.clever_preset]
    # radius is a placeholder: the evaluation layer swaps in the found radius
    return CleverConfig(
        radius=1.0, p=cfg.norm, nb_batches=batches, samples_per_batch=samples, seed=cfg.seed
    )


def _echo_summary(report) -> None:
    click.echo(f"mean adversarial distance: {report.mean_adversarial_distance:.6g}")
    for eps, acc in report.adversarial_accuracy_at.items():
        click.echo(f"adversarial accuracy @ {eps:.6g}: {acc:.4f}")
    if report.clever_error_ratio is not None:
        click.echo(f"lower-bound error ratio: {report.clever_error_ratio:.4f}")
    if report.all_attacks_failed:
        click.echo("WARNING: no attack succeeded on any image; distances fall back to the budget")


@click.group()
def main():
    """Estimate per-input and mean adversarial distance of dense/ReLU classifiers."""


@main.command("attack")
@_shared_options
@_attack_options
@_guarded
def attack_cmd(**kwargs):
    """Upper bounds only: early-stopping attack plus the second attack."""
    cfg = _make_run_config(kwargs)
    net = load_model(cfg.model_path)
    dataset = load_dataset(cfg.data_path)
    attack_cfg = AttackConfig(p=cfg.norm, eps_step=cfg.eps_step, max_iters=cfg.max_iters, seed=cfg.seed)
    report = evaluate(
        net,
        dataset,
        attack_cfg,
        _second_config(cfg),
        None,
        eps_grid=cfg.eps_grid,
        workers=cfg.workers,
    )
    write_report(report, cfg.out_dir)
    _echo_summary(report)


@main.command("evaluate")
@_shared_options
@_attack_options
@click.option("--clever-preset", type=click.Choice(sorted(PRESETS)), default="100x50", show_default=True)
@click.option(
    "--clever-radius-policy",
    type=click.Choice(["global_max", "per_point"]),
    default="global_max",
    show_default=True,
)
@_guarded
def evaluate_cmd(clever_radius_policy, **kwargs):
    """Full evaluation: both attacks, lower-bound pass, metrics, figures."""
    cfg = _make_run_config(kwargs)
    net = load_model(cfg.model_path)
    dataset = load_dataset(cfg.data_path)
    attack_cfg = AttackConfig(p=cfg.norm, eps_step=cfg.eps_step, max_iters=cfg.max_iters, seed=cfg.seed)
    report = evaluate(
        net,
        dataset,
        attack_cfg,
        _second_config(cfg),
        _clever_config(cfg),
        eps_grid=cfg.eps_grid,
        clever_radius_policy=clever_radius_policy,
        workers=cfg.workers,
    )
    write_report(report, cfg.out_dir)
    _echo_summary(report)


@main.command("clever")
@_shared_options
@click.option("--radius", type=float, required=True, help="Sampling radius for the score.")
@click.option("--clever-preset", type=click.Choice(sorted(PRESETS)), default="100x50", show_default=True)
@_guarded
def clever_cmd(radius, clever_preset, **kwargs):
    """Lower bounds only, at an explicit sampling radius."""
    if radius <= 0:
        raise ConfigError(f"--radius must be positive, got {radius}")
    cfg = _make_run_config({**kwargs, "clever_preset": clever_preset})
    net = load_model(cfg.model_path)
    dataset = load_dataset(cfg.data_path)
    samples, batches = PRESETS[clever_preset]
    cfg.out_dir.mkdir(parents=True, exist_ok=True)
    out_path = cfg.out_dir / "clever.csv"
    with open(out_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["index", "true_label", "predicted_label", "clever_score", "capped"])
        for idx in range(len(dataset)):
            x = dataset.inputs[idx]
            y = int(dataset.labels[idx])
            predicted = forward(net, x).label
            if predicted != y:
                writer.writerow([idx, y, predicted, "", ""])
                continue
            score = clever_score(
                net,
                x,
                CleverConfig(
                    radius=radius,
                    p=cfg.norm,
                    nb_batches=batches,
                    samples_per_batch=samples,
                    seed=derive_seed(cfg.seed, idx),
                ),
            )
            writer.writerow([idx, y, predicted, fmt_value(score.score), fmt_value(score.capped)])
    click.echo(f"wrote {out_path}")


@main.command("tradeoff")
@_shared_options
@click.option("--eps-step", type=float, default=None, help="Largest step of the sweep; defaults per norm.")
@click.option("--halvings", type=int, default=4, show_default=True)
@click.option("--max-iters", type=int, default=500, show_default=True, help="Iteration cap at the largest step.")
@_guarded
def tradeoff_cmd(halvings, **kwargs):
    """Step-size sweep: tightness of the mean distance vs. compute time."""
    if halvings < 0:
        raise ConfigError(f"--halvings must be nonnegative, got {halvings}")
    cfg = _make_run_config(kwargs)
    net = load_model(cfg.model_path)
    dataset = load_dataset(cfg.data_path)
    eps_list = [cfg.eps_step / 2**k for k in range(halvings + 1)]
    rows = tradeoff_study(net, dataset, eps_list, cfg.norm, base_max_iters=cfg.max_iters)
    write_tradeoff(rows, cfg.out_dir)
    for row in rows:
        click.echo(f"eps_step={row.eps_step:.6g} mean={row.mean_distance:.6g} time={row.runtime_s:.3f}s")


if __name__ == "__main__":
    main()
