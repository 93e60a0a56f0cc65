"""Command-line entry point for training and exporting toy models."""

from __future__ import annotations

import click

from . import RECIPES, TrainingError, train_and_export
from .datasets import DATASETS


@click.command()
@click.option("--recipe", type=click.Choice(RECIPES), required=True)
@click.option("--dataset", type=click.Choice(DATASETS), default="two-moons", show_default=True)
@click.option("--seed", type=int, required=True)
@click.option("--out", "out_dir", required=True, type=click.Path())
@click.option("--epochs", type=int, default=500, show_default=True)
@click.option("--learning-rate", type=float, default=0.05, show_default=True)
def main(recipe, dataset, seed, out_dir, epochs, learning_rate):
    """Train a tiny classifier and export model/dataset/reference files."""
    try:
        bundle = train_and_export(
            recipe, dataset, seed, out_dir, epochs=epochs, learning_rate=learning_rate
        )
    except TrainingError as exc:
        raise click.ClickException(str(exc)) from exc
    click.echo(f"train accuracy: {bundle.train_accuracy:.4f}")
    for path in (bundle.model_path, bundle.dataset_path, bundle.reference_path, bundle.manifest_path):
        click.echo(f"wrote {path}")


if __name__ == "__main__":
    main()
