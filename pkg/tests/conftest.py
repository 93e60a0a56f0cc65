"""Shared generators for random networks and affine test cases."""

from __future__ import annotations

import numpy as np
import pytest

from advdist import AffineClassifier, Dense, Network, Norm, Relu, affine_min_distance


def random_relu_net(
    rng: np.random.Generator,
    d_in: int,
    widths: tuple[int, ...],
    n_classes: int,
    scale: float = 1.0,
) -> Network:
    layers: list = []
    prev = d_in
    for w in widths:
        layers.append(
            Dense(rng.normal(size=(w, prev), scale=scale / np.sqrt(prev)), rng.normal(size=w, scale=0.2))
        )
        layers.append(Relu())
        prev = w
    layers.append(Dense(rng.normal(size=(n_classes, prev), scale=1.0 / np.sqrt(prev)), np.zeros(n_classes)))
    return Network(layers=tuple(layers), num_classes=n_classes)


def random_affine_case(
    rng: np.random.Generator,
    p: Norm,
    n_classes: int = 2,
    oracle_range: tuple[float, float] = (0.05, 0.25),
    d_range: tuple[int, int] = (2, 20),
):
    """Affine classifier + interior point whose oracle distance lies in range.

    The range keeps the optimal perturbation strictly inside the [0, 1] box
    (x is drawn from [0.3, 0.7]^d), so attack distances are comparable to the
    box-free closed form.
    """
    while True:
        d = int(rng.integers(d_range[0], d_range[1] + 1))
        clf = AffineClassifier(
            rng.normal(size=(n_classes, d)), rng.normal(scale=0.3, size=n_classes)
        )
        x = rng.uniform(0.3, 0.7, size=d)
        oracle, nearest = affine_min_distance(clf, x, p)
        if nearest is not None and oracle_range[0] <= oracle <= oracle_range[1]:
            y = int(np.argmax(clf.logits(x)))
            return clf, clf.as_network(), x, y, oracle


@pytest.fixture(scope="session")
def fixture_mlp() -> Network:
    """A fixed dense/ReLU classifier reused by clustering and trade-off tests."""
    rng = np.random.default_rng(5)
    return random_relu_net(rng, d_in=8, widths=(16, 16), n_classes=3)
