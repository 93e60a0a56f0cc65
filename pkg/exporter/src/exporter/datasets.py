"""Toy datasets scaled into the [0, 1] feature box."""

from __future__ import annotations

import numpy as np
from sklearn.datasets import load_digits, make_moons

DATASETS = ("two-moons", "digits-subset")


def two_moons(seed: int, n_train: int = 200, n_test: int = 40):
    X, y = make_moons(n_samples=n_train + n_test, noise=0.15, random_state=seed)
    lo = X.min(axis=0)
    hi = X.max(axis=0)
    X = 0.05 + 0.9 * (X - lo) / (hi - lo)  # min-max into [0.05, 0.95]
    return (X[:n_train], y[:n_train]), (X[n_train:], y[n_train:])


def digits_subset(seed: int, classes: tuple[int, ...] = (0, 1, 2), n_train: int = 150, n_test: int = 45):
    digits = load_digits()
    mask = np.isin(digits.target, classes)
    X = digits.data[mask] / 16.0  # raw pixel counts are 0..16
    y = np.searchsorted(np.asarray(classes), digits.target[mask])
    order = np.random.default_rng(seed).permutation(len(X))
    X, y = X[order], y[order]
    return (X[:n_train], y[:n_train]), (X[n_train : n_train + n_test], y[n_train : n_train + n_test])


def load(name: str, seed: int):
    """Return ((X_train, y_train), (X_test, y_test)) for a named toy dataset."""
    if name == "two-moons":
        return two_moons(seed)
    if name == "digits-subset":
        return digits_subset(seed)
    raise ValueError(f"unknown dataset {name!r}; choose from {DATASETS}")
