import numpy as np
import pytest

from advdist import (
    CrossEntropyLoss,
    Dense,
    Logit,
    LogitDiff,
    Network,
    Relu,
    ShapeError,
    forward,
    forward_batch,
    input_gradient,
)
from advdist.nn import logit_diff_gradient_batch

from conftest import random_relu_net


def straight_line_forward(net: Network, x: np.ndarray) -> list[float]:
    """Independent re-implementation: plain Python loops, no shared code paths."""
    values = [float(v) for v in x]
    for layer in net.layers:
        if isinstance(layer, Dense):
            out = []
            for row, b in zip(layer.weights, layer.bias):
                acc = float(b)
                for w, v in zip(row, values):
                    acc += float(w) * v
                out.append(acc)
            values = out
        else:
            values = [v if v > 0.0 else 0.0 for v in values]
    return values


def finite_difference_gradient(net, x, objective, h=1e-5):
    def value(point):
        logits = forward(net, point).logits
        if isinstance(objective, CrossEntropyLoss):
            z = logits - logits.max()
            return -(z[objective.label] - np.log(np.exp(z).sum()))
        if isinstance(objective, Logit):
            return logits[objective.index]
        return logits[objective.top] - logits[objective.other]

    grad = np.zeros_like(x)
    for i in range(x.size):
        bumped = x.copy()
        bumped[i] = x[i] + h
        hi = value(bumped)
        bumped[i] = x[i] - h
        lo = value(bumped)
        grad[i] = (hi - lo) / (2 * h)
    return grad


def identity_net() -> Network:
    return Network(layers=(Dense(np.eye(2), np.zeros(2)),), num_classes=2)


class TestForward:
    def test_identity_case(self):
        pred = forward(identity_net(), np.array([0.2, 0.8]))
        assert np.allclose(pred.logits, [0.2, 0.8])
        assert pred.label == 1

    def test_tie_breaks_to_lowest_index(self):
        pred = forward(identity_net(), np.array([0.5, 0.5]))
        assert pred.label == 0

    def test_matches_independent_straight_line_evaluation(self):
        rng = np.random.default_rng(42)
        net = random_relu_net(rng, d_in=6, widths=(10, 7), n_classes=4)
        x = rng.uniform(size=6)
        expected = straight_line_forward(net, x)
        assert np.max(np.abs(forward(net, x).logits - expected)) < 1e-12

    def test_forward_is_pure(self):
        rng = np.random.default_rng(7)
        net = random_relu_net(rng, d_in=4, widths=(8,), n_classes=3)
        x = rng.uniform(size=4)
        x_before = x.copy()
        first = forward(net, x)
        second = forward(net, x)
        assert np.array_equal(first.logits, second.logits)
        assert np.array_equal(x, x_before)

    def test_dimension_mismatch_names_both_widths(self):
        with pytest.raises(ShapeError, match="3.*2"):
            forward(identity_net(), np.array([0.1, 0.2, 0.3]))

    def test_network_validates_layer_chain(self):
        with pytest.raises(ShapeError, match="layer 1"):
            Network(
                layers=(Dense(np.eye(2), np.zeros(2)), Dense(np.eye(3), np.zeros(3))),
                num_classes=3,
            )
        with pytest.raises(ShapeError, match="num_classes"):
            Network(layers=(Dense(np.eye(2), np.zeros(2)),), num_classes=5)

    def test_network_is_immutable(self):
        net = identity_net()
        with pytest.raises(ValueError):
            net.layers[0].weights[0, 0] = 9.0


class TestInputGradient:
    def test_affine_logit_diff_gradient_is_weight_row_difference(self):
        rng = np.random.default_rng(0)
        W = rng.normal(size=(3, 5))
        net = Network(layers=(Dense(W, rng.normal(size=3)),), num_classes=3)
        for x in rng.uniform(size=(4, 5)):
            g = input_gradient(net, x, LogitDiff(2, 0))
            assert np.allclose(g, W[2] - W[0], atol=0)

    def test_affine_gradient_constant_in_x(self):
        rng = np.random.default_rng(3)
        W = rng.normal(size=(2, 4))
        net = Network(layers=(Dense(W, np.zeros(2)),), num_classes=2)
        g0 = input_gradient(net, rng.uniform(size=4), Logit(1))
        g1 = input_gradient(net, rng.uniform(size=4), Logit(1))
        assert np.array_equal(g0, g1)

    def test_saturated_cross_entropy_gradient_vanishes(self):
        # huge margin toward the true label puts softmax at the one-hot optimum
        W = np.array([[50.0, 0.0], [-50.0, 0.0]])
        net = Network(layers=(Dense(W, np.zeros(2)),), num_classes=2)
        g = input_gradient(net, np.array([0.9, 0.5]), CrossEntropyLoss(0))
        assert np.linalg.norm(g) < 1e-6

    @pytest.mark.parametrize("objective_for", ["ce", "logit", "diff"])
    def test_matches_finite_differences(self, objective_for):
        rng = np.random.default_rng(11)
        checked = 0
        while checked < 40:
            n_classes = int(rng.integers(2, 5))
            net = random_relu_net(
                rng, d_in=int(rng.integers(2, 8)), widths=(int(rng.integers(4, 12)),), n_classes=n_classes
            )
            x = rng.uniform(0.1, 0.9, size=net.input_dim)
            if _near_relu_kink(net, x):
                continue
            if objective_for == "ce":
                objective = CrossEntropyLoss(int(rng.integers(n_classes)))
            elif objective_for == "logit":
                objective = Logit(int(rng.integers(n_classes)))
            else:
                a, b = rng.choice(n_classes, size=2, replace=False)
                objective = LogitDiff(int(a), int(b))
            analytic = input_gradient(net, x, objective)
            numeric = finite_difference_gradient(net, x, objective)
            rel = np.abs(analytic - numeric) / np.maximum(np.abs(numeric), 1e-6)
            assert rel.max() < 1e-4
            checked += 1

    def test_relu_kink_uses_zero_branch(self):
        # pre-activation exactly 0: derivative must be 0, not 1
        net = Network(
            layers=(Dense(np.array([[1.0]]), np.array([0.0])), Relu(), Dense(np.array([[1.0], [0.0]]), np.zeros(2))),
            num_classes=2,
        )
        g = input_gradient(net, np.array([0.0]), Logit(0))
        assert g[0] == 0.0

    def test_class_index_out_of_range(self):
        net = identity_net()
        with pytest.raises(IndexError):
            input_gradient(net, np.array([0.1, 0.2]), Logit(2))
        with pytest.raises(IndexError):
            input_gradient(net, np.array([0.1, 0.2]), CrossEntropyLoss(5))

    def test_batch_gradients_match_single_path(self):
        rng = np.random.default_rng(19)
        net = random_relu_net(rng, d_in=5, widths=(9,), n_classes=3)
        X = rng.uniform(size=(6, 5))
        batched = logit_diff_gradient_batch(net, X, 2, 1)
        for row, x in zip(batched, X):
            # BLAS may take different paths per batch shape; last-bit drift allowed
            assert np.allclose(row, input_gradient(net, x, LogitDiff(2, 1)), rtol=1e-12, atol=1e-14)

    def test_batch_forward_matches_single(self):
        rng = np.random.default_rng(23)
        net = random_relu_net(rng, d_in=4, widths=(6,), n_classes=2)
        X = rng.uniform(size=(5, 4))
        logits = forward_batch(net, X)
        for row, x in zip(logits, X):
            assert np.allclose(row, forward(net, x).logits, rtol=1e-12, atol=1e-14)


def _near_relu_kink(net, x, tol=1e-4) -> bool:
    h = np.atleast_2d(np.asarray(x, dtype=np.float64))
    for layer in net.layers:
        if isinstance(layer, Dense):
            h = h @ layer.weights.T + layer.bias
        else:
            if np.min(np.abs(h)) < tol:
                return True
            h = np.maximum(h, 0.0)
    return False
