import math

import numpy as np
import pytest

from stx.errors import DegenerateLabels
from stx.features import SparseMatrix
from stx.learners import (LOG_ZERO, TrainedModel, choose_C, dedupe_candidates, grid_search_C,
                          load_model, objective, objective_grad, predict, save_model, train_linear,
                          train_nb)

SEP_A = [(1, 3), (2, 3), (1, 4), (2, 5)]
SEP_B = [(3, 1), (4, 1), (4, 2), (5, 2)]


def separable_toy():
    X = SparseMatrix.from_dense(np.array(SEP_A + SEP_B, dtype=float))
    return X, ["A"] * 4 + ["B"] * 4


def exhaustive_separator(points_a, points_b, steps=720):
    """Search directions on a fine angle grid; return True if some line splits the sets."""
    pa, pb = np.array(points_a, float), np.array(points_b, float)
    for t in np.linspace(0, 2 * np.pi, steps, endpoint=False):
        d = np.array([np.cos(t), np.sin(t)])
        if (pa @ d).max() < (pb @ d).min():
            return True
    return False


def imbalanced_toy():
    rng = np.random.default_rng(11)
    maj = rng.normal([0.0, 0.0], 1.0, size=(90, 2))
    mino = rng.normal([1.2, 1.2], 1.0, size=(10, 2))
    dense = np.vstack([maj, mino]) + 4.0  # keep everything non-zero
    return SparseMatrix.from_dense(dense), ["maj"] * 90 + ["min"] * 10


def _recall(model, X, y, cls):
    pred = predict(model, X)
    hits = sum(1 for p, t in zip(pred, y) if t == cls and p == cls)
    return hits / sum(1 for t in y if t == cls)


class TestNaiveBayes:
    def test_laplace_closed_form(self):
        X = SparseMatrix.from_dense([[2.0, 0.0], [0.0, 1.0]])
        m = train_nb(X, ["A", "B"], alpha=1.0)
        assert m.weights[0, 0] == math.log(0.75)
        assert m.weights[0, 1] == math.log(0.25)
        assert m.bias.tolist() == [math.log(0.5)] * 2

    def test_uniform_corpus_ties_to_first_class(self):
        X = SparseMatrix.from_dense(np.ones((4, 3)))
        m = train_nb(X, ["B", "A", "B", "A"])
        np.testing.assert_array_equal(m.weights[0], m.weights[1])
        assert predict(m, X) == ["A"] * 4

    def test_single_class(self):
        with pytest.raises(DegenerateLabels):
            train_nb(SparseMatrix.from_dense([[1.0]]), ["A"])

    def test_alpha_zero_is_finite(self):
        X = SparseMatrix.from_dense([[2.0, 0.0], [0.0, 1.0]])
        m = train_nb(X, ["A", "B"], alpha=0.0)
        assert np.all(np.isfinite(m.weights))
        assert m.weights[0, 1] == LOG_ZERO
        assert predict(m, X) == ["A", "B"]

    def test_count_scaling_invariance(self):
        rng = np.random.default_rng(3)
        dense = rng.integers(1, 5, size=(12, 5)).astype(float)
        y = ["A", "B", "C"] * 4
        X = SparseMatrix.from_dense(dense)
        m1 = train_nb(X, y, alpha=0.0)
        m2 = train_nb(SparseMatrix.from_dense(dense * 7.0), y, alpha=0.0)
        test = SparseMatrix.from_dense(rng.integers(0, 4, size=(20, 5)).astype(float))
        assert predict(m1, test) == predict(m2, test)


class TestGradients:
    @pytest.mark.parametrize("loss", ["logreg", "svm"])
    def test_finite_differences(self, loss):
        rng = np.random.default_rng(0 if loss == "logreg" else 1)
        checked = 0
        while checked < 20:
            dense = rng.normal(size=(8, 4)) * (rng.random((8, 4)) < 0.7)
            X = SparseMatrix.from_dense(dense)
            signs = rng.choice([-1.0, 1.0], size=8)
            sw = rng.uniform(0.1, 3.0, size=8)
            C = rng.uniform(0.1, 5.0)
            w, b = rng.normal(size=4), rng.normal()
            if loss == "svm":
                margins = signs * (dense @ w + b)
                if np.min(np.abs(margins - 1.0)) < 0.1:
                    continue
            gw, gb = objective_grad(w, b, X, signs, sw, C, loss)
            h = 1e-5
            num = np.zeros(5)
            for j in range(5):
                e = np.zeros(5)
                e[j] = h
                f_plus = objective(w + e[:4], b + e[4], X, signs, sw, C, loss)
                f_minus = objective(w - e[:4], b - e[4], X, signs, sw, C, loss)
                num[j] = (f_plus - f_minus) / (2 * h)
            np.testing.assert_allclose(np.append(gw, gb), num, rtol=1e-4, atol=1e-8)
            checked += 1


class TestLinear:
    def test_toy_set_is_separable(self):
        assert exhaustive_separator(SEP_A, SEP_B)

    @pytest.mark.parametrize("kind", ["svm", "logreg"])
    def test_separable_training_accuracy(self, kind):
        X, y = separable_toy()
        model = train_linear(X, y, kind)
        assert predict(model, X) == y

    def test_neutral_weights(self):
        X, y = separable_toy()
        m1 = train_linear(X, y, "svm", class_weights={"A": 1.0, "B": 1.0}, seed=4)
        m2 = train_linear(X, y, "svm", seed=4)
        np.testing.assert_array_equal(m1.weights, m2.weights)
        np.testing.assert_array_equal(m1.bias, m2.bias)

    def test_minority_weight_raises_recall(self):
        X, y = imbalanced_toy()
        plain = train_linear(X, y, "svm", C=1.0, seed=0)
        weighted = train_linear(X, y, "svm", C=1.0, class_weights={"min": 10.0}, seed=0)
        assert _recall(weighted, X, y, "min") > _recall(plain, X, y, "min")

    def test_reproducible(self):
        X, y = imbalanced_toy()
        m1 = train_linear(X, y, "logreg", seed=9)
        m2 = train_linear(X, y, "logreg", seed=9)
        assert m1.weights.tobytes() == m2.weights.tobytes()

    def test_ovr_order_independent(self):
        rng = np.random.default_rng(2)
        X = SparseMatrix.from_dense(rng.random((30, 5)))
        y = [c for c in "ABC" for _ in range(10)]
        full = train_linear(X, y, "svm", seed=1)
        for i, c in enumerate(full.classes):
            part = train_linear(X, y, "svm", seed=1, classes=[c])
            assert part.weights[0].tobytes() == full.weights[i].tobytes()
            assert part.bias[0] == full.bias[i]

    def test_objective_non_increasing_in_epochs(self):
        X, y = separable_toy()
        for c in ("A", "B"):
            signs = np.array([1.0 if t == c else -1.0 for t in y])
            vals = []
            for epochs in (1, 5, 20):
                m = train_linear(X, y, "svm", epochs=epochs, seed=0)
                i = m.classes.index(c)
                vals.append(objective(m.weights[i], m.bias[i], X, signs, np.ones(8), 1.0, "svm"))
            assert vals[0] >= vals[1] >= vals[2]

    @pytest.mark.parametrize("kwargs", [{"C": 0}, {"class_weights": {"A": 0.0}}, {"kind": "rbf"}])
    def test_bad_arguments(self, kwargs):
        X, y = separable_toy()
        with pytest.raises(ValueError):
            train_linear(X, y, **kwargs)

    def test_single_class(self):
        X, _ = separable_toy()
        with pytest.raises(DegenerateLabels):
            train_linear(X, ["A"] * 8)


class TestPredict:
    def _model(self):
        return TrainedModel("svm", ["A", "B"], np.array([[1.0, 0.0], [0.0, 1.0]]), np.array([0.0, 0.5]))

    def test_direct_argmax(self):
        assert predict(self._model(), SparseMatrix.from_dense([[1.0, 0.0]])) == ["A"]

    def test_zero_row_uses_bias(self):
        assert predict(self._model(), SparseMatrix.from_dense([[0.0, 0.0]])) == ["B"]

    def test_empty(self):
        assert predict(self._model(), SparseMatrix([0], [], [], (0, 2))) == []

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            predict(self._model(), SparseMatrix.from_dense([[1.0, 0.0, 0.0]]))

    def test_duplicate_later_class_never_wins_ties(self):
        m = self._model()
        X = SparseMatrix.from_dense(np.random.default_rng(0).random((50, 2)))
        before = predict(m, X)
        dup = TrainedModel("svm", ["A", "B", "C"], np.vstack([m.weights, m.weights[0]]),
                           np.append(m.bias, m.bias[0]))
        assert predict(dup, X) == before


def test_model_roundtrip(tmp_path):
    X, y = separable_toy()
    m = train_linear(X, y, "svm")
    save_model(tmp_path / "m.json", m)
    m2 = load_model(tmp_path / "m.json")
    assert m2.weights.tobytes() == m.weights.tobytes()
    assert m2.classes == m.classes and m2.config == m.config


class TestGridSearch:
    def test_choose_C_ties_to_smallest(self):
        assert choose_C([0.5, 1.0, 5.0], [0.8, 0.9, 0.9]) == 1.0

    def test_dedupe(self):
        assert dedupe_candidates([1, 1, 5]) == [1.0, 5.0]

    def test_singleton(self):
        X, y = imbalanced_toy()
        res = grid_search_C(X, y, [5], folds=2, seed=0)
        assert res.chosen == 5.0 and len(res.scores) == 1

    def test_duplicates_searched_once(self):
        X, y = imbalanced_toy()
        res = grid_search_C(X, y, [1, 1, 5], folds=2, seed=0)
        assert res.candidates == [1.0, 5.0]
        assert res.chosen in (1.0, 5.0)
        assert max(res.scores) == res.scores[res.candidates.index(res.chosen)]


def test_overflow_raises_diverged():
    from stx.errors import DivergedError
    X = SparseMatrix.from_dense([[1e300, 1.0], [1.0, 1e300]] * 2)
    with pytest.raises(DivergedError) as info:
        train_linear(X, ["A", "B", "A", "B"], "svm", C=1e300, class_weights={"A": 1e300})
    assert info.value.label == "A" and info.value.epoch == 0
