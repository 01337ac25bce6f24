import numpy as np
import pytest

from fedcell.data import synth_dataset
from fedcell.metrics import compute_metrics, evaluate
from fedcell.training import TrainerSpec, make_model

import oracles


class TestComputeMetrics:
    def test_perfect_predictions(self):
        y = np.array([0, 1, 2, 3, 0, 1])
        m = compute_metrics(y, y, 4)
        assert m.accuracy == 1.0
        assert m.macro_f1 == 1.0
        assert m.per_class_f1 == (1.0, 1.0, 1.0, 1.0)

    def test_binary_all_predicted_zero(self):
        y_true = np.array([0, 0, 1, 1])
        y_pred = np.zeros(4, dtype=int)
        m = compute_metrics(y_true, y_pred, 2)
        assert m.accuracy == 0.5
        assert m.per_class_f1[0] == pytest.approx(2 / 3)
        assert m.per_class_f1[1] == 0.0
        assert m.macro_f1 == pytest.approx(1 / 3)

    def test_absent_class_scores_zero_without_error(self):
        m = compute_metrics(np.array([0, 0]), np.array([0, 0]), 3)
        assert m.per_class_f1[1] == 0.0 and m.per_class_f1[2] == 0.0

    def test_matches_naive_counting(self):
        rng = np.random.default_rng(77)
        for _ in range(20):
            n_classes = int(rng.integers(2, 8))
            y_true = rng.integers(0, n_classes, size=100)
            y_pred = rng.integers(0, n_classes, size=100)
            m = compute_metrics(y_true, y_pred, n_classes)
            acc, per_class, macro = oracles.naive_metrics(
                y_true.tolist(), y_pred.tolist(), n_classes
            )
            assert m.accuracy == pytest.approx(acc)
            assert m.per_class_f1 == pytest.approx(tuple(per_class))
            assert m.macro_f1 == pytest.approx(macro)

    def test_bounds_and_macro_definition(self):
        rng = np.random.default_rng(13)
        for _ in range(20):
            y_true = rng.integers(0, 5, size=60)
            y_pred = rng.integers(0, 5, size=60)
            m = compute_metrics(y_true, y_pred, 5)
            assert 0.0 <= m.accuracy <= 1.0
            assert all(0.0 <= f <= 1.0 for f in m.per_class_f1)
            assert abs(m.macro_f1 - np.mean(m.per_class_f1)) < 1e-12

    def test_rejects_empty(self):
        with pytest.raises(ValueError):
            compute_metrics(np.array([]), np.array([]), 2)


class TestEvaluate:
    def test_runs_model_end_to_end(self):
        data = synth_dataset(50, 6, 3, np.random.default_rng(5))
        spec = TrainerSpec()
        model = make_model(spec, 6, 3)
        params = model.init_params(np.random.default_rng(6))
        m = evaluate(params, data, spec)
        assert 0.0 <= m.accuracy <= 1.0
        assert len(m.per_class_f1) == 3
