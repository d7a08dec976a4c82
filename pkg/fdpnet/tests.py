import csv
import math
import tempfile
from io import StringIO
from pathlib import Path

import numpy as np
from django.core.management import call_command
from django.test import SimpleTestCase

from fdpnet.services.estimator import LearnedEstimator, predict_fdp
from fdpnet.services.features import FeatureSpec, featurize, featurize_rows
from fdpnet.services.loss import LossSpec, asym_loss, asym_loss_grad
from fdpnet.services.mlp import MlpParams, backprop, init_params, mlp_forward, mlp_forward_batch, zero_params
from fdpnet.services.optimizer import OptimizerState, adam_step
from fdpnet.services.persistence import load_model, save_model
from fdpnet.services.training import (
    TrainingRecord,
    TrainingSet,
    read_training_records,
    train,
    write_training_records,
)
from trex.services.calibration import CalibrationGrid
from trex.services.occurrences import OccurrenceTable
from trex_toolkit.exceptions import (
    CorruptModelError,
    DataValidationError,
    DimensionError,
    ModelFileError,
    ModelVersionError,
    ParameterError,
)
from trex_toolkit.utils import derive_seed

SPEC = LossSpec(w=1.1)


def sample_table(p=4, T_max=3, seed=0):
    rng = np.random.default_rng(seed)
    phi = np.sort(rng.uniform(size=(T_max, p)), axis=0)
    return OccurrenceTable(phi=phi, phi_deflated=phi * 0.9, K=20, L=p, T_max=T_max)


def hidden_preactivations(params, x):
    a, out = x, []
    for W, b in zip(params.weights[:-1], params.biases[:-1]):
        z = a @ W + b
        out.append(z)
        a = np.maximum(z, 0.0)
    return np.concatenate(out)


def loss_at(params, x, label):
    return float(asym_loss(mlp_forward(params, x), label, SPEC))


def numeric_gradients(params, x, label, h=1e-5):
    grads = []
    for array in params.arrays():
        grad = np.zeros_like(array)
        for idx in np.ndindex(array.shape):
            original = array[idx]
            array[idx] = original + h
            up = loss_at(params, x, label)
            array[idx] = original - h
            down = loss_at(params, x, label)
            array[idx] = original
            grad[idx] = (up - down) / (2 * h)
        grads.append(grad)
    return grads


def smooth_draws(count, p_max, hidden_dims, seed):
    """(params, x, label) draws whose hidden units all sit well away from the ReLU kink."""
    rng = np.random.default_rng(seed)
    meta = FeatureSpec(p_max=p_max, T_max_norm=10.0)
    draws = []
    while len(draws) < count:
        params = init_params(meta, int(rng.integers(1 << 31)), hidden_dims=hidden_dims)
        params.biases = [rng.normal(0.0, 0.3, size=b.shape) for b in params.biases]
        x = rng.uniform(0.0, 1.0, size=meta.input_dim)
        if np.min(np.abs(hidden_preactivations(params, x))) < 1e-3:
            continue
        draws.append((params, x, float(rng.integers(0, 2))))
    return draws


class FeatureTests(SimpleTestCase):
    def test_layout(self):
        meta = FeatureSpec(p_max=5, T_max_norm=10.0)
        features = featurize([0.2, 0.4, 1.0], v=0.5, T=2, L=3, meta=meta)
        np.testing.assert_array_equal(features, [0.2, 0.4, 1.0, 0.0, 0.0, 0.5, 0.2, 1.0])

    def test_too_many_predictors(self):
        with self.assertRaises(DimensionError):
            featurize(np.ones(6), v=0.5, T=1, L=6, meta=FeatureSpec(p_max=5, T_max_norm=10.0))

    def test_batch_matches_single(self):
        meta = FeatureSpec(p_max=4, T_max_norm=5.0)
        rows = np.array([[0.1, 0.3, 0.0, 0.0], [0.5, 0.6, 0.7, 0.0]])
        batch = featurize_rows(rows, [0.5, 0.75], [1, 3], [2, 3], [2, 3], meta)
        np.testing.assert_array_equal(batch[0], featurize([0.1, 0.3], 0.5, 1, 2, meta))
        np.testing.assert_array_equal(batch[1], featurize([0.5, 0.6, 0.7], 0.75, 3, 3, meta))


class ForwardTests(SimpleTestCase):
    def test_zero_network_outputs_one_half(self):
        params = zero_params(FeatureSpec(p_max=3, T_max_norm=10.0), hidden_dims=(4, 3))
        self.assertEqual(mlp_forward(params, np.arange(6.0)), 0.5)

    def test_hand_computed_network(self):
        W0 = np.array([[1.0, -1.0], [0.5, 2.0], [-0.3, 0.1], [0.2, 0.0]])
        b0 = np.array([0.1, -0.2])
        W1 = np.array([[0.7], [-1.3]])
        b1 = np.array([0.05])
        params = MlpParams(weights=[W0, W1], biases=[b0, b1], p_max=1, T_max_norm=10.0)
        x = [0.2, 0.5, 0.3, 1.0]

        h1 = max(0.0, 0.2 * 1.0 + 0.5 * 0.5 + 0.3 * -0.3 + 1.0 * 0.2 + 0.1)
        h2 = max(0.0, 0.2 * -1.0 + 0.5 * 2.0 + 0.3 * 0.1 + 1.0 * 0.0 - 0.2)
        expected = 1.0 / (1.0 + math.exp(-(0.7 * h1 - 1.3 * h2 + 0.05)))
        self.assertAlmostEqual(mlp_forward(params, x), expected, delta=1e-12)

    def test_output_stays_inside_unit_interval(self):
        params = init_params(FeatureSpec(p_max=2, T_max_norm=1.0), seed=3, hidden_dims=(4,))
        params.weights = [W * 1e3 for W in params.weights]
        rows = np.random.default_rng(1).normal(0.0, 1e3, size=(50, 5))
        out = mlp_forward_batch(params, rows)
        self.assertTrue(np.all((out > 0.0) & (out < 1.0)))

    def test_dimension_mismatch(self):
        params = zero_params(FeatureSpec(p_max=3, T_max_norm=10.0), hidden_dims=(2,))
        with self.assertRaises(DimensionError):
            mlp_forward(params, np.zeros(5))


class LossTests(SimpleTestCase):
    def test_tabulated_values(self):
        cases = [
            (0.3, 0.2, 0.01, 0.2),
            (0.2, 0.3, 0.011, -0.22),
            (0.4, 0.4, 0.0, 0.0),
            (1.0, 0.0, 1.0, 2.0),
            (0.0, 1.0, 1.1, -2.2),
        ]
        for pred, label, loss, grad in cases:
            self.assertAlmostEqual(float(asym_loss(pred, label, SPEC)), loss, delta=1e-12)
            self.assertAlmostEqual(float(asym_loss_grad(pred, label, SPEC)), grad, delta=1e-12)

    def test_underestimation_costs_more(self):
        for y in (0.1, 0.5, 0.8):
            for d in (1e-3, 0.05, 0.2):
                self.assertLess(asym_loss(y + d, y, SPEC), asym_loss(y - d, y, SPEC))
                self.assertGreater(asym_loss(y + d, y, SPEC), 0.0)

    def test_weight_must_exceed_one(self):
        with self.assertRaises(ParameterError):
            LossSpec(w=1.0)


class BackpropTests(SimpleTestCase):
    def assertGradientsMatch(self, params, x, label):
        analytic, _ = backprop(params, x[None, :], [label], SPEC)
        numeric = numeric_gradients(params, x, label)
        for block, (a, n) in enumerate(zip(analytic, numeric)):
            error = np.linalg.norm(a - n)
            scale = np.linalg.norm(a) + np.linalg.norm(n)
            self.assertLessEqual(error, 1e-4 * scale + 1e-7, msg=f"block {block}: {error} vs {scale}")

    def test_finite_differences_small_networks(self):
        for params, x, label in smooth_draws(20, p_max=5, hidden_dims=(8, 6, 4), seed=17):
            self.assertGradientsMatch(params, x, label)

    def test_finite_differences_default_architecture(self):
        [(params, x, label)] = smooth_draws(1, p_max=20, hidden_dims=(128, 64, 32), seed=29)
        self.assertGradientsMatch(params, x, label)

    def test_duplicated_example(self):
        [(params, x, label)] = smooth_draws(1, p_max=3, hidden_dims=(5, 4), seed=2)
        single, loss_single = backprop(params, x[None, :], [label], SPEC)
        double, loss_double = backprop(params, np.vstack([x, x]), [label, label], SPEC)
        self.assertAlmostEqual(loss_single, loss_double, delta=1e-15)
        for a, b in zip(single, double):
            np.testing.assert_allclose(a, b, rtol=1e-12, atol=1e-15)

    def test_fixed_point_has_zero_gradient(self):
        [(params, x, _)] = smooth_draws(1, p_max=3, hidden_dims=(5, 4), seed=4)
        rows = np.vstack([x, x * 0.5])
        labels = mlp_forward_batch(params, rows)
        grads, loss = backprop(params, rows, labels, SPEC)
        self.assertEqual(loss, 0.0)
        self.assertLessEqual(math.sqrt(sum(float(np.sum(g ** 2)) for g in grads)), 1e-10)

    def test_label_count_must_match(self):
        params = zero_params(FeatureSpec(p_max=1, T_max_norm=1.0), hidden_dims=(2,))
        with self.assertRaises(DimensionError):
            backprop(params, np.zeros((2, 4)), [0.5], SPEC)


class AdamTests(SimpleTestCase):
    def test_first_step_closed_form(self):
        params = init_params(FeatureSpec(p_max=2, T_max_norm=1.0), seed=9, hidden_dims=(3,))
        rng = np.random.default_rng(0)
        grads = [rng.normal(size=a.shape) for a in params.arrays()]
        state = OptimizerState.for_params(params, lr=1e-3)
        updated, new_state = adam_step(params, grads, state)
        for before, after, g in zip(params.arrays(), updated.arrays(), grads):
            expected = before - 1e-3 * g / (np.abs(g) + 1e-8)
            np.testing.assert_allclose(after, expected, rtol=0, atol=1e-9)
        self.assertEqual(new_state.step, 1)
        self.assertEqual(state.step, 0)

    def test_unit_gradient_moves_by_learning_rate(self):
        params = zero_params(FeatureSpec(p_max=1, T_max_norm=1.0), hidden_dims=(1,))
        grads = [np.ones_like(a) for a in params.arrays()]
        updated, _ = adam_step(params, grads, OptimizerState.for_params(params, lr=1e-3))
        for after in updated.arrays():
            np.testing.assert_allclose(after, -1e-3, atol=1e-9)

    def test_zero_gradient_leaves_parameters(self):
        params = init_params(FeatureSpec(p_max=2, T_max_norm=1.0), seed=1, hidden_dims=(3,))
        state = OptimizerState.for_params(params)
        current = params
        for _ in range(5):
            current, state = adam_step(current, [np.zeros_like(a) for a in current.arrays()], state)
        for before, after in zip(params.arrays(), current.arrays()):
            np.testing.assert_array_equal(before, after)

    def test_deterministic(self):
        params = init_params(FeatureSpec(p_max=2, T_max_norm=1.0), seed=1, hidden_dims=(3,))
        grads = [np.full(a.shape, 0.3) for a in params.arrays()]
        state = OptimizerState.for_params(params)
        a, _ = adam_step(params, grads, state)
        b, _ = adam_step(params, grads, state)
        for x, y in zip(a.arrays(), b.arrays()):
            np.testing.assert_array_equal(x, y)


def constant_label_set(size=2048, label=0.4, seed=0):
    meta = FeatureSpec(p_max=4, T_max_norm=5.0)
    rng = np.random.default_rng(seed)
    features = rng.uniform(0.0, 1.0, size=(size, meta.input_dim))
    return TrainingSet(features=features, labels=np.full(size, label), meta=meta)


class TrainingTests(SimpleTestCase):
    def test_constant_label_is_learned(self):
        dataset = constant_label_set()
        run = train(dataset, epochs=10, lr=3e-3, batch_size=32, spec=SPEC, seed=5, hidden_dims=(16, 8))
        mean_prediction = float(np.mean(mlp_forward_batch(run.params, dataset.features)))
        self.assertLess(abs(mean_prediction - 0.4), 0.05)
        self.assertEqual(len(run.loss_trace), 10)
        self.assertLess(run.loss_trace[-1], run.loss_trace[0])

    def test_same_seed_same_model(self):
        dataset = constant_label_set(size=200)
        a = train(dataset, epochs=2, lr=1e-3, batch_size=16, spec=SPEC, seed=8, hidden_dims=(6, 4))
        b = train(dataset, epochs=2, lr=1e-3, batch_size=16, spec=SPEC, seed=8, hidden_dims=(6, 4))
        for x, y in zip(a.params.arrays(), b.params.arrays()):
            np.testing.assert_array_equal(x, y)
        self.assertEqual(a.loss_trace, b.loss_trace)

    def test_zero_epochs_returns_initialization(self):
        dataset = constant_label_set(size=20)
        run = train(dataset, epochs=0, lr=1e-3, batch_size=4, spec=SPEC, seed=3, hidden_dims=(4,))
        initial = init_params(dataset.meta, derive_seed(3, 'init'), hidden_dims=(4,))
        for x, y in zip(run.params.arrays(), initial.arrays()):
            np.testing.assert_array_equal(x, y)
        self.assertEqual(run.loss_trace, [])

    def test_empty_dataset(self):
        dataset = TrainingSet.from_records([], FeatureSpec(p_max=3, T_max_norm=1.0))
        with self.assertRaises(ParameterError):
            train(dataset, epochs=1, lr=1e-3, batch_size=4, spec=SPEC, seed=1)

    def test_records_pad_to_p_max(self):
        records = [
            TrainingRecord(label=0.5, v=0.6, T=1, L=2, phi_row=np.array([0.1, 0.2])),
            TrainingRecord(label=0.0, v=0.9, T=2, L=3, phi_row=np.array([0.3, 0.4, 0.5])),
        ]
        dataset = TrainingSet.from_records(records, FeatureSpec(p_max=3, T_max_norm=2.0))
        np.testing.assert_array_equal(dataset.features[0], [0.1, 0.2, 0.0, 0.6, 0.5, 1.0])
        self.assertEqual(len(dataset), 2)
        with self.assertRaises(DimensionError):
            TrainingSet.from_records(records, FeatureSpec(p_max=2, T_max_norm=2.0))

    def test_training_file_round_trip(self):
        records = [
            TrainingRecord(label=0.25, v=0.55, T=3, L=4, phi_row=np.array([0.1, 1.0 / 3.0])),
            TrainingRecord(label=1.0, v=0.95, T=1, L=4, phi_row=np.array([0.0, 0.7, 0.2])),
        ]
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / 'train_set.csv'
            write_training_records(records, path)
            loaded = read_training_records(path)
        self.assertEqual(len(loaded), 2)
        np.testing.assert_array_equal(loaded[0].phi_row, records[0].phi_row)
        self.assertEqual((loaded[1].label, loaded[1].v, loaded[1].T, loaded[1].L), (1.0, 0.95, 1, 4))

    def test_malformed_training_file(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / 'train_set.csv'
            path.write_text('0.5,0.6,1,2,3,0.1,0.2\n')
            with self.assertRaises(DataValidationError):
                read_training_records(path)

    def test_non_finite_or_undecodable_training_file(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / 'train_set.csv'
            for line in ('nan,0.5,1,3,3,0.1,0.2,0.3\n', '0.5,0.5,1,3,3,0.1,inf,0.3\n', 'inf,0.5,1,3,3,0,0,0\n'):
                path.write_text(line)
                with self.assertRaises(DataValidationError, msg=line):
                    read_training_records(path)
            path.write_bytes(b'0.5,0.5,1,3,3,0.1,0.2,\xff\n')
            with self.assertRaises(DataValidationError):
                read_training_records(path)

    def test_nan_labels_are_rejected(self):
        record = TrainingRecord(label=float('nan'), v=0.5, T=1, L=3, phi_row=np.array([0.1, 0.2, 0.3]))
        with self.assertRaises(DataValidationError):
            TrainingSet.from_records([record], FeatureSpec(p_max=3, T_max_norm=1.0))


class PersistenceTests(SimpleTestCase):
    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.addCleanup(self.tmp.cleanup)
        self.path = Path(self.tmp.name) / 'fdp_model.bin'
        self.params = init_params(FeatureSpec(p_max=4, T_max_norm=10.0), seed=12, hidden_dims=(5, 3))
        self.params.training = {'epochs': 3, 'lr': 0.001, 'seed': 12}
        save_model(self.params, self.path)

    def test_round_trip_is_bit_exact(self):
        loaded = load_model(self.path)
        for a, b in zip(self.params.arrays(), loaded.arrays()):
            np.testing.assert_array_equal(a, b)
        self.assertEqual(loaded.p_max, 4)
        self.assertEqual(loaded.loss_weight, 1.1)
        self.assertEqual(loaded.training['epochs'], 3)
        x = np.random.default_rng(0).uniform(size=(10, 7))
        np.testing.assert_array_equal(mlp_forward_batch(self.params, x), mlp_forward_batch(loaded, x))

    def test_truncated_file(self):
        self.path.write_bytes(self.path.read_bytes()[:-8])
        with self.assertRaises(CorruptModelError):
            load_model(self.path)

    def test_flipped_payload_byte(self):
        raw = bytearray(self.path.read_bytes())
        raw[-1] ^= 0xFF
        self.path.write_bytes(bytes(raw))
        with self.assertRaises(CorruptModelError):
            load_model(self.path)

    def test_unknown_version(self):
        self.path.write_bytes(self.path.read_bytes().replace(b'"version": 1', b'"version": 99', 1))
        with self.assertRaises(ModelVersionError):
            load_model(self.path)

    def test_not_a_model_file(self):
        self.path.write_bytes(b'hello\n')
        with self.assertRaises(CorruptModelError):
            load_model(self.path)
        with self.assertRaises(ModelFileError):
            load_model(Path(self.tmp.name) / 'missing.bin')


class EstimatorTests(SimpleTestCase):
    def test_zero_network_predicts_one_half(self):
        params = zero_params(FeatureSpec(p_max=6, T_max_norm=3.0), hidden_dims=(4,))
        table = sample_table()
        self.assertEqual(predict_fdp(params, table, 0.5, 1), 0.5)

    def test_surface_matches_cellwise_predictions(self):
        params = init_params(FeatureSpec(p_max=6, T_max_norm=3.0), seed=4, hidden_dims=(8, 4))
        estimator = LearnedEstimator(params)
        table = sample_table()
        grid = CalibrationGrid(v_grid=(0.5, 0.7, 0.9), T_max=3, alpha=0.2)
        surface = estimator.surface(table, grid)
        self.assertEqual(surface.shape, (3, 3))
        for i, T in enumerate(grid.T_grid):
            for j, v in enumerate(grid.v_grid):
                self.assertAlmostEqual(surface[i, j], estimator(table, v, T), delta=1e-12)

    def test_table_wider_than_model(self):
        estimator = LearnedEstimator(zero_params(FeatureSpec(p_max=3, T_max_norm=3.0), hidden_dims=(2,)))
        with self.assertRaises(DimensionError):
            estimator(sample_table(p=4), 0.5, 1)


class TrainCommandTests(SimpleTestCase):
    def test_model_and_loss_trace(self):
        rng = np.random.default_rng(0)
        records = [TrainingRecord(label=float(rng.uniform()), v=0.5 + 0.05 * (i % 10), T=1 + i % 3, L=5,
                                  phi_row=rng.uniform(size=5)) for i in range(40)]
        with tempfile.TemporaryDirectory() as tmp:
            train_set = Path(tmp) / 'train_set.csv'
            write_training_records(records, train_set)
            out = Path(tmp) / 'out'
            call_command('train', train_set=str(train_set), seed=2, epochs=2, batch_size=8,
                         hidden_dims=[4, 3], output_dir=str(out), stdout=StringIO())
            params = load_model(out / 'fdp_model.bin')
            with open(out / 'loss_trace.csv', newline='') as f:
                trace = list(csv.reader(f))
        self.assertEqual(params.p_max, 5)
        self.assertEqual(params.T_max_norm, 3.0)
        self.assertEqual(params.layer_dims, [8, 4, 3, 1])
        self.assertEqual(trace[0], ['epoch', 'mean_loss'])
        self.assertEqual([row[0] for row in trace[1:]], ['1', '2'])
