import csv
import json
import tempfile
from io import StringIO
from pathlib import Path

import numpy as np
from django.core.management import call_command
from django.core.management.base import CommandError
from django.test import SimpleTestCase, override_settings, tag

from fdpnet.services.estimator import LearnedEstimator
from fdpnet.services.features import FeatureSpec
from fdpnet.services.loss import LossSpec
from fdpnet.services.mlp import init_params
from fdpnet.services.persistence import save_model
from fdpnet.services.training import TrainingSet, train
from pipeline.forms import validate_run_config
from pipeline.services.evaluation import (
    EvaluationRecord,
    SystemEvaluation,
    aggregate_records,
    evaluate_sweep,
    evaluate_system,
    held_out_sampler,
)
from pipeline.services.exports import (
    AGGREGATE_COLUMNS,
    RESULTS_COLUMNS,
    SURFACE_COLUMNS,
    write_aggregate_csv,
    write_results_csv,
    write_surface_csv,
)
from pipeline.services.external import select_external
from pipeline.services.ingestion import ingest_csv
from pipeline.services.surface import surface_from_evaluations, surface_report
from pipeline.services.training_set import TrainingSetSpec, build_training_set, system_training_records, trex_seed
from pipeline.services.workers import entry_payload, execution_backend, map_ordered
from pipeline.tasks import evaluate_system_task, extract_training_records, learned_estimator
from synthdata.services.distributions import DistributionSpec, Family
from synthdata.services.generator import (
    CorpusSampler,
    SystemConfig,
    case_control_response,
    generate_system,
    plan_corpus,
)
from trex.services.calibration import VOTE_TOLERANCE, AnalyticalEstimator, CalibrationGrid, default_v_grid
from trex.services.metrics import fdp_tpp
from trex.services.selector import occurrence_table
from trex_toolkit.config import merge_run_config
from trex_toolkit.exceptions import (
    DataValidationError,
    DegenerateInputError,
    DimensionError,
    NonNumericCellError,
    ParameterError,
    RowMismatchError,
)

GAUSSIAN = DistributionSpec(Family.GAUSSIAN, {'loc': 0.0, 'scale': 1.0}, 'gaussian')
GRID = CalibrationGrid(v_grid=default_v_grid(), T_max=3, alpha=0.2)


class ConstantEstimator:
    def __init__(self, value, label='constant'):
        self.value = value
        self.label = label

    def __call__(self, table, v, T):
        return self.value


def small_sampler(sparsity=2, **kwargs):
    options = dict(n=20, p=10, sparsity=sparsity, snr_values=[1.0, 4.0], families=[Family.GAUSSIAN])
    options.update(kwargs)
    return CorpusSampler(**options)


def selected_from(record):
    return tuple(int(j) for j in np.flatnonzero(record.phi_row > record.v + VOTE_TOLERANCE))


def write_matrix(path, values):
    np.savetxt(path, np.atleast_2d(np.asarray(values, dtype=float).T).T, delimiter=',')


class TrainingSetTests(SimpleTestCase):
    def test_one_system_gives_one_record_per_cell(self):
        spec = TrainingSetSpec(sampler=small_sampler(), count=1, K=5, T_max=5)
        records = build_training_set(spec, master_seed=1)
        self.assertEqual(len(records), 50)
        self.assertEqual([(r.T, r.v) for r in records],
                         [(T, v) for T in range(1, 6) for v in default_v_grid()])

        entry = plan_corpus(spec.sampler, 1, 1)[0]
        system = entry.generate()
        table = occurrence_table(system.X, system.y, 5, None, 5, trex_seed(1, 0))
        for record in records:
            np.testing.assert_array_equal(record.phi_row, table.row(record.T))
            self.assertEqual(record.L, 10)
            self.assertEqual(record.system, 0)
            self.assertEqual(record.label, fdp_tpp(selected_from(record), system.active_set)[0])

    def test_null_systems_label_any_selection_false(self):
        spec = TrainingSetSpec(sampler=small_sampler(sparsity=0), count=2, K=5, T_max=3)
        records = build_training_set(spec, master_seed=4)
        self.assertEqual(len(records), 60)
        for record in records:
            self.assertEqual(record.label, 1.0 if selected_from(record) else 0.0)

    def test_thread_count_does_not_change_records(self):
        spec = TrainingSetSpec(sampler=small_sampler(), count=3, K=4, T_max=2, v_grid=(0.5, 0.75))
        serial = build_training_set(spec, master_seed=9)
        parallel = build_training_set(spec, master_seed=9, threads=3)
        self.assertEqual([(r.system, r.T, r.v, r.label) for r in serial],
                         [(r.system, r.T, r.v, r.label) for r in parallel])

    def test_task_matches_local_extraction(self):
        entry = plan_corpus(small_sampler(), 1, 6)[0]
        spec = TrainingSetSpec(sampler=small_sampler(), count=1, K=4, T_max=2, v_grid=(0.5, 0.75))
        local = build_training_set(spec, master_seed=6)
        payloads = extract_training_records(entry_payload(entry), 4, None, 2, [0.5, 0.75], 6)
        self.assertEqual([p['label'] for p in payloads], [r.label for r in local])
        self.assertEqual(payloads[-1]['phi_row'], [float(x) for x in local[-1].phi_row])

    def test_desk_corpus_system_with_duplicated_columns(self):
        # binomial(trials=1) design of the seed-7 desk corpus whose active Gram matrix turned singular
        sampler = CorpusSampler(n=15, p=30, sparsity=3, snr_values=[0.3, 1.0, 3.0])
        entry = plan_corpus(sampler, 1702, master_seed=7)[1701]
        records = system_training_records(entry, K=20, L=None, T_max=10, v_grid=default_v_grid(), master_seed=7)
        self.assertEqual(len(records), 100)
        self.assertTrue(all(0.0 <= r.label <= 1.0 for r in records))

    def test_invalid_spec(self):
        with self.assertRaises(ParameterError):
            build_training_set(TrainingSetSpec(sampler=small_sampler(), count=1, T_max=11), master_seed=1)
        with self.assertRaises(ParameterError):
            build_training_set(TrainingSetSpec(sampler=small_sampler(), count=0), master_seed=1)


class EvaluationTests(SimpleTestCase):
    @classmethod
    def setUpClass(cls):
        super().setUpClass()
        cls.entries = plan_corpus(held_out_sampler(20, 10, 2, [1.0, 4.0]), 4, master_seed=3)
        cls.estimators = {'analytical': AnalyticalEstimator(), 'always_one': ConstantEstimator(1.0)}
        cls.sweep = evaluate_sweep(cls.entries, cls.estimators, GRID, K=5, L=None, master_seed=3)

    def test_one_record_per_system_and_method(self):
        records = self.sweep.records
        self.assertEqual(len(records), 8)
        self.assertEqual([(r.index, r.method) for r in records],
                         [(i, m) for i in range(4) for m in ('analytical', 'always_one')])
        self.assertEqual([r.snr for r in records[::2]], [1.0, 4.0, 1.0, 4.0])

    def test_aggregates_recompute(self):
        self.assertEqual([(row.method, row.snr) for row in self.sweep.aggregates],
                         [('analytical', 1.0), ('analytical', 4.0), ('always_one', 1.0), ('always_one', 4.0)])
        for row in self.sweep.aggregates:
            group = [r for r in self.sweep.records if r.method == row.method and r.snr == row.snr]
            self.assertEqual(row.n_systems, 2)
            self.assertEqual(row.fdr_mean, float(np.mean([r.fdp for r in group])))
            self.assertEqual(row.tpr_std, float(np.std([r.tpp for r in group])))

    def test_infeasible_estimator_selects_nothing(self):
        for record in self.sweep.records:
            if record.method != 'always_one':
                continue
            self.assertFalse(record.feasible)
            self.assertEqual((record.n_selected, record.fdp, record.tpp), (0, 0.0, 0.0))
            self.assertIsNone(record.v_star)

    def test_analytical_records_respect_alpha(self):
        for evaluation in self.sweep.evaluations:
            [record] = [r for r in evaluation.records if r.method == 'analytical']
            if record.feasible:
                t_idx = record.T_star - 1
                v_idx = GRID.v_grid.index(record.v_star)
                self.assertLessEqual(evaluation.estimated_surfaces['analytical'][t_idx, v_idx], 0.2)

    def test_upper_bound_estimators_always_overestimate(self):
        always_one = surface_from_evaluations(self.sweep.evaluations, 'always_one', GRID)
        self.assertEqual(always_one.overestimation_fraction, 1.0)

        oracle = [SystemEvaluation(index=ev.index, records=ev.records, true_surface=ev.true_surface,
                                   estimated_surfaces={'oracle': ev.true_surface.copy()})
                  for ev in self.sweep.evaluations]
        report = surface_from_evaluations(oracle, 'oracle', GRID)
        self.assertEqual(report.overestimation_fraction, 1.0)
        self.assertEqual(report.mean_pred.shape, (3, 10))
        rows = list(report.rows())
        self.assertEqual(len(rows), 30)
        self.assertEqual(rows[0][:2], (0.5, 1))
        self.assertEqual(rows[10][:2], (0.5, 2))

    def test_surface_report_matches_sweep(self):
        report = surface_report(self.entries, AnalyticalEstimator(), GRID, K=5, L=None, master_seed=3)
        expected = surface_from_evaluations(self.sweep.evaluations, 'analytical', GRID)
        np.testing.assert_array_equal(report.mean_pred, expected.mean_pred)
        np.testing.assert_array_equal(report.mean_true, expected.mean_true)
        self.assertEqual(report.method, 'analytical')

    def test_thread_count_does_not_change_records(self):
        parallel = evaluate_sweep(self.entries, self.estimators, GRID, K=5, L=None, master_seed=3, threads=4)
        self.assertEqual(parallel.records, self.sweep.records)

    def test_task_matches_local_evaluation(self):
        entry = self.entries[1]
        payload = evaluate_system_task(entry_payload(entry), ['analytical'], None, list(GRID.v_grid), GRID.T_max,
                                       GRID.alpha, 5, None, 3, 'linear')
        remote = SystemEvaluation.from_payload(json.loads(json.dumps(payload)))
        local = evaluate_system(entry, {'analytical': AnalyticalEstimator()}, GRID, 5, None, 3)
        self.assertEqual(remote.records, local.records)
        np.testing.assert_array_equal(remote.true_surface, local.true_surface)

    def test_aggregate_arithmetic(self):
        records = [
            EvaluationRecord('a', 2.0, 1, 0.0, 1.0, 0.5, 1, 2, True),
            EvaluationRecord('a', 2.0, 2, 0.5, 0.5, 0.5, 1, 2, True),
            EvaluationRecord('a', 1.0, 3, 0.25, 0.0, None, None, 0, False),
        ]
        rows = aggregate_records(records)
        self.assertEqual([(r.snr, r.n_systems) for r in rows], [(1.0, 1), (2.0, 2)])
        self.assertEqual((rows[1].fdr_mean, rows[1].fdr_std), (0.25, 0.25))
        self.assertEqual(rows[0].fdr_std, 0.0)

    @override_settings(TREX_EXECUTION_BACKEND='celery')
    def test_celery_backend_needs_model_path(self):
        with self.assertRaises(ParameterError):
            evaluate_sweep(self.entries, {'learned': ConstantEstimator(0.1)}, GRID, K=5, L=None, master_seed=3)

    @override_settings(TREX_EXECUTION_BACKEND='dask')
    def test_unknown_backend(self):
        with self.assertRaises(ParameterError):
            execution_backend()


class WorkerTests(SimpleTestCase):
    def test_results_keep_item_order(self):
        self.assertEqual(map_ordered(lambda x: x * x, range(25), threads=4), [x * x for x in range(25)])
        self.assertEqual(map_ordered(str, [], threads=2), [])

    def test_retrained_model_at_same_path_is_reloaded(self):
        meta = FeatureSpec(p_max=10, T_max_norm=3.0)
        with tempfile.TemporaryDirectory() as tmp:
            path = str(Path(tmp) / 'fdp_model.bin')
            save_model(init_params(meta, seed=1, hidden_dims=(4,)), path)
            first = learned_estimator(path)
            self.assertIs(learned_estimator(path), first)

            save_model(init_params(meta, seed=2, hidden_dims=(4,)), path)
            second = learned_estimator(path)
        self.assertIsNot(second, first)
        self.assertFalse(np.array_equal(second.params.weights[0], first.params.weights[0]))


@tag('slow')
class DeskScaleTests(SimpleTestCase):
    """Default pipeline at desk scale: 2000 training systems, 200 held-out mixture systems."""
    grid = CalibrationGrid(v_grid=default_v_grid(), T_max=10, alpha=0.2)

    @classmethod
    def setUpClass(cls):
        super().setUpClass()
        snr_values = [0.3, 1.0, 3.0]
        spec = TrainingSetSpec(sampler=CorpusSampler(n=15, p=30, sparsity=3, snr_values=snr_values),
                               count=2000, K=20, T_max=10)
        records = build_training_set(spec, master_seed=7, threads=4)
        dataset = TrainingSet.from_records(records, FeatureSpec(p_max=30, T_max_norm=10.0))
        run = train(dataset, epochs=10, lr=1e-3, batch_size=256, spec=LossSpec(1.1), seed=7)

        entries = plan_corpus(held_out_sampler(15, 30, 3, snr_values), 200, master_seed=8)
        estimators = {'analytical': AnalyticalEstimator(), 'learned': LearnedEstimator(run.params)}
        cls.sweep = evaluate_sweep(entries, estimators, cls.grid, K=20, L=None, master_seed=8, threads=4)

    def method_records(self, method):
        return [r for r in self.sweep.records if r.method == method]

    def test_learned_selection_is_as_powerful_and_controls_fdr(self):
        analytical = self.method_records('analytical')
        learned = self.method_records('learned')
        self.assertEqual(len(learned), 200)
        self.assertGreaterEqual(np.mean([r.tpp for r in learned]), np.mean([r.tpp for r in analytical]))
        self.assertLessEqual(np.mean([r.fdp for r in learned]), 0.30)

    def test_learned_surface_overestimates(self):
        report = surface_from_evaluations(self.sweep.evaluations, 'learned', self.grid)
        self.assertGreaterEqual(report.overestimation_fraction, 0.8)


class ExportTests(SimpleTestCase):
    def test_headers_and_optional_fields(self):
        records = [
            EvaluationRecord('analytical', 1.0, 11, 0.0, 1.0, 0.75, 2, 3, True),
            EvaluationRecord('learned', 1.0, 11, 0.0, 0.0, None, None, 0, False),
        ]
        with tempfile.TemporaryDirectory() as tmp:
            results = Path(tmp) / 'results.csv'
            aggregate = Path(tmp) / 'aggregate.csv'
            write_results_csv(records, results)
            write_aggregate_csv(aggregate_records(records), aggregate)
            with open(results, newline='') as f:
                result_rows = list(csv.reader(f))
            with open(aggregate, newline='') as f:
                aggregate_rows = list(csv.reader(f))
        self.assertEqual(result_rows[0], RESULTS_COLUMNS)
        self.assertEqual(result_rows[1], ['analytical', '1.0', '11', '0.0', '1.0', '0.75', '2', '3', 'true'])
        self.assertEqual(result_rows[2], ['learned', '1.0', '11', '0.0', '0.0', '', '', '0', 'false'])
        self.assertEqual(aggregate_rows[0], AGGREGATE_COLUMNS)
        self.assertEqual(len(aggregate_rows), 3)

    def test_surface_rows(self):
        grid = CalibrationGrid(v_grid=(0.5, 0.9), T_max=2, alpha=0.1)
        evaluation = SystemEvaluation(index=0, records=[], true_surface=np.array([[0.0, 0.5], [0.25, 1.0]]),
                                      estimated_surfaces={'m': np.array([[0.1, 0.5], [0.2, 1.0]])})
        report = surface_from_evaluations([evaluation], 'm', grid)
        self.assertEqual(report.overestimation_fraction, 0.75)
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / 'surface.csv'
            write_surface_csv(report, path)
            with open(path, newline='') as f:
                rows = list(csv.reader(f))
        self.assertEqual(rows[0], SURFACE_COLUMNS)
        self.assertEqual(rows[1:], [['0.5', '1', '0.1', '0.0'], ['0.9', '1', '0.5', '0.5'],
                                    ['0.5', '2', '0.2', '0.25'], ['0.9', '2', '1.0', '1.0']])


class IngestionTests(SimpleTestCase):
    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.addCleanup(self.tmp.cleanup)
        self.dir = Path(self.tmp.name)
        self.rng = np.random.default_rng(0)

    def path(self, name):
        return self.dir / name

    def test_row_mismatch_names_both_files(self):
        write_matrix(self.path('X.csv'), self.rng.normal(size=(300, 4)))
        write_matrix(self.path('y.csv'), self.rng.normal(size=299))
        with self.assertRaises(RowMismatchError) as ctx:
            ingest_csv(self.path('X.csv'), self.path('y.csv'))
        self.assertIn('X.csv', str(ctx.exception))
        self.assertIn('y.csv', str(ctx.exception))

    def test_undecodable_bytes_name_the_file(self):
        self.path('genotypes.csv').write_bytes(b'1,2\n\xff\xfe,3\n4,5\n')
        write_matrix(self.path('y.csv'), [0.0, 1.0, 0.0])
        with self.assertRaises(DataValidationError) as ctx:
            ingest_csv(self.path('genotypes.csv'), self.path('y.csv'))
        self.assertIn('genotypes.csv', str(ctx.exception))

        write_matrix(self.path('X.csv'), self.rng.normal(size=(3, 2)))
        self.path('truth.csv').write_bytes(b'0\n\xff\n')
        with self.assertRaises(DataValidationError) as ctx:
            ingest_csv(self.path('X.csv'), self.path('y.csv'), truth_path=self.path('truth.csv'))
        self.assertIn('truth.csv', str(ctx.exception))

    def test_binary_response(self):
        X = self.rng.normal(size=(30, 5))
        write_matrix(self.path('X.csv'), X)
        write_matrix(self.path('y.csv'), np.arange(30) % 2)
        dataset = ingest_csv(self.path('X.csv'), self.path('y.csv'))
        self.assertTrue(dataset.is_binary)
        self.assertEqual((dataset.n, dataset.p), (30, 5))
        np.testing.assert_array_equal(dataset.X, X)
        self.assertIsNone(dataset.truth)

    def test_constant_column(self):
        X = self.rng.normal(size=(10, 4))
        X[:, 2] = 0.7
        write_matrix(self.path('X.csv'), X)
        write_matrix(self.path('y.csv'), self.rng.normal(size=10))
        with self.assertRaises(DegenerateInputError) as ctx:
            ingest_csv(self.path('X.csv'), self.path('y.csv'))
        self.assertEqual(ctx.exception.column, 2)
        self.assertIn('0.7', str(ctx.exception))

    def test_non_numeric_cell_location(self):
        self.path('X.csv').write_text('1,2\n3,4\n5,abc\n7,8\n')
        write_matrix(self.path('y.csv'), [1.0, 2.0, 3.0, 4.0])
        with self.assertRaises(NonNumericCellError) as ctx:
            ingest_csv(self.path('X.csv'), self.path('y.csv'))
        self.assertEqual((ctx.exception.line, ctx.exception.column), (3, 1))

        self.path('Xh.csv').write_text('a,b\n1,2\n3,\n')
        self.path('yh.csv').write_text('y\n1\n2\n')
        with self.assertRaises(NonNumericCellError) as ctx:
            ingest_csv(self.path('Xh.csv'), self.path('yh.csv'), has_header=True)
        self.assertEqual((ctx.exception.line, ctx.exception.column), (3, 1))

    def test_wider_than_model(self):
        write_matrix(self.path('X.csv'), self.rng.normal(size=(10, 6)))
        write_matrix(self.path('y.csv'), self.rng.normal(size=10))
        with self.assertRaises(DimensionError):
            ingest_csv(self.path('X.csv'), self.path('y.csv'), p_max=5)

    def test_response_must_be_one_column(self):
        write_matrix(self.path('X.csv'), self.rng.normal(size=(10, 3)))
        write_matrix(self.path('y.csv'), self.rng.normal(size=(10, 2)))
        with self.assertRaises(DataValidationError):
            ingest_csv(self.path('X.csv'), self.path('y.csv'))

    def test_missing_and_empty_files(self):
        self.path('empty.csv').write_text('')
        write_matrix(self.path('y.csv'), self.rng.normal(size=10))
        with self.assertRaises(DataValidationError):
            ingest_csv(self.path('missing.csv'), self.path('y.csv'))
        with self.assertRaises(DataValidationError):
            ingest_csv(self.path('empty.csv'), self.path('y.csv'))

    def test_truth_file(self):
        write_matrix(self.path('X.csv'), self.rng.normal(size=(10, 5)))
        write_matrix(self.path('y.csv'), self.rng.normal(size=10))
        self.path('truth.txt').write_text('4\n1\n\n4\n')
        dataset = ingest_csv(self.path('X.csv'), self.path('y.csv'), truth_path=self.path('truth.txt'))
        self.assertEqual(dataset.truth, (1, 4))
        self.path('bad.txt').write_text('5\n')
        with self.assertRaises(DataValidationError):
            ingest_csv(self.path('X.csv'), self.path('y.csv'), truth_path=self.path('bad.txt'))


def planted_dataset(directory, n=100, p=20, s=3, seed=0, case_control=False):
    system = generate_system(SystemConfig(n=n, p=p, sparsity=s, snr=5.0, distribution=GAUSSIAN), seed=seed)
    y = case_control_response(system.y) if case_control else system.y
    directory = Path(directory)
    write_matrix(directory / 'X.csv', system.X)
    write_matrix(directory / 'y.csv', y)
    (directory / 'truth.txt').write_text(''.join(f"{j}\n" for j in system.active_set))
    return ingest_csv(directory / 'X.csv', directory / 'y.csv', truth_path=directory / 'truth.txt')


class ExternalSelectionTests(SimpleTestCase):
    def test_planted_truth_metrics(self):
        grid = CalibrationGrid(v_grid=default_v_grid(), T_max=5, alpha=0.2)
        with tempfile.TemporaryDirectory() as tmp:
            dataset = planted_dataset(tmp)
            first = select_external(dataset, AnalyticalEstimator(), 10, None, grid, seed=4)
            second = select_external(dataset, AnalyticalEstimator(), 10, None, grid, seed=4)
        self.assertEqual(first.selection, second.selection)
        np.testing.assert_array_equal(first.table.phi, second.table.phi)
        self.assertEqual((first.fdp, first.tpp), fdp_tpp(first.selection.selected, dataset.truth))

        report = first.to_dict(dataset, grid.alpha)
        self.assertEqual(report['n_true'], 3)
        self.assertEqual((report['n'], report['p'], report['K'], report['L']), (100, 20, 10, 20))
        self.assertEqual(report['seed'], 4)
        self.assertEqual(report['selected'], list(first.selection.selected))

    @tag('slow')
    def test_case_control_shape(self):
        grid = CalibrationGrid(v_grid=default_v_grid(), T_max=5, alpha=0.2)
        with tempfile.TemporaryDirectory() as tmp:
            dataset = planted_dataset(tmp, n=300, p=523, s=10, seed=7, case_control=True)
            report = select_external(dataset, AnalyticalEstimator(), 5, None, grid, seed=7)
        self.assertTrue(dataset.is_binary)
        self.assertEqual(len(dataset.truth), 10)
        self.assertEqual(report.table.phi.shape, (5, 523))
        self.assertTrue(all(0 <= j < 523 for j in report.selection.selected))
        self.assertTrue(0.0 <= report.fdp <= 1.0)


class RunConfigTests(SimpleTestCase):
    def validate(self, **overrides):
        return validate_run_config(merge_run_config({}, overrides))

    def test_defaults_validate(self):
        config = self.validate(seed=1)
        self.assertEqual(config['K'], 20)
        self.assertEqual(config['v_grid'], list(default_v_grid()))
        self.assertIsNone(config['alpha'])

    def test_string_values_are_typed(self):
        config = self.validate(K='7', v_grid='0.5, 0.8', alpha='1', families='gaussian,beta')
        self.assertEqual(config['K'], 7)
        self.assertEqual(config['v_grid'], [0.5, 0.8])
        self.assertEqual(config['alpha'], 1.0)
        self.assertEqual(config['families'], [Family.GAUSSIAN, Family.BETA])

    def test_invalid_values(self):
        bad = [
            {'v_grid': '0.4,0.6'},
            {'v_grid': '0.7,0.6'},
            {'alpha': '0'},
            {'s': '40'},
            {'L': '5', 'T_max': '6'},
            {'loss_weight': '1'},
            {'beta_magnitude_range': '1'},
            {'families': 'poisson'},
            {'deflation': 'quadratic'},
            {'hidden_dims': '0,4'},
        ]
        for values in bad:
            with self.assertRaises(ParameterError, msg=str(values)):
                self.validate(**values)

    def test_unknown_key(self):
        with self.assertRaises(ParameterError):
            validate_run_config(merge_run_config({'gamma': '3'}))


class CommandTests(SimpleTestCase):
    def run_command(self, name, **options):
        call_command(name, stdout=StringIO(), **options)

    def test_build_train_set_from_config(self):
        with tempfile.TemporaryDirectory() as tmp:
            self.run_command('build_train_set', seed=2, count=2, n=15, p=10, s=2, K=3, T_max=2,
                             v_grid=[0.5, 0.75], families=['gaussian'], output_dir=tmp)
            with open(Path(tmp) / 'train_set.csv', newline='') as f:
                rows = list(csv.reader(f))
        self.assertEqual(len(rows), 8)
        self.assertTrue(all(int(row[4]) == 10 and len(row) == 15 for row in rows))

    def test_evaluate_analytical_only(self):
        with tempfile.TemporaryDirectory() as tmp:
            self.run_command('evaluate', seed=5, count=2, n=20, p=10, s=2, K=3, T_max=2, alpha=0.2,
                             snr_values=[1.0, 2.0], methods='analytical', output_dir=tmp)
            out = Path(tmp)
            with open(out / 'results.csv', newline='') as f:
                results = list(csv.reader(f))
            with open(out / 'surface.csv', newline='') as f:
                surface = list(csv.reader(f))
            manifest = json.loads((out / 'run_manifest.json').read_text())
        self.assertEqual(results[0], RESULTS_COLUMNS)
        self.assertEqual(len(results), 3)
        self.assertEqual(len(surface), 1 + 2 * len(default_v_grid()))
        self.assertIn('analytical_overestimation_fraction', manifest['summary'])

    def test_learned_method_without_model_is_a_usage_error(self):
        with tempfile.TemporaryDirectory() as tmp:
            with self.assertRaises(CommandError) as ctx:
                self.run_command('evaluate', seed=5, alpha=0.2, output_dir=tmp)
            self.assertEqual(ctx.exception.returncode, 2)
            self.assertEqual(list(Path(tmp).iterdir()), [])

    def test_select_rejects_mismatched_files(self):
        with tempfile.TemporaryDirectory() as tmp:
            write_matrix(Path(tmp) / 'X.csv', np.random.default_rng(0).normal(size=(12, 3)))
            write_matrix(Path(tmp) / 'y.csv', np.random.default_rng(1).normal(size=11))
            with self.assertRaises(CommandError) as ctx:
                self.run_command('select', seed=1, alpha=0.2, x_path=str(Path(tmp) / 'X.csv'),
                                 y_path=str(Path(tmp) / 'y.csv'), output_dir=str(Path(tmp) / 'out'))
        self.assertEqual(ctx.exception.returncode, 3)
        self.assertIn('X.csv', str(ctx.exception))
        self.assertIn('y.csv', str(ctx.exception))

    def test_select_writes_report(self):
        with tempfile.TemporaryDirectory() as tmp:
            planted_dataset(tmp)
            out = Path(tmp) / 'out'
            self.run_command('select', seed=3, alpha=0.2, K=5, T_max=3, x_path=str(Path(tmp) / 'X.csv'),
                             y_path=str(Path(tmp) / 'y.csv'), truth_path=str(Path(tmp) / 'truth.txt'),
                             output_dir=str(out))
            report = json.loads((out / 'selection_report.json').read_text())
            with open(out / 'occurrences.csv', newline='') as f:
                occurrences = list(csv.reader(f))
        self.assertEqual(report['estimator'], 'analytical')
        self.assertEqual(report['n_true'], 3)
        self.assertIn('fdp', report)
        self.assertEqual(occurrences[0], ['T', 'j', 'phi', 'phi_deflated'])
        self.assertEqual(len(occurrences), 1 + 3 * 20)
