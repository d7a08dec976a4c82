import json
import tempfile
from contextlib import redirect_stderr, redirect_stdout
from io import StringIO
from pathlib import Path

from django.test import SimpleTestCase

from trex_toolkit import cli
from trex_toolkit.config import merge_run_config, read_config_file
from trex_toolkit.exceptions import (
    EXIT_DATA,
    EXIT_NUMERICAL,
    EXIT_USAGE,
    LarsPathError,
    ModelVersionError,
    ParameterError,
    RowMismatchError,
    ToolkitError,
    exit_code_for,
)
from trex_toolkit.utils import derive_seed, format_float, staged_output


class SeedTests(SimpleTestCase):
    def test_stable_and_label_sensitive(self):
        self.assertEqual(derive_seed(42, 'system', 3), derive_seed(42, 'system', 3))
        self.assertNotEqual(derive_seed(42, 'system', 3), derive_seed(42, 'system', 4))
        self.assertNotEqual(derive_seed(42, 'system', 3), derive_seed(42, 'trex', 3))
        self.assertTrue(0 <= derive_seed(0) < 2 ** 63)

    def test_format_float_round_trips(self):
        for value in (0.1, 1.0 / 3.0, 1e-300, 123456789.125):
            self.assertEqual(float(format_float(value)), value)
        self.assertEqual(format_float(2), '2.0')


class StagedOutputTests(SimpleTestCase):
    def test_files_appear_on_commit(self):
        with tempfile.TemporaryDirectory() as tmp:
            with staged_output(tmp) as staged:
                staged.path('a.txt').write_text('a')
                (staged.path('raw')).mkdir()
                staged.path('raw/b.txt').write_text('b')
                self.assertFalse((Path(tmp) / 'a.txt').exists())
            self.assertEqual((Path(tmp) / 'a.txt').read_text(), 'a')
            self.assertEqual((Path(tmp) / 'raw' / 'b.txt').read_text(), 'b')
            self.assertEqual(sorted(p.name for p in Path(tmp).iterdir()), ['a.txt', 'raw'])

    def test_failure_leaves_nothing(self):
        with tempfile.TemporaryDirectory() as tmp:
            with self.assertRaises(RuntimeError):
                with staged_output(tmp) as staged:
                    staged.path('a.txt').write_text('a')
                    raise RuntimeError('boom')
            self.assertEqual(list(Path(tmp).iterdir()), [])


class ConfigTests(SimpleTestCase):
    def test_key_value_file(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / 'run.cfg'
            path.write_text('# desk run\nK = 7  # experiments\n\nv-grid = 0.5, 0.6\n')
            self.assertEqual(read_config_file(path), {'K': '7', 'v_grid': '0.5, 0.6'})

    def test_malformed_or_missing_file(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / 'run.cfg'
            path.write_text('K 7\n')
            with self.assertRaises(ParameterError):
                read_config_file(path)
            with self.assertRaises(ParameterError):
                read_config_file(Path(tmp) / 'missing.cfg')
            path.write_bytes(b'K = 7 \xe9\n')
            with self.assertRaises(ParameterError):
                read_config_file(path)

    def test_layer_precedence(self):
        merged = merge_run_config({'K': '7', 'T_max': '4'}, {'K': 9, 'T_max': None})
        self.assertEqual(merged['K'], 9)
        self.assertEqual(merged['T_max'], '4')
        self.assertEqual(merged['epochs'], 10)


class ExitCodeTests(SimpleTestCase):
    def test_mapping(self):
        self.assertEqual(exit_code_for(ParameterError('x')), EXIT_USAGE)
        self.assertEqual(exit_code_for(RowMismatchError('x')), EXIT_DATA)
        self.assertEqual(exit_code_for(ModelVersionError('x')), EXIT_DATA)
        self.assertEqual(exit_code_for(LarsPathError('x', step=3)), EXIT_NUMERICAL)
        self.assertEqual(exit_code_for(ToolkitError('x')), 1)
        self.assertEqual((EXIT_USAGE, EXIT_DATA, EXIT_NUMERICAL), (2, 3, 4))


def run_quietly(*argv):
    out, err = StringIO(), StringIO()
    with redirect_stdout(out), redirect_stderr(err):
        code = cli.run([str(a) for a in argv])
    return code, out.getvalue(), err.getvalue()


class CliTests(SimpleTestCase):
    def test_help(self):
        code, out, _ = run_quietly('evaluate', '--help')
        self.assertEqual(code, 0)
        self.assertIn('--alpha', out)
        code, out, _ = run_quietly('build-train-set', '--help')
        self.assertEqual(code, 0)
        self.assertIn('--corpus', out)

    def test_evaluate_without_model(self):
        with tempfile.TemporaryDirectory() as tmp:
            code, _, err = run_quietly('evaluate', '--seed', 1, '--alpha', 0.2, '--output-dir', tmp)
        self.assertEqual(code, 2)
        self.assertIn('--model', err)

    def test_missing_seed(self):
        with tempfile.TemporaryDirectory() as tmp:
            code, _, _ = run_quietly('datagen', '--output-dir', tmp)
        self.assertEqual(code, 2)

    def test_select_on_mismatched_rows(self):
        with tempfile.TemporaryDirectory() as tmp:
            x, y = Path(tmp) / 'genotypes.csv', Path(tmp) / 'status.csv'
            x.write_text('1,2\n3,5\n4,4\n')
            y.write_text('0\n1\n')
            code, _, err = run_quietly('select', '--seed', 1, '--alpha', 0.1, '--x', x, '--y', y,
                                       '--output-dir', Path(tmp) / 'out')
        self.assertEqual(code, 3)
        self.assertIn('genotypes.csv', err)
        self.assertIn('status.csv', err)

    def test_select_on_undecodable_file(self):
        with tempfile.TemporaryDirectory() as tmp:
            x, y = Path(tmp) / 'genotypes.csv', Path(tmp) / 'status.csv'
            x.write_bytes(b'1,2\n\xff\xfe,3\n4,4\n')
            y.write_text('0\n1\n0\n')
            code, _, err = run_quietly('select', '--seed', 1, '--alpha', 0.1, '--x', x, '--y', y,
                                       '--output-dir', Path(tmp) / 'out')
        self.assertEqual(code, 3)
        self.assertIn('genotypes.csv', err)


class WorkflowTests(SimpleTestCase):
    """datagen -> build-train-set -> train -> evaluate -> select, twice with the same seeds."""

    DETERMINISTIC_OUTPUTS = (
        'corpus/corpus_manifest.jsonl',
        'train/train_set.csv',
        'model/fdp_model.bin',
        'model/loss_trace.csv',
        'eval/results.csv',
        'eval/aggregate.csv',
        'eval/surface.csv',
        'select/occurrences.csv',
    )

    def run_workflow(self, root):
        root = Path(root)
        small = ['--n', 20, '--p', 10, '--s', 2]
        steps = [
            ['datagen', '--seed', 11, '--count', 3, *small, '--families', 'gaussian,uniform', '--dump-raw',
             '--output-dir', root / 'corpus'],
            ['build-train-set', '--seed', 11, '--corpus', root / 'corpus' / 'corpus_manifest.jsonl',
             '--K', 4, '--T-max', 3, '--output-dir', root / 'train'],
            ['train', '--seed', 11, '--train-set', root / 'train' / 'train_set.csv', '--epochs', 2,
             '--batch-size', 16, '--hidden-dims', '8,4', '--output-dir', root / 'model'],
            ['evaluate', '--seed', 12, '--model', root / 'model' / 'fdp_model.bin', '--count', 2, *small,
             '--K', 4, '--T-max', 3, '--alpha', 0.2, '--snr-values', '1,4', '--output-dir', root / 'eval'],
            ['select', '--seed', 13, '--x', root / 'corpus' / 'raw' / 'system_000000_X.csv',
             '--y', root / 'corpus' / 'raw' / 'system_000000_y.csv',
             '--truth', root / 'corpus' / 'raw' / 'system_000000_truth.csv',
             '--model', root / 'model' / 'fdp_model.bin', '--K', 4, '--T-max', 3, '--alpha', 0.2,
             '--output-dir', root / 'select'],
        ]
        for argv in steps:
            code, _, err = run_quietly(*argv)
            self.assertEqual(code, 0, msg=f"{argv[0]} failed: {err}")
        return {name: (root / name).read_bytes() for name in self.DETERMINISTIC_OUTPUTS}

    def test_repeat_runs_are_byte_identical(self):
        with tempfile.TemporaryDirectory() as first, tempfile.TemporaryDirectory() as second:
            a = self.run_workflow(first)
            b = self.run_workflow(second)
            reports = [json.loads((Path(root) / 'select' / 'selection_report.json').read_text())
                       for root in (first, second)]
        for name in self.DETERMINISTIC_OUTPUTS:
            self.assertEqual(a[name], b[name], msg=name)
        self.assertIn(b'learned', a['eval/results.csv'])

        for report in reports:
            del report['x_path'], report['y_path']
        self.assertEqual(reports[0], reports[1])
        self.assertEqual(reports[0]['estimator'], 'learned')
        self.assertEqual(reports[0]['n_true'], 2)
