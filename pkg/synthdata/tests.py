import json
import tempfile
from io import StringIO
from pathlib import Path

import numpy as np
import pandas as pd
from django.core.management import call_command
from django.test import SimpleTestCase

from synthdata.services.distributions import (
    TRAINING_FAMILIES,
    DistributionSpec,
    Family,
    parse_family,
    random_spec,
    sample_design,
    validate_params,
)
from synthdata.services.generator import (
    CorpusSampler,
    SystemConfig,
    case_control_response,
    compute_noise_std,
    draw_sparse_beta,
    generate_corpus,
    generate_system,
    plan_corpus,
)
from synthdata.services.manifest import dump_system_csv, read_manifest, write_manifest
from trex_toolkit.exceptions import DataValidationError, ParameterError
from trex_toolkit.utils import derive_seed

GAUSSIAN = DistributionSpec(Family.GAUSSIAN, {'loc': 0.0, 'scale': 1.0}, 'gaussian')


def desk_sampler(**kwargs):
    options = dict(n=15, p=30, sparsity=3, snr_values=[0.3, 1.0, 3.0])
    options.update(kwargs)
    return CorpusSampler(**options)


class DistributionTests(SimpleTestCase):
    def test_design_is_deterministic(self):
        first = sample_design(GAUSSIAN, 4, 3, seed=7)
        np.testing.assert_array_equal(first, sample_design(GAUSSIAN, 4, 3, seed=7))
        self.assertEqual(first.shape, (4, 3))

    def test_uniform_mean(self):
        dist = DistributionSpec(Family.UNIFORM, {'low': 0.0, 'high': 1.0})
        mean = sample_design(dist, 1000, 1, seed=3).mean()
        self.assertGreaterEqual(mean, 0.45)
        self.assertLessEqual(mean, 0.55)

    def test_invalid_parameters(self):
        bad = [
            DistributionSpec(Family.BETA, {'a': 0.0, 'b': 1.0}),
            DistributionSpec(Family.STUDENT_T, {'df': -1.0}),
            DistributionSpec(Family.UNIFORM, {'low': 1.0, 'high': 1.0}),
            DistributionSpec(Family.BINOMIAL, {'trials': 2.5, 'prob': 0.3}),
            DistributionSpec(Family.BINOMIAL, {'trials': 2, 'prob': 1.5}),
            DistributionSpec(Family.GAUSSIAN, {'loc': float('nan'), 'scale': 1.0}),
            DistributionSpec(Family.GAMMA, {'shape': 1.0}),
        ]
        for dist in bad:
            with self.assertRaises(ParameterError, msg=str(dist)):
                sample_design(dist, 3, 2, seed=1)

    def test_mixture_validation(self):
        with self.assertRaises(ParameterError):
            validate_params(DistributionSpec(Family.GAUSSIAN_MIXTURE,
                                             {'weights': [1.0], 'means': [0.0], 'stds': [1.0]}))
        with self.assertRaises(ParameterError):
            validate_params(DistributionSpec(Family.GAUSSIAN_MIXTURE,
                                             {'weights': [0.5, 0.6], 'means': [0.0, 1.0], 'stds': [1.0, 1.0]}))
        validate_params(DistributionSpec(Family.GAUSSIAN_MIXTURE,
                                         {'weights': [0.25, 0.75], 'means': [-1.0, 1.0], 'stds': [1.0, 0.5]}))

    def test_random_specs_are_valid_and_bounded(self):
        rng = np.random.default_rng(0)
        for family in Family:
            for _ in range(5):
                dist = random_spec(family, rng)
                validate_params(dist)
                X = sample_design(dist, 50, 4, seed=int(rng.integers(1 << 30)))
                self.assertTrue(np.all(np.isfinite(X)), msg=family.value)
                if family is Family.BETA:
                    self.assertTrue(np.all((X >= 0) & (X <= 1)))
                elif family is Family.UNIFORM:
                    self.assertTrue(np.all((X >= dist.params['low']) & (X <= dist.params['high'])))
                elif family is Family.BINOMIAL:
                    self.assertTrue(np.all((X >= 0) & (X <= dist.params['trials'])))
                    np.testing.assert_array_equal(X, np.round(X))

    def test_random_mixture_has_three_components(self):
        dist = random_spec(Family.GAUSSIAN_MIXTURE, np.random.default_rng(5))
        self.assertEqual(len(dist.params['weights']), 3)
        self.assertLessEqual(abs(sum(dist.params['weights']) - 1.0), 1e-12)

    def test_training_families_exclude_mixture(self):
        self.assertEqual(len(TRAINING_FAMILIES), 14)
        self.assertNotIn(Family.GAUSSIAN_MIXTURE, TRAINING_FAMILIES)

    def test_parse_family(self):
        self.assertIs(parse_family('Gaussian-Mixture'), Family.GAUSSIAN_MIXTURE)
        self.assertIs(parse_family(' studentt '), Family.STUDENT_T)
        with self.assertRaises(ParameterError):
            parse_family('poisson')


class CoefficientAndNoiseTests(SimpleTestCase):
    def test_degenerate_magnitude_range(self):
        beta, active = draw_sparse_beta(5, 2, (1.0, 1.0), seed=4)
        self.assertEqual(np.count_nonzero(beta), 2)
        np.testing.assert_array_equal(np.abs(beta[list(active)]), [1.0, 1.0])
        self.assertEqual(active, tuple(sorted(active)))

    def test_null_coefficients(self):
        beta, active = draw_sparse_beta(5, 0, (1.0, 3.0), seed=4)
        np.testing.assert_array_equal(beta, np.zeros(5))
        self.assertEqual(active, ())

    def test_sparsity_beyond_p(self):
        with self.assertRaises(ParameterError):
            draw_sparse_beta(3, 4, (1.0, 3.0), seed=4)

    def test_magnitudes_within_range(self):
        beta, active = draw_sparse_beta(50, 20, (1.0, 3.0), seed=8)
        magnitudes = np.abs(beta[list(active)])
        self.assertTrue(np.all((magnitudes >= 1.0) & (magnitudes <= 3.0)))
        self.assertEqual(set(np.flatnonzero(beta)), set(active))

    def test_noise_std_definition(self):
        X = np.array([[1.0], [-1.0]])
        self.assertAlmostEqual(compute_noise_std(X, np.array([1.0]), snr=1.0), 1.0)
        self.assertAlmostEqual(compute_noise_std(X, np.array([2.0]), snr=0.01), 20.0)
        self.assertEqual(compute_noise_std(X, np.array([0.0]), snr=3.0), 1.0)
        with self.assertRaises(ParameterError):
            compute_noise_std(X, np.array([1.0]), snr=0.0)


class GeneratorTests(SimpleTestCase):
    def test_null_system_is_pure_noise(self):
        system = generate_system(SystemConfig(n=20, p=6, sparsity=0, snr=1.0, distribution=GAUSSIAN), seed=3)
        self.assertEqual(system.active_set, ())
        np.testing.assert_array_equal(system.X @ system.beta, np.zeros(20))
        self.assertEqual(system.noise_std, 1.0)

    def test_same_config_and_seed(self):
        cfg = SystemConfig(n=10, p=8, sparsity=2, snr=2.0, distribution=GAUSSIAN)
        a, b = generate_system(cfg, seed=9), generate_system(cfg, seed=9)
        np.testing.assert_array_equal(a.X, b.X)
        np.testing.assert_array_equal(a.y, b.y)
        self.assertEqual(a.active_set, b.active_set)

    def test_response_regenerates_from_seed(self):
        cfg = SystemConfig(n=12, p=5, sparsity=2, snr=1.0, distribution=GAUSSIAN)
        system = generate_system(cfg, seed=21)
        noise = np.random.default_rng(derive_seed(21, 'noise')).normal(0.0, system.noise_std, size=12)
        np.testing.assert_array_equal(system.y, system.X @ system.beta + noise)
        self.assertEqual(set(np.flatnonzero(system.beta)), set(system.active_set))
        self.assertEqual(len(system.active_set), 2)

    def test_main_experiment_shape(self):
        system = generate_system(SystemConfig(n=75, p=150, sparsity=3, snr=5.0, distribution=GAUSSIAN), seed=1)
        self.assertEqual(system.X.shape, (75, 150))
        self.assertEqual(len(system.active_set), 3)

    def test_realized_snr(self):
        cfg = SystemConfig(n=1000, p=10, sparsity=3, snr=2.0, distribution=GAUSSIAN)
        system = generate_system(cfg, seed=5)
        signal = system.X @ system.beta
        ratio = np.var(signal) / np.var(system.y - signal)
        self.assertLess(abs(ratio - 2.0) / 2.0, 0.2)

    def test_binomial_columns_are_never_constant(self):
        dist = DistributionSpec(Family.BINOMIAL, {'trials': 1, 'prob': 0.2})
        system = generate_system(SystemConfig(n=4, p=40, sparsity=1, snr=1.0, distribution=dist), seed=2)
        self.assertTrue(np.all(np.ptp(system.X, axis=0) > 0))

    def test_invalid_config(self):
        with self.assertRaises(ParameterError):
            generate_system(SystemConfig(n=1, p=3, sparsity=1, snr=1.0, distribution=GAUSSIAN), seed=1)
        with self.assertRaises(ParameterError):
            generate_system(SystemConfig(n=5, p=3, sparsity=1, snr=-1.0, distribution=GAUSSIAN), seed=1)

    def test_case_control_response(self):
        y = np.arange(300.0)
        status = case_control_response(y)
        self.assertEqual(status.sum(), 200)
        self.assertTrue(np.all(status[100:] == 1.0))
        with self.assertRaises(ParameterError):
            case_control_response(y, case_fraction=1.0)


class CorpusTests(SimpleTestCase):
    def test_distinct_seeds(self):
        corpus = generate_corpus(desk_sampler(), 10, master_seed=42)
        self.assertEqual(len(corpus), 10)
        self.assertEqual(len({s.seed for s in corpus}), 10)
        self.assertEqual([s.index for s in corpus], list(range(10)))

    def test_regeneration_is_identical(self):
        first = generate_corpus(desk_sampler(), 5, master_seed=42)
        second = generate_corpus(desk_sampler(), 5, master_seed=42)
        for a, b in zip(first, second):
            np.testing.assert_array_equal(a.X, b.X)
            np.testing.assert_array_equal(a.y, b.y)
            self.assertEqual(a.config, b.config)

    def test_family_restriction(self):
        entries = plan_corpus(desk_sampler(families=[Family.GAUSSIAN_MIXTURE]), 8, master_seed=1)
        self.assertTrue(all(e.config.distribution.family is Family.GAUSSIAN_MIXTURE for e in entries))

    def test_default_families_are_training_families(self):
        entries = plan_corpus(desk_sampler(), 40, master_seed=1)
        self.assertTrue(all(e.config.distribution.family in TRAINING_FAMILIES for e in entries))

    def test_cycled_snr(self):
        entries = plan_corpus(desk_sampler(cycle_snr=True), 6, master_seed=3)
        self.assertEqual([e.config.snr for e in entries], [0.3, 1.0, 3.0, 0.3, 1.0, 3.0])

    def test_prefix_stability(self):
        short = plan_corpus(desk_sampler(), 3, master_seed=11)
        long = plan_corpus(desk_sampler(), 6, master_seed=11)
        self.assertEqual(short, long[:3])

    def test_count_must_be_positive(self):
        with self.assertRaises(ParameterError):
            plan_corpus(desk_sampler(), 0, master_seed=1)


class ManifestTests(SimpleTestCase):
    def test_manifest_regenerates_systems(self):
        entries = plan_corpus(desk_sampler(), 4, master_seed=5)
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / 'corpus.jsonl'
            write_manifest(entries, path)
            lines = path.read_text().splitlines()
            loaded = read_manifest(path)
        self.assertEqual(len(lines), 4)
        self.assertEqual(set(json.loads(lines[0])),
                         {'index', 'family', 'params', 'n', 'p', 's', 'snr', 'beta_magnitude_range', 'seed'})
        for original, restored in zip(entries, loaded):
            np.testing.assert_array_equal(original.generate().X, restored.generate().X)
            np.testing.assert_array_equal(original.generate().y, restored.generate().y)

    def test_malformed_manifest(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / 'corpus.jsonl'
            path.write_text('{"index": 0}\n')
            with self.assertRaises(DataValidationError):
                read_manifest(path)
            with self.assertRaises(DataValidationError):
                read_manifest(Path(tmp) / 'missing.jsonl')
            path.write_bytes(b'{"index": 0, "family": "\xff"}\n')
            with self.assertRaises(DataValidationError):
                read_manifest(path)

    def test_raw_dump_round_trips_exactly(self):
        system = generate_system(SystemConfig(n=6, p=4, sparsity=2, snr=1.0, distribution=GAUSSIAN), seed=2,
                                 index=7)
        with tempfile.TemporaryDirectory() as tmp:
            dump_system_csv(system, tmp)
            X = pd.read_csv(Path(tmp) / 'system_000007_X.csv', header=None).to_numpy()
            y = pd.read_csv(Path(tmp) / 'system_000007_y.csv', header=None).to_numpy()[:, 0]
            truth = (Path(tmp) / 'system_000007_truth.csv').read_text().split()
        np.testing.assert_array_equal(X, system.X)
        np.testing.assert_array_equal(y, system.y)
        self.assertEqual(tuple(int(j) for j in truth), system.active_set)


class DatagenCommandTests(SimpleTestCase):
    def test_manifest_and_raw_dump(self):
        with tempfile.TemporaryDirectory() as tmp:
            call_command('datagen', seed=3, count=4, output_dir=tmp, dump_raw=True, case_control=True,
                         stdout=StringIO())
            out = Path(tmp)
            entries = read_manifest(out / 'corpus_manifest.jsonl')
            y = pd.read_csv(out / 'raw' / 'system_000000_y.csv', header=None).to_numpy()[:, 0]
            manifest = json.loads((out / 'run_manifest.json').read_text())
            leftovers = [p.name for p in out.iterdir() if p.name.startswith('.staging-')]
        self.assertEqual(len(entries), 4)
        self.assertTrue(set(np.unique(y)) <= {0.0, 1.0})
        self.assertEqual(manifest['seed'], 3)
        self.assertEqual(manifest['command'], 'datagen')
        self.assertEqual(leftovers, [])

    def test_held_out_corpus(self):
        with tempfile.TemporaryDirectory() as tmp:
            call_command('datagen', seed=3, count=3, output_dir=tmp, held_out=True, stdout=StringIO())
            entries = read_manifest(Path(tmp) / 'corpus_manifest.jsonl')
        self.assertTrue(all(e.config.distribution.family is Family.GAUSSIAN_MIXTURE for e in entries))
