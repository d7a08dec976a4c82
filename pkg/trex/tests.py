import numpy as np
from django.test import SimpleTestCase, tag

from synthdata.services.distributions import DistributionSpec, Family
from synthdata.services.generator import SystemConfig, generate_system
from trex.services.calibration import (
    AnalyticalEstimator,
    CalibrationGrid,
    analytical_fdp,
    calibrate,
    default_v_grid,
    dummy_count_bound,
    estimate_surface,
    select_variables,
)
from trex.services.lars import Entry, ExperimentResult, candidate_set, in_column_span, lars_run
from trex.services.metrics import fdp_tpp
from trex.services.occurrences import (
    OccurrenceTable,
    build_occurrence_table,
    deflate_occurrences,
    deflate_phi,
    deflation_factors,
    relative_occurrences,
)
from trex.services.reports import selection_report, write_occurrence_csv
from trex.services.selector import generate_dummies, occurrence_table, trex_select
from trex.services.standardize import standardize, standardize_columns
from trex_toolkit.exceptions import DegenerateInputError, DimensionError, ParameterError
from trex_toolkit.utils import derive_seed

GAUSSIAN = DistributionSpec(Family.GAUSSIAN, {'loc': 0.0, 'scale': 1.0}, 'gaussian')


def random_instance(seed, n=20, p=8, L=8):
    rng = np.random.default_rng(seed)
    data = standardize(rng.standard_normal((n, p)), rng.standard_normal(n))
    dummies, _, _ = standardize_columns(rng.standard_normal((n, L)))
    return data, dummies


def table_from(phi, phi_deflated=None, K=20, L=30):
    phi = np.asarray(phi, dtype=float)
    return OccurrenceTable(
        phi=phi,
        phi_deflated=phi.copy() if phi_deflated is None else np.asarray(phi_deflated, dtype=float),
        K=K,
        L=L,
        T_max=phi.shape[0],
    )


def result_with(dummies_before, stop_T, k=0):
    return ExperimentResult(k=k, entry_order=(), dummies_before=dict(dummies_before), stop_T=stop_T,
                            n_dummies=stop_T)


class StandardizeTests(SimpleTestCase):
    def test_column_is_centered_then_norm_scaled(self):
        X = np.array([[1.0, 0.0], [2.0, 5.0], [3.0, 1.0]])
        data = standardize(X, [1.0, 2.0, 4.0])
        np.testing.assert_allclose(data.Xs[:, 0], np.array([-1.0, 0.0, 1.0]) / np.sqrt(2.0), atol=1e-15)
        self.assertEqual(data.p, 2)
        self.assertEqual(data.n, 3)

    def test_invariants_on_random_data(self):
        rng = np.random.default_rng(7)
        data = standardize(rng.exponential(size=(30, 12)) * 40 + 3, rng.standard_normal(30) + 10)
        np.testing.assert_allclose(data.Xs.mean(axis=0), 0.0, atol=1e-10)
        np.testing.assert_allclose(np.linalg.norm(data.Xs, axis=0), 1.0, atol=1e-10)
        self.assertLess(abs(data.ys.mean()), 1e-10)

    def test_constant_column_names_the_column(self):
        X = np.array([[1.0, 5.0], [2.0, 5.0], [3.0, 5.0]])
        with self.assertRaises(DegenerateInputError) as ctx:
            standardize(X, [0.0, 1.0, 2.0])
        self.assertEqual(ctx.exception.column, 1)

    def test_binary_response_is_centered(self):
        y = np.array([0.0, 1.0, 1.0, 0.0, 1.0, 1.0])
        data = standardize(np.arange(12.0).reshape(6, 2) ** 2, y)
        np.testing.assert_allclose(data.ys, y - 4.0 / 6.0)

    def test_row_mismatch(self):
        with self.assertRaises(DimensionError):
            standardize(np.ones((4, 2)) * np.arange(4)[:, None], [1.0, 2.0, 3.0])


class DummyTests(SimpleTestCase):
    def test_shape(self):
        self.assertEqual(generate_dummies(75, 150, seed=1).shape, (75, 150))

    def test_deterministic_per_seed(self):
        np.testing.assert_array_equal(generate_dummies(10, 4, seed=3), generate_dummies(10, 4, seed=3))
        self.assertFalse(np.array_equal(generate_dummies(10, 4, seed=3), generate_dummies(10, 4, seed=4)))

    def test_sample_mean_concentrates(self):
        mean = generate_dummies(10000, 1, seed=11).mean()
        self.assertGreaterEqual(mean, -0.05)
        self.assertLessEqual(mean, 0.05)

    def test_invalid_shape(self):
        with self.assertRaises(ParameterError):
            generate_dummies(0, 3, seed=1)


class LarsTests(SimpleTestCase):
    def test_orthogonal_design_enters_most_correlated_first(self):
        h1 = np.array([1.0, 1.0, -1.0, -1.0]) / 2
        h2 = np.array([1.0, -1.0, 1.0, -1.0]) / 2
        h3 = np.array([1.0, -1.0, -1.0, 1.0]) / 2
        data = standardize(np.column_stack([h1, h2]), 2 * h1 + h2)
        result = lars_run(data, h3[:, None], stop_T=1)
        self.assertEqual(result.entry_order[0], Entry(0, False))
        self.assertEqual(result.entry_order[1], Entry(1, False))
        self.assertEqual(result.dummies_before, {0: 0, 1: 0})

    def test_dominant_dummy_stops_before_any_original(self):
        data, _ = random_instance(5)
        dummy = (data.ys / np.linalg.norm(data.ys))[:, None]
        result = lars_run(data, dummy, stop_T=1)
        self.assertEqual(result.entry_order, (Entry(0, True),))
        self.assertEqual(result.dummies_before, {})
        self.assertEqual(result.originals, ())

    def test_random_instances_match_oracles(self):
        stop_T = 3
        for seed in range(100):
            data, dummies = random_instance(seed)
            result = lars_run(data, dummies, stop_T=stop_T, trace=True)
            Z = np.hstack([data.Xs, dummies])

            first = result.entry_order[0]
            column = first.column + (data.p if first.is_dummy else 0)
            self.assertEqual(column, int(np.argmax(np.abs(Z.T @ data.ys))), msg=f"seed {seed}")

            for step, correlations in enumerate(result.active_correlations):
                self.assertLess(np.ptp(correlations), 1e-8, msg=f"seed {seed}, step {step}")

            self.assertEqual(len(set(result.entry_order)), len(result.entry_order))
            if not result.exhausted:
                self.assertEqual(result.n_dummies, stop_T)
                self.assertTrue(result.entry_order[-1].is_dummy)
                self.assertEqual(sum(e.is_dummy for e in result.entry_order), stop_T)
            self.assertTrue(all(0 <= b < stop_T for b in result.dummies_before.values()))

    def test_path_length_is_capped(self):
        data, dummies = random_instance(2, n=6, p=10, L=10)
        result = lars_run(data, dummies, stop_T=10)
        self.assertLessEqual(len(result.entry_order), 5)
        self.assertTrue(result.exhausted)

    def test_column_span(self):
        rng = np.random.default_rng(0)
        ZA = rng.standard_normal((10, 3))
        self.assertTrue(in_column_span(ZA, ZA[:, 0].copy()))
        self.assertTrue(in_column_span(ZA, ZA @ np.array([0.5, -2.0, 1.0])))
        self.assertFalse(in_column_span(ZA, rng.standard_normal(10)))
        self.assertFalse(in_column_span(ZA[:, :0], ZA[:, 0]))

    def test_duplicated_binary_columns_enter_at_most_once(self):
        rng = np.random.default_rng(11)
        X = rng.binomial(1, 0.3, size=(15, 30)).astype(float)
        for j in np.flatnonzero(np.ptp(X, axis=0) == 0):
            X[0, j] = 1.0 - X[0, j]
        X[:, 1] = X[:, 0]
        X[:, 2] = X[:, 0]
        data = standardize(X, X[:, 0] + rng.standard_normal(15))
        for k in range(20):
            dummies, _, _ = standardize_columns(rng.standard_normal((15, 30)))
            result = lars_run(data, dummies, stop_T=10, k=k)
            self.assertLessEqual(len(set(result.originals) & {0, 1, 2}), 1, msg=f"experiment {k}")
            self.assertEqual(len(set(result.entry_order)), len(result.entry_order))

    def test_argument_checks(self):
        data, dummies = random_instance(0)
        with self.assertRaises(ParameterError):
            lars_run(data, dummies, stop_T=0)
        with self.assertRaises(ParameterError):
            lars_run(data, dummies, stop_T=9)
        with self.assertRaises(DimensionError):
            lars_run(data, dummies[:-1], stop_T=1)


class CandidateSetTests(SimpleTestCase):
    def setUp(self):
        self.result = ExperimentResult(
            k=0,
            entry_order=(Entry(3, False), Entry(0, True), Entry(7, False), Entry(1, True)),
            dummies_before={3: 0, 7: 1},
            stop_T=2,
            n_dummies=2,
        )

    def test_prefix_rule(self):
        self.assertEqual(candidate_set(self.result, 1), (3,))
        self.assertEqual(candidate_set(self.result, 2), (3, 7))

    def test_dummy_first_gives_empty_set(self):
        result = ExperimentResult(k=0, entry_order=(Entry(0, True),), dummies_before={}, stop_T=1, n_dummies=1)
        self.assertEqual(candidate_set(result, 1), ())

    def test_T_beyond_run_depth(self):
        with self.assertRaises(ParameterError):
            candidate_set(self.result, 3)


class OccurrenceTests(SimpleTestCase):
    def test_fraction_of_experiments(self):
        results = [result_with({4: 2} if k < 13 else {}, stop_T=3, k=k) for k in range(20)]
        phi = relative_occurrences(results, T_max=3, p=6)
        self.assertEqual(phi[2, 4], 0.65)
        self.assertEqual(phi[1, 4], 0.0)

    def test_single_experiment_is_binary(self):
        data, dummies = random_instance(4)
        phi = relative_occurrences([lars_run(data, dummies, stop_T=3)], T_max=3, p=data.p)
        self.assertTrue(np.all(np.isin(phi, (0.0, 1.0))))

    def test_linear_deflation_example(self):
        deflated = deflate_phi(np.array([[0.6], [0.8]]), L=100)
        self.assertAlmostEqual(deflated[1, 0], 0.6 * 1.00 + 0.2 * 0.99, places=12)
        self.assertEqual(deflated[0, 0], 0.6)

    def test_deflated_occurrences_match_table(self):
        data, dummies = random_instance(4)
        results = [lars_run(data, dummies, stop_T=3)]
        table = build_occurrence_table(results, T_max=3, p=data.p, L=dummies.shape[1])
        np.testing.assert_array_equal(deflate_occurrences(results, 3, data.p, dummies.shape[1]), table.phi_deflated)

    def test_dummy_ratio_factors(self):
        phi = np.array([[0.0, 0.0, 0.0], [0.5, 0.5, 0.0], [0.5, 0.5, 0.0]])
        factors = deflation_factors(phi, L=3, rule='dummy_ratio')
        self.assertEqual(factors[0], 0.0)
        self.assertAlmostEqual(factors[1], 1.0 - (3 - 1.0) / 2 / 1.0)
        self.assertEqual(factors[2], 0.0)
        self.assertTrue(np.all((factors >= 0) & (factors <= 1)))

    def test_unknown_rule_and_depth(self):
        with self.assertRaises(ParameterError):
            deflation_factors(np.zeros((2, 3)), L=5, rule='cubic')
        with self.assertRaises(ParameterError):
            deflation_factors(np.zeros((4, 3)), L=3)

    def test_table_invariants_over_seeded_runs(self):
        K = 20
        for seed in range(50):
            rng = np.random.default_rng(seed)
            X = rng.standard_normal((20, 10))
            y = X[:, :2] @ np.array([1.5, -1.0]) + rng.standard_normal(20)
            for rule in ('linear', 'dummy_ratio'):
                table = occurrence_table(X, y, K=K, L=None, T_max=5, seed=seed, deflation=rule)
                scaled = table.phi * K
                np.testing.assert_allclose(scaled, np.round(scaled), atol=1e-12)
                self.assertTrue(np.all(np.diff(table.phi, axis=0) >= 0))
                self.assertTrue(np.all(table.phi_deflated <= table.phi))
                self.assertTrue(np.all(table.phi_deflated >= 0))
                if rule == 'linear':
                    np.testing.assert_array_equal(table.phi_deflated[0], table.phi[0])

    def test_exhausted_runs_freeze_candidate_sets(self):
        results = [result_with({0: 0}, stop_T=4), result_with({0: 0, 1: 1}, stop_T=4, k=1)]
        results[0].exhausted = True
        results[0].n_dummies = 1
        table = build_occurrence_table(results, T_max=4, p=3, L=4)
        np.testing.assert_array_equal(table.phi[:, 0], np.ones(4))
        np.testing.assert_array_equal(table.phi[:, 1], [0.0, 0.5, 0.5, 0.5])
        self.assertEqual(table.exhausted_runs, 1)

    def test_occurrence_csv(self):
        import csv
        import tempfile
        from pathlib import Path

        table = table_from([[0.5, 0.25]], [[0.5, 0.125]])
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / 'occ.csv'
            write_occurrence_csv(table, path)
            with open(path, newline='') as f:
                rows = list(csv.reader(f))
        self.assertEqual(rows[0], ['T', 'j', 'phi', 'phi_deflated'])
        self.assertEqual(rows[2], ['1', '1', '0.25', '0.125'])


class AnalyticalFdpTests(SimpleTestCase):
    def test_two_selected(self):
        table = table_from([[0.95, 0.9, 0.1]], [[0.9, 0.8, 0.1]])
        self.assertEqual(select_variables(table, 0.85, 1), (0, 1))
        self.assertAlmostEqual(analytical_fdp(table, 0.85, 1), 0.15, places=12)

    def test_empty_selection(self):
        table = table_from([[0.4, 0.3]])
        self.assertEqual(analytical_fdp(table, 0.5, 1), 0.0)

    def test_fully_deflation_free_selection(self):
        table = table_from([[1.0, 1.0, 0.0]])
        self.assertEqual(analytical_fdp(table, 0.5, 1), 0.0)

    def test_strict_threshold(self):
        table = table_from([[0.55, 0.6]], K=20)
        self.assertEqual(select_variables(table, 0.55, 1), (1,))


class DummyCountBoundTests(SimpleTestCase):
    def test_chance_null_keeps_estimate_at_one(self):
        table = table_from([[0.6] + [0.0] * 29])
        self.assertAlmostEqual(analytical_fdp(table, 0.5, 1), 0.4, places=12)
        self.assertEqual(dummy_count_bound(table, 0.5, 1), 1.0)
        self.assertEqual(AnalyticalEstimator()(table, 0.5, 1), 1.0)
        self.assertAlmostEqual(AnalyticalEstimator(dummy_bound=False)(table, 0.5, 1), 0.4, places=12)

    def test_bound_shrinks_with_more_dummies_and_selections(self):
        table = table_from([[1.0] * 6 + [0.0] * 14], L=100)
        expected = 20 / (101 * 0.95 * 6)
        self.assertAlmostEqual(dummy_count_bound(table, 0.95, 1), expected, places=12)
        self.assertAlmostEqual(AnalyticalEstimator()(table, 0.95, 1), expected, places=12)

    def test_bound_grows_with_T(self):
        table = table_from([[1.0, 1.0, 0.0, 0.0]] * 3, L=20)
        self.assertAlmostEqual(dummy_count_bound(table, 0.5, 3), 3 * 4 / (21 * 0.5 * 2), places=12)
        self.assertLess(dummy_count_bound(table, 0.5, 1), dummy_count_bound(table, 0.5, 2))

    def test_empty_selection(self):
        table = table_from([[0.4, 0.3]])
        self.assertEqual(dummy_count_bound(table, 0.5, 1), 0.0)
        self.assertEqual(AnalyticalEstimator()(table, 0.5, 1), 0.0)


class CalibrationTests(SimpleTestCase):
    def test_single_feasible_point(self):
        phi = np.array([
            [0.8, 0.9, 1.0, 0.1],
            [0.8, 0.9, 1.0, 0.1],
            [0.8, 0.9, 1.0, 0.1],
        ])
        table = table_from(phi)
        grid = CalibrationGrid(v_grid=default_v_grid(), T_max=3, alpha=0.2)

        def estimator(t, v, T):
            return 0.1 if (v, T) == (0.75, 2) else 0.9

        result = calibrate(table, grid, estimator)
        self.assertTrue(result.feasible)
        self.assertEqual((result.v_star, result.T_star), (0.75, 2))
        self.assertEqual(result.selected, (0, 1, 2))
        self.assertEqual(result.fdp_estimate_at_choice, 0.1)

    def test_vacuous_alpha_maximizes_selection(self):
        rng = np.random.default_rng(3)
        phi = np.sort(rng.integers(0, 21, size=(4, 12)), axis=0) / 20.0
        table = table_from(phi, phi * 0.5)
        grid = CalibrationGrid(v_grid=default_v_grid(), T_max=4, alpha=1.0)
        result = calibrate(table, grid, AnalyticalEstimator())
        best = max(len(select_variables(table, v, T)) for v, T in grid.cells())
        self.assertGreater(best, 0)
        self.assertTrue(result.feasible)
        self.assertEqual(len(result.selected), best)

    def test_infeasible_when_estimate_always_one(self):
        table = table_from([[0.9, 0.95]])
        grid = CalibrationGrid(v_grid=default_v_grid(), T_max=1, alpha=0.2)
        result = calibrate(table, grid, lambda t, v, T: 1.0)
        self.assertFalse(result.feasible)
        self.assertEqual(result.selected, ())
        self.assertIsNone(result.v_star)
        self.assertIsNone(result.T_star)

    def test_ties_prefer_smaller_T_then_larger_v(self):
        table = table_from([[0.6, 0.6], [0.6, 0.6]])
        grid = CalibrationGrid(v_grid=(0.5, 0.55), T_max=2, alpha=0.2)
        result = calibrate(table, grid, lambda t, v, T: 0.0)
        self.assertEqual((result.v_star, result.T_star), (0.55, 1))

    def test_ties_prefer_smaller_estimate(self):
        table = table_from([[0.6, 0.6], [0.6, 0.6]])
        grid = CalibrationGrid(v_grid=(0.5, 0.55), T_max=2, alpha=0.2)
        result = calibrate(table, grid, lambda t, v, T: 0.05 if T == 2 else 0.1)
        self.assertEqual(result.T_star, 2)
        self.assertEqual(result.fdp_estimate_at_choice, 0.05)

    def test_chosen_point_respects_alpha(self):
        table = occurrence_table(*_strong_signal_system(1), K=10, L=None, T_max=5, seed=1)
        grid = CalibrationGrid(v_grid=default_v_grid(), T_max=5, alpha=0.1)
        result = calibrate(table, grid, AnalyticalEstimator())
        if result.feasible:
            self.assertLessEqual(result.fdp_estimate_at_choice, 0.1)
            self.assertEqual(result.selected, select_variables(table, result.v_star, result.T_star))

    def test_grid_validation(self):
        with self.assertRaises(ParameterError):
            CalibrationGrid(v_grid=(0.5, 1.0), T_max=2, alpha=0.2)
        with self.assertRaises(ParameterError):
            CalibrationGrid(v_grid=(0.6, 0.55), T_max=2, alpha=0.2)
        with self.assertRaises(ParameterError):
            CalibrationGrid(v_grid=(0.6,), T_max=0, alpha=0.2)
        with self.assertRaises(ParameterError):
            CalibrationGrid(v_grid=(0.6,), T_max=2, alpha=0.0)

    def test_grid_deeper_than_table(self):
        with self.assertRaises(ParameterError):
            calibrate(table_from([[0.9]]), CalibrationGrid(v_grid=(0.5,), T_max=2, alpha=0.2),
                      AnalyticalEstimator())


class MetricsTests(SimpleTestCase):
    CASES = [
        ((1, 2, 4), (1, 2, 3), 1 / 3, 2 / 3),
        ((), (1, 2, 3), 0.0, 0.0),
        ((5,), (), 1.0, 0.0),
        ((), (), 0.0, 0.0),
        ((1,), (1,), 0.0, 1.0),
        ((1, 2), (1,), 0.5, 1.0),
        ((2,), (1,), 1.0, 0.0),
        ((1, 2, 3), (1, 2, 3), 0.0, 1.0),
        ((1, 2, 3, 4), (1, 2, 3), 0.25, 1.0),
        ((4, 5, 6), (1, 2, 3), 1.0, 0.0),
        ((1,), (1, 2, 3, 4), 0.0, 0.25),
        ((0, 9), (9,), 0.5, 1.0),
        ((0, 1, 2, 3, 4), (0,), 0.8, 1.0),
        ((7, 8), (8, 9, 10), 0.5, 1 / 3),
        ((1, 1, 2), (1,), 0.5, 1.0),
        ((3,), (1, 2), 1.0, 0.0),
        ((1, 2, 3, 4, 5, 6), (2, 4, 6), 0.5, 1.0),
        ((10,), (10, 11), 0.0, 0.5),
        ((), (0,), 0.0, 0.0),
        ((0, 1, 2, 3), (), 1.0, 0.0),
    ]

    def test_enumerated_table(self):
        self.assertEqual(len(self.CASES), 20)
        for selected, truth, fdp, tpp in self.CASES:
            self.assertEqual(fdp_tpp(selected, truth), (fdp, tpp), msg=f"{selected} vs {truth}")


def _strong_signal_system(seed, n=100, p=20, s=3, snr=5.0):
    cfg = SystemConfig(n=n, p=p, sparsity=s, snr=snr, distribution=GAUSSIAN)
    system = generate_system(cfg, derive_seed(seed, 'strong'))
    return system.X, system.y


class TRexSelectTests(SimpleTestCase):
    def test_same_seed_same_result(self):
        X, y = _strong_signal_system(0, n=30, p=12)
        grid = CalibrationGrid(v_grid=default_v_grid(), T_max=4, alpha=0.2)
        first = trex_select(X, y, K=10, L=None, grid=grid, estimator=AnalyticalEstimator(), seed=5)
        second = trex_select(X, y, K=10, L=None, grid=grid, estimator=AnalyticalEstimator(), seed=5)
        self.assertEqual(first.selection, second.selection)
        np.testing.assert_array_equal(first.table.phi, second.table.phi)

    def test_thread_count_does_not_change_result(self):
        X, y = _strong_signal_system(1, n=30, p=12)
        grid = CalibrationGrid(v_grid=default_v_grid(), T_max=4, alpha=0.2)
        serial = trex_select(X, y, K=8, L=None, grid=grid, estimator=AnalyticalEstimator(), seed=2)
        threaded = trex_select(X, y, K=8, L=None, grid=grid, estimator=AnalyticalEstimator(), seed=2, threads=3)
        np.testing.assert_array_equal(serial.table.phi, threaded.table.phi)
        self.assertEqual(serial.selection, threaded.selection)

    def test_strong_signal_is_recovered(self):
        # three actives need L well above p before the dummy-count bound admits T=1
        grid = CalibrationGrid(v_grid=default_v_grid(), T_max=10, alpha=0.2)
        recovered = 0
        fdps = []
        for seed in range(10):
            cfg = SystemConfig(n=100, p=20, sparsity=3, snr=5.0, distribution=GAUSSIAN)
            system = generate_system(cfg, derive_seed(seed, 'strong'))
            outcome = trex_select(system.X, system.y, K=20, L=100, grid=grid,
                                  estimator=AnalyticalEstimator(), seed=seed)
            fdp, tpp = fdp_tpp(outcome.selection.selected, system.active_set)
            recovered += tpp == 1.0
            fdps.append(fdp)
        self.assertGreaterEqual(recovered, 7)
        self.assertLessEqual(np.mean(fdps), 0.25)

    def test_T_max_beyond_dummies(self):
        X, y = _strong_signal_system(0, n=30, p=12)
        grid = CalibrationGrid(v_grid=(0.5,), T_max=6, alpha=0.2)
        with self.assertRaises(ParameterError):
            trex_select(X, y, K=2, L=5, grid=grid, estimator=AnalyticalEstimator(), seed=1)

    def test_selection_report_fields(self):
        X, y = _strong_signal_system(2, n=30, p=12)
        grid = CalibrationGrid(v_grid=default_v_grid(), T_max=3, alpha=0.2)
        outcome = trex_select(X, y, K=5, L=None, grid=grid, estimator=AnalyticalEstimator(), seed=9)
        report = selection_report(outcome.selection, seed=9)
        self.assertEqual(set(report), {'selected', 'v_star', 'T_star', 'fdp_estimate', 'estimator',
                                       'feasible', 'seed'})
        self.assertEqual(report['estimator'], 'analytical')

    @tag('slow')
    def test_null_systems_are_conservative(self):
        """200 pure-noise systems with the default settings: FDR and per-cell overestimation."""
        grid = CalibrationGrid(v_grid=default_v_grid(), T_max=10, alpha=0.2)
        cfg = SystemConfig(n=15, p=30, sparsity=0, snr=1.0, distribution=GAUSSIAN)
        estimator = AnalyticalEstimator()
        fdps = []
        estimated = np.zeros((grid.T_max, len(grid.v_grid)))
        realized = np.zeros_like(estimated)
        for index in range(200):
            seed = derive_seed(2024, 'null', index)
            system = generate_system(cfg, seed)
            outcome = trex_select(system.X, system.y, K=20, L=None, grid=grid, estimator=estimator, seed=seed)
            fdps.append(fdp_tpp(outcome.selection.selected, system.active_set)[0])
            estimated += estimate_surface(outcome.table, grid, estimator)
            for t_idx, T in enumerate(grid.T_grid):
                for v_idx, v in enumerate(grid.v_grid):
                    realized[t_idx, v_idx] += fdp_tpp(select_variables(outcome.table, v, T), ())[0]

        self.assertLessEqual(np.mean(fdps), 0.25)
        covered = np.mean(estimated / 200 >= realized / 200 - 0.05)
        self.assertGreaterEqual(covered, 0.9)
