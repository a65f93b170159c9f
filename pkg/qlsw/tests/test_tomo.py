import unittest

import numpy as np
from numpy.testing import assert_allclose

from qlsw import tomo
from qlsw.hhl import EIGENVALUE_SETS
from qlsw.hhl import HHLConfig
from qlsw.hhl import instance_from_rotations
from qlsw.qmat import density_from_bloch
from qlsw.qmat import named_state
from qlsw.qmat import projector
from qlsw.qmat import random_state
from qlsw.qmat import state_fidelity
from qlsw.tomo import CountRecord


class TestCounts(unittest.TestCase):
    def test_born_probabilities(self):
        p = tomo.born_probabilities(named_state('0'))
        self.assertEqual(list(p), ['Z', 'X', 'Y'])
        assert_allclose(list(p.values()), [1.0, 0.5, 0.5], atol=1e-12)
        p = tomo.born_probabilities(projector(named_state('+i')))
        self.assertAlmostEqual(p['Y'], 1.0)

    def test_sample_counts_seeded(self):
        psi = named_state('+')
        self.assertEqual(tomo.sample_counts(psi, 1000, 4), tomo.sample_counts(psi, 1000, 4))
        counts = tomo.sample_counts(psi, 1000, 4)
        self.assertEqual([c.basis for c in counts], ['Z', 'X', 'Y'])
        x = counts[1]
        self.assertEqual(x.minus, 0)
        self.assertGreater(x.plus, 800)

    def test_bad_records(self):
        with self.assertRaises(tomo.IncompleteDataError):
            CountRecord('W', 1, 1)
        with self.assertRaises(ValueError):
            CountRecord('Z', -1, 1)

    def test_document(self):
        counts = [CountRecord('Z', 10, 5), CountRecord('X', 7, 8), CountRecord('Y', 3, 12)]
        data = tomo.counts_to_dict(counts)
        self.assertEqual(data['bases']['X'], {'plus': 7, 'minus': 8})
        self.assertEqual(tomo.counts_from_dict(data), counts)
        with self.assertRaises(tomo.IncompleteDataError):
            tomo.counts_from_dict({'bases': {'Z': {'plus': 1}}})


class TestReconstruct(unittest.TestCase):
    def test_exact_counts(self):
        for label in ('0', '1', '+', '-', '+i', '-i'):
            psi = named_state(label)
            rho = tomo.reconstruct(tomo.expected_counts(psi, 10000))
            assert_allclose(rho, projector(psi), atol=1e-10)

    def test_mixed_state(self):
        rho = density_from_bloch([0.3, -0.2, 0.4])
        assert_allclose(tomo.reconstruct(tomo.expected_counts(rho, 1000)), rho, atol=1e-10)

    def test_projects_onto_physical_states(self):
        counts = [CountRecord('Z', 100, 0), CountRecord('X', 100, 0), CountRecord('Y', 50, 50)]
        rho = tomo.reconstruct(counts)
        self.assertGreaterEqual(np.linalg.eigvalsh(rho).min(), -1e-12)
        self.assertAlmostEqual(np.trace(rho).real, 1.0)

    def test_missing_basis(self):
        with self.assertRaises(tomo.IncompleteDataError):
            tomo.reconstruct([CountRecord('Z', 1, 1), CountRecord('X', 1, 1)])

    def test_empty_basis(self):
        with self.assertRaises(tomo.DegenerateDataError):
            tomo.reconstruct([CountRecord('Z', 0, 0), CountRecord('X', 1, 1), CountRecord('Y', 1, 1)])

    def test_consistency_at_default_shots(self):
        rng = np.random.default_rng(21)
        good = 0
        for seed in range(200):
            psi = random_state(2, rng)
            rho = tomo.reconstruct(tomo.sample_counts(psi, tomo.DEFAULT_SHOTS, seed))
            good += state_fidelity(rho, psi) >= 0.99
        self.assertGreaterEqual(good, 190)


class TestMonteCarlo(unittest.TestCase):
    def test_report_fields(self):
        psi = named_state('+')
        counts = tomo.sample_counts(psi, tomo.DEFAULT_SHOTS, 2)
        ans = tomo.monte_carlo_errors(counts, psi, trials=200, seed=2)
        self.assertGreaterEqual(ans.fidelity, 0.99)
        self.assertGreater(ans.fidelity_error, 0)
        self.assertLess(ans.fidelity_error, 0.01)
        self.assertEqual(ans.failed_trials, 0)
        self.assertEqual([label for label, _, _ in ans.expectation_values], ['0', '+', '+i'])
        self.assertAlmostEqual(ans.expectation_values[1][1], ans.fidelity, places=12)

    def test_seeded(self):
        counts = tomo.sample_counts(named_state('0'), 500, 1)
        first = tomo.monte_carlo_errors(counts, named_state('0'), trials=100, seed=8)
        second = tomo.monte_carlo_errors(counts, named_state('0'), trials=100, seed=8)
        self.assertEqual(first.fidelity_error, second.fidelity_error)

    def test_too_few_trials(self):
        counts = tomo.sample_counts(named_state('0'), 500, 1)
        with self.assertRaises(ValueError):
            tomo.monte_carlo_errors(counts, named_state('0'), trials=10)

    def test_error_bars_stable_in_trial_count(self):
        rho = density_from_bloch([0.3, 0.2, 0.4])
        counts = tomo.sample_counts(rho, tomo.DEFAULT_SHOTS, 4)
        few = tomo.monte_carlo_errors(counts, named_state('0'), trials=100, seed=4)
        many = tomo.monte_carlo_errors(counts, named_state('0'), trials=1000, seed=4)
        pairs = [(few.fidelity_error, many.fidelity_error)]
        pairs += [(a[2], b[2]) for a, b in zip(few.expectation_values, many.expectation_values)]
        for small, large in pairs:
            self.assertGreater(large, 0)
            self.assertLessEqual(abs(small - large) / large, 0.3)

    def test_error_bars_cover_truth(self):
        rho = density_from_bloch([0.3, 0.2, 0.4])
        truth = [np.trace(rho @ op).real for op in tomo.observables().values()]
        covered = total = 0
        for seed in range(200):
            counts = tomo.sample_counts(rho, 2000, seed)
            ans = tomo.monte_carlo_errors(counts, named_state('0'), trials=100, seed=seed)
            for (_, value, error), expected in zip(ans.expectation_values, truth):
                covered += abs(value - expected) <= error
                total += 1
        self.assertGreaterEqual(covered / total, 0.6)

    def test_report_defaults_to_classical_solution(self):
        inst = instance_from_rotations(EIGENVALUE_SETS['L1'], np.eye(2), [0, 1])
        cfg = HHLConfig.for_instance(inst)
        counts = tomo.expected_counts(named_state('1'), 10000)
        ans = tomo.report(inst, cfg, counts, trials=100, seed=1)
        self.assertAlmostEqual(ans.fidelity, 1.0, places=9)
        self.assertEqual(ans.metadata['n_digit'], 2)
        document = ans.to_dict()
        self.assertEqual(set(document), {
            'rho', 'fidelity', 'fidelity_error', 'expectation_values', 'counts', 'trials',
            'failed_trials', 'target', 'metadata'})


if __name__ == '__main__':
    unittest.main()
