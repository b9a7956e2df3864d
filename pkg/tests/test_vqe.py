"""
Tests for the optimizer, the energy backends and the VQE driver
"""

import unittest

import numpy as np

from ansatz_circuits import AnsatzSpec, trial_state_reference
from quantum_core import estimate_energy_sampled, expectation, sampled_energy_standard_error
from vqe import (
    ExactBackend,
    OptimizerConfig,
    SampledBackend,
    VqeResult,
    energy_landscape,
    minimize_scalar,
    repeat_sampled_vqe,
    vqe_run,
)
from xxz_model import XxzParams, build_hamiltonian

EXACT_FIRST = np.cosh(1.0) - 1.0
EXACT_SECOND = np.cosh(1.0) + 1.0


def hamiltonian(num_sites, eta=1.0):
    return build_hamiltonian(XxzParams(num_sites, eta))


class MinimizeScalarTestCase(unittest.TestCase):
    """Test case for the derivative-free scalar minimizer"""

    def test_cosine_well(self):
        """cosh(1) - cos(p) from p0 = 0.8"""
        result = minimize_scalar(lambda p: np.cosh(1.0) - np.cos(p), OptimizerConfig(initial_p=0.8))
        self.assertAlmostEqual(result.value, EXACT_FIRST, delta=1e-6)
        self.assertLess(abs(np.sin(result.p / 2)), 1e-3)

    def test_cosine_hill(self):
        """cos(p) - cosh(1) from p0 = 2 reaches p = pi"""
        result = minimize_scalar(lambda p: np.cos(p) - np.cosh(1.0), OptimizerConfig(initial_p=2.0))
        self.assertAlmostEqual(result.value, -EXACT_SECOND, delta=1e-6)
        self.assertLess(abs(np.cos(result.p / 2)), 1e-3)

    def test_quadratic(self):
        """(p - 1)**2 from p0 = 5"""
        result = minimize_scalar(lambda p: (p - 1.0) ** 2, OptimizerConfig(initial_p=5.0))
        self.assertAlmostEqual(result.p, 1.0, delta=1e-8)

    def test_budget_exhausted(self):
        """A tiny budget returns the best point so far, flagged non-converged"""
        for budget in (1, 3):
            result = minimize_scalar(lambda p: (p - 1.0) ** 2, OptimizerConfig(initial_p=5.0, max_evaluations=budget))
            self.assertFalse(result.converged)
            self.assertLessEqual(len(result.trace), budget)
            self.assertEqual(result.value, min(value for _, value in result.trace))

    def test_cobyla_cosine_well(self):
        """COBYLA reaches the p = 0 minimum inside its budget"""
        settings = OptimizerConfig(initial_p=0.8, max_evaluations=200, method='cobyla')
        result = minimize_scalar(lambda p: np.cosh(1.0) - np.cos(p), settings)
        self.assertAlmostEqual(result.value, EXACT_FIRST, delta=1e-6)
        self.assertLessEqual(len(result.trace), 200)

    def test_cobyla_budget(self):
        """The budget caps COBYLA's evaluations"""
        settings = OptimizerConfig(initial_p=5.0, max_evaluations=5, method='cobyla')
        result = minimize_scalar(lambda p: (p - 1.0) ** 2, settings)
        self.assertFalse(result.converged)
        self.assertLessEqual(len(result.trace), 5)
        self.assertEqual(result.value, min(value for _, value in result.trace))

    def test_invalid_settings(self):
        """Budgets below one, non-positive tolerances and unknown methods are rejected"""
        with self.assertRaises(ValueError):
            OptimizerConfig(method='bfgs')
        with self.assertRaises(ValueError):
            OptimizerConfig(max_evaluations=0)
        with self.assertRaises(ValueError):
            OptimizerConfig(tolerance=0.0)
        with self.assertRaises(ValueError):
            OptimizerConfig(initial_step=0.0)


class BackendTestCase(unittest.TestCase):
    """Test case for the energy backends"""

    def test_exact_backend(self):
        """The exact backend is the statevector expectation"""
        state = trial_state_reference(4, 0.6)
        ham = hamiltonian(4)
        self.assertEqual(ExactBackend().energy(state, ham), expectation(state, ham))
        self.assertIsNone(ExactBackend().shots)

    def test_sampled_backend(self):
        """Sampled energies are reproducible and reject empty budgets"""
        backend = SampledBackend(1000, seed=3)
        state = trial_state_reference(4, 0.6)
        self.assertEqual(backend.energy(state, hamiltonian(4)), backend.energy(state, hamiltonian(4)))
        self.assertEqual(backend.with_seed(4).seed, 4)
        with self.assertRaises(ValueError):
            SampledBackend(0)

    def test_unbiased_estimator(self):
        """Averaged over 50 seeds at 1000 shots the mean stays within three standard errors"""
        state = trial_state_reference(4, 0.5)
        ham = hamiltonian(4)
        estimates = [estimate_energy_sampled(state, ham, 1000, seed) for seed in range(50)]
        error = sampled_energy_standard_error(state, ham, 1000) / np.sqrt(50)
        self.assertLess(abs(np.mean(estimates) - expectation(state, ham)), 3 * error)


class VqeRunTestCase(unittest.TestCase):
    """Test case for VQE runs"""

    def test_two_sites_first_excited(self):
        """N=2, exact backend: cosh(1) - 1 at p near 0"""
        result = vqe_run(AnsatzSpec(2), hamiltonian(2))
        self.assertAlmostEqual(result.energy, 0.54308063, delta=1e-6)
        self.assertLess(abs(result.p), 1e-3)
        self.assertEqual(result.backend, 'exact')

    def test_two_sites_second_excited(self):
        """N=2, exact backend, second target: cosh(1) + 1 at p near pi"""
        result = vqe_run(AnsatzSpec(2, target='second'), hamiltonian(2))
        self.assertAlmostEqual(result.energy, 2.54308063, delta=1e-6)
        self.assertLess(abs(abs(result.p) - np.pi), 1e-3)
        self.assertGreater(result.p, -np.pi)

    def test_four_sites(self):
        """N=4, exact backend: cosh(1) - 1"""
        result = vqe_run(AnsatzSpec(4), hamiltonian(4))
        self.assertAlmostEqual(result.energy, 0.54308063, delta=1e-4)
        self.assertLess(abs(result.p), 1e-2)

    def test_trace_properties(self):
        """Best-so-far is non-increasing and the budget is respected"""
        settings = OptimizerConfig(max_evaluations=25)
        result = vqe_run(AnsatzSpec(4), hamiltonian(4), settings=settings)
        best = result.best_so_far()
        self.assertTrue(np.all(np.diff(best) <= 0))
        self.assertLessEqual(result.evaluations, 25)
        self.assertEqual(result.evaluations, len(result.trace))
        self.assertEqual(result.energy, best[-1])

    def test_width_mismatch(self):
        """Ansatz and Hamiltonian must act on the same chain"""
        with self.assertRaises(ValueError):
            vqe_run(AnsatzSpec(2), hamiltonian(4))

    def test_sampled_runs(self):
        """Single seeded sampled runs land near the exact energy"""
        n2 = vqe_run(AnsatzSpec(2), hamiltonian(2), SampledBackend(1024, seed=7))
        self.assertAlmostEqual(n2.energy, EXACT_FIRST, delta=0.05)
        n4 = vqe_run(AnsatzSpec(4), hamiltonian(4), SampledBackend(8192, seed=7))
        self.assertAlmostEqual(n4.energy, EXACT_FIRST, delta=0.1)
        self.assertEqual((n4.backend, n4.shots, n4.seed), ('shots', 8192, 7))

    def test_sampled_seed_from_settings(self):
        """A sampled backend without a seed takes the optimizer seed"""
        result = vqe_run(AnsatzSpec(2), hamiltonian(2), SampledBackend(300), OptimizerConfig(seed=11))
        self.assertEqual(result.seed, 11)

    def test_determinism(self):
        """Identical settings and seed give identical results"""
        runs = [vqe_run(AnsatzSpec(4), hamiltonian(4), SampledBackend(2000, seed=5)) for _ in range(2)]
        self.assertEqual(runs[0].to_dict(1.0), runs[1].to_dict(1.0))

    def test_result_export(self):
        """VqeResult JSON layout"""
        result = vqe_run(AnsatzSpec(2), hamiltonian(2), settings=OptimizerConfig(max_evaluations=10))
        payload = result.to_dict(eta=1.0)
        self.assertEqual(sorted(payload), sorted([
            'N', 'eta', 'target', 'backend', 'shots', 'seed', 'energy', 'p',
            'evaluations', 'converged', 'trace',
        ]))
        self.assertEqual(len(payload['trace']), payload['evaluations'])
        self.assertIsInstance(result, VqeResult)


class MultiSeedTestCase(unittest.TestCase):
    """Test case for averaged sampled runs"""

    def test_ten_seed_averages(self):
        """N=2 at 1000 shots and N=4 at 8192 shots, averaged over ten seeds"""
        _, summary2 = repeat_sampled_vqe(AnsatzSpec(2), hamiltonian(2), 1000, range(10), exact=EXACT_FIRST)
        self.assertLess(abs(summary2['bias']), 0.05)
        results4, summary4 = repeat_sampled_vqe(AnsatzSpec(4), hamiltonian(4), 8192, range(10), exact=EXACT_FIRST)
        self.assertLess(abs(summary4['bias']), 0.02)
        self.assertEqual(summary4['runs'], 10)
        self.assertEqual([r.seed for r in results4], list(range(10)))

    def test_requires_seeds(self):
        """An empty seed list is rejected"""
        with self.assertRaises(ValueError):
            repeat_sampled_vqe(AnsatzSpec(2), hamiltonian(2), 100, [])


class LandscapeTestCase(unittest.TestCase):
    """Test case for exact energy landscapes"""

    def test_nodes(self):
        """Both chains give cosh(1) - 1, cosh(1), cosh(1) + 1 at 0, pi/2, pi"""
        expected = [np.cosh(1.0) - 1, np.cosh(1.0), np.cosh(1.0) + 1]
        for n in (2, 4):
            frame = energy_landscape(AnsatzSpec(n), hamiltonian(n), [0.0, np.pi / 2, np.pi])
            self.assertEqual(list(frame.columns), ['p', 'energy'])
            np.testing.assert_allclose(frame['energy'], expected, atol=1e-12)

    def test_minimum_matches_vqe(self):
        """The dense-grid minimum agrees with the optimizer"""
        frame = energy_landscape(AnsatzSpec(4), hamiltonian(4), np.linspace(-np.pi, np.pi, 721))
        result = vqe_run(AnsatzSpec(4), hamiltonian(4))
        self.assertLessEqual(result.energy, frame['energy'].min() + 1e-9)
        self.assertAlmostEqual(result.energy, frame['energy'].min(), delta=1e-4)

    def test_empty_grid(self):
        """An empty grid is rejected"""
        with self.assertRaises(ValueError):
            energy_landscape(AnsatzSpec(2), hamiltonian(2), [])


if __name__ == '__main__':
    unittest.main()
