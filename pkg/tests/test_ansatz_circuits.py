"""
Tests for the hardcoded one-magnon trial-state circuits and the circuit text format
"""

import unittest

import numpy as np
from numpy.testing import assert_allclose

from ansatz_circuits import (
    N4_GATE_COUNT,
    AnsatzSpec,
    TwoQubitBlockParams,
    closed_form_energy,
    emit_circuit_text,
    one_magnon_circuit,
    one_magnon_circuit_n2,
    one_magnon_circuit_n4,
    parse_circuit_text,
    trial_state_reference,
    u_cal_circuit,
    u_cal_matrix,
    v_block_circuit,
    v_cal_circuit,
    v_cal_matrix,
)
from bethe_engine import BetheRoots, bethe_state
from quantum_core import (
    Statevector,
    circuit_unitary,
    expectation,
    phase_residual,
    run_circuit,
    states_equal_up_to_phase,
)
from xxz_model import (
    XxzParams,
    apply_charge_conjugation,
    build_hamiltonian,
    build_sz,
    reference_state,
)


def circuit_state(num_sites, p):
    return run_circuit(one_magnon_circuit(num_sites, p), reference_state(num_sites))


def unitary_phase_residual(a, b):
    """min over phi of max |a - exp(i phi) b|"""
    overlap = np.vdot(b.ravel(), a.ravel())
    return float(np.max(np.abs(a - overlap / abs(overlap) * b)))


class TwoSiteCircuitTestCase(unittest.TestCase):
    """Test case for the N=2 circuit"""

    def test_gate_list(self):
        """U3 on qubit 1, CNOT from 1 to 0, X on qubit 0"""
        circuit = one_magnon_circuit_n2(0.4)
        self.assertEqual([g.kind for g in circuit], ['u3', 'cx', 'x'])
        self.assertEqual(circuit.gates[0].params, (np.pi / 2, -0.4, 0.0))
        self.assertEqual(circuit.gates[1].qubits, (1, 0))

    def test_special_points(self):
        """p = 0 and p = pi"""
        self.assertTrue(states_equal_up_to_phase(
            circuit_state(2, 0.0), Statevector(2, np.array([0, 1, 1, 0]) / np.sqrt(2))))
        self.assertTrue(states_equal_up_to_phase(
            circuit_state(2, np.pi), Statevector(2, np.array([0, -1, 1, 0]) / np.sqrt(2))))

    def test_magnetization(self):
        """The N=2 trial state has S^z = 0"""
        self.assertAlmostEqual(expectation(circuit_state(2, 1.3), build_sz(2)), 0.0, delta=1e-14)


class FourSiteCircuitTestCase(unittest.TestCase):
    """Test case for the N=4 circuit and its two-qubit factors"""

    def test_block_unitary(self):
        """The V block is unitary at random angles"""
        rng = np.random.default_rng(4)
        for alpha, beta, delta in rng.uniform(-np.pi, np.pi, size=(5, 3)):
            unitary = circuit_unitary(v_block_circuit(TwoQubitBlockParams(alpha, beta, delta)))
            assert_allclose(unitary.conj().T @ unitary, np.eye(4), atol=1e-13)
            self.assertEqual(len(v_block_circuit(TwoQubitBlockParams(alpha, beta, delta))), 8)

    def test_displayed_matrices(self):
        """Entries of the displayed factors and their unitarity"""
        self.assertAlmostEqual(u_cal_matrix(0.7)[0, 0], np.exp(0.35j))
        self.assertEqual(v_cal_matrix(0.7)[0, 1], 1.0)
        for matrix in (u_cal_matrix(0.7), v_cal_matrix(0.7)):
            assert_allclose(matrix.conj().T @ matrix, np.eye(4), atol=1e-13)

    def test_decompositions(self):
        """The gate lists reproduce the displayed factors up to a global phase"""
        rng = np.random.default_rng(29)
        for p in rng.uniform(-np.pi, np.pi, size=20):
            self.assertLess(unitary_phase_residual(circuit_unitary(u_cal_circuit(p)), u_cal_matrix(p)), 1e-12)
            self.assertLess(unitary_phase_residual(circuit_unitary(v_cal_circuit(p)), v_cal_matrix(p)), 1e-12)

    def test_gate_count(self):
        """The N=4 ansatz keeps its documented size"""
        self.assertEqual(len(one_magnon_circuit_n4(0.3)), N4_GATE_COUNT)
        self.assertEqual(N4_GATE_COUNT, 27)

    def test_p_zero(self):
        """At p = 0 the state is the uniform one-magnon superposition"""
        expected = np.zeros(16)
        expected[[1, 2, 4, 8]] = 0.5
        self.assertTrue(states_equal_up_to_phase(circuit_state(4, 0.0), Statevector(4, expected)))

    def test_support(self):
        """Four amplitudes of magnitude 1/2 at indices 1, 2, 4, 8"""
        for p in (-2.0, 0.3, 1.1, 3.0):
            magnitudes = np.abs(circuit_state(4, p).amplitudes)
            assert_allclose(magnitudes[[1, 2, 4, 8]], 0.5, atol=1e-12)
            self.assertLess(np.delete(magnitudes, [1, 2, 4, 8]).max(), 1e-12)

    def test_matches_bethe_vector(self):
        """The circuit state at p = 1.1 is B(p)|Psi_0> normalized"""
        bethe = bethe_state(BetheRoots.from_momenta(4, 1.0, [1.1]))
        self.assertLess(phase_residual(circuit_state(4, 1.1), bethe), 1e-10)


class TrialStateTestCase(unittest.TestCase):
    """Test case for the reference trial states and the landscapes"""

    def test_circuits_match_formulas(self):
        """Circuit and direct construction agree at 50 random p"""
        rng = np.random.default_rng(13)
        for p in rng.uniform(-np.pi, np.pi, size=50):
            for n in (2, 4):
                self.assertLess(phase_residual(circuit_state(n, p), trial_state_reference(n, p)), 1e-10)

    def test_reference_values(self):
        """N=2 at p = 0, 4 pi periodicity of the N=4 components and normalization"""
        assert_allclose(trial_state_reference(2, 0.0).amplitudes, np.array([0, 1, 1, 0]) / np.sqrt(2))
        self.assertTrue(states_equal_up_to_phase(trial_state_reference(4, 2 * np.pi),
                                                 trial_state_reference(4, 0.0)))
        assert_allclose(trial_state_reference(4, 4 * np.pi).amplitudes,
                        trial_state_reference(4, 0.0).amplitudes, atol=1e-14)
        for p in np.linspace(-3, 3, 7):
            self.assertAlmostEqual(trial_state_reference(4, p).norm(), 1.0, delta=1e-14)
        with self.assertRaises(ValueError):
            trial_state_reference(3, 0.0)

    def test_orthogonal_to_ground_states(self):
        """The trial states have no overlap with |Psi_0> or C|Psi_0>"""
        for n in (2, 4):
            ground = reference_state(n)
            flipped = apply_charge_conjugation(ground)
            for p in (-1.2, 0.0, 0.5, np.pi):
                state = circuit_state(n, p)
                self.assertLess(abs(ground.inner(state)), 1e-12)
                self.assertLess(abs(flipped.inner(state)), 1e-12)

    def test_landscape_identities(self):
        """<Psi(p)|H|Psi(p)> equals the closed form"""
        grid = np.linspace(-np.pi, np.pi, 37)
        for eta in (0.5, 1.0, 2.0):
            for n in (2, 4):
                ham = build_hamiltonian(XxzParams(n, eta))
                energies = [expectation(circuit_state(n, p), ham) for p in grid]
                assert_allclose(energies, closed_form_energy(n, eta, grid), atol=1e-10, rtol=0)

    def test_unsupported_sites(self):
        """Only N = 2 and N = 4 have circuits"""
        with self.assertRaises(ValueError):
            one_magnon_circuit(6, 0.0)
        with self.assertRaises(ValueError):
            AnsatzSpec(4, target='second')
        with self.assertRaises(ValueError):
            AnsatzSpec(3)
        with self.assertRaises(ValueError):
            AnsatzSpec(2, p=np.nan)


class CircuitTextTestCase(unittest.TestCase):
    """Test case for circuit emission and parsing"""

    def test_two_site_text(self):
        """Three gate lines for N=2 at p = 0"""
        text = emit_circuit_text(one_magnon_circuit_n2(0.0))
        self.assertEqual(text.splitlines(), [
            'u3(1.5707963267948966,-0,0) q[1]',
            'cx q[1],q[0]',
            'x q[0]',
        ])

    def test_round_trip(self):
        """Re-simulating the emitted text reproduces the state"""
        for n, p in ((2, 0.7), (4, 0.3), (4, -2.9)):
            circuit = one_magnon_circuit(n, p)
            parsed = parse_circuit_text(emit_circuit_text(circuit))
            self.assertEqual(parsed.num_qubits, n)
            self.assertEqual(len(parsed), len(circuit))
            replayed = run_circuit(parsed, reference_state(n))
            self.assertLess(phase_residual(replayed, circuit_state(n, p)), 1e-10)

    def test_comments_and_register(self):
        """Comments, blank lines and a register declaration are accepted"""
        text = "# prepared by hand\nqreg q[3];\n\n// flip\nx q[0]\nh q[2];\n"
        parsed = parse_circuit_text(text)
        self.assertEqual(parsed.num_qubits, 3)
        self.assertEqual([g.kind for g in parsed], ['x', 'h'])

    def test_errors_carry_line_numbers(self):
        """Parse errors name the offending line"""
        cases = (
            ("x q[0]\nfoo q[1]\n", "Line 2"),
            ("u3(1,2) q[0]\n", "Line 1"),
            ("x q[0]\nu3(1,abc,2) q[0]\n", "Line 2"),
            ("cx q[0],q[0]\n", "Line 1"),
            ("x q[0]\n\nthis is not a gate\n", "Line 3"),
        )
        for text, marker in cases:
            with self.assertRaises(ValueError) as context:
                parse_circuit_text(text)
            self.assertIn(marker, str(context.exception))


if __name__ == '__main__':
    unittest.main()
