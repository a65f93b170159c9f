import unittest

import numpy as np
from numpy.testing import assert_allclose

from qlsw import hhl
from qlsw import statevec
from qlsw.hhl import EIGENVALUE_SETS
from qlsw.hhl import HHLConfig
from qlsw.qmat import PAULI_Z
from qlsw.qmat import dagger
from qlsw.qmat import named_state
from qlsw.qmat import pure_fidelity
from qlsw.qmat import random_state
from qlsw.qmat import random_unitary
from qlsw.qmat import unitary_exp


def _instance(eigenvalues, r, label_or_b):
    if isinstance(label_or_b, str):
        b = dagger(r) @ named_state(label_or_b)
    else:
        b = label_or_b
    inst = hhl.instance_from_rotations(eigenvalues, r, b)
    return inst, HHLConfig.for_instance(inst, r=r)


class TestValidateInstance(unittest.TestCase):
    def test_normalizes_b(self):
        inst = hhl.validate_instance(np.diag([0.5, 0.75]), [0, 2])
        assert_allclose(inst.b, [0, 1])
        self.assertEqual(inst.b_scale, 2.0)
        self.assertAlmostEqual(inst.condition_number, 1.5)

    def test_not_hermitian(self):
        with self.assertRaises(hhl.InstanceNotHermitian) as ctx:
            hhl.validate_instance([[0.5, 0.1], [0.2, 0.75]], [1, 0])
        self.assertEqual(ctx.exception.code, 'not_hermitian')

    def test_zero_b(self):
        with self.assertRaises(hhl.DegenerateInputError):
            hhl.validate_instance(np.diag([0.5, 0.75]), [0, 0])

    def test_eigenvalue_above_one_carries_hint(self):
        with self.assertRaises(hhl.EigenvalueRangeError) as ctx:
            hhl.validate_instance(np.diag([0.5, 1.5]), [1, 0])
        self.assertAlmostEqual(ctx.exception.hint, 1.5)

    def test_non_positive_eigenvalue(self):
        with self.assertRaises(hhl.EigenvalueRangeError):
            hhl.validate_instance(np.diag([-0.5, 0.5]), [1, 0])


class TestDigits(unittest.TestCase):
    def test_experiment_sets(self):
        self.assertEqual(hhl.representable_digits(EIGENVALUE_SETS['L1']), 2)
        self.assertEqual(hhl.representable_digits(EIGENVALUE_SETS['L2']), 3)
        self.assertEqual(hhl.representable_digits(EIGENVALUE_SETS['L3']), 3)

    def test_not_representable(self):
        self.assertIsNone(hhl.representable_digits([0.5, 0.875]))
        self.assertIsNone(hhl.representable_digits([0.3, 0.4]))

    def test_degenerate(self):
        with self.assertRaises(hhl.DegenerateEigenvaluesError):
            hhl.representable_digits([0.5, 0.5])

    def test_register_encoding(self):
        self.assertEqual(hhl.register_encoding([0.5, 0.75], 2), (2, [2, 3]))
        with self.assertRaises(hhl.UnsupportedInstanceError):
            hhl.register_encoding([0.25, 0.75], 1)


class TestTheta(unittest.TestCase):
    def test_experiment_values(self):
        for name, expected in (('L1', -1.682), ('L2', -1.287), ('L3', -1.082)):
            self.assertAlmostEqual(hhl.theta_for(EIGENVALUE_SETS[name]), expected, delta=5e-4)

    def test_ordering(self):
        with self.assertRaises(hhl.OrderingError):
            hhl.theta_for([0.75, 0.5])

    def test_range(self):
        with self.assertRaises(hhl.EigenvalueRangeError):
            hhl.theta_for([0.5, 1.0])


class TestDigitReadout(unittest.TestCase):
    def test_unitary_is_sign_of_digit(self):
        rng = np.random.default_rng(2)
        for name, lam in EIGENVALUE_SETS.items():
            r = random_unitary(2, rng)
            inst, cfg = _instance(lam, r, '1')
            u = unitary_exp(inst.a, 2 * np.pi * 2 ** (cfg.n - 1))
            for j, value in enumerate(inst.eigenvalues):
                digit = int(round(value * 2 ** cfg.n)) % 2
                v = inst.eig.vector(j)
                assert_allclose(u @ v, (-1) ** digit * v, atol=1e-10)
            assert_allclose(u, dagger(cfg.r) @ PAULI_Z @ cfg.r, atol=1e-10)


class TestPipeline(unittest.TestCase):
    def setUp(self):
        self.rng = np.random.default_rng(1234)

    def test_success_probability_for_eigenvector_input(self):
        for lam in EIGENVALUE_SETS.values():
            inst, cfg = _instance(lam, np.eye(2), '1')
            ans = hhl.run_pipeline(inst, cfg, 'optimized')
            self.assertAlmostEqual(ans.success_probability, (lam[0] / lam[1]) ** 2, places=10)

    def test_known_probabilities(self):
        inst, cfg = _instance(EIGENVALUE_SETS['L1'], np.eye(2), '1')
        self.assertAlmostEqual(hhl.success_probability(inst, cfg.c), 4 / 9, places=12)
        inst, cfg = _instance(EIGENVALUE_SETS['L2'], np.eye(2), '1')
        self.assertAlmostEqual(hhl.success_probability(inst, cfg.c), 16 / 25, places=12)
        inst, cfg = _instance(EIGENVALUE_SETS['L1'], np.eye(2), '+')
        self.assertAlmostEqual(hhl.success_probability(inst, cfg.c), 13 / 18, places=12)

    def test_random_instances_match_classical(self):
        for lam in EIGENVALUE_SETS.values():
            for _ in range(50):
                r = random_unitary(2, self.rng)
                inst, cfg = _instance(lam, r, random_state(2, self.rng))
                expected = hhl.classical_solve(inst)
                p = hhl.success_probability(inst, cfg.c)
                for variant in hhl.VARIANTS:
                    ans = hhl.run_pipeline(inst, cfg, variant)
                    self.assertGreaterEqual(pure_fidelity(ans.x, expected), 1 - 1e-10)
                    self.assertAlmostEqual(ans.success_probability, p, places=10)
                self.assertGreaterEqual(p, (lam[0] / lam[1]) ** 2 - 1e-12)

    def test_general_and_optimized_agree(self):
        for lam in EIGENVALUE_SETS.values():
            for _ in range(100):
                inst, cfg = _instance(lam, random_unitary(2, self.rng), random_state(2, self.rng))
                general = hhl.run_pipeline(inst, cfg, 'general')
                optimized = hhl.run_pipeline(inst, cfg, 'optimized')
                self.assertGreaterEqual(pure_fidelity(general.x, optimized.x), 1 - 1e-10)

    def test_larger_register(self):
        inst, _ = _instance(EIGENVALUE_SETS['L1'], random_unitary(2, self.rng), '+')
        cfg = HHLConfig.for_instance(inst, m=2)
        ans = hhl.run_pipeline(inst, cfg, 'general')
        self.assertGreaterEqual(pure_fidelity(ans.x, hhl.classical_solve(inst)), 1 - 1e-10)

    def test_four_dimensional(self):
        r = random_unitary(4, self.rng)
        a = dagger(r) @ np.diag([0.25, 0.5, 0.625, 0.75]) @ r
        inst = hhl.validate_instance((a + dagger(a)) / 2, random_state(4, self.rng))
        cfg = HHLConfig.for_instance(inst, m=3)
        ans = hhl.run_pipeline(inst, cfg, 'general')
        self.assertGreaterEqual(pure_fidelity(ans.x, hhl.classical_solve(inst)), 1 - 1e-9)
        self.assertAlmostEqual(ans.success_probability, hhl.success_probability(inst), places=9)

    def test_experiment_instances(self):
        for k in (1, 2):
            for label in ('1', '+'):
                inst, cfg = _instance(EIGENVALUE_SETS['L1'], hhl.standard_rotation(k), label)
                ans = hhl.run_pipeline(inst, cfg, 'optimized')
                self.assertGreaterEqual(pure_fidelity(ans.x, hhl.classical_solve(inst)), 1 - 1e-10)

    def test_unknown_variant(self):
        inst, cfg = _instance(EIGENVALUE_SETS['L1'], np.eye(2), '1')
        with self.assertRaises(hhl.ValidationError):
            hhl.run_pipeline(inst, cfg, 'photonic')

    def test_unsupported_eigenvalues(self):
        inst = hhl.validate_instance(np.diag([0.3, 0.4]), [1, 1])
        with self.assertRaises(hhl.UnsupportedInstanceError):
            HHLConfig.for_instance(inst)


class TestCircuits(unittest.TestCase):
    def test_optimized_layout(self):
        inst, cfg = _instance(EIGENVALUE_SETS['L1'], np.eye(2), '1')
        circuit = hhl.build_optimized_circuit(inst, cfg)
        self.assertEqual(circuit.num_qubits, 2)
        self.assertEqual([op.kind for op in circuit], ['u', 'cnot', 'ry', 'cnot', 'ry', 'u'])
        theta = hhl.theta_for(EIGENVALUE_SETS['L1'])
        self.assertAlmostEqual(circuit.ops[2].theta, -theta / 2)
        self.assertAlmostEqual(circuit.ops[4].theta, theta / 2)

    def test_optimized_rotation_order(self):
        rng = np.random.default_rng(12)
        for lam in EIGENVALUE_SETS.values():
            inst, cfg = _instance(lam, random_unitary(2, rng), random_state(2, rng))
            circuit = hhl.build_optimized_circuit(inst, cfg)
            u, c1, ry1, c2, ry2, u_dag = circuit.ops
            reordered = statevec.Circuit(2, [u, ry2, c1, ry1, c2, u_dag])
            assert_allclose(reordered.unitary(), circuit.unitary(), atol=1e-12)

    def test_phase_estimation_writes_digit(self):
        inst, cfg = _instance(EIGENVALUE_SETS['L1'], np.eye(2), '1')
        pe = hhl.build_phase_estimation(inst, cfg)
        out = statevec.run_circuit(pe, hhl.prepare_input(inst.b, 1))
        # |1>|1>|1>: lambda2 = 0.11 has digit 1 in the second place
        self.assertAlmostEqual(out.probabilities()[0b111], 1.0)

    def test_phase_estimation_entangles_eigenvectors(self):
        rng = np.random.default_rng(31)
        for lam in EIGENVALUE_SETS.values():
            for _ in range(5):
                inst, cfg = _instance(lam, random_unitary(2, rng), random_state(2, rng))
                pe = hhl.build_phase_estimation(inst, cfg)
                out = statevec.run_circuit(pe, hhl.prepare_input(inst.b, 1))
                # axes: state qubit, register qubit, ancilla
                psi = out.amplitudes.reshape(2, 2, 2)
                assert_allclose(psi[:, :, 0], 0, atol=1e-12)
                beta = inst.coefficients()
                for j, value in enumerate(inst.eigenvalues):
                    digit = int(round(value * (1 << cfg.n))) % 2
                    expected = beta[j] * inst.eig.eigenvectors[:, j]
                    assert_allclose(psi[:, digit, 1], expected, atol=1e-10)

    def test_prepare_input(self):
        state = hhl.prepare_input([0, 1], 1)
        self.assertAlmostEqual(state.probabilities()[0b101], 1.0)


class TestRotationsAndDocuments(unittest.TestCase):
    def test_rotation_product(self):
        r = hhl.rotation_product([{'axis': 'x', 'angle': '11pi/15'}, {'axis': 'y', 'angle': '3pi/8'}])
        assert_allclose(r, hhl.standard_rotation(1), atol=1e-12)

    def test_bad_rotation(self):
        with self.assertRaises(hhl.ValidationError):
            hhl.rotation_product([{'axis': 'w', 'angle': 1}])

    def test_document_with_input_label(self):
        inst, cfg = hhl.instance_from_dict({
            'eigenvalues': [0.5, 0.75],
            'R': [{'axis': 'x', 'angle': '89pi/60'}, {'axis': 'y', 'angle': '-3pi/8'}],
            'input': '+',
        })
        assert_allclose(cfg.r @ inst.b, named_state('+'), atol=1e-10)
        self.assertEqual(cfg.n, 2)

    def test_document_with_matrix(self):
        inst, cfg = hhl.instance_from_dict({'A': [[0.625, 0.125], [0.125, 0.625]], 'b': [1, 0]})
        assert_allclose(inst.eigenvalues, [0.5, 0.75])
        again, _ = hhl.instance_from_dict(hhl.instance_to_dict(inst, cfg))
        assert_allclose(again.a, inst.a)

    def test_malformed_document(self):
        with self.assertRaises(hhl.ValidationError):
            hhl.instance_from_dict({'b': [1, 0]})
        with self.assertRaises(hhl.ValidationError):
            hhl.instance_from_dict({'eigenvalues': [0.5, 0.75], 'b': [1, 0]})
        with self.assertRaises(hhl.ValidationError):
            hhl.instance_from_dict([1, 2])

    def test_expectation_values(self):
        values = hhl.expectation_values(named_state('+'), [PAULI_Z, np.eye(2)])
        assert_allclose(values, [0, 1], atol=1e-12)
        with self.assertRaises(hhl.ValidationError):
            hhl.expectation_values(named_state('+'), [[[0, 1], [0, 0]]])


if __name__ == '__main__':
    unittest.main()
