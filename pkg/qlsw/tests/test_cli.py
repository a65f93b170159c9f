import csv
import io
import json
import os
import shutil
import tempfile
import unittest
from unittest import mock

from qlsw import cli
from qlsw import hhl
from qlsw import statevec
from qlsw.helpers import vector_from_json
from qlsw.qmat import InvariantError
from qlsw.qmat import named_state
from qlsw.qmat import pure_fidelity

INSTANCES = os.path.join(os.path.dirname(os.path.dirname(__file__)), 'instances')


def _instance(name):
    return os.path.join(INSTANCES, name)


class CliTestCase(unittest.TestCase):
    def setUp(self):
        self.folder = tempfile.mkdtemp()

    def tearDown(self):
        shutil.rmtree(self.folder)

    def write(self, name, document):
        path = os.path.join(self.folder, name)
        with open(path, 'w') as fh:
            fh.write(document if isinstance(document, str) else json.dumps(document))
        return path

    def run_cli(self, *argv):
        stdout, stderr = io.StringIO(), io.StringIO()
        status = cli.main(list(argv) + ['-q'], stdout=stdout, stderr=stderr)
        return status, stdout.getvalue(), stderr.getvalue()

    def read(self, *parts):
        with open(os.path.join(*parts)) as fh:
            return fh.read()

    def assertFails(self, result, status, code):
        self.assertEqual(result[0], status)
        self.assertEqual(json.loads(result[2])['error'], code)


class TestSolve(CliTestCase):
    def test_eigenvector_input(self):
        out = os.path.join(self.folder, 'run')
        status, stdout, _ = self.run_cli('solve', '--instance', _instance('set_L1_b1.json'), '--out', out)
        self.assertEqual(status, cli.EXIT_OK)
        self.assertEqual(stdout.strip(), os.path.join(out, 'solution.json'))
        report = json.loads(self.read(out, 'solution.json'))
        self.assertAlmostEqual(report['success_probability'], 4 / 9, places=10)
        self.assertAlmostEqual(report['theta'], -1.682, delta=5e-4)
        self.assertAlmostEqual(report['fidelity_to_classical'], 1.0, places=10)
        self.assertEqual(report['n_digit'], 2)

    def test_general_variant(self):
        status, _, _ = self.run_cli('solve', '--instance', _instance('rotated_R2_b2.json'),
                                    '--out', self.folder, '--variant', 'general')
        self.assertEqual(status, cli.EXIT_OK)
        report = json.loads(self.read(self.folder, 'solution.json'))
        self.assertEqual(report['variant'], 'general')
        self.assertGreaterEqual(report['fidelity_to_classical'], 1 - 1e-10)

    def test_circuit_document(self):
        for variant in ('optimized', 'general'):
            out = os.path.join(self.folder, variant)
            status, _, _ = self.run_cli('solve', '--instance', _instance('set_L1_b2.json'),
                                        '--out', out, '--variant', variant)
            self.assertEqual(status, cli.EXIT_OK)
            report = json.loads(self.read(out, 'solution.json'))
            circuit = statevec.circuit_from_dict(report['circuit'])
            self.assertEqual(len(circuit.ops), report['num_gates'])
            register = len(circuit.metadata['register_qubits'])
            state = statevec.run_circuit(circuit, hhl.prepare_input(named_state('+'), register))
            selected, prob = statevec.postselect(state, circuit.metadata['ancilla'], 1)
            self.assertAlmostEqual(prob, report['success_probability'], places=10)
            x = selected.amplitudes.reshape(2, -1)[:, 0]
            self.assertAlmostEqual(pure_fidelity(x, vector_from_json(report['x'])), 1.0, places=10)
        document = json.loads(self.read(self.folder, 'optimized', 'solution.json'))['circuit']
        kinds = [op['kind'] for op in document['ops']]
        self.assertEqual(kinds, ['u', 'cnot', 'ry', 'cnot', 'ry', 'u'])

    def test_malformed_json(self):
        path = self.write('bad.json', '{"A": [[0.5, 0], ')
        result = self.run_cli('solve', '--instance', path, '--out', self.folder)
        self.assertFails(result, cli.EXIT_INPUT, 'parse')

    def test_not_hermitian(self):
        path = self.write('a.json', {'A': [[0.5, 0.1], [0.2, 0.75]], 'b': [1, 0]})
        result = self.run_cli('solve', '--instance', path, '--out', self.folder)
        self.assertFails(result, cli.EXIT_INPUT, 'not_hermitian')

    def test_missing_instance(self):
        result = self.run_cli('solve', '--instance', os.path.join(self.folder, 'x.json'), '--out', self.folder)
        self.assertFails(result, cli.EXIT_INPUT, 'config')

    def test_internal_error(self):
        with mock.patch('qlsw.core.Workbench.save_solution', side_effect=InvariantError('broken')):
            result = self.run_cli('solve', '--instance', _instance('set_L1_b1.json'), '--out', self.folder)
        self.assertFails(result, cli.EXIT_INTERNAL, 'invariant')


class TestPhotonic(CliTestCase):
    def test_reports_are_reproducible(self):
        runs = []
        for name in ('first', 'second'):
            out = os.path.join(self.folder, name)
            status, stdout, _ = self.run_cli(
                'photonic', '--instance', _instance('set_L1_b2.json'), '--out', out,
                '--seed', '11', '--shots', '2000', '--trials', '100')
            self.assertEqual(status, cli.EXIT_OK)
            self.assertEqual(len(stdout.split()), 3)
            runs.append(out)
        for name in ('counts.json', 'report.json', 'density.csv'):
            self.assertEqual(self.read(runs[0], name), self.read(runs[1], name))
        report = json.loads(self.read(runs[0], 'report.json'))
        self.assertAlmostEqual(report['experiment']['double_share'], 0.1, places=9)
        self.assertEqual(report['tomography']['trials'], 100)
        lines = self.read(runs[0], 'density.csv').splitlines()
        self.assertEqual(lines[0], 'row,col,real,imag')
        self.assertEqual(len(lines), 5)

    def test_ideal_noise(self):
        status, _, _ = self.run_cli(
            'photonic', '--instance', _instance('rotated_R1_b2.json'), '--out', self.folder,
            '--noise', _instance('noise_ideal.json'), '--trials', '100', '--shots', '1000')
        self.assertEqual(status, cli.EXIT_OK)
        report = json.loads(self.read(self.folder, 'report.json'))
        self.assertGreaterEqual(report['experiment']['fidelity'], 1 - 1e-6)
        self.assertEqual(report['noise']['pair_amplitude'], 0.0)

    def test_too_few_trials(self):
        result = self.run_cli('photonic', '--instance', _instance('set_L1_b1.json'),
                              '--out', self.folder, '--trials', '5')
        self.assertFails(result, cli.EXIT_INPUT, 'config')


class TestSweep(CliTestCase):
    def sweep(self, grid, noise=None, *extra):
        argv = ['sweep', '--grid', grid, '--out', self.folder, '--shots', '1000', '--trials', '100']
        if noise:
            argv += ['--noise', noise]
        result = self.run_cli(*(argv + list(extra)))
        self.assertEqual(result[0], cli.EXIT_OK, result[2])
        with open(os.path.join(self.folder, 'sweep.csv')) as fh:
            return list(csv.DictReader(fh))

    def test_noiseless_grid(self):
        rows = self.sweep(_instance('grid_inputs.json'), _instance('noise_ideal.json'))
        self.assertEqual([row['input'] for row in rows], ['0', '1', '+', '-', '+i', '-i'])
        for row in rows:
            self.assertGreaterEqual(float(row['fidelity']), 1 - 1e-6)
        self.assertEqual(len(os.listdir(os.path.join(self.folder, 'points'))), 6)

    def test_threaded_matches_serial(self):
        grid = self.write('grid.json', {'eigenvalues': ['L1', 'L2'], 'inputs': ['1', '+']})
        serial = self.sweep(grid, None, '--seed', '5')
        threaded = self.sweep(grid, None, '--seed', '5', '--threaded')
        self.assertEqual(serial, threaded)
        for k in (0, 2):
            self.assertGreaterEqual(float(serial[k]['fidelity']), float(serial[k + 1]['fidelity']))

    def test_ideal_variant(self):
        grid = self.write('grid.json', {'inputs': ['+', '-i']})
        rows = self.sweep(grid, None, '--variant', 'general')
        self.assertEqual([row['label'] for row in rows], ['L1|+', 'L1|-i'])
        for row in rows:
            self.assertAlmostEqual(float(row['fidelity']), 1.0, places=9)

    def test_explicit_eigenvalue_pair(self):
        grid = self.write('grid.json', {'eigenvalues': ['L1', 'L2', [0.25, 0.375]], 'inputs': ['1', '+'],
                                        'R': [[1, 0], [0, 1]]})
        rows = self.sweep(grid, _instance('noise_ideal.json'))
        self.assertEqual([row['label'] for row in rows][-2:], ['(0.25,0.375)|1', '(0.25,0.375)|+'])
        for row in rows:
            self.assertGreaterEqual(float(row['fidelity']), 1 - 1e-6)

    def test_unrepresentable_pair(self):
        grid = self.write('grid.json', {'eigenvalues': [[0.25, 0.75]], 'inputs': ['1']})
        result = self.run_cli('sweep', '--grid', grid, '--out', self.folder)
        self.assertFails(result, cli.EXIT_INPUT, 'unsupported_instance')

    def test_empty_grid(self):
        grid = self.write('grid.json', {'inputs': []})
        result = self.run_cli('sweep', '--grid', grid, '--out', self.folder)
        self.assertFails(result, cli.EXIT_INPUT, 'empty_grid')

    def test_unknown_set(self):
        grid = self.write('grid.json', {'eigenvalues': ['L9']})
        result = self.run_cli('sweep', '--grid', grid, '--out', self.folder)
        self.assertFails(result, cli.EXIT_INPUT, 'validation')


class TestTomo(CliTestCase):
    def test_counts_file(self):
        counts = self.write('counts.json', {'bases': {
            'Z': {'plus': 0, 'minus': 5000},
            'X': {'plus': 2500, 'minus': 2500},
            'Y': {'plus': 2500, 'minus': 2500},
        }})
        status, stdout, _ = self.run_cli('tomo', '--instance', _instance('set_L1_b1.json'),
                                         '--counts', counts, '--out', self.folder, '--trials', '100')
        self.assertEqual(status, cli.EXIT_OK)
        self.assertEqual(len(stdout.split()), 2)
        report = json.loads(self.read(self.folder, 'tomography.json'))
        self.assertAlmostEqual(report['fidelity'], 1.0, places=9)

    def test_incomplete_counts(self):
        counts = self.write('counts.json', {'bases': {'Z': {'plus': 1, 'minus': 1}}})
        result = self.run_cli('tomo', '--instance', _instance('set_L1_b1.json'),
                              '--counts', counts, '--out', self.folder)
        self.assertFails(result, cli.EXIT_INPUT, 'incomplete_data')


if __name__ == '__main__':
    unittest.main()
