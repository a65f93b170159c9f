"""
Front objects built from a :class:`~qlsw.configs.ConfigHandler`.

:class:`Workbench` runs one instance through the ideal circuits, the
photonic simulation or tomography of external counts and saves the
reports; :class:`Sweep` runs a grid of instances through a scheduler and
writes one report per point plus an aggregate CSV.
"""
import csv
import io
import logging
import os
from collections import OrderedDict
from collections import namedtuple

import numpy as np

from . import tomo
from .configs import ConfigError
from .configs import load_json
from .helpers import atomic_write
from .helpers import dumps_json
from .helpers import matrix_from_json
from .helpers import matrix_to_json
from .helpers import spawn_seeds
from .helpers import vector_to_json
from .hhl import EIGENVALUE_SETS
from .hhl import HHLConfig
from .hhl import classical_solve
from .hhl import instance_from_rotations
from .hhl import instance_to_dict
from .hhl import rotation_product
from .hhl import run_pipeline
from .hhl import theta_for
from .photonic import run_experiment
from .qmat import STATE_LABELS
from .qmat import dagger
from .qmat import named_state
from .qmat import pure_fidelity
from .statevec import circuit_to_dict

__all__ = [
    'Workbench', 'Sweep', 'GridPoint', 'SweepError', 'SWEEP_COLUMNS', 'density_csv',
    'parse_grid', 'sweep_csv',
]

logger = logging.getLogger(__name__)

SWEEP_COLUMNS = (
    'label', 'input', 'lambda1', 'lambda2', 'fidelity', 'fidelity_error',
    'tomography_fidelity', 'success_probability',
)


class SweepError(ValueError):
    """The grid document lists no points or names an unknown set."""
    code = 'empty_grid'

    def __init__(self, message, code=None):
        super(SweepError, self).__init__(message)
        if code is not None:
            self.code = code


def _number(value):
    return '%.12g' % value


def density_csv(rho):
    """``row,col,real,imag`` lines in row-major order."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator='\n')
    writer.writerow(['row', 'col', 'real', 'imag'])
    rho = np.asarray(rho, dtype=complex)
    for i in range(rho.shape[0]):
        for j in range(rho.shape[1]):
            writer.writerow([i, j, _number(rho[i, j].real), _number(rho[i, j].imag)])
    return buf.getvalue()


def _ideal_run(inst, cfg, variant, shots, trials, seed):
    """Noiseless circuit run plus tomography of sampled counts of its output."""
    solution = run_pipeline(inst, cfg, variant)
    target = classical_solve(inst)
    counts = tomo.sample_counts(solution.x, shots, seed)
    report = tomo.report(inst, cfg, counts, target, trials, seed)
    return solution, report, pure_fidelity(solution.x, target)


def _photonic_run(inst, cfg, noise, shots, trials, seed):
    record = run_experiment(inst, cfg, noise, shots, seed)
    report = tomo.report(inst, cfg, record.counts, record.target, trials, seed)
    return record, report


class Workbench(object):
    """One instance with its circuit parameters, noise and output folder."""

    def __init__(self, config, instance, hhl_config, noise):
        self.config = config
        self.instance = instance
        self.hhl_config = hhl_config
        self.noise = noise
        self.logger = logger.getChild(self.__class__.__name__)

    @classmethod
    def from_config(cls, config):
        """Create a Workbench from a configured config object."""
        if config and not config.is_set():
            raise ConfigError("Configuration is not setup.")
        instance, hhl_config = config.load_instance()
        return cls(config, instance, hhl_config, config.load_noise())

    @property
    def out(self):
        return self.config.get_out()

    def path(self, name):
        return os.path.join(self.out, name)

    def solve(self, variant=None):
        """Report of the noiseless circuit; ``photonic`` falls back to ``optimized``."""
        variant = variant or self.config.get_variant()
        if variant == 'photonic':
            variant = 'optimized'
        inst, cfg = self.instance, self.hhl_config
        solution = run_pipeline(inst, cfg, variant)
        eigenvalues = [float(v) for v in inst.eigenvalues]
        ans = OrderedDict([
            ('variant', variant),
            ('x', vector_to_json(solution.x)),
            ('success_probability', solution.success_probability),
            ('fidelity_to_classical', pure_fidelity(solution.x, classical_solve(inst))),
            ('theta', theta_for(eigenvalues, cfg.c) if inst.dimension == 2 else None),
            ('thetas', solution.metadata['thetas']),
            ('eigenvalues', eigenvalues),
            ('n_digit', cfg.n),
            ('m', cfg.m),
            ('C', cfg.c),
            ('condition_number', inst.condition_number),
            ('num_gates', len(solution.circuit.ops)),
            ('circuit', circuit_to_dict(solution.circuit)),
        ])
        self.logger.debug("Solved with %s circuit of %d gates", variant, len(solution.circuit.ops))
        return ans

    def save_solution(self, variant=None):
        path = atomic_write(self.path('solution.json'), dumps_json(self.solve(variant)))
        self.logger.info("Saved solution report to %s", path)
        return path

    def photonic(self):
        """``(ExperimentRecord, TomographyReport)`` of the photonic simulation."""
        config = self.config
        return _photonic_run(
            self.instance, self.hhl_config, self.noise,
            config.get_shots(), config.get_trials(), config.get_seed())

    def save_photonic(self):
        """Writes ``counts.json``, ``report.json`` and ``density.csv``."""
        record, report = self.photonic()
        document = OrderedDict([
            ('experiment', record.to_dict()),
            ('tomography', report.to_dict()),
            ('density', matrix_to_json(record.density)),
            ('noise', self.noise.to_dict()),
            ('instance', instance_to_dict(self.instance, self.hhl_config)),
        ])
        paths = [
            atomic_write(self.path('counts.json'), dumps_json(tomo.counts_to_dict(record.counts))),
            atomic_write(self.path('report.json'), dumps_json(document)),
            atomic_write(self.path('density.csv'), density_csv(record.density)),
        ]
        self.logger.info("Saved photonic reports to %s", self.out)
        return paths

    def tomography(self, counts_path):
        """Reconstructs the state from an external counts file."""
        counts = tomo.counts_from_dict(load_json(counts_path))
        return tomo.report(
            self.instance, self.hhl_config, counts,
            trials=self.config.get_trials(), seed=self.config.get_seed())

    def save_tomography(self, counts_path):
        report = self.tomography(counts_path)
        paths = [
            atomic_write(self.path('tomography.json'), dumps_json(report.to_dict())),
            atomic_write(self.path('density.csv'), density_csv(report.rho)),
        ]
        self.logger.info("Saved tomography report to %s", self.out)
        return paths


class GridPoint(namedtuple('GridPoint', ['label', 'input', 'eigenvalues', 'r', 'seed'])):
    """One sweep point: ``R|b>`` is the named state ``input``."""
    __slots__ = ()

    def instance(self):
        b = dagger(self.r) @ named_state(self.input)
        inst = instance_from_rotations(self.eigenvalues, self.r, b)
        return inst, HHLConfig.for_instance(inst, r=self.r)


def _eigenvalue_set(entry):
    if isinstance(entry, str):
        try:
            return entry, tuple(EIGENVALUE_SETS[entry])
        except KeyError:
            raise SweepError("Unknown eigenvalue set %r, expected one of %s"
                             % (entry, list(EIGENVALUE_SETS)), code='validation')
    try:
        values = tuple(float(v) for v in entry)
    except (TypeError, ValueError):
        raise SweepError("Eigenvalues must be a set name or a list of numbers, got %r"
                         % (entry,), code='validation')
    return '(%s)' % ','.join(_number(v) for v in values), values


def parse_grid(data, seed):
    """Grid points of ``{"eigenvalues": [...], "inputs": [...], "R": ...}``.

    Points run over eigenvalue sets first and inputs second; the seed of
    point ``k`` depends only on ``(seed, k)``.
    """
    if not isinstance(data, dict):
        raise SweepError("A grid document is a JSON object.", code='validation')
    sets = [_eigenvalue_set(e) for e in data.get('eigenvalues', ['L1'])]
    inputs = list(data.get('inputs', STATE_LABELS))
    for label in inputs:
        if label not in STATE_LABELS:
            raise SweepError("Unknown input state %r, expected one of %s"
                             % (label, STATE_LABELS), code='validation')
    r = data.get('R')
    if r is None:
        r = np.eye(2, dtype=complex)
    elif isinstance(r, list) and r and isinstance(r[0], dict):
        r = rotation_product(r)
    else:
        r = matrix_from_json(r)
    jobs = [(name, values, label) for name, values in sets for label in inputs]
    if not jobs:
        raise SweepError("The grid has no points.")
    seeds = spawn_seeds(seed, len(jobs))
    return [GridPoint('%s|%s' % (name, label), label, values, r, s)
            for (name, values, label), s in zip(jobs, seeds)]


class Sweep(object):
    """Runs grid points through a scheduler and saves their reports."""

    def __init__(self, config, points, noise, scheduler):
        if not points:
            raise SweepError("The grid has no points.")
        self.config = config
        self.points = list(points)
        self.noise = noise
        self.scheduler = scheduler
        self.logger = logger.getChild(self.__class__.__name__)
        for variant in ('general', 'optimized'):
            scheduler.register_handler(variant, self._ideal_handler(variant))
        scheduler.register_handler('photonic', self.photonic_point)

    @classmethod
    def from_config(cls, config, grid):
        """``grid`` is a path to a grid document or the parsed document."""
        if isinstance(grid, str):
            grid = load_json(grid)
        points = parse_grid(grid, config.get_seed())
        return cls(config, points, config.load_noise(), config.create_scheduler())

    def _ideal_handler(self, variant):
        def handler(point):
            return self.ideal_point(point, variant)
        return handler

    def _row(self, point, fidelity, report, probability):
        return OrderedDict([
            ('label', point.label),
            ('input', point.input),
            ('lambda1', float(point.eigenvalues[0])),
            ('lambda2', float(point.eigenvalues[1])),
            ('fidelity', fidelity),
            ('fidelity_error', report.fidelity_error),
            ('tomography_fidelity', report.fidelity),
            ('success_probability', probability),
        ])

    def ideal_point(self, point, variant='optimized'):
        inst, cfg = point.instance()
        solution, report, fidelity = _ideal_run(
            inst, cfg, variant, self.config.get_shots(), self.config.get_trials(), point.seed)
        return self._row(point, fidelity, report, solution.success_probability), report

    def photonic_point(self, point):
        inst, cfg = point.instance()
        record, report = _photonic_run(
            inst, cfg, self.noise, self.config.get_shots(), self.config.get_trials(), point.seed)
        return self._row(point, record.fidelity, report, record.success_probability), report

    def run(self):
        """Rows in grid order."""
        variant = self.config.get_variant()
        results = self.scheduler.run((variant, point) for point in self.points)
        return [row for row, _ in results], [report for _, report in results]

    def save(self):
        """Writes ``points/<k>.json`` for every point and ``sweep.csv``."""
        rows, reports = self.run()
        out = self.config.get_out()
        for k, (row, report) in enumerate(zip(rows, reports)):
            document = OrderedDict([('row', row), ('tomography', report.to_dict())])
            atomic_write(os.path.join(out, 'points', '%03d.json' % k), dumps_json(document))
        path = atomic_write(os.path.join(out, 'sweep.csv'), sweep_csv(rows))
        self.logger.info("Saved %d sweep rows to %s", len(rows), path)
        return path, rows


def sweep_csv(rows):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator='\n')
    writer.writerow(SWEEP_COLUMNS)
    for row in rows:
        writer.writerow([
            _number(row[k]) if isinstance(row[k], float) else row[k] for k in SWEEP_COLUMNS
        ])
    return buf.getvalue()


