"""
Single-qubit state tomography.

Counts are collected in the Z, X and Y bases; the ``plus`` outcome of each
is ``|0>``, ``|+>`` and ``|+i>``. Reconstruction is linear inversion
followed by clipping negative eigenvalues, and error bars come from a
parametric bootstrap that redraws every count from a Poisson distribution
centred on the observed value.
"""
import logging
from collections import OrderedDict
from collections import namedtuple

import numpy as np

from .helpers import matrix_to_json
from .helpers import spawn_seeds
from .helpers import vector_to_json
from .hhl import classical_solve
from .qmat import PAULI_X
from .qmat import PAULI_Y
from .qmat import PAULI_Z
from .qmat import as_matrix
from .qmat import as_vector
from .qmat import dagger
from .qmat import density_from_bloch
from .qmat import is_hermitian
from .qmat import named_state
from .qmat import projector
from .qmat import state_fidelity

__all__ = [
    'CountRecord', 'TomographyReport', 'IncompleteDataError', 'DegenerateDataError',
    'sample_counts', 'sample_probabilities', 'expected_counts', 'born_probabilities',
    'reconstruct', 'monte_carlo_errors', 'report', 'observables', 'counts_to_dict',
    'counts_from_dict', 'BASES', 'DEFAULT_SHOTS', 'DEFAULT_TRIALS',
]

logger = logging.getLogger(__name__)

BASES = ('Z', 'X', 'Y')

DEFAULT_SHOTS = 10000
DEFAULT_TRIALS = 500
MIN_TRIALS = 100

_PAULI = {'Z': PAULI_Z, 'X': PAULI_X, 'Y': PAULI_Y}


class IncompleteDataError(ValueError):
    """A tomography basis is missing."""
    code = 'incomplete_data'


class DegenerateDataError(ValueError):
    """A basis recorded no events."""
    code = 'degenerate_data'


class CountRecord(namedtuple('CountRecord', ['basis', 'plus', 'minus'])):
    __slots__ = ()

    def __new__(cls, basis, plus, minus):
        basis = str(basis).upper()
        if basis not in BASES:
            raise IncompleteDataError("Unknown basis %r, expected one of %s" % (basis, BASES))
        if plus < 0 or minus < 0:
            raise ValueError("Counts must be non-negative, got %r and %r" % (plus, minus))
        return super(CountRecord, cls).__new__(cls, basis, plus, minus)

    @property
    def total(self):
        return self.plus + self.minus


class TomographyReport(namedtuple('TomographyReport', [
        'rho', 'fidelity', 'fidelity_error', 'expectation_values', 'raw', 'trials',
        'failed_trials', 'target', 'metadata'])):
    """Reconstructed state with its fidelity and Monte-Carlo error bars.

    ``expectation_values`` is a list of ``(label, value, error)``.
    """
    __slots__ = ()

    def to_dict(self):
        return {
            'rho': matrix_to_json(self.rho),
            'fidelity': self.fidelity,
            'fidelity_error': self.fidelity_error,
            'expectation_values': [
                {'label': label, 'value': value, 'error': error}
                for label, value, error in self.expectation_values
            ],
            'counts': counts_to_dict(self.raw),
            'trials': self.trials,
            'failed_trials': self.failed_trials,
            'target': vector_to_json(self.target),
            'metadata': dict(self.metadata),
        }


def _density(state):
    arr = np.asarray(state, dtype=complex)
    if arr.ndim == 1:
        return projector(as_vector(arr))
    rho = as_matrix(arr)
    if rho.shape != (2, 2):
        raise ValueError("Tomography handles single qubits, got shape %r" % (rho.shape,))
    return rho


def born_probabilities(state):
    """Probability of the ``plus`` outcome in every basis."""
    rho = _density(state)
    return OrderedDict(
        (basis, float(np.clip(np.real(0.5 + 0.5 * np.trace(rho @ _PAULI[basis])), 0, 1)))
        for basis in BASES
    )


def sample_probabilities(p_plus, shots_per_basis, rng):
    """Poisson distributed totals split binomially by ``p_plus[basis]``."""
    if shots_per_basis < 1:
        raise ValueError("shots_per_basis must be >= 1, got %r" % shots_per_basis)
    records = []
    for basis in BASES:
        total = int(rng.poisson(shots_per_basis))
        plus = int(rng.binomial(total, p_plus[basis]))
        records.append(CountRecord(basis, plus, total - plus))
    return records


def sample_counts(state, shots_per_basis, seed):
    """Simulated detector counts for a state vector or a density matrix."""
    rng = np.random.default_rng(seed)
    return sample_probabilities(born_probabilities(state), shots_per_basis, rng)


def expected_counts(state, shots_per_basis):
    """Noise-free counts: exactly ``shots * p`` in each outcome."""
    return [CountRecord(basis, shots_per_basis * p, shots_per_basis * (1 - p))
            for basis, p in born_probabilities(state).items()]


def _by_basis(counts):
    table = {}
    for record in counts:
        table[record.basis] = record
    missing = [b for b in BASES if b not in table]
    if missing:
        raise IncompleteDataError("Missing tomography bases: %s" % ', '.join(missing))
    return table


def _project(rho):
    rho = (rho + dagger(rho)) / 2
    w, v = np.linalg.eigh(rho)
    if w.min() >= 0:
        return rho / np.real(np.trace(rho))
    w = np.clip(w, 0, None)
    w = w / w.sum()
    return (v * w) @ dagger(v)


def reconstruct(counts):
    """Linear inversion, projected onto the density matrices when needed."""
    table = _by_basis(counts)
    r = []
    for basis in BASES:
        record = table[basis]
        if record.total <= 0:
            raise DegenerateDataError("Basis %s recorded no events." % basis)
        r.append((record.plus - record.minus) / record.total)
    return _project(density_from_bloch(r))


def observables():
    """Projectors onto ``|0>``, ``|+>`` and ``|+i>``."""
    return OrderedDict((label, projector(named_state(label))) for label in ('0', '+', '+i'))


def _expectations(rho, operators):
    return [float(np.real(np.trace(rho @ op))) for op in operators.values()]


def monte_carlo_errors(counts, target, trials=DEFAULT_TRIALS, seed=1, operators=None):
    """Fidelity to ``target`` and expectation values with bootstrap errors.

    Trial ``k`` redraws each count from ``Poisson(observed)`` with a seed
    derived from ``(seed, k)``; failed reconstructions are counted in
    ``failed_trials``.

    :rtype: TomographyReport
    """
    if trials < MIN_TRIALS:
        raise ValueError("At least %d Monte-Carlo trials are needed, got %r" % (MIN_TRIALS, trials))
    target = as_vector(target)
    target = target / np.linalg.norm(target)
    operators = observables() if operators is None else operators
    for op in operators.values():
        if not is_hermitian(op, 1e-10):
            raise ValueError("Observables must be Hermitian.")
    counts = list(counts)
    rho = reconstruct(counts)
    fidelity = state_fidelity(rho, target)
    values = _expectations(rho, operators)

    fidelities, samples, failed = [], [], 0
    for child in spawn_seeds(seed, trials):
        rng = np.random.default_rng(child)
        drawn = [CountRecord(c.basis, rng.poisson(c.plus), rng.poisson(c.minus)) for c in counts]
        try:
            trial = reconstruct(drawn)
        except DegenerateDataError:
            failed += 1
            continue
        fidelities.append(state_fidelity(trial, target))
        samples.append(_expectations(trial, operators))
    if len(fidelities) < 2:
        raise DegenerateDataError("Only %d of %d Monte-Carlo trials succeeded." % (len(fidelities), trials))
    if failed:
        logger.warning("%d of %d Monte-Carlo trials had an empty basis", failed, trials)
    errors = np.std(np.asarray(samples), axis=0, ddof=1)
    return TomographyReport(
        rho=rho,
        fidelity=fidelity,
        fidelity_error=float(np.std(fidelities, ddof=1)),
        expectation_values=[(label, v, float(e)) for label, v, e in zip(operators, values, errors)],
        raw=counts,
        trials=trials,
        failed_trials=failed,
        target=target,
        metadata={},
    )


def report(inst, cfg, counts, target=None, trials=DEFAULT_TRIALS, seed=1):
    """Full tomography report; ``target`` defaults to the classical solution."""
    if target is None:
        target = classical_solve(inst)
    ans = monte_carlo_errors(counts, target, trials, seed)
    metadata = {'eigenvalues': [float(v) for v in inst.eigenvalues]}
    if cfg is not None:
        metadata.update({'n_digit': cfg.n, 'C': cfg.c})
    logger.info("Fidelity %.3f +- %.3f", ans.fidelity, ans.fidelity_error)
    return ans._replace(metadata=metadata)


def counts_to_dict(counts):
    """``{"bases": {"Z": {"plus": n, "minus": n}, ...}}``."""
    return {'bases': OrderedDict(
        (c.basis, {'plus': _number(c.plus), 'minus': _number(c.minus)}) for c in counts)}


def _number(value):
    value = float(value)
    return int(value) if value.is_integer() else value


def counts_from_dict(data):
    try:
        bases = data['bases']
        return [CountRecord(basis, bases[basis]['plus'], bases[basis]['minus'])
                for basis in BASES if basis in bases]
    except (KeyError, TypeError) as e:
        raise IncompleteDataError("Malformed counts document: %r" % e)
