"""
Linear-optics realization of the two-qubit solver circuit.

Spatial modes: ``c`` carries the state photon to detector 1, ``t`` the
ancilla photon to detector 2, ``a1`` and ``a2`` the heralding photons to
detectors 3 and 4, and ``lc`` / ``lt`` collect the photons the
amplitude-equalizing beam splitters throw away.

Two down-conversion passes feed the network. The forward pass emits the
input pair into ``c`` and ``t``; the backward pass emits the ancilla Bell
pair into ``a1`` and ``a2``. Fourfold events come from one pair per pass
(the signal) or, at the same order, from two pairs of a single pass.
"""
import logging
from collections import OrderedDict
from collections import namedtuple

import numpy as np

from . import fock
from . import tomo
from .fock import H
from .fock import V
from .fock import Detection
from .fock import FockState
from .fock import ModeRegister
from .fock import SourceConfigError
from .hhl import EIGENVALUE_SETS
from .hhl import HHLConfig
from .hhl import UnsupportedInstanceError
from .hhl import classical_solve
from .hhl import instance_from_rotations
from .hhl import rotation_angle
from .hhl import success_probability
from .qmat import InvariantError
from .qmat import as_vector
from .qmat import dagger
from .qmat import ry
from .qmat import state_fidelity

__all__ = [
    'NoiseParams', 'GateResult', 'ExperimentRecord', 'HeraldError', 'CalibrationError',
    'NoiseParamsError', 'heralded_cnot', 'destructive_cnot', 'heralded_cnot_elements',
    'destructive_cnot_elements', 'preparation_elements', 'run_experiment',
    'emission_contributions', 'calibrate_pair_amplitude', 'double_backward_interference_check',
    'emit_pairs', 'SOURCE_MODES', 'EXPERIMENT_MODES', 'HERALD', 'HERALD_PROBABILITY',
    'COINCIDENCE_PROBABILITY', 'PROCESSES',
]

logger = logging.getLogger(__name__)

EXPERIMENT_MODES = ('c', 't', 'a1', 'a2', 'lc', 'lt')

#: Detector 3 behind a +/- analysis in its minus port, detector 4 in its V port.
HERALD = (('a1', V), ('a2', V))

#: Ideal success probabilities of the two gates.
HERALD_PROBABILITY = 1 / 16
COINCIDENCE_PROBABILITY = 1 / 9

PROCESSES = ('signal', 'double_forward', 'double_backward')

#: HWP axis turning H/V into the diagonal basis.
DIAGONAL = np.pi / 8

#: Spatial modes fed by each down-conversion pass.
SOURCE_MODES = {'forward': ('c', 't'), 'backward': ('a1', 'a2')}

#: Polarization amplitudes of a backward pair; ``None`` is the source's own ``|Phi+>``.
_BELL = OrderedDict([
    ('phi+', None),
    ('hh', {(H, H): 1.0}),
    ('vv', {(V, V): 1.0}),
])


class HeraldError(RuntimeError):
    """The herald never fires for a nonzero input."""
    code = 'herald'


class CalibrationError(ValueError):
    """Pair amplitude cannot be calibrated to the requested share."""
    code = 'calibration'


class NoiseParamsError(ValueError):
    """Noise parameter outside its range."""
    code = 'noise_params'


class NoiseParams(namedtuple('NoiseParams', [
        'bell_visibility', 'interference_visibility', 'pair_amplitude',
        'double_emission_share', 'truncation'])):
    """Noise of the source and of two-photon interference.

    :param bell_visibility: weight of ``|Phi+>`` in the ancilla pair; the
        rest is split evenly between ``|HH>`` and ``|VV>``
    :param interference_visibility: probability that all photons of an
        event are indistinguishable
    :param pair_amplitude: weight ``eps`` of two-pairs-in-one-pass events
        (probability ``eps**2`` relative to the signal); ``None``
        calibrates it from ``double_emission_share``
    :param double_emission_share: fraction of fourfold events caused by
        double emission when calibrating
    :param truncation: photon-number truncation of the Fock simulation
    """
    __slots__ = ()

    def __new__(cls, bell_visibility=0.9, interference_visibility=0.875, pair_amplitude=None,
                double_emission_share=0.1, truncation=fock.DEFAULT_TRUNCATION):
        for name, value in (('bell_visibility', bell_visibility),
                            ('interference_visibility', interference_visibility)):
            if not 0 <= value <= 1:
                raise NoiseParamsError("%s must lie in [0, 1], got %r" % (name, value))
        if pair_amplitude is not None and pair_amplitude < 0:
            raise NoiseParamsError("pair_amplitude must be >= 0, got %r" % pair_amplitude)
        if not 0 <= double_emission_share < 1:
            raise NoiseParamsError(
                "double_emission_share must lie in [0, 1), got %r" % double_emission_share)
        if int(truncation) < 4:
            raise SourceConfigError(
                "Fourfold events need a truncation of at least 4 photons, got %r" % truncation)
        return super(NoiseParams, cls).__new__(
            cls, float(bell_visibility), float(interference_visibility),
            None if pair_amplitude is None else float(pair_amplitude),
            float(double_emission_share), int(truncation))

    @classmethod
    def ideal(cls):
        """Perfect visibilities and a first-order source."""
        return cls(1.0, 1.0, 0.0)

    @classmethod
    def from_dict(cls, data):
        known = {k: data[k] for k in cls._fields if k in data}
        return cls(**known)

    def to_dict(self):
        return dict(self._asdict())


class GateResult(namedtuple('GateResult', ['density', 'probability'])):
    """Post-selected two-qubit density matrix and the success probability."""
    __slots__ = ()


class ExperimentRecord(namedtuple('ExperimentRecord', [
        'density', 'fidelity', 'target', 'fourfold', 'contributions', 'double_share',
        'pair_amplitude', 'success_probability', 'counts', 'shots', 'seed'])):
    """Outcome of a simulated run.

    ``density`` is the exact post-selected output state, ``fourfold`` the
    probability of a fourfold event per emission event (ideal:
    ``success_probability / 144``) and ``counts`` the sampled tomography
    data.
    """
    __slots__ = ()

    def to_dict(self):
        return {
            'fidelity': self.fidelity,
            'fourfold': self.fourfold,
            'contributions': dict(self.contributions),
            'double_share': self.double_share,
            'pair_amplitude': self.pair_amplitude,
            'success_probability': self.success_probability,
            'shots': self.shots,
            'seed': self.seed,
        }


def emit_pairs(register, pairs, truncation=fock.DEFAULT_TRUNCATION):
    """Normalized state of the given pairs, one down-conversion pass each.

    :param pairs: ``(emission, component, tag)`` triples; ``component`` names
        the backward pair's Bell quality and is ``None`` for forward pairs.
        Repeated triples in a row are emitted as one second-order pass.
    """
    state = FockState.vacuum(register, truncation)
    k = 0
    while k < len(pairs):
        emission, component, tag = pairs[k]
        order = 2 if k + 1 < len(pairs) and pairs[k + 1] == pairs[k] else 1
        amplitudes = _BELL[component] if component else None
        state = fock.spdc_source(register, 1.0, emission, SOURCE_MODES[emission], order=order,
                                 tag=tag, amplitudes=amplitudes, state=state, exact=True)
        k += order
    return state


def _state_preparation(mode, psi):
    # unitary with first column psi, so H -> psi exactly
    psi = as_vector(psi)
    psi = psi / np.linalg.norm(psi)
    u = np.array([[psi[0], -np.conj(psi[1])], [psi[1], np.conj(psi[0])]])
    return fock.jones_sequence(u, mode)


def preparation_elements(control, target):
    """Wave plates turning the H,H pair into ``control`` (in c) and ``target`` (in t)."""
    return _state_preparation('c', control) + _state_preparation('t', target)


def heralded_cnot_elements():
    """CNOT from c to t consuming the ``|Phi+>`` pair in a1, a2.

    Heralded by a click in the V port of a1 behind a half-wave plate at
    22.5 degrees (the ``|->`` projection) and in the V port of a2.
    """
    return [
        fock.pbs('c', 'a1', 'HV'),
        fock.half_wave_plate('t', DIAGONAL),
        fock.half_wave_plate('a2', DIAGONAL),
        fock.pbs('t', 'a2', 'HV'),
        fock.half_wave_plate('t', DIAGONAL),
        fock.half_wave_plate('a2', DIAGONAL),
        fock.half_wave_plate('a1', DIAGONAL),
    ]


def destructive_cnot_elements():
    """CNOT from c to t, successful when c and t each carry one photon."""
    return [
        fock.half_wave_plate('t', DIAGONAL),
        fock.pdbs('c', 't', 1.0, 1 / 3),
        fock.pdbs('c', 'lc', 1 / 3, 1.0),
        fock.pdbs('t', 'lt', 1 / 3, 1.0),
        fock.half_wave_plate('t', DIAGONAL),
    ]


def _bell_weights(visibility):
    weights = [('phi+', visibility), ('hh', (1 - visibility) / 2), ('vv', (1 - visibility) / 2)]
    return [(k, w) for k, w in weights if w > 0]


def _tag_weights(visibility):
    # same tag for every pair, or one tag per pair
    weights = [(True, visibility), (False, 1 - visibility)]
    return [(shared, w) for shared, w in weights if w > 0]


def _run_trajectory(state, elements, modes, detection):
    state = fock.apply_elements(state, elements)
    return fock.logical_density(state, modes, detection)


def _qubit(psi):
    psi = as_vector(psi)
    if psi.shape != (2,) or np.linalg.norm(psi) == 0:
        raise ValueError("Expected a nonzero single qubit state, got %r" % (psi,))
    return psi / np.linalg.norm(psi)


def heralded_cnot(control_in, target_in, noise=None):
    """Four-photon heralded CNOT on polarization qubits.

    :returns: :class:`GateResult` with the normalized two-qubit output and
        the herald probability (1/16 ideally, for every input)
    """
    noise = NoiseParams.ideal() if noise is None else noise
    control_in, target_in = _qubit(control_in), _qubit(target_in)
    register = ModeRegister(('c', 't', 'a1', 'a2'), tags=2)
    elements = preparation_elements(control_in, target_in) + heralded_cnot_elements()
    rho = np.zeros((4, 4), dtype=complex)
    for shared, w_tag in _tag_weights(noise.interference_visibility):
        for component, w_bell in _bell_weights(noise.bell_visibility):
            pairs = [('forward', None, 0), ('backward', component, 0 if shared else 1)]
            rho += w_tag * w_bell * _run_trajectory(
                emit_pairs(register, pairs, noise.truncation), elements, ('c', 't'), Detection(HERALD))
    prob = float(np.real(np.trace(rho)))
    if prob < 1e-14:
        raise HeraldError("Herald probability vanished for inputs %s, %s" % (control_in, target_in))
    return GateResult(rho / prob, prob)


def destructive_cnot(control_in, target_in, noise=None):
    """Two-photon CNOT post-selected on one photon in each of c and t.

    :returns: :class:`GateResult`; the coincidence probability is 1/9
        ideally, for every input
    """
    noise = NoiseParams.ideal() if noise is None else noise
    control_in, target_in = _qubit(control_in), _qubit(target_in)
    register = ModeRegister(('c', 't', 'lc', 'lt'), tags=2)
    elements = preparation_elements(control_in, target_in) + destructive_cnot_elements()
    rho = np.zeros((4, 4), dtype=complex)
    for shared, w_tag in _tag_weights(noise.interference_visibility):
        pair = fock.CreationOperator.single(register.index('c', H, 0)) * \
            fock.CreationOperator.single(register.index('t', H, 0 if shared else 1))
        state = fock.apply_creation(pair, FockState.vacuum(register, noise.truncation))
        rho += w_tag * _run_trajectory(state.normalized(), elements, ('c', 't'), None)
    prob = float(np.real(np.trace(rho)))
    if prob < 1e-14:
        raise InvariantError("Coincidence probability vanished for a passive network.")
    return GateResult(rho / prob, prob)


def _experiment_elements(psi, r, theta1, theta2):
    a = (theta1 - theta2) / 2
    b = (theta1 + theta2) / 2
    return (
        preparation_elements(psi, [0, 1])
        + heralded_cnot_elements()
        + fock.jones_sequence(ry(a), 't')
        + destructive_cnot_elements()
        + fock.jones_sequence(ry(b), 't')
        + fock.jones_sequence(dagger(r), 'c')
    )


#: Fourfold event: herald clicks, ancilla photon in V, exactly one state photon.
FOURFOLD = Detection(HERALD + (('t', V),), {'c': 1})


def _process_pairs(process, shared, bell):
    second = 0 if shared else 1
    if process == 'signal':
        return [('forward', None, 0), ('backward', bell[0], second)]
    if process == 'double_forward':
        return [('forward', None, 0), ('forward', None, second)]
    return [('backward', bell[0], 0), ('backward', bell[1], second)]


def _bell_combinations(process, visibility):
    if process == 'double_forward':
        return [((), 1.0)]
    single = _bell_weights(visibility)
    if process == 'signal':
        return [((k,), w) for k, w in single]
    return [((k1, k2), w1 * w2) for k1, w1 in single for k2, w2 in single]


def emission_contributions(inst, cfg, noise):
    """Unnormalized output density matrix of every emission process.

    Each process starts from its normalized four-photon state and is mixed
    over Bell-pair quality and photon distinguishability; the double
    emission processes are not yet weighted by ``eps**2``.

    :returns: ``{process: 2x2 matrix}``; the trace is the fourfold probability
    """
    if inst.dimension != 2 or cfg.m != 1:
        raise UnsupportedInstanceError("The photonic experiment realizes 2x2 systems with m = 1.")
    theta1, theta2 = (rotation_angle(float(lam), cfg.c) for lam in inst.eigenvalues)
    psi = cfg.r @ inst.b
    register = ModeRegister(EXPERIMENT_MODES, tags=2)
    elements = _experiment_elements(psi, cfg.r, theta1, theta2)
    ans = OrderedDict()
    for process in PROCESSES:
        rho = np.zeros((2, 2), dtype=complex)
        for shared, w_tag in _tag_weights(noise.interference_visibility):
            for bell, w_bell in _bell_combinations(process, noise.bell_visibility):
                state = emit_pairs(register, _process_pairs(process, shared, bell), noise.truncation)
                rho += w_tag * w_bell * _run_trajectory(state, elements, ('c',), FOURFOLD)
        ans[process] = rho
        logger.debug("Fourfold probability of %s events: %g", process, np.real(np.trace(rho)))
    return ans


def calibrate_pair_amplitude(p_signal, p_double, share):
    """``eps`` such that double emissions make up ``share`` of fourfold events."""
    if not 0 <= share < 1:
        raise CalibrationError("Share must lie in [0, 1), got %r" % share)
    if p_signal <= 0:
        raise CalibrationError("Signal events never give a fourfold coincidence.")
    if share == 0:
        return 0.0
    if p_double <= 0:
        logger.warning("Double emissions never give a fourfold coincidence; pair amplitude set to 0")
        return 0.0
    return float(np.sqrt(share * p_signal / ((1 - share) * p_double)))


def double_backward_interference_check(noise, inst=None, cfg=None):
    """Fourfold probability of two ancilla pairs, before ``eps**2`` weighting.

    Vanishes when every photon is indistinguishable and grows as the
    interference visibility drops. Uses the first eigenvalue set with
    ``R = I`` and ``b = |+>`` unless an instance is given.
    """
    if inst is None:
        inst = instance_from_rotations(EIGENVALUE_SETS['L1'], np.eye(2), [1, 1])
        cfg = HHLConfig.for_instance(inst)
    rho = emission_contributions(inst, cfg, noise)['double_backward']
    return float(np.real(np.trace(rho)))


def run_experiment(inst, cfg, noise=None, shots=tomo.DEFAULT_SHOTS, seed=1):
    """Simulates the photonic run and samples tomography counts.

    :rtype: ExperimentRecord
    """
    noise = NoiseParams() if noise is None else noise
    parts = emission_contributions(inst, cfg, noise)
    probs = {k: float(np.real(np.trace(v))) for k, v in parts.items()}
    p_double = probs['double_forward'] + probs['double_backward']
    eps = noise.pair_amplitude
    if eps is None:
        eps = calibrate_pair_amplitude(probs['signal'], p_double, noise.double_emission_share)
        logger.debug("Calibrated pair amplitude %g", eps)
    rho = parts['signal'] + eps ** 2 * (parts['double_forward'] + parts['double_backward'])
    fourfold = float(np.real(np.trace(rho)))
    if fourfold <= 0:
        raise InvariantError("No fourfold events for a valid instance.")
    rho = rho / fourfold
    rho = (rho + dagger(rho)) / 2
    target = classical_solve(inst)
    contributions = OrderedDict([
        ('signal', probs['signal']),
        ('double_forward', eps ** 2 * probs['double_forward']),
        ('double_backward', eps ** 2 * probs['double_backward']),
    ])
    counts = tomo.sample_counts(rho, shots, seed)
    record = ExperimentRecord(
        density=rho,
        fidelity=state_fidelity(rho, target),
        target=target,
        fourfold=fourfold,
        contributions=contributions,
        double_share=eps ** 2 * p_double / fourfold,
        pair_amplitude=eps,
        success_probability=success_probability(inst, cfg.c),
        counts=counts,
        shots=shots,
        seed=seed,
    )
    logger.debug("Photonic fidelity %.4f with double share %.3f", record.fidelity, record.double_share)
    return record
