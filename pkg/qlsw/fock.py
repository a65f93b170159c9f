"""
Photon-number (Fock) states over polarization resolved optical modes.

A register lists spatial modes; every spatial mode carries an H and a V
polarization and ``tags`` copies of both. Tags label mutually
distinguishable time bins: photons with different tags never interfere,
and detectors do not resolve them.

Optical elements are passive and act on creation operators as
``a_j^dagger -> sum_i M[i, j] a_i^dagger`` with ``M`` a local unitary over
the element's ``(spatial, polarization)`` pairs, applied identically to
every tag. Local basis order is ``(first, H), (first, V), (second, H),
(second, V)``.

Beam splitters use the symmetric convention: transmission keeps the
spatial label with real amplitude ``t``, reflection swaps it with
amplitude ``i r``.
"""
import logging
import math
from collections import defaultdict
from collections import namedtuple
from functools import lru_cache

import numpy as np

from .qmat import HADAMARD
from .qmat import is_unitary
from .qmat import zyz_decomposition

__all__ = [
    'H', 'V', 'POLARIZATIONS', 'ModeLabel', 'ModeRegister', 'FockState',
    'CreationOperator', 'OpticalElement', 'Detection', 'RegisterError',
    'SourceConfigError', 'EMISSIONS', 'apply_element', 'apply_elements', 'apply_creation',
    'pair_operator', 'spdc_source', 'beam_splitter', 'pdbs', 'pbs',
    'half_wave_plate', 'quarter_wave_plate', 'phase_shifter', 'polarization_unitary',
    'jones_sequence', 'select', 'detection_probability', 'logical_density',
    'DEFAULT_TRUNCATION',
]

logger = logging.getLogger(__name__)

H = 'H'
V = 'V'
POLARIZATIONS = (H, V)

#: Total photon number kept by default: two pairs.
DEFAULT_TRUNCATION = 4

#: Amplitudes below this are dropped.
ZERO = 1e-14


class RegisterError(ValueError):
    """Mode not present in the register."""
    code = 'register'


class SourceConfigError(ValueError):
    """Source order does not fit the photon-number truncation."""
    code = 'source_config'


class ModeLabel(namedtuple('ModeLabel', ['spatial', 'pol', 'tag'])):
    __slots__ = ()

    def __new__(cls, spatial, pol, tag=0):
        if pol not in POLARIZATIONS:
            raise RegisterError("Polarization must be H or V, got %r" % (pol,))
        return super(ModeLabel, cls).__new__(cls, str(spatial), pol, int(tag))

    def __str__(self):
        return '%s%s%d' % (self.spatial, self.pol, self.tag)


class ModeRegister(object):
    """Ordered set of modes: spatial major, then polarization, then tag."""

    def __init__(self, spatial, tags=1):
        spatial = tuple(str(s) for s in spatial)
        if not spatial:
            raise RegisterError("A register needs at least one spatial mode.")
        if len(set(spatial)) != len(spatial):
            raise RegisterError("Spatial modes must be unique, got %r" % (spatial,))
        if not isinstance(tags, (int, np.integer)) or tags < 1:
            raise RegisterError("A register needs at least one tag, got %r" % (tags,))
        self.spatial = spatial
        self.tags = int(tags)
        self.modes = tuple(
            ModeLabel(s, p, t) for s in spatial for p in POLARIZATIONS for t in range(self.tags))
        self._index = {m: i for i, m in enumerate(self.modes)}

    def __repr__(self):
        return '<ModeRegister(%s, tags=%d)>' % (','.join(self.spatial), self.tags)

    def __len__(self):
        return len(self.modes)

    def __iter__(self):
        return iter(self.modes)

    def __contains__(self, spatial):
        return spatial in self.spatial

    def __eq__(self, other):
        if not isinstance(other, ModeRegister):
            return NotImplemented
        return self.spatial == other.spatial and self.tags == other.tags

    def __ne__(self, other):
        eq = self.__eq__(other)
        return eq if eq is NotImplemented else not eq

    def __hash__(self):
        return hash((self.spatial, self.tags))

    def check(self, spatial):
        if spatial not in self.spatial:
            raise RegisterError("Unknown spatial mode %r; register has %s" % (spatial, self.spatial))
        return spatial

    def index(self, spatial, pol, tag=0):
        try:
            return self._index[ModeLabel(spatial, pol, tag)]
        except KeyError:
            raise RegisterError("Mode %s%s%s is not in %r" % (spatial, pol, tag, self))

    def block(self, spatials, tag):
        """Indices of the local basis of an element on ``spatials`` for one tag."""
        return tuple(self.index(s, p, tag) for s in spatials for p in POLARIZATIONS)

    def indices(self, spatial, pol=None):
        """Every index of a spatial mode (optionally one polarization) over all tags."""
        self.check(spatial)
        pols = POLARIZATIONS if pol is None else (pol,)
        return tuple(self.index(spatial, p, t) for p in pols for t in range(self.tags))


class FockState(object):
    """Superposition of occupation vectors over a :class:`ModeRegister`.

    ``leakage`` is the probability weight removed by the photon-number
    truncation; ``norm()**2 + leakage`` stays 1 for normalized states.
    """

    def __init__(self, register, terms=None, truncation=DEFAULT_TRUNCATION, leakage=0.0):
        self.register = register
        self.truncation = int(truncation)
        self.leakage = float(leakage)
        self.terms = {}
        for occ, amp in (terms or {}).items():
            occ = tuple(int(n) for n in occ)
            if len(occ) != len(register):
                raise RegisterError(
                    "Occupation of length %d on a register of %d modes" % (len(occ), len(register)))
            if abs(amp) > ZERO:
                self.terms[occ] = complex(amp)

    def __repr__(self):
        return '<FockState(terms=%d, norm=%.6g, leakage=%.3g)>' % (
            len(self.terms), self.norm(), self.leakage)

    def __len__(self):
        return len(self.terms)

    @classmethod
    def vacuum(cls, register, truncation=DEFAULT_TRUNCATION):
        return cls(register, {(0,) * len(register): 1.0}, truncation)

    @classmethod
    def from_occupations(cls, register, amplitudes, truncation=DEFAULT_TRUNCATION):
        """Builds a state from ``{((spatial, pol, tag), n), ...}: amplitude`` maps."""
        terms = {}
        for modes, amp in amplitudes.items():
            occ = [0] * len(register)
            for (spatial, pol, tag), n in modes:
                occ[register.index(spatial, pol, tag)] += n
            terms[tuple(occ)] = terms.get(tuple(occ), 0) + amp
        return cls(register, terms, truncation)

    def copy_with(self, terms, leakage=None):
        return FockState(self.register, terms, self.truncation,
                         self.leakage if leakage is None else leakage)

    def probability(self):
        return float(sum(abs(a) ** 2 for a in self.terms.values()))

    def norm(self):
        return math.sqrt(self.probability())

    def normalized(self):
        """Rescales amplitudes and leakage so that their weights sum to one."""
        total = self.probability() + self.leakage
        if total <= 0:
            raise ValueError("Cannot normalize an empty Fock state.")
        scale = 1 / math.sqrt(total)
        return FockState(self.register, {k: a * scale for k, a in self.terms.items()},
                         self.truncation, self.leakage / total)

    def amplitude(self, occ):
        return self.terms.get(tuple(occ), 0j)

    def photon_numbers(self):
        return sorted(set(sum(occ) for occ in self.terms))

    def overlap(self, other):
        """<self|other>."""
        return sum(np.conj(a) * other.terms.get(k, 0) for k, a in self.terms.items())


class CreationOperator(object):
    """Polynomial in creation operators.

    Keys are sorted tuples of mode indices (a multiset of creation
    operators), values the coefficients.
    """

    def __init__(self, terms=None):
        self.terms = {}
        for mono, c in (terms or {}).items():
            mono = tuple(sorted(mono))
            self.terms[mono] = self.terms.get(mono, 0) + complex(c)

    def __repr__(self):
        return '<CreationOperator(%d terms)>' % len(self.terms)

    @classmethod
    def single(cls, index, coeff=1.0):
        return cls({(index,): coeff})

    @classmethod
    def identity(cls):
        return cls({(): 1.0})

    def __add__(self, other):
        terms = dict(self.terms)
        for mono, c in other.terms.items():
            terms[mono] = terms.get(mono, 0) + c
        return CreationOperator(terms)

    def __mul__(self, other):
        if isinstance(other, CreationOperator):
            terms = defaultdict(complex)
            for m1, c1 in self.terms.items():
                for m2, c2 in other.terms.items():
                    terms[tuple(sorted(m1 + m2))] += c1 * c2
            return CreationOperator(terms)
        return CreationOperator({m: c * other for m, c in self.terms.items()})

    __rmul__ = __mul__

    def __pow__(self, k):
        out = CreationOperator.identity()
        for _ in range(k):
            out = out * self
        return out

    def degree(self):
        return max((len(m) for m in self.terms), default=0)


def apply_creation(op, state):
    """Applies a creation-operator polynomial; terms above the truncation leak.

    The result is not normalized.
    """
    out = defaultdict(complex)
    leaked = 0.0
    for occ, amp in state.terms.items():
        for mono, c in op.terms.items():
            new = list(occ)
            factor = c * amp
            for i in mono:
                new[i] += 1
                factor *= math.sqrt(new[i])
            out[tuple(new)] += factor
    kept = {}
    for occ, amp in out.items():
        if sum(occ) > state.truncation:
            leaked += abs(amp) ** 2
        elif abs(amp) > ZERO:
            kept[occ] = amp
    if leaked:
        logger.debug("Truncation at %d photons dropped weight %g", state.truncation, leaked)
    return state.copy_with(kept, state.leakage + leaked)


def pair_operator(register, first, second, amplitudes, tag=0):
    """Pair creation ``sum amp * a^dagger(first, p1) a^dagger(second, p2)``.

    :param amplitudes: ``{(p1, p2): amplitude}``
    """
    register.check(first)
    register.check(second)
    terms = {}
    for (p1, p2), amp in amplitudes.items():
        mono = (register.index(first, p1, tag), register.index(second, p2, tag))
        terms[mono] = amp
    return CreationOperator(terms)


#: Polarization amplitudes of one pair for each emission direction.
EMISSIONS = {
    'forward': {(H, H): 1.0},
    'backward': {(H, H): 1 / math.sqrt(2), (V, V): 1 / math.sqrt(2)},
}


def spdc_source(register, epsilon, emission, modes, truncation=DEFAULT_TRUNCATION, order=2,
                tag=0, amplitudes=None, state=None, exact=False):
    """Down-conversion pass ``(1 + eps K + eps**2 K**2 / 2 + ...)`` normalized.

    ``K`` emits one pair into the two spatial ``modes``: an H,H pair for a
    ``'forward'`` emission, ``|Phi+>`` for a ``'backward'`` one, unless
    polarization ``amplitudes`` are given. The pass acts on ``state``
    (the vacuum by default, whose truncation then applies).

    :param order: highest number of pairs kept
    :param exact: keep only the ``order``-pair term
    :raises SourceConfigError: on an unknown emission, a negative amplitude
        or more photons than the truncation holds
    """
    if emission not in EMISSIONS:
        raise SourceConfigError("Unknown emission %r, expected one of %s" % (emission, sorted(EMISSIONS)))
    if epsilon < 0:
        raise SourceConfigError("Pair amplitude must be non-negative, got %r" % epsilon)
    if state is None:
        state = FockState.vacuum(register, truncation)
    if epsilon == 0:
        if exact and order > 0:
            raise SourceConfigError("A pass at zero pair amplitude emits no pairs.")
        return state
    first, second = modes
    pair = pair_operator(register, first, second,
                         EMISSIONS[emission] if amplitudes is None else amplitudes, tag)
    photons = max(state.photon_numbers(), default=0) + order * pair.degree()
    if photons > state.truncation:
        raise SourceConfigError(
            "%d pair(s) need %d photons but the truncation is %d" % (order, photons, state.truncation))
    total = {} if exact and order > 0 else dict(state.terms)
    term = state
    for k in range(1, order + 1):
        term = apply_creation(pair * (epsilon / k), term)
        if exact and k < order:
            continue
        for occ, amp in term.terms.items():
            total[occ] = total.get(occ, 0) + amp
    return state.copy_with(total).normalized()


class OpticalElement(namedtuple('OpticalElement', ['kind', 'modes', 'matrix', 'params'])):
    """Passive element: local unitary ``matrix`` on the polarizations of ``modes``."""
    __slots__ = ()

    def __new__(cls, kind, modes, matrix, params=None):
        modes = tuple(str(m) for m in modes)
        matrix = np.array(matrix, dtype=complex)
        if len(set(modes)) != len(modes) or not 1 <= len(modes) <= 2:
            raise RegisterError("Elements act on one or two distinct spatial modes, got %r" % (modes,))
        if matrix.shape != (2 * len(modes), 2 * len(modes)) or not is_unitary(matrix, 1e-10):
            raise ValueError("Element %s needs a %dx%d unitary" % (kind, 2 * len(modes), 2 * len(modes)))
        matrix.flags.writeable = False
        return super(OpticalElement, cls).__new__(cls, kind, modes, matrix, dict(params or {}))

    def __repr__(self):
        return '<OpticalElement(%s on %s %s)>' % (self.kind, ','.join(self.modes), self.params)


def _bs_matrix(t_h, t_v):
    m = np.zeros((4, 4), dtype=complex)
    for p, trans in enumerate((t_h, t_v)):
        if not 0 <= trans <= 1:
            raise ValueError("Transmission must lie in [0, 1], got %r" % trans)
        t, r = math.sqrt(trans), math.sqrt(1 - trans)
        m[p, p] = m[2 + p, 2 + p] = t
        m[2 + p, p] = m[p, 2 + p] = 1j * r
    return m


def beam_splitter(first, second, transmission_h=0.5, transmission_v=0.5):
    """Beam splitter with intensity transmissions per polarization."""
    return OpticalElement('bs', (first, second), _bs_matrix(transmission_h, transmission_v),
                          {'T_H': transmission_h, 'T_V': transmission_v})


def pdbs(first, second, transmission_h, transmission_v):
    """Partially polarizing beam splitter."""
    return OpticalElement('pdbs', (first, second), _bs_matrix(transmission_h, transmission_v),
                          {'T_H': transmission_h, 'T_V': transmission_v})


def pbs(first, second, basis='HV'):
    """Polarizing beam splitter transmitting H (``'HV'``) or ``|+>`` (``'PM'``)."""
    m = _bs_matrix(1.0, 0.0)
    if basis == 'PM':
        had = np.kron(np.eye(2), HADAMARD)
        m = had @ m @ had
    elif basis != 'HV':
        raise ValueError("PBS basis must be 'HV' or 'PM', got %r" % (basis,))
    return OpticalElement('pbs', (first, second), m, {'basis': basis})


def _plate(angle, retardance):
    c, s = math.cos(angle), math.sin(angle)
    rot = np.array([[c, -s], [s, c]])
    return rot @ np.diag([1, retardance]) @ rot.T


def half_wave_plate(mode, angle):
    """HWP with its axis at ``angle`` radians: [[cos 2a, sin 2a], [sin 2a, -cos 2a]]."""
    return OpticalElement('hwp', (mode,), _plate(angle, -1), {'angle': angle})


def quarter_wave_plate(mode, angle):
    return OpticalElement('qwp', (mode,), _plate(angle, 1j), {'angle': angle})


def phase_shifter(mode, phase_h=0.0, phase_v=0.0):
    return OpticalElement('phase', (mode,), np.diag([np.exp(1j * phase_h), np.exp(1j * phase_v)]),
                          {'phase_h': phase_h, 'phase_v': phase_v})


def polarization_unitary(mode, u):
    return OpticalElement('jones', (mode,), u)


def jones_sequence(u, mode):
    """Phase shifters and a half-wave-plate pair realising ``u`` exactly.

    Uses ``u = e^{i g} R_z(phi) R_y(theta) R_z(lam)`` with
    ``R_y(theta) = HWP(theta/4) . HWP(0)``; the global phase is kept since
    states with different photon numbers share the same plates.
    """
    gamma, phi, theta, lam = zyz_decomposition(u)
    return [
        phase_shifter(mode, -lam / 2, lam / 2),
        half_wave_plate(mode, 0.0),
        half_wave_plate(mode, theta / 4),
        phase_shifter(mode, gamma - phi / 2, gamma + phi / 2),
    ]


@lru_cache(maxsize=4096)
def _transform(matrix_bytes, dim, occ):
    # output occupations of a local block for one input occupation
    m = np.frombuffer(matrix_bytes, dtype=complex).reshape(dim, dim)
    poly = {(): 1.0 + 0j}
    for j, n in enumerate(occ):
        column = [(i, m[i, j]) for i in range(dim) if abs(m[i, j]) > ZERO]
        for _ in range(n):
            grown = defaultdict(complex)
            for mono, c in poly.items():
                for i, mij in column:
                    grown[tuple(sorted(mono + (i,)))] += c * mij
            poly = grown
    norm_in = math.prod(math.factorial(n) for n in occ)
    out = []
    for mono, c in poly.items():
        counts = [0] * dim
        for i in mono:
            counts[i] += 1
        amp = c * math.sqrt(math.prod(math.factorial(k) for k in counts) / norm_in)
        if abs(amp) > ZERO:
            out.append((tuple(counts), amp))
    return tuple(out)


def _apply_block(terms, block, matrix_bytes, dim):
    out = defaultdict(complex)
    for occ, amp in terms.items():
        local = tuple(occ[i] for i in block)
        if not any(local):
            out[occ] += amp
            continue
        base = list(occ)
        for local_out, c in _transform(matrix_bytes, dim, local):
            for i, n in zip(block, local_out):
                base[i] = n
            out[tuple(base)] += amp * c
    return {k: a for k, a in out.items() if abs(a) > ZERO}


def apply_element(state, elem):
    """Applies ``elem`` to every tag of ``state``; returns a new state."""
    for mode in elem.modes:
        state.register.check(mode)
    matrix_bytes = np.ascontiguousarray(elem.matrix).tobytes()
    dim = elem.matrix.shape[0]
    terms = state.terms
    for tag in range(state.register.tags):
        terms = _apply_block(terms, state.register.block(elem.modes, tag), matrix_bytes, dim)
    return state.copy_with(terms)


def apply_elements(state, elements):
    for elem in elements:
        state = apply_element(state, elem)
    return state


class Detection(namedtuple('Detection', ['clicks', 'exactly'])):
    """Post-selection pattern.

    ``clicks`` lists ``(spatial, pol)`` ports that must register at least
    one photon; ``exactly`` maps spatial modes to their required total
    photon number. Tags are summed over.
    """
    __slots__ = ()

    def __new__(cls, clicks=(), exactly=None):
        exactly = tuple(sorted(dict(exactly or {}).items()))
        return super(Detection, cls).__new__(cls, tuple(tuple(c) for c in clicks), exactly)

    def compile(self, register):
        click_sets = [register.indices(s, p) for s, p in self.clicks]
        exact_sets = [(register.indices(s), n) for s, n in self.exactly]

        def accept(occ):
            for idx in click_sets:
                if not any(occ[i] for i in idx):
                    return False
            for idx, n in exact_sets:
                if sum(occ[i] for i in idx) != n:
                    return False
            return True
        return accept


def select(state, detection):
    """Terms compatible with ``detection``; not renormalized."""
    accept = detection.compile(state.register)
    return state.copy_with({k: a for k, a in state.terms.items() if accept(k)})


def detection_probability(state, detection):
    return select(state, detection).probability()


def logical_density(state, modes, detection=None):
    """Polarization density matrix of single photons in ``modes``.

    Only terms with exactly one photon in each listed spatial mode (and
    matching ``detection``) contribute. H is logical 0, V logical 1 and
    the first listed mode is the most significant qubit. Everything else,
    including the photons' tags, is traced out. The trace of the result is
    the probability of the post-selected event.
    """
    register = state.register
    accept = detection.compile(register) if detection is not None else None
    mode_indices = [register.indices(s) for s in modes]
    k = len(modes)
    groups = defaultdict(lambda: np.zeros(1 << k, dtype=complex))
    for occ, amp in state.terms.items():
        if accept is not None and not accept(occ):
            continue
        env = list(occ)
        tags = []
        logical = 0
        for idx in mode_indices:
            occupied = [i for i in idx if occ[i]]
            if len(occupied) != 1 or occ[occupied[0]] != 1:
                break
            label = register.modes[occupied[0]]
            logical = (logical << 1) | (0 if label.pol == H else 1)
            tags.append(label.tag)
            env[occupied[0]] = 0
        else:
            groups[(tuple(env), tuple(tags))][logical] += amp
    rho = np.zeros((1 << k, 1 << k), dtype=complex)
    for vec in groups.values():
        rho += np.outer(vec, vec.conj())
    return rho
