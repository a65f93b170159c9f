"""
Dense state-vector simulator for few-qubit circuits.

Qubit 0 is the most significant bit of a basis label, so ``|q0 q1 ... >``
reads left to right and the amplitude of ``|10>`` on two qubits sits at
index 2.
"""
import logging
from collections import namedtuple

import numpy as np

from .helpers import matrix_from_json
from .helpers import matrix_to_json
from .qmat import DimensionError
from .qmat import HADAMARD
from .qmat import PAULI_X
from .qmat import PAULI_Z
from .qmat import as_matrix
from .qmat import as_vector
from .qmat import dagger
from .qmat import is_unitary
from .qmat import ry as ry_matrix

__all__ = [
    'StateVector', 'GateOp', 'Circuit', 'CircuitError', 'PostSelectionError',
    'apply_gate', 'run_circuit', 'postselect', 'probability', 'density_matrix',
    'circuit_to_dict', 'circuit_from_dict', 'h', 'x', 'z', 'ry', 'unitary', 'cnot',
    'MAX_QUBITS', 'GATE_KINDS',
]

logger = logging.getLogger(__name__)

MAX_QUBITS = 12

#: Recognised gate kinds; any kind becomes controlled once it has controls.
GATE_KINDS = ('h', 'x', 'z', 'ry', 'u', 'cnot')

#: Outcomes rarer than this are treated as impossible.
IMPOSSIBLE = 1e-14


class CircuitError(ValueError):
    """Malformed gate or circuit."""
    code = 'circuit'


class PostSelectionError(ArithmeticError):
    """Requested measurement outcome has (numerically) zero probability."""
    code = 'postselection'


class StateVector(object):
    """Immutable pure state of ``num_qubits`` qubits."""

    __slots__ = ('_amplitudes', '_num_qubits')

    def __init__(self, amplitudes, check=True):
        amps = as_vector(amplitudes).copy()
        size = amps.shape[0]
        n = size.bit_length() - 1
        if size != 1 << n or n < 1:
            raise DimensionError("State vector length %d is not 2**n with n >= 1" % size)
        if n > MAX_QUBITS:
            raise DimensionError("At most %d qubits are simulated, got %d" % (MAX_QUBITS, n))
        if check and abs(np.linalg.norm(amps) - 1) > 1e-10:
            raise DimensionError("State vector norm %r is not 1" % np.linalg.norm(amps))
        amps.flags.writeable = False
        self._amplitudes = amps
        self._num_qubits = n

    @property
    def amplitudes(self):
        return self._amplitudes

    @property
    def num_qubits(self):
        return self._num_qubits

    def __repr__(self):
        return '<StateVector(num_qubits=%d)>' % self._num_qubits

    def __len__(self):
        return self._amplitudes.shape[0]

    @classmethod
    def from_vector(cls, v):
        """Builds a state from any nonzero vector, normalizing it."""
        v = as_vector(v)
        norm = np.linalg.norm(v)
        if norm == 0:
            raise DimensionError("Cannot build a state from the zero vector.")
        return cls(v / norm)

    @classmethod
    def basis(cls, label, num_qubits=None):
        """Computational basis state from a bit string ``'01'`` or an integer."""
        if isinstance(label, str):
            if not label or set(label) - {'0', '1'}:
                raise DimensionError("Basis label must be a bit string, got %r" % label)
            num_qubits = len(label)
            index = int(label, 2)
        else:
            if num_qubits is None:
                raise DimensionError("num_qubits is needed for integer labels.")
            index = int(label)
            if not 0 <= index < 1 << num_qubits:
                raise DimensionError("Basis index %d out of range" % index)
        amps = np.zeros(1 << num_qubits, dtype=complex)
        amps[index] = 1
        return cls(amps)

    def tensor(self, *others):
        """Kronecker product ``self (x) others...``; self supplies the leading qubits."""
        amps = self._amplitudes
        for other in others:
            amps = np.kron(amps, other.amplitudes)
        return StateVector(amps)

    def probabilities(self):
        return np.abs(self._amplitudes) ** 2

    def as_tensor(self):
        return self._amplitudes.reshape((2,) * self._num_qubits)


class GateOp(namedtuple('GateOp', ['kind', 'targets', 'controls', 'theta', 'matrix'])):
    """One gate of a circuit.

    ``targets`` holds one qubit index, or several for a ``u`` gate whose
    matrix index reads the targets most significant first. Gates fire when
    every qubit in ``controls`` is 1. ``theta`` is used by ``ry`` and ``matrix`` by ``u``.
    """
    __slots__ = ()

    def __new__(cls, kind, targets, controls=(), theta=None, matrix=None):
        kind = str(kind).lower()
        if kind not in GATE_KINDS:
            raise CircuitError("Unknown gate kind %r" % kind)
        targets = tuple(int(t) for t in targets)
        controls = tuple(int(c) for c in controls)
        if not targets or (len(targets) != 1 and kind != 'u'):
            raise CircuitError("Only u gates may act on several targets, got %r" % (targets,))
        if kind == 'cnot' and not controls:
            raise CircuitError("A CNOT needs a control qubit.")
        if len(set(targets + controls)) != len(targets) + len(controls):
            raise CircuitError("Target and control indices must be distinct.")
        if kind == 'ry':
            if theta is None:
                raise CircuitError("An ry gate needs an angle.")
            theta = float(theta)
        else:
            theta = None
        if kind == 'u':
            if matrix is None:
                raise CircuitError("A u gate needs a matrix.")
            matrix = as_matrix(matrix).copy()
            dim = 1 << len(targets)
            if matrix.shape != (dim, dim) or not is_unitary(matrix, 1e-10):
                raise CircuitError("A u gate on %d targets needs a %dx%d unitary matrix."
                                   % (len(targets), dim, dim))
            matrix.flags.writeable = False
        else:
            matrix = None
        return super(GateOp, cls).__new__(cls, kind, targets, controls, theta, matrix)

    @property
    def target(self):
        return self.targets[0]

    def base_matrix(self):
        """The 2x2 matrix applied to the target when all controls are set."""
        if self.kind == 'h':
            return HADAMARD
        if self.kind in ('x', 'cnot'):
            return PAULI_X
        if self.kind == 'z':
            return PAULI_Z
        if self.kind == 'ry':
            return ry_matrix(self.theta)
        return np.asarray(self.matrix)

    def inverse(self):
        if self.kind == 'ry':
            return GateOp('ry', self.targets, self.controls, theta=-self.theta)
        if self.kind == 'u':
            return GateOp('u', self.targets, self.controls, matrix=dagger(self.matrix))
        return self

    def validate(self, num_qubits):
        for q in self.targets + self.controls:
            if not 0 <= q < num_qubits:
                raise DimensionError(
                    "Qubit index %d out of range for %d qubits" % (q, num_qubits))

    def __eq__(self, other):
        if not isinstance(other, GateOp):
            return NotImplemented
        return (self.kind, self.targets, self.controls, self.theta) == \
            (other.kind, other.targets, other.controls, other.theta) and \
            np.array_equal(self.base_matrix(), other.base_matrix())

    def __ne__(self, other):
        eq = self.__eq__(other)
        return eq if eq is NotImplemented else not eq

    __hash__ = None


def h(q, controls=()):
    return GateOp('h', (q,), controls)


def x(q, controls=()):
    return GateOp('x', (q,), controls)


def z(q, controls=()):
    return GateOp('z', (q,), controls)


def ry(theta, q, controls=()):
    return GateOp('ry', (q,), controls, theta=theta)


def unitary(m, q, controls=()):
    targets = tuple(q) if isinstance(q, (tuple, list)) else (q,)
    return GateOp('u', targets, controls, matrix=m)


def cnot(control, target):
    return GateOp('cnot', (target,), (control,))


class Circuit(object):
    """Ordered gate list over ``num_qubits`` qubits plus free-form metadata."""

    def __init__(self, num_qubits, ops=(), metadata=None):
        if not isinstance(num_qubits, (int, np.integer)) or not 1 <= num_qubits <= MAX_QUBITS:
            raise CircuitError("Circuits have 1 to %d qubits, got %r" % (MAX_QUBITS, num_qubits))
        self.num_qubits = int(num_qubits)
        self.ops = []
        self.metadata = dict(metadata or {})
        self.extend(ops)

    def __repr__(self):
        return '<Circuit(num_qubits=%d, ops=%d, label=%r)>' % (
            self.num_qubits, len(self.ops), self.metadata.get('label'))

    def __len__(self):
        return len(self.ops)

    def __iter__(self):
        return iter(self.ops)

    def append(self, op):
        if not isinstance(op, GateOp):
            raise CircuitError("Expected a GateOp, got %r" % (op,))
        op.validate(self.num_qubits)
        self.ops.append(op)
        return self

    def extend(self, ops):
        for op in ops:
            self.append(op)
        return self

    def inverse(self):
        """Gates reversed and inverted; metadata is copied."""
        return Circuit(self.num_qubits, [op.inverse() for op in reversed(self.ops)], self.metadata)

    def unitary(self):
        """Full ``2**n x 2**n`` matrix of the circuit."""
        dim = 1 << self.num_qubits
        cols = []
        for k in range(dim):
            basis = np.zeros(dim, dtype=complex)
            basis[k] = 1
            cols.append(_run_raw(self, basis))
        return np.column_stack(cols)


def _apply_raw(amps, num_qubits, op):
    psi = amps.reshape((2,) * num_qubits).copy()
    index = [slice(None)] * num_qubits
    for c in op.controls:
        index[c] = 1
    index = tuple(index)
    sub = psi[index]
    # target axes inside the control-fixed slice
    axes = [t - sum(1 for c in op.controls if c < t) for t in op.targets]
    k = len(axes)
    mat = op.base_matrix().reshape((2,) * (2 * k))
    moved = np.tensordot(mat, sub, axes=(list(range(k, 2 * k)), axes))
    psi[index] = np.moveaxis(moved, list(range(k)), axes)
    return psi.reshape(-1)


def _run_raw(circuit, amps):
    for op in circuit.ops:
        amps = _apply_raw(amps, circuit.num_qubits, op)
    return amps


def apply_gate(state, op):
    """Applies ``op`` to ``state`` and returns a new state."""
    op.validate(state.num_qubits)
    return StateVector(_apply_raw(state.amplitudes, state.num_qubits, op))


def run_circuit(circuit, state):
    """Applies the circuit's gates left to right."""
    if state.num_qubits != circuit.num_qubits:
        raise DimensionError(
            "Circuit on %d qubits cannot run on a %d qubit state"
            % (circuit.num_qubits, state.num_qubits))
    amps = _run_raw(circuit, np.array(state.amplitudes))
    logger.debug("Ran %r", circuit)
    return StateVector(amps)


def _check_qubit(state, qubit):
    if not isinstance(qubit, (int, np.integer)) or not 0 <= qubit < state.num_qubits:
        raise DimensionError("Qubit %r out of range for %d qubits" % (qubit, state.num_qubits))


def probability(state, qubit, outcome):
    """Probability of measuring ``qubit`` as ``outcome``."""
    _check_qubit(state, qubit)
    if outcome not in (0, 1):
        raise DimensionError("Outcome must be 0 or 1, got %r" % (outcome,))
    branch = np.take(state.as_tensor(), outcome, axis=qubit)
    return float(np.sum(np.abs(branch) ** 2))


def postselect(state, qubit, outcome):
    """Measures ``qubit``, keeps the ``outcome`` branch and removes the qubit.

    :returns: ``(remaining_state, probability)``
    :raises PostSelectionError: if the outcome is impossible
    """
    _check_qubit(state, qubit)
    if outcome not in (0, 1):
        raise DimensionError("Outcome must be 0 or 1, got %r" % (outcome,))
    if state.num_qubits == 1:
        raise DimensionError("Cannot remove the only qubit of a state.")
    branch = np.take(state.as_tensor(), outcome, axis=qubit).reshape(-1)
    prob = float(np.sum(np.abs(branch) ** 2))
    if prob < IMPOSSIBLE:
        raise PostSelectionError(
            "Outcome %d on qubit %d has probability %g" % (outcome, qubit, prob))
    return StateVector(branch / np.sqrt(prob)), prob


def density_matrix(state, keep):
    """Reduced density matrix of the qubits in ``keep``, in that order."""
    keep = list(keep)
    if not keep:
        raise DimensionError("Keep at least one qubit.")
    for q in keep:
        _check_qubit(state, q)
    if len(set(keep)) != len(keep):
        raise DimensionError("Kept qubits must be distinct, got %r" % (keep,))
    psi = np.moveaxis(state.as_tensor(), keep, list(range(len(keep))))
    psi = psi.reshape(1 << len(keep), -1)
    return psi @ dagger(psi)


def _op_to_dict(op):
    ans = {'kind': op.kind, 'targets': list(op.targets), 'controls': list(op.controls)}
    if op.kind == 'ry':
        ans['theta'] = op.theta
    if op.kind == 'u':
        ans['matrix'] = matrix_to_json(op.matrix)
    return ans


def circuit_to_dict(circuit):
    """``{"num_qubits": n, "ops": [...]}`` plus ``"metadata"`` when present."""
    ans = {'num_qubits': circuit.num_qubits, 'ops': [_op_to_dict(op) for op in circuit.ops]}
    if circuit.metadata:
        ans['metadata'] = dict(circuit.metadata)
    return ans


def circuit_from_dict(data):
    try:
        ops = []
        for item in data['ops']:
            matrix = item.get('matrix')
            ops.append(GateOp(
                item['kind'],
                item['targets'],
                item.get('controls', ()),
                theta=item.get('theta'),
                matrix=None if matrix is None else matrix_from_json(matrix),
            ))
        return Circuit(data['num_qubits'], ops, data.get('metadata'))
    except (KeyError, TypeError, AttributeError) as e:
        raise CircuitError("Malformed circuit document: %r" % e)
