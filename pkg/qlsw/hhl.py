"""
Linear-system solver circuits.

Builds the phase-estimation circuit that writes eigenvalue digits into a
register, the eigenvalue-inversion rotation on an ancilla and the
uncomputation, plus the two-qubit circuit that drops the register by
controlling the rotation from the diagonalized state qubit directly.

Qubit layout of the general circuit: the state register first
(``log2 N`` qubits), then the ``m`` eigenvalue qubits (most significant
digit first), then the ancilla. The optimized circuit has the state
qubit at index 0 and the ancilla at index 1. The ancilla enters in
``|1>``; measuring it as 1 again marks success.
"""
import logging
from collections import OrderedDict
from collections import namedtuple

import numpy as np

from . import statevec
from .helpers import matrix_from_json
from .helpers import matrix_to_json
from .helpers import parse_angle
from .helpers import vector_from_json
from .helpers import vector_to_json
from .qmat import DimensionError
from .qmat import InvariantError
from .qmat import as_matrix
from .qmat import as_vector
from .qmat import dagger
from .qmat import eig_hermitian
from .qmat import is_hermitian
from .qmat import is_unitary
from .qmat import named_state
from .qmat import rx
from .qmat import ry
from .qmat import rz
from .qmat import unitary_exp
from .statevec import Circuit
from .statevec import StateVector

__all__ = [
    'LinearSystemInstance', 'HHLConfig', 'SolutionRecord', 'validate_instance',
    'representable_digits', 'register_encoding', 'theta_for', 'rotation_angle',
    'build_phase_estimation', 'build_general_circuit', 'build_optimized_circuit',
    'classical_solve', 'success_probability', 'expectation_values', 'run_pipeline',
    'prepare_input', 'diagonalizer', 'instance_from_rotations', 'rotation_product',
    'standard_rotation', 'instance_from_dict', 'instance_to_dict', 'EIGENVALUE_SETS',
    'ValidationError', 'InstanceNotHermitian', 'EigenvalueRangeError',
    'DegenerateInputError', 'DegenerateEigenvaluesError', 'OrderingError',
    'UnsupportedInstanceError', 'VARIANTS',
]

logger = logging.getLogger(__name__)

#: The three eigenvalue pairs of the experiment, ``{0.10, 0.11}``,
#: ``{0.100, 0.101}`` and ``{0.110, 0.111}`` in binary.
EIGENVALUE_SETS = OrderedDict([
    ('L1', (0.5, 0.75)),
    ('L2', (0.5, 0.625)),
    ('L3', (0.75, 0.875)),
])

VARIANTS = ('general', 'optimized')

#: Longest binary expansion considered terminating.
MAX_DIGITS = 30

_DYADIC_TOL = 1e-9


class ValidationError(ValueError):
    """Problem instance or configuration is invalid."""
    code = 'validation'


class InstanceNotHermitian(ValidationError):
    """Matrix A is not Hermitian."""
    code = 'not_hermitian'


class EigenvalueRangeError(ValidationError):
    """Eigenvalues of A are not strictly inside (0, 1)."""
    code = 'eigenvalue_range'

    def __init__(self, message, hint=None):
        super(EigenvalueRangeError, self).__init__(message)
        #: divide A by a number larger than this to fix the range, if possible
        self.hint = hint


class DegenerateInputError(ValidationError):
    """Vector b is zero."""
    code = 'degenerate_input'


class DegenerateEigenvaluesError(ValidationError):
    """Eigenvalues cannot be told apart."""
    code = 'degenerate_eigenvalues'


class OrderingError(ValidationError):
    """Eigenvalues given out of ascending order."""
    code = 'ordering'


class UnsupportedInstanceError(ValidationError):
    """Eigenvalues cannot be written exactly into the eigenvalue register."""
    code = 'unsupported_instance'


class LinearSystemInstance(namedtuple(
        'LinearSystemInstance', ['a', 'b', 'eig', 'condition_number', 'b_scale'])):
    """Validated problem ``A|x> = |b>``.

    ``b`` is stored normalized; ``b_scale`` is the norm it was divided by.
    """
    __slots__ = ()

    @property
    def dimension(self):
        return self.a.shape[0]

    @property
    def eigenvalues(self):
        return self.eig.eigenvalues

    def coefficients(self):
        """beta_j of ``b`` in the eigenbasis of ``a``."""
        return self.eig.coefficients(self.b)


class HHLConfig(namedtuple('HHLConfig', ['m', 'n', 'c', 'r'])):
    """Circuit parameters.

    :param m: eigenvalue register size
    :param n: binary digit of the eigenvalues that the register reads
    :param c: rotation constant, ``0 < c <= min(eigenvalues)``
    :param r: unitary with ``r|u_j> = |j>`` used by the optimized circuit
    """
    __slots__ = ()

    @classmethod
    def for_instance(cls, inst, m=1, c=None, r=None):
        """Completes missing fields from the instance and checks them."""
        if not isinstance(m, (int, np.integer)) or m < 1:
            raise ValidationError("The eigenvalue register needs at least one qubit, got %r" % (m,))
        lam_min = float(inst.eigenvalues[0])
        if c is None:
            c = lam_min
        c = float(c)
        if not 0 < c <= lam_min * (1 + 1e-12):
            raise ValidationError(
                "Rotation constant C=%g must lie in (0, %g]" % (c, lam_min))
        if r is None:
            r = diagonalizer(inst.eig)
        else:
            r = _check_diagonalizer(inst, r)
        if m == 1 and inst.dimension == 2:
            n = representable_digits(inst.eig, 1)
            if n is None:
                raise UnsupportedInstanceError(
                    "Eigenvalues %s do not differ in exactly one terminating binary digit"
                    % list(inst.eigenvalues))
        else:
            n, _ = register_encoding(inst.eig, m)
        return cls(int(m), int(n), c, r)


class SolutionRecord(namedtuple(
        'SolutionRecord', ['x', 'success_probability', 'variant', 'circuit', 'metadata'])):
    """Post-selected solution state with its success probability."""
    __slots__ = ()


def validate_instance(a, b, tol=1e-10):
    """Checks and normalizes a problem instance.

    :param a: Hermitian matrix with every eigenvalue in (0, 1)
    :param b: nonzero right hand side; normalized silently
    :rtype: LinearSystemInstance
    """
    a = as_matrix(a)
    if a.shape[0] != a.shape[1]:
        raise DimensionError("A must be square, got shape %r" % (a.shape,))
    b = as_vector(b)
    if b.shape[0] != a.shape[0]:
        raise DimensionError("b has length %d but A is %dx%d" % (b.shape[0], a.shape[0], a.shape[0]))
    if not is_hermitian(a, tol):
        raise InstanceNotHermitian(
            "A is not Hermitian (max asymmetry %g)" % np.max(np.abs(a - dagger(a))))
    norm = float(np.linalg.norm(b))
    if norm == 0.0:
        raise DegenerateInputError("b is the zero vector.")
    eig = eig_hermitian(a, tol)
    lam = eig.eigenvalues
    if lam[0] <= 0:
        raise EigenvalueRangeError(
            "Eigenvalues must be positive, got %s; the matrix cannot be rescaled into (0, 1)"
            % list(lam))
    if lam[-1] >= 1:
        raise EigenvalueRangeError(
            "Eigenvalues must lie in (0, 1), got %s; divide A (and b) by a number larger than %g"
            % (list(lam), lam[-1]), hint=float(lam[-1]))
    if norm != 1.0:
        logger.debug("Normalized b by %g", norm)
    return LinearSystemInstance(a, b / norm, eig, float(lam[-1] / lam[0]), norm)


def _terminating_digits(value):
    # number of binary digits after the point, or None
    for d in range(0, MAX_DIGITS + 1):
        scaled = value * (1 << d)
        if abs(scaled - round(scaled)) <= _DYADIC_TOL:
            return d
    return None


def _values(eig):
    if hasattr(eig, 'eigenvalues'):
        return [float(v) for v in eig.eigenvalues]
    return [float(v) for v in eig]


def representable_digits(eig, m=1):
    """Digit index ``n`` at which a pair of eigenvalues first and only differs.

    Both eigenvalues must terminate within ``n`` binary digits and agree on
    the first ``n - 1`` of them; ``{0.10, 0.11}`` gives 2 and
    ``{0.100, 0.101}`` gives 3. Returns ``None`` when no such ``n`` exists.
    """
    if m != 1:
        raise ValidationError("Digit representation is defined for one eigenvalue qubit.")
    lam = sorted(_values(eig))
    if len(lam) != 2:
        raise UnsupportedInstanceError(
            "A single eigenvalue qubit handles two eigenvalues, got %d" % len(lam))
    if abs(lam[1] - lam[0]) <= 1e-12:
        raise DegenerateEigenvaluesError("Eigenvalues %s are degenerate" % lam)
    digits = [_terminating_digits(v) for v in lam]
    if None in digits:
        return None
    n = max(max(digits), 1)
    k1, k2 = (int(round(v * (1 << n))) for v in lam)
    if k2 == k1 + 1 and k1 % 2 == 0:
        return n
    return None


def register_encoding(eig, m):
    """Register value of each eigenvalue for an ``m`` qubit register.

    Picks the smallest ``n`` with every eigenvalue terminating within ``n``
    binary digits; eigenvalue ``lam`` then lands on
    ``(lam * 2**n) mod 2**m``, which must differ between distinct
    eigenvalues.

    :returns: ``(n, values)`` with ``values[j]`` the register value of
        eigenvalue ``j``
    """
    lam = _values(eig)
    digits = [_terminating_digits(v) for v in lam]
    if None in digits:
        raise UnsupportedInstanceError(
            "Eigenvalues %s do not terminate within %d binary digits" % (lam, MAX_DIGITS))
    n = max(max(digits), 1)
    values = [int(round(v * (1 << n))) % (1 << m) for v in lam]
    seen = {}
    for v, k in zip(lam, values):
        if k in seen and abs(seen[k] - v) > 1e-12:
            raise UnsupportedInstanceError(
                "Eigenvalues %g and %g share register value %d with %d qubits" % (seen[k], v, k, m))
        seen[k] = v
    return n, values


def rotation_angle(lam, c):
    """theta = -2 arccos(c / lam)."""
    ratio = c / lam
    if not 0 < ratio <= 1 + 1e-12:
        raise ValidationError("C/lambda = %g is outside (0, 1]" % ratio)
    return float(-2 * np.arccos(min(1.0, ratio)))


def theta_for(eigenvalues, c=None):
    """Ancilla angle for the larger eigenvalue; ``c`` defaults to the smaller one."""
    lam1, lam2 = (float(v) for v in eigenvalues)
    if not lam1 < lam2:
        raise OrderingError("Expected lambda1 < lambda2, got %g and %g" % (lam1, lam2))
    if lam1 <= 0 or lam2 >= 1:
        raise EigenvalueRangeError("Eigenvalues must lie in (0, 1), got %g and %g" % (lam1, lam2))
    return rotation_angle(lam2, lam1 if c is None else c)


def diagonalizer(eig):
    """Unitary R with ``R|u_j> = |j>``, so ``R A R^dagger`` is diagonal ascending."""
    return dagger(eig.eigenvectors)


def _check_diagonalizer(inst, r):
    r = as_matrix(r)
    if r.shape != inst.a.shape or not is_unitary(r, 1e-8):
        raise ValidationError("R must be a unitary of the same size as A.")
    d = r @ inst.a @ dagger(r)
    if np.max(np.abs(d - np.diag(inst.eigenvalues))) > 1e-8:
        raise ValidationError("R does not diagonalize A into ascending eigenvalue order.")
    return r


def _qubits(dim):
    s = int(dim).bit_length() - 1
    if dim != 1 << s or s < 1:
        raise UnsupportedInstanceError("Matrix dimension %d is not a power of two" % dim)
    return s


def _layout(inst, cfg):
    s = _qubits(inst.dimension)
    if s + cfg.m + 1 > statevec.MAX_QUBITS:
        raise UnsupportedInstanceError(
            "%d state, %d register and 1 ancilla qubits exceed the simulator limit"
            % (s, cfg.m))
    state = list(range(s))
    register = list(range(s, s + cfg.m))
    return state, register, s + cfg.m


def prepare_input(b, register_qubits=0, ancilla=True):
    """``|b> |0...0> |1>``: the input the circuits expect."""
    state = StateVector.from_vector(b)
    parts = []
    if register_qubits:
        parts.append(StateVector.basis('0' * register_qubits))
    if ancilla:
        parts.append(StateVector.basis('1'))
    return state.tensor(*parts) if parts else state


def _inverse_qft(register, num_qubits):
    qft = Circuit(num_qubits)
    m = len(register)
    for j in range(m):
        qft.append(statevec.h(register[j]))
        for l in range(j + 1, m):
            phase = np.exp(2j * np.pi / (1 << (l - j + 1)))
            qft.append(statevec.unitary(np.diag([1, phase]), register[j], (register[l],)))
    for j in range(m // 2):
        a, b = register[j], register[m - 1 - j]
        qft.extend([statevec.cnot(a, b), statevec.cnot(b, a), statevec.cnot(a, b)])
    return qft.inverse()


def build_phase_estimation(inst, cfg):
    """First step: Hadamards, controlled powers of U and the inverse Fourier transform.

    U = exp(2 pi i 2**(n-m) A); register qubit ``k`` (most significant
    first) controls ``U**(2**(m-1-k))``.
    """
    state, register, ancilla = _layout(inst, cfg)
    circuit = Circuit(ancilla + 1, metadata={'label': 'phase_estimation'})
    m = len(register)
    for q in register:
        circuit.append(statevec.h(q))
    for k, q in enumerate(register):
        scale = 2 * np.pi * 2.0 ** (cfg.n - m) * (1 << (m - 1 - k))
        circuit.append(statevec.unitary(unitary_exp(inst.a, scale), state, (q,)))
    circuit.extend(_inverse_qft(register, circuit.num_qubits))
    return circuit


def _rotation_table(inst, cfg):
    if cfg.m == 1 and inst.dimension == 2:
        values = [int(round(v * (1 << cfg.n))) % 2 for v in inst.eigenvalues]
        if values[0] == values[1]:
            raise UnsupportedInstanceError("Eigenvalues share the register digit %d" % cfg.n)
    else:
        _, values = register_encoding(inst.eig, cfg.m)
    table = OrderedDict()
    for lam, k in zip(inst.eigenvalues, values):
        table[k] = rotation_angle(float(lam), cfg.c)
    return table


def build_general_circuit(inst, cfg):
    """Phase estimation, controlled rotation of the ancilla, phase estimation reversed."""
    state, register, ancilla = _layout(inst, cfg)
    pe = build_phase_estimation(inst, cfg)
    table = _rotation_table(inst, cfg)
    circuit = Circuit(pe.num_qubits, pe.ops, metadata={
        'label': 'general', 'm': cfg.m, 'n': cfg.n, 'c': cfg.c,
        'state_qubits': state, 'register_qubits': register, 'ancilla': ancilla,
        'thetas': [table[k] for k in table],
    })
    m = len(register)
    for k, theta in table.items():
        if abs(theta) < 1e-15:
            continue
        zeros = [q for i, q in enumerate(register) if not (k >> (m - 1 - i)) & 1]
        circuit.extend(statevec.x(q) for q in zeros)
        circuit.append(statevec.ry(theta, ancilla, register))
        circuit.extend(statevec.x(q) for q in zeros)
    circuit.extend(pe.inverse().ops)
    logger.debug("Built general circuit with %d gates on %d qubits", len(circuit), circuit.num_qubits)
    return circuit


def build_optimized_circuit(inst, cfg):
    """Two-qubit circuit: R, CNOT, R_y((t1-t2)/2), CNOT, R_y((t1+t2)/2), R^dagger.

    The two CNOTs with the single qubit rotations between them form the
    rotation R_y(t_j) of the ancilla controlled by the state qubit being
    in ``|j>`` after R. Moving the last ancilla rotation ahead of the
    first CNOT instead gives the same gate, since ``X R_y(a) X = R_y(-a)``.
    """
    if inst.dimension != 2 or cfg.m != 1:
        raise UnsupportedInstanceError("The optimized circuit handles 2x2 systems with m = 1.")
    table = _rotation_table(inst, cfg)
    theta1, theta2 = (rotation_angle(float(lam), cfg.c) for lam in inst.eigenvalues)
    return Circuit(2, [
        statevec.unitary(cfg.r, 0),
        statevec.cnot(0, 1),
        statevec.ry((theta1 - theta2) / 2, 1),
        statevec.cnot(0, 1),
        statevec.ry((theta1 + theta2) / 2, 1),
        statevec.unitary(dagger(cfg.r), 0),
    ], metadata={
        'label': 'optimized', 'm': 1, 'n': cfg.n, 'c': cfg.c,
        'state_qubits': [0], 'register_qubits': [], 'ancilla': 1,
        'thetas': list(table.values()),
    })


def classical_solve(inst):
    """A^-1 b normalized, from the eigendecomposition."""
    beta = inst.coefficients()
    x = inst.eig.eigenvectors @ (beta / inst.eigenvalues)
    return x / np.linalg.norm(x)


def success_probability(inst, c=None):
    """Sum of |beta_j|**2 (c / lambda_j)**2; c defaults to the smallest eigenvalue."""
    c = inst.eigenvalues[0] if c is None else c
    beta = inst.coefficients()
    return float(np.sum(np.abs(beta) ** 2 * (c / inst.eigenvalues) ** 2))


def expectation_values(x, operators):
    """<x|M|x> for every Hermitian operator M."""
    x = as_vector(x)
    ans = []
    for op in operators:
        op = as_matrix(op)
        if op.shape != (x.shape[0], x.shape[0]):
            raise DimensionError("Operator of shape %r against a vector of length %d"
                                 % (op.shape, x.shape[0]))
        if not is_hermitian(op, 1e-10):
            raise ValidationError("Observables must be Hermitian.")
        value = np.vdot(x, op @ x)
        if abs(value.imag) > 1e-10:
            raise InvariantError("Expectation value %r is not real" % value)
        ans.append(float(value.real))
    return ans


def run_pipeline(inst, cfg, circuit_variant='optimized'):
    """Builds the circuit, runs it, keeps the ancilla-1 branch and reads |x>.

    :rtype: SolutionRecord
    """
    if circuit_variant == 'general':
        circuit = build_general_circuit(inst, cfg)
    elif circuit_variant == 'optimized':
        circuit = build_optimized_circuit(inst, cfg)
    else:
        raise ValidationError("Unknown circuit variant %r, expected one of %s"
                              % (circuit_variant, VARIANTS))
    meta = circuit.metadata
    register = len(meta['register_qubits'])
    out = statevec.run_circuit(circuit, prepare_input(inst.b, register))
    selected, prob = statevec.postselect(out, meta['ancilla'], 1)
    amps = selected.amplitudes.reshape(inst.dimension, 1 << register)
    # the register must be returned to |0...0>
    leftover = 1 - float(np.sum(np.abs(amps[:, 0]) ** 2))
    if leftover > 1e-8:
        raise InvariantError("Eigenvalue register left %g outside |0>" % leftover)
    x = amps[:, 0] / np.linalg.norm(amps[:, 0])
    metadata = {
        'eigenvalues': [float(v) for v in inst.eigenvalues],
        'n_digit': cfg.n, 'm': cfg.m, 'c': cfg.c, 'thetas': meta['thetas'],
        'condition_number': inst.condition_number,
    }
    logger.debug("%s circuit succeeded with probability %g", circuit_variant, prob)
    return SolutionRecord(x, prob, circuit_variant, circuit, metadata)


def instance_from_rotations(eigenvalues, r, b):
    """Instance with ``A = R^dagger diag(eigenvalues) R``."""
    r = as_matrix(r)
    lam = np.asarray(eigenvalues, dtype=float)
    if r.shape != (lam.shape[0], lam.shape[0]) or not is_unitary(r, 1e-10):
        raise ValidationError("R must be a %dx%d unitary." % (lam.shape[0], lam.shape[0]))
    a = dagger(r) @ np.diag(lam) @ r
    return validate_instance((a + dagger(a)) / 2, b)


_AXES = {'x': rx, 'y': ry, 'z': rz}


def rotation_product(factors):
    """Product of ``{"axis": "x", "angle": "11pi/15"}`` rotations, left to right."""
    out = np.eye(2, dtype=complex)
    for factor in factors:
        try:
            gate = _AXES[str(factor['axis']).lower()]
        except (KeyError, TypeError):
            raise ValidationError("Rotation factors need an axis of x, y or z, got %r" % (factor,))
        try:
            angle = parse_angle(factor['angle'])
        except (KeyError, ValueError) as e:
            raise ValidationError("Bad rotation angle in %r: %s" % (factor, e))
        out = out @ gate(angle)
    return out


def standard_rotation(k):
    """The two diagonalizing rotations used for the tomography instances."""
    if k == 1:
        return rx(11 * np.pi / 15) @ ry(3 * np.pi / 8)
    if k == 2:
        return rx(89 * np.pi / 60) @ ry(-3 * np.pi / 8)
    raise ValueError("Only rotations 1 and 2 are defined, got %r" % (k,))


def _read_r(value):
    if isinstance(value, list) and value and isinstance(value[0], dict):
        return rotation_product(value)
    return matrix_from_json(value)


def _read_b(data, r):
    if 'input' not in data:
        return vector_from_json(data['b'])
    if r is None:
        raise ValidationError("An instance given by its input state needs R.")
    value = data['input']
    rb = named_state(value) if isinstance(value, str) else vector_from_json(value)
    return dagger(r) @ rb


def instance_from_dict(data):
    """Reads an instance document.

    ``A`` may be replaced by ``eigenvalues`` plus ``R``; ``R`` is a matrix
    or a list of axis rotations. ``b`` may be replaced by ``input``, the
    state ``R|b>`` as a label such as ``"+"`` or a vector. ``eigenvalue_qubits``
    and ``C`` are optional.

    :returns: ``(instance, config)``
    """
    if not isinstance(data, dict):
        raise ValidationError("An instance document is a JSON object.")
    try:
        r = _read_r(data['R']) if data.get('R') is not None else None
        b = _read_b(data, r)
        if 'A' in data:
            inst = validate_instance(matrix_from_json(data['A']), b)
        elif 'eigenvalues' in data:
            if r is None:
                raise ValidationError("An instance given by eigenvalues needs R.")
            inst = instance_from_rotations(data['eigenvalues'], r, b)
        else:
            raise ValidationError("An instance needs A or eigenvalues.")
    except KeyError as e:
        raise ValidationError("Instance document is missing %s" % e)
    except (TypeError, ValueError) as e:
        if isinstance(e, ValidationError) or getattr(e, 'code', None):
            raise
        raise ValidationError("Malformed instance document: %s" % e)
    m = data.get('eigenvalue_qubits', 1)
    cfg = HHLConfig.for_instance(inst, m=m, c=data.get('C'), r=r)
    return inst, cfg


def instance_to_dict(inst, cfg=None):
    ans = {
        'A': matrix_to_json(inst.a),
        'b': vector_to_json(inst.b),
    }
    if cfg is not None:
        ans.update({
            'R': matrix_to_json(cfg.r),
            'eigenvalue_qubits': cfg.m,
            'C': cfg.c,
        })
    return ans
