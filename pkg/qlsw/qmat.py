"""
Dense complex linear algebra for the small matrices used across the workbench.

Matrices are plain ``numpy.ndarray`` objects of dtype complex128 and nothing
in here mutates its arguments, so every value can be shared freely between
threads.
"""
import logging
from collections import namedtuple

import numpy as np
from scipy.stats import unitary_group

__all__ = [
    'DimensionError', 'NotHermitianError', 'NotUnitaryError', 'InvalidStateError',
    'InvariantError', 'named_state', 'STATE_LABELS',
    'EigenDecomposition', 'as_matrix', 'as_vector', 'is_hermitian', 'is_unitary',
    'eig_hermitian', 'unitary_exp', 'state_fidelity', 'pure_fidelity',
    'dagger', 'projector', 'normalize', 'rx', 'ry', 'rz', 'zyz_decomposition',
    'bloch_vector', 'density_from_bloch', 'random_unitary', 'random_hermitian',
    'random_state', 'IDENTITY', 'PAULI_X', 'PAULI_Y', 'PAULI_Z', 'HADAMARD',
    'HERMITIAN_TOL', 'MAX_DIMENSION',
]

logger = logging.getLogger(__name__)

#: Absolute tolerance used when nothing else is asked for.
HERMITIAN_TOL = 1e-10

#: Eigenproblems are only solved at workbench scale.
MAX_DIMENSION = 16

IDENTITY = np.eye(2, dtype=complex)
PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)
HADAMARD = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)


class DimensionError(ValueError):
    """Shapes of the operands do not fit the operation."""
    code = 'dimension'


class NotHermitianError(ValueError):
    """Operation needs a Hermitian matrix."""
    code = 'not_hermitian'


class NotUnitaryError(ValueError):
    """Operation needs a unitary matrix."""
    code = 'not_unitary'


class InvalidStateError(ValueError):
    """Not a valid density matrix or unit state vector."""
    code = 'invalid_state'


class InvariantError(RuntimeError):
    """An internal consistency check failed."""
    code = 'invariant'


class EigenDecomposition(namedtuple('EigenDecomposition', ['eigenvalues', 'eigenvectors'])):
    """
    Eigenvalues in ascending order together with the matching unit
    eigenvectors stored as the columns of ``eigenvectors``.
    """
    __slots__ = ()

    @property
    def dimension(self):
        return len(self.eigenvalues)

    def vector(self, j):
        """Returns the j-th eigenvector |u_j>."""
        return self.eigenvectors[:, j]

    def reconstruct(self):
        """Sum of lambda_j |u_j><u_j|."""
        v = self.eigenvectors
        return (v * self.eigenvalues) @ v.conj().T

    def coefficients(self, b):
        """Expansion coefficients beta_j of ``b`` in the eigenbasis."""
        return self.eigenvectors.conj().T @ as_vector(b)


def as_matrix(m):
    """Coerce ``m`` into a finite two dimensional complex array."""
    arr = np.asarray(m, dtype=complex)
    if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
        raise DimensionError("Expected a non-empty matrix, got shape %r" % (arr.shape,))
    if not np.all(np.isfinite(arr)):
        raise ValueError("Matrix entries must be finite.")
    return arr


def as_vector(v):
    """Coerce ``v`` into a finite one dimensional complex array."""
    arr = np.asarray(v, dtype=complex)
    if arr.ndim != 1 or arr.shape[0] < 1:
        raise DimensionError("Expected a non-empty vector, got shape %r" % (arr.shape,))
    if not np.all(np.isfinite(arr)):
        raise ValueError("Vector entries must be finite.")
    return arr


def _square(m):
    arr = as_matrix(m)
    if arr.shape[0] != arr.shape[1]:
        raise DimensionError("Expected a square matrix, got shape %r" % (arr.shape,))
    return arr


def dagger(m):
    return np.conj(np.transpose(m))


def is_hermitian(m, tol=HERMITIAN_TOL):
    """True iff max |m[i][j] - conj(m[j][i])| <= tol."""
    arr = _square(m)
    return bool(np.max(np.abs(arr - dagger(arr))) <= tol)


def is_unitary(m, tol=HERMITIAN_TOL):
    arr = _square(m)
    return bool(np.max(np.abs(arr @ dagger(arr) - np.eye(arr.shape[0]))) <= tol)


def _fix_phase(vectors, tol=1e-12):
    # first non-negligible component of every column made real-positive
    out = vectors.copy()
    for j in range(out.shape[1]):
        col = out[:, j]
        nz = np.flatnonzero(np.abs(col) > tol)
        if nz.size:
            lead = col[nz[0]]
            out[:, j] = col * (np.abs(lead) / lead)
    return out


def eig_hermitian(m, tol=HERMITIAN_TOL):
    """Eigendecomposition of a Hermitian matrix.

    Eigenvalues come back ascending, eigenvectors orthonormal with the
    first nonzero component of each made real and positive so the result
    is reproducible.

    :param m: Hermitian matrix of dimension at most :data:`MAX_DIMENSION`
    :param tol: hermiticity tolerance
    :rtype: EigenDecomposition
    """
    arr = _square(m)
    if arr.shape[0] > MAX_DIMENSION:
        raise DimensionError(
            "Eigenproblems are limited to dimension %d, got %d" % (MAX_DIMENSION, arr.shape[0]))
    if not is_hermitian(arr, tol):
        raise NotHermitianError("Matrix is not Hermitian within %g" % tol)
    # symmetrize so the solver sees an exactly Hermitian input
    values, vectors = np.linalg.eigh((arr + dagger(arr)) / 2)
    order = np.argsort(values, kind='stable')
    values = np.asarray(values[order], dtype=float)
    vectors = _fix_phase(vectors[:, order])
    logger.debug("Eigenvalues %s for a %dx%d matrix", values, arr.shape[0], arr.shape[0])
    return EigenDecomposition(values, vectors)


def unitary_exp(a, scale, tol=HERMITIAN_TOL):
    """Returns exp(i * scale * a) for Hermitian ``a``."""
    eig = eig_hermitian(a, tol)
    v = eig.eigenvectors
    return (v * np.exp(1j * scale * eig.eigenvalues)) @ dagger(v)


def normalize(v):
    """Returns ``(unit_vector, norm)``; a zero vector raises ``ValueError``."""
    arr = as_vector(v)
    norm = float(np.linalg.norm(arr))
    if norm == 0.0:
        raise ValueError("Cannot normalize the zero vector.")
    return arr / norm, norm


def projector(psi):
    """Returns |psi><psi| for a (normalized copy of) ``psi``."""
    unit, _ = normalize(psi)
    return np.outer(unit, unit.conj())


def _check_density(rho, tol=1e-8):
    if not is_hermitian(rho, tol):
        raise InvalidStateError("Density matrix is not Hermitian.")
    if abs(np.trace(rho) - 1) > tol:
        raise InvalidStateError("Density matrix trace %r is not 1." % np.trace(rho))
    if np.min(np.linalg.eigvalsh((rho + dagger(rho)) / 2)) < -tol:
        raise InvalidStateError("Density matrix is not positive semidefinite.")


def state_fidelity(rho, psi):
    """Fidelity <psi|rho|psi> of a density matrix to a pure target, in [0, 1]."""
    rho = _square(rho)
    psi = as_vector(psi)
    if rho.shape[0] != psi.shape[0]:
        raise DimensionError(
            "Density matrix of dimension %d against a vector of length %d"
            % (rho.shape[0], psi.shape[0]))
    _check_density(rho)
    if abs(np.linalg.norm(psi) - 1) > 1e-8:
        raise InvalidStateError("Target state is not normalized.")
    value = float(np.real(np.vdot(psi, rho @ psi)))
    return min(1.0, max(0.0, value))


def pure_fidelity(a, b):
    """|<a|b>|^2 of two unit vectors; insensitive to global phase."""
    a, b = as_vector(a), as_vector(b)
    if a.shape != b.shape:
        raise DimensionError("Vectors of length %d and %d" % (a.shape[0], b.shape[0]))
    return float(abs(np.vdot(a, b)) ** 2)


def rx(theta):
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    return np.array([[c, -1j * s], [-1j * s, c]], dtype=complex)


def ry(theta):
    """R_y(theta) = exp(-i theta sigma_y / 2)."""
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    return np.array([[c, -s], [s, c]], dtype=complex)


def rz(theta):
    return np.array([[np.exp(-0.5j * theta), 0], [0, np.exp(0.5j * theta)]], dtype=complex)


def zyz_decomposition(u):
    """Angles ``(gamma, phi, theta, lam)`` with
    u = exp(i gamma) . R_z(phi) . R_y(theta) . R_z(lam).
    """
    u = _square(u)
    if u.shape != (2, 2):
        raise DimensionError("ZYZ decomposition needs a 2x2 matrix.")
    if not is_unitary(u, 1e-8):
        raise NotUnitaryError("ZYZ decomposition needs a unitary matrix.")
    gamma = np.angle(np.linalg.det(u)) / 2
    v = u * np.exp(-1j * gamma)
    a, b = v[0, 0], v[1, 0]
    theta = 2 * np.arctan2(abs(b), abs(a))
    arg_a = np.angle(a) if abs(a) > 1e-12 else 0.0
    arg_b = np.angle(b) if abs(b) > 1e-12 else 0.0
    phi = arg_b - arg_a
    lam = -arg_a - arg_b
    return float(gamma), float(phi), float(theta), float(lam)


def bloch_vector(rho):
    """Real vector (tr(rho X), tr(rho Y), tr(rho Z))."""
    rho = _square(rho)
    if rho.shape != (2, 2):
        raise DimensionError("Bloch vectors exist for single qubits only.")
    return np.real(np.array([np.trace(rho @ p) for p in (PAULI_X, PAULI_Y, PAULI_Z)]))


def density_from_bloch(r):
    r = np.asarray(r, dtype=float)
    return 0.5 * (IDENTITY + r[0] * PAULI_X + r[1] * PAULI_Y + r[2] * PAULI_Z)


_NAMED_STATES = {
    '0': (1, 0),
    '1': (0, 1),
    '+': (1 / np.sqrt(2), 1 / np.sqrt(2)),
    '-': (1 / np.sqrt(2), -1 / np.sqrt(2)),
    '+i': (1 / np.sqrt(2), 1j / np.sqrt(2)),
    '-i': (1 / np.sqrt(2), -1j / np.sqrt(2)),
}

#: Labels understood by :func:`named_state`, in tomography order.
STATE_LABELS = ('0', '1', '+', '-', '+i', '-i')


def named_state(label):
    """Single qubit state for one of ``0 1 + - +i -i``."""
    try:
        return np.array(_NAMED_STATES[str(label).strip()], dtype=complex)
    except KeyError:
        raise ValueError("Unknown state label %r, expected one of %s" % (label, STATE_LABELS))


def random_unitary(dim, rng):
    """Haar-random unitary drawn from ``rng`` (a numpy Generator)."""
    if dim == 1:
        return np.array([[np.exp(2j * np.pi * rng.random())]])
    return np.asarray(unitary_group.rvs(dim, random_state=rng), dtype=complex)


def random_hermitian(dim, rng):
    g = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    return (g + dagger(g)) / 2


def random_state(dim, rng):
    v = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    return v / np.linalg.norm(v)
