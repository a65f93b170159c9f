import json
import logging
import os
import re
import tempfile

import numpy as np

__all__ = [
    'complex_to_json', 'complex_from_json', 'vector_to_json', 'vector_from_json',
    'matrix_to_json', 'matrix_from_json', 'parse_angle', 'dumps_json',
    'atomic_write', 'resolve_seed', 'spawn_seeds', 'SEED_ENVIRON',
]

logger = logging.getLogger(__name__)

#: Environment variable consulted when no explicit seed is given.
SEED_ENVIRON = 'QLSW_SEED'

_angle_re = re.compile(
    r'^\s*(?P<sign>[-+]?)\s*(?P<num>\d+(?:\.\d*)?)?\s*\*?\s*pi\s*(?:/\s*(?P<den>\d+(?:\.\d*)?))?\s*$',
    re.IGNORECASE
)


def complex_to_json(z):
    """Encodes a complex number as ``[re, im]``."""
    z = complex(z)
    return [float(z.real), float(z.imag)]


def complex_from_json(value):
    """Decodes ``[re, im]`` or a plain real number."""
    if isinstance(value, (list, tuple)):
        if len(value) != 2:
            raise ValueError("Complex numbers are encoded as [re, im], got %r" % (value,))
        return complex(float(value[0]), float(value[1]))
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ValueError("Expected a number or [re, im], got %r" % (value,))
    return complex(float(value), 0.0)


def vector_to_json(v):
    return [complex_to_json(z) for z in np.asarray(v).ravel()]


def vector_from_json(values):
    if not isinstance(values, (list, tuple)) or not values:
        raise ValueError("Expected a non-empty list of entries, got %r" % (values,))
    return np.array([complex_from_json(z) for z in values], dtype=complex)


def matrix_to_json(m):
    return [vector_to_json(row) for row in np.asarray(m)]


def matrix_from_json(rows):
    if not isinstance(rows, (list, tuple)) or not rows:
        raise ValueError("Expected a non-empty list of rows, got %r" % (rows,))
    decoded = [vector_from_json(row) for row in rows]
    if len(set(len(row) for row in decoded)) != 1:
        raise ValueError("Matrix rows have different lengths.")
    return np.array(decoded, dtype=complex)


def parse_angle(value):
    """Angle in radians from a number or a string such as ``"11pi/15"``,
    ``"-3*pi/8"`` or ``"pi"``.
    """
    if isinstance(value, bool):
        raise ValueError("Expected an angle, got %r" % value)
    if isinstance(value, (int, float)):
        return float(value)
    if not isinstance(value, str):
        raise ValueError("Expected an angle, got %r" % (value,))
    match = _angle_re.match(value)
    if match is None:
        try:
            return float(value)
        except ValueError:
            raise ValueError("Cannot read angle %r" % value)
    num = float(match.group('num') or 1)
    den = float(match.group('den') or 1)
    if den == 0:
        raise ValueError("Zero denominator in angle %r" % value)
    sign = -1.0 if match.group('sign') == '-' else 1.0
    return sign * num * np.pi / den


def _default(o):
    if isinstance(o, np.integer):
        return int(o)
    if isinstance(o, np.floating):
        return float(o)
    if isinstance(o, (complex, np.complexfloating)):
        return complex_to_json(o)
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError("Object of type %s is not JSON serializable" % type(o).__name__)


def dumps_json(obj):
    """Stable JSON text: sorted keys, two space indent, trailing newline."""
    return json.dumps(obj, sort_keys=True, indent=2, default=_default) + '\n'


def atomic_write(path, text):
    """Writes ``text`` to ``path`` through a temporary file and a rename,
    so readers never observe a half written file.
    """
    path = os.path.abspath(path)
    folder = os.path.dirname(path)
    if not os.path.exists(folder):
        os.makedirs(folder)
    fd, tmp = tempfile.mkstemp(prefix='.tmp-', dir=folder)
    try:
        with os.fdopen(fd, 'w', encoding='utf-8', newline='') as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.remove(tmp)
        raise
    logger.debug("Wrote %d bytes to %s", len(text), path)
    return path


def resolve_seed(seed=None):
    """Explicit value, else the ``QLSW_SEED`` environment variable, else 1."""
    if seed is None:
        env = os.environ.get(SEED_ENVIRON)
        if env is not None and env.strip():
            try:
                seed = int(env)
            except ValueError:
                raise ValueError("%s must be an integer, got %r" % (SEED_ENVIRON, env))
            logger.debug("Seed %d taken from %s", seed, SEED_ENVIRON)
        else:
            seed = 1
    if isinstance(seed, bool) or not isinstance(seed, (int, np.integer)) or seed < 0:
        raise ValueError("Seed must be a non-negative integer, got %r" % (seed,))
    return int(seed)


def spawn_seeds(seed, count):
    """``count`` independent integer seeds derived from ``seed``.

    Child ``k`` depends only on ``(seed, k)``, so work split across threads
    reproduces the serial result bit for bit.
    """
    children = np.random.SeedSequence(seed).spawn(count)
    return [int(child.generate_state(1, dtype=np.uint32)[0]) for child in children]
