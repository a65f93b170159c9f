import json
import logging
import os
import sys
import tempfile
from functools import partial

from requests.structures import CaseInsensitiveDict

from .__version__ import __title__
from .helpers import resolve_seed
from .tomo import DEFAULT_SHOTS
from .tomo import DEFAULT_TRIALS
from .tomo import MIN_TRIALS

__all__ = [
    'ConfigHandler',
    'ConfigError',
    'get_config',
    'default_config',
    'load_json',
    'add_stderr_logger',
    'VARIANTS',
]

logger = logging.getLogger(__name__)

#: Circuit variants a run can use; ``photonic`` is the linear-optics simulation.
VARIANTS = ('general', 'optimized', 'photonic')


def add_stderr_logger(name=__title__, level=logging.DEBUG):
    """
    Helper for quickly adding a StreamHandler to the logger. Useful for
    debugging.

    Returns the handler after adding it.
    """
    root = logging.getLogger(name)
    #: If there is already a stderr logger then we don't need to bother.
    for h in root.handlers:
        if isinstance(h, logging.StreamHandler):
            if h.stream == sys.stderr:
                h.disabled = False
                h.setLevel(level)
                return h
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(
        logging.Formatter(
            '%(levelname)-8s - %(name)s:%(lineno)d - %(message)s'
        )
    )
    root.addHandler(handler)
    root.setLevel(level)
    root.debug('Added a stderr logging handler to logger: %s', name)
    return handler


#: Base configuration with preconfigured values.
default_config = {
    'debug': False,
    'instance': None,
    'variant': 'optimized',
    'noise': None,
    'out': None,
    'seed': None,
    'shots': DEFAULT_SHOTS,
    'trials': DEFAULT_TRIALS,
    'threaded': False,
    'double_emission_share': 0.1,
    'truncation': 4,
}


class ConfigError(AttributeError, TypeError):
    """Bad config value, missing file or unreadable document."""
    code = 'config'

    def __init__(self, message, code=None):
        super(ConfigError, self).__init__(message)
        if code is not None:
            self.code = code


def load_json(path):
    """Reads a JSON document; every failure becomes a :class:`ConfigError`."""
    try:
        with open(path, 'r', encoding='utf-8') as fh:
            return json.load(fh)
    except ValueError as e:
        raise ConfigError("Malformed JSON in %s: %s" % (path, e), code='parse')
    except OSError as e:
        raise ConfigError("Cannot read %s: %s" % (path, e))


def _positive_int(name, value):
    try:
        ans = int(value)
    except (TypeError, ValueError):
        raise ConfigError("%s must be an integer, got %r" % (name, value))
    if ans != value or ans < 1:
        raise ConfigError("%s must be a positive integer, got %r" % (name, value))
    return ans


class ConfigHandler(CaseInsensitiveDict):
    """Holds every knob of a run; each module builds its objects from it."""
    def __repr__(self):  # pragma: no cover
        return '<ConfigHandler(%s)>' % self.get('instance', 'Not Set')

    def __getattribute__(self, item):
        """Dynamic method of name `get_(key)` and `set_(key)` generation
        for all the keys available.
        for example to change the `shots` key
        instead of using dictionary like operation you would do
        `.get_shots()` instead of `['shots']`.
        `.set_shots(new)` instead of `['shots'] = new`.
        """
        if isinstance(item, str) and item.startswith('set_'):
            if item[4:] in self:
                return partial(self.__setitem__, item[4:])
        elif isinstance(item, str) and item.startswith('get_'):
            if item[4:] in self:
                return partial(self.__getitem__, item[4:])
        return super(ConfigHandler, self).__getattribute__(item)

    def reset_config(self):
        """Resets all to configuration to default state."""
        self.update(default_config)

    def reset_key(self, key):
        self.update({key: default_config.get(key)})

    def is_set(self):
        """Checks whether the configuration has required attributes or not."""
        return self.get('out') is not None and self.get('seed') is not None

    def setup_paths(self, out):
        """Creates the output folder and stores its absolute path."""
        if not isinstance(out, str):
            raise ConfigError("out value must be a string!")
        out = os.path.abspath(os.path.normpath(out))
        if os.path.exists(out) and not os.path.isdir(out):
            raise ConfigError("Output path %s exists and is not a folder." % out)
        if not os.path.exists(out):
            os.makedirs(out)
        self.set_out(out)

    def setup_config(self,
                     instance=None,
                     out=None,
                     variant='optimized',
                     noise=None,
                     seed=None,
                     shots=DEFAULT_SHOTS,
                     trials=DEFAULT_TRIALS,
                     debug=False,
                     threaded=False):
        """Validates and stores a complete run configuration.

        Referenced files must exist; seed, shots and trials must be
        positive. The seed falls back to ``QLSW_SEED`` and then to 1.
        """
        if variant not in VARIANTS:
            raise ConfigError("variant must be one of %s, got %r" % (VARIANTS, variant))
        for key, path in (('instance', instance), ('noise', noise)):
            if path is not None and not os.path.isfile(path):
                raise ConfigError("%s file %s does not exist." % (key, path))
        try:
            seed = resolve_seed(seed)
        except ValueError as e:
            raise ConfigError(str(e))
        self.set_seed(_positive_int('seed', seed))
        self.set_shots(_positive_int('shots', shots))
        trials = _positive_int('trials', trials)
        if trials < MIN_TRIALS:
            raise ConfigError("trials must be at least %d, got %r" % (MIN_TRIALS, trials))
        self.set_trials(trials)
        self.set_variant(variant)
        self.set_instance(instance)
        self.set_noise(noise)
        self.set_debug(debug)
        self.set_threaded(bool(threaded))
        self.setup_paths(out)

        #: Add a stderr logger to this library.
        if debug:
            add_stderr_logger(level=logging.DEBUG)

        logger.debug(str(dict(self)))

    def load_instance(self):
        """``(instance, hhl config)`` read from the instance file."""
        if not self.get('instance'):
            raise ConfigError("No instance file configured.")
        from .hhl import instance_from_dict
        return instance_from_dict(load_json(self.get_instance()))

    def load_noise(self):
        """Noise parameters from the noise file, or the defaults.

        The file may also carry ``shots`` and ``trials``; they are ignored
        here and applied by :func:`get_config`.
        """
        from .photonic import NoiseParams
        data = {}
        if self.get('noise'):
            data = load_json(self.get_noise())
            if not isinstance(data, dict):
                raise ConfigError("A noise document is a JSON object.")
        data.setdefault('double_emission_share', self.get('double_emission_share'))
        data.setdefault('truncation', self.get('truncation'))
        return NoiseParams.from_dict(data)

    def create_workbench(self):
        if not self.is_set():
            raise ConfigError("Config is missing required attributes!")
        from .core import Workbench
        return Workbench.from_config(self)

    def create_sweep(self, grid):
        if not self.is_set():
            raise ConfigError("Config is missing required attributes!")
        from .core import Sweep
        return Sweep.from_config(self, grid)

    def create_scheduler(self):
        from .schedulers import Scheduler
        from .schedulers import ThreadingScheduler
        if self.get('threaded'):
            return ThreadingScheduler()
        return Scheduler()


def _stem(path):
    return os.path.splitext(os.path.basename(path))[0]


def get_config(instance=None,
               out=None,
               variant='optimized',
               noise=None,
               seed=None,
               shots=None,
               trials=None,
               debug=False,
               threaded=None):
    """Create a ConfigHandler instance and return it.
    If the output folder is not supplied it will use the users Tempdir.

    Values left as ``None`` come from the noise file when it names them and
    from :data:`default_config` otherwise.

    :param instance: path of the instance JSON document
    :param out: folder in which the reports are written
    :param variant: one of ``general``, ``optimized`` or ``photonic``
    :param noise: optional path of a noise JSON document
    :param seed: random seed; ``None`` reads ``QLSW_SEED``
    :param shots: tomography shots per basis
    :param trials: Monte-Carlo trials for the error bars
    :param debug: whether to print deep logs or not.
    :param threaded: run sweep points concurrently.
    """
    if instance is not None and not isinstance(instance, str):
        raise ConfigError("Expected string type, got %r" % instance)
    if out and not isinstance(out, str):
        raise ConfigError("Expected string type, got %r" % out)

    if not out:
        name = 'qlsw_%s' % (_stem(instance) if instance else 'run')
        out = os.path.join(tempfile.gettempdir(), name)
        logger.debug('No output folder provided, %s will be used instead.', out)

    overrides = {}
    if noise is not None and os.path.isfile(noise):
        document = load_json(noise)
        if isinstance(document, dict):
            overrides = document

    ans = ConfigHandler(default_config)
    for key in ('double_emission_share', 'truncation'):
        if key in overrides:
            ans[key] = overrides[key]
    ans.setup_config(
        instance=instance,
        out=out,
        variant=variant,
        noise=noise,
        seed=seed,
        shots=shots if shots is not None else overrides.get('shots', DEFAULT_SHOTS),
        trials=trials if trials is not None else overrides.get('trials', DEFAULT_TRIALS),
        debug=debug,
        threaded=threaded,
    )
    return ans
