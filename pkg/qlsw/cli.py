"""
Command line front end.

Every subcommand writes its reports into ``--out`` and prints the written
paths. Failures print one JSON object ``{"error": code, "message": text}``
on standard error and exit with 2 for bad input or 3 for internal errors.
"""
import argparse
import json
import logging
import sys

from .__version__ import __description__
from .__version__ import __title__
from .__version__ import __version__
from .configs import VARIANTS
from .configs import add_stderr_logger
from .configs import get_config
from .schedulers import PointError

__all__ = ['main', 'main_entry', 'build_parser', 'exit_code', 'EXIT_OK', 'EXIT_INPUT', 'EXIT_INTERNAL']

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_INTERNAL = 3


def _common(parser, instance=True):
    if instance:
        parser.add_argument('--instance', required=True, help='instance JSON document.')
    parser.add_argument('--out', default=None, help='folder for the reports (default: temp dir).')
    parser.add_argument('--seed', type=int, default=None,
                        help='random seed (default: $QLSW_SEED or 1).')
    parser.add_argument('--debug', action='store_true', help='print deep logs.')
    parser.add_argument('-q', '--quiet', action='store_true',
                        help='suppress the logging from this library.')


def _sampling(parser):
    parser.add_argument('--shots', type=int, default=None, help='tomography shots per basis.')
    parser.add_argument('--trials', type=int, default=None, help='Monte-Carlo trials.')


def build_parser():
    parser = argparse.ArgumentParser(prog=__title__, description=__description__)
    parser.add_argument('--version', action='version', version='%(prog)s ' + __version__)
    commands = parser.add_subparsers(dest='command', metavar='command')
    commands.required = True

    solve = commands.add_parser('solve', help='run the noiseless circuit.')
    _common(solve)
    solve.add_argument('--variant', choices=VARIANTS[:2], default='optimized')

    photonic = commands.add_parser('photonic', help='simulate the linear-optics experiment.')
    _common(photonic)
    _sampling(photonic)
    photonic.add_argument('--noise', default=None, help='noise JSON document.')
    photonic.set_defaults(variant='photonic')

    sweep = commands.add_parser('sweep', help='run a grid of input states and eigenvalues.')
    _common(sweep, instance=False)
    _sampling(sweep)
    sweep.add_argument('--grid', required=True, help='grid JSON document.')
    sweep.add_argument('--noise', default=None, help='noise JSON document.')
    sweep.add_argument('--variant', choices=VARIANTS, default='photonic')
    sweep.add_argument('--threaded', action='store_true', help='run grid points concurrently.')

    tomography = commands.add_parser('tomo', help='reconstruct a state from a counts file.')
    _common(tomography)
    tomography.add_argument('--counts', required=True, help='counts JSON document.')
    tomography.add_argument('--trials', type=int, default=None, help='Monte-Carlo trials.')
    return parser


def exit_code(error):
    """2 for bad input, 3 for internal failures."""
    if isinstance(error, PointError):
        error = error.error
    if isinstance(error, RuntimeError):
        return EXIT_INTERNAL
    if getattr(error, 'code', None) or isinstance(error, ValueError):
        return EXIT_INPUT
    return EXIT_INTERNAL


def _error_object(error):
    if isinstance(error, PointError):
        error = error.error
    code = getattr(error, 'code', None)
    if not code:
        code = 'validation' if isinstance(error, ValueError) else 'internal'
    return {'error': code, 'message': str(error)}


def cmd_solve(config, args):
    return [config.create_workbench().save_solution(args.variant)]


def cmd_photonic(config, args):
    return config.create_workbench().save_photonic()


def cmd_sweep(config, args):
    path, _ = config.create_sweep(args.grid).save()
    return [path]


def cmd_tomo(config, args):
    return config.create_workbench().save_tomography(args.counts)


COMMANDS = {
    'solve': cmd_solve,
    'photonic': cmd_photonic,
    'sweep': cmd_sweep,
    'tomo': cmd_tomo,
}


def _config(args):
    return get_config(
        instance=getattr(args, 'instance', None),
        out=args.out,
        variant=getattr(args, 'variant', 'optimized'),
        noise=getattr(args, 'noise', None),
        seed=args.seed,
        shots=getattr(args, 'shots', None),
        trials=getattr(args, 'trials', None),
        debug=args.debug,
        threaded=getattr(args, 'threaded', False),
    )


def main(argv=None, stdout=None, stderr=None):
    """Runs one subcommand and returns the exit status."""
    stdout = sys.stdout if stdout is None else stdout
    stderr = sys.stderr if stderr is None else stderr
    args = build_parser().parse_args(argv)
    if not args.quiet and not args.debug:
        add_stderr_logger(level=logging.INFO)
    try:
        config = _config(args)
        paths = COMMANDS[args.command](config, args)
    except Exception as e:
        status = exit_code(e)
        if status == EXIT_INTERNAL:
            logger.exception("Internal error in %s", args.command)
        else:
            logger.error("%s failed: %s", args.command, e)
        stderr.write(json.dumps(_error_object(e), sort_keys=True) + '\n')
        return status
    for path in paths:
        stdout.write(path + '\n')
    return EXIT_OK


def main_entry():
    sys.exit(main())
