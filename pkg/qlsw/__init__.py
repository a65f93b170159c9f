import logging

__version__ = "0.1.0"

logging.getLogger(__name__).addHandler(logging.NullHandler())

__all__ = ['solve', 'simulate']


def solve(instance,
          out=None,
          variant='optimized',
          debug=False):
    """Runs the noiseless circuit on an instance file and saves the report.

    example::

        from qlsw import solve
        solve("qlsw/instances/set_L1_b1.json", out="runs/", variant="general")

    :param instance: path of the instance JSON document
    :param out: folder in which the report is written
    :param variant: ``general`` or ``optimized``
    :param debug: whether to print deep logs or not.
    :returns: path of ``solution.json``
    """
    from .configs import get_config
    config = get_config(instance, out, variant=variant, debug=debug)
    return config.create_workbench().save_solution()


def simulate(instance,
             out=None,
             noise=None,
             seed=None,
             shots=None,
             trials=None,
             debug=False):
    """Simulates the photonic experiment with tomography and saves the reports.

    :param instance: path of the instance JSON document
    :param out: folder in which the reports are written
    :param noise: optional noise JSON document
    :param seed: random seed; ``None`` reads ``QLSW_SEED``
    :param shots: tomography shots per basis
    :param trials: Monte-Carlo trials for the error bars
    :param debug: whether to print deep logs or not.
    :returns: paths of ``counts.json``, ``report.json`` and ``density.csv``
    """
    from .configs import get_config
    config = get_config(instance, out, variant='photonic', noise=noise, seed=seed,
                        shots=shots, trials=trials, debug=debug)
    return config.create_workbench().save_photonic()
