import logging
import threading
import weakref
from collections import OrderedDict

logger = logging.getLogger(__name__)

__all__ = ['Index', 'SchedulerBase', 'Scheduler', 'ThreadingScheduler', 'PointError']


class PointError(RuntimeError):
    """A sweep point raised; wraps the original exception."""
    code = 'sweep_point'

    def __init__(self, position, error):
        super(PointError, self).__init__(
            "Sweep point %d failed: %s" % (position, error))
        self.position = position
        self.error = error


class Index(OrderedDict):
    """Results index keyed by grid position, safe to fill from threads."""
    def __init__(self, *args, **kwargs):
        super(Index, self).__init__(*args, **kwargs)
        self.lock = threading.Lock()

    def add_entry(self, k, v):
        with self.lock:
            self.__setitem__(k, v)

    def get_entry(self, k, default=None):
        return self.get(k, default)

    def in_order(self, count):
        """Entries ``0 .. count-1`` regardless of completion order."""
        missing = [k for k in range(count) if k not in self]
        if missing:
            raise KeyError("Sweep points %s produced no result" % missing)
        return [self[k] for k in range(count)]


class SchedulerBase(object):
    """Dispatches sweep points to the handler registered for their variant.

    A handler is a callable ``handler(point) -> row``.
    """
    def __init__(self, default=None):
        self.data = dict()
        self.default = default
        self.index = Index()
        self.errors = Index()
        self.logger = logger.getChild(self.__class__.__name__)

    def __contains__(self, key):
        return key in self.data

    def register_handler(self, key, value):
        if not callable(value):
            raise TypeError("Handler for %s must be callable, got %r" % (key, value))
        self.data.__setitem__(key, value)
        self.logger.debug("Set the scheduler handler for %s as: [%r]", key, value)

    add_handler = register_handler

    def deregister_handler(self, key):
        self.data.__delitem__(key)
        self.logger.debug("Removed the scheduler handler for: %s", key)

    remove_handler = deregister_handler

    def get_handler(self, key):
        if key not in self.data:
            if self.default is None:
                raise KeyError(key)
            return self.default
        return self.data[key]

    def handle_point(self, position, key, point):
        handler = self.get_handler(key)
        self.logger.debug("Scheduling point %d with handler [%s]", position, key)
        return self._handle_point(position, handler, point)

    def _handle_point(self, position, handler, point):
        raise NotImplementedError()

    def close(self, timeout=None):
        pass

    def run(self, jobs):
        """Runs ``(key, point)`` jobs and returns their rows in job order.

        The first failure, in job order, is raised as :class:`PointError`.
        """
        jobs = list(jobs)
        self.index.clear()
        self.errors.clear()
        for position, (key, point) in enumerate(jobs):
            self.handle_point(position, key, point)
        self.close()
        if self.errors:
            position = min(self.errors)
            raise PointError(position, self.errors[position])
        return self.index.in_order(len(jobs))


class Scheduler(SchedulerBase):
    """Runs every point in the calling thread."""
    def _handle_point(self, position, handler, point):
        try:
            row = handler(point)
        except Exception as e:
            self.logger.debug("Sweep point %d failed: %s", position, e)
            self.errors.add_entry(position, e)
        else:
            self.index.add_entry(position, row)
            self.logger.info("Finished sweep point %d", position)


class ThreadingScheduler(Scheduler):
    """Runs every point on its own thread; :meth:`close` joins them."""
    def __init__(self, *args, **kwargs):
        super(ThreadingScheduler, self).__init__(*args, **kwargs)
        self.threads = weakref.WeakSet()
        self.timeout = None

    def close(self, timeout=None):
        if not timeout:
            timeout = self.timeout
        threads = list(self.threads)
        self.threads = weakref.WeakSet()
        for thread in threads:
            if thread.is_alive() and thread is not threading.current_thread():
                thread.join(timeout)

    def _handle_point(self, position, handler, point):
        run = super(ThreadingScheduler, self)._handle_point
        thread = threading.Thread(target=run, args=(position, handler, point))
        thread.daemon = True
        thread.start()
        self.threads.add(thread)
