import threading
import time
import unittest

from qlsw.schedulers import Index
from qlsw.schedulers import PointError
from qlsw.schedulers import Scheduler
from qlsw.schedulers import ThreadingScheduler


class TestIndex(unittest.TestCase):
    def test_add_entry(self):
        ans = Index()
        ans.add_entry(0, 'row')
        self.assertEqual(ans.get(0), 'row')

    def test_get_entry(self):
        ans = Index()
        ans.add_entry(3, 'row')
        self.assertEqual(ans.get_entry(3), 'row')
        self.assertIsNone(ans.get_entry(4))

    def test_in_order(self):
        ans = Index()
        for k in (2, 0, 1):
            ans.add_entry(k, k * 10)
        self.assertEqual(ans.in_order(3), [0, 10, 20])
        with self.assertRaises(KeyError):
            ans.in_order(4)


class TestScheduler(unittest.TestCase):
    def test_handlers(self):
        ans = Scheduler()
        ans.register_handler('double', lambda p: 2 * p)
        self.assertIn('double', ans)
        with self.assertRaises(KeyError):
            ans.get_handler('triple')
        ans.remove_handler('double')
        self.assertNotIn('double', ans)
        with self.assertRaises(TypeError):
            ans.add_handler('bad', 3)

    def test_default_handler(self):
        ans = Scheduler(default=str)
        self.assertEqual(ans.run([('any', 1), ('other', 2)]), ['1', '2'])

    def test_rows_in_job_order(self):
        ans = Scheduler()
        ans.register_handler('square', lambda p: p * p)
        ans.register_handler('neg', lambda p: -p)
        self.assertEqual(ans.run([('square', 3), ('neg', 1), ('square', 2)]), [9, -1, 4])

    def test_first_failure_is_raised(self):
        def handler(p):
            if p in (1, 3):
                raise ValueError('point %d' % p)
            return p

        ans = Scheduler()
        ans.register_handler('h', handler)
        with self.assertRaises(PointError) as ctx:
            ans.run([('h', p) for p in range(5)])
        self.assertEqual(ctx.exception.position, 1)
        self.assertIsInstance(ctx.exception.error, ValueError)
        self.assertEqual(sorted(ans.errors), [1, 3])


class TestThreadingScheduler(unittest.TestCase):
    def test_keeps_job_order(self):
        names = set()

        def slow(p):
            names.add(threading.current_thread().name)
            time.sleep(0.05 * (4 - p))
            return p

        ans = ThreadingScheduler()
        ans.register_handler('slow', slow)
        self.assertEqual(ans.run([('slow', p) for p in range(4)]), [0, 1, 2, 3])
        self.assertEqual(len(names), 4)
        self.assertEqual(len(ans.threads), 0)

    def test_failure(self):
        def handler(p):
            raise RuntimeError('boom')

        ans = ThreadingScheduler()
        ans.register_handler('h', handler)
        with self.assertRaises(PointError) as ctx:
            ans.run([('h', 0), ('h', 1)])
        self.assertEqual(ctx.exception.position, 0)


if __name__ == '__main__':
    unittest.main()
