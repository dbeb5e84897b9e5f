import unittest
import sys
import os
import logging

from hypothesis import given, settings, strategies as st

# Add project root to path
sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

from src.corpus import generated_corpus
from src.errors import ContainmentError, UsageError
from src.monotone import PairReport, random_pair, verify_pair, verify_pairs
from src.polytope import LatticePolytope, contains, is_full_dimensional


def silence():
    for name in ('src.monotone', 'src.triangulation', 'src.orbring', 'src.boxdecomp'):
        logging.getLogger(name).setLevel(logging.CRITICAL)


class TestRandomPair(unittest.TestCase):
    def setUp(self):
        silence()

    def test_guardrails(self):
        with self.assertRaises(UsageError):
            random_pair(0, 3, seed=1)
        with self.assertRaises(UsageError):
            random_pair(4, 3, seed=1)
        with self.assertRaises(UsageError):
            random_pair(2, 7, seed=1)
        with self.assertRaises(UsageError):
            random_pair(2, 0, seed=1)

    @settings(max_examples=25, deadline=None)
    @given(st.integers(min_value=1, max_value=3), st.integers(min_value=1, max_value=6),
           st.integers(min_value=0, max_value=10 ** 6))
    def test_pairs_are_nested_and_deterministic(self, dim, max_coord, seed):
        p, q = random_pair(dim, max_coord, seed)
        self.assertTrue(is_full_dimensional(p))
        self.assertTrue(contains(p, q))
        again = random_pair(dim, max_coord, seed)
        self.assertEqual((p.vertices, q.vertices), (again[0].vertices, again[1].vertices))
        self.assertEqual((p.name, q.name), (f'P_{seed}', f'Q_{seed}'))

    def test_generated_corpus_cycles_dimensions(self):
        corpus = generated_corpus(6, 3, seed=11)
        self.assertEqual([p.ambient_rank for p in corpus], [1, 2, 3, 1, 2, 3])
        self.assertTrue(all(is_full_dimensional(p) for p in corpus))


class TestVerifyPair(unittest.TestCase):
    def setUp(self):
        silence()

    def test_nested_segments(self):
        report = verify_pair(LatticePolytope(((0,), (2,)), 'P'), LatticePolytope(((0,), (1,)), 'Q'))
        self.assertTrue(report.passed)
        self.assertTrue(report.monotone)
        self.assertEqual(report.delta_p, [1, 1])
        self.assertEqual(report.delta_q, [1])
        self.assertEqual(report.surjectivity, [True, True])

    def test_identical_pair(self):
        square = LatticePolytope(((0, 0), (1, 0), (0, 1), (1, 1)), 'square')
        report = verify_pair(square, square, seed=3)
        self.assertTrue(report.passed)
        self.assertEqual(report.delta_p, report.delta_q)

    def test_point_inside_reeve(self):
        reeve = LatticePolytope(((0, 0, 0), (1, 0, 0), (0, 1, 0), (1, 1, 3)), 'reeve_3')
        report = verify_pair(reeve, LatticePolytope(((1, 0, 0),), 'vertex'))
        self.assertTrue(report.passed)
        self.assertEqual(report.dim_q, 0)
        self.assertEqual(report.delta_q, [1])
        self.assertEqual(report.delta_p, [1, 0, 2])

    def test_lower_dimensional_ambient(self):
        # 嵌在 ℤ^2 的對角線段，先在自身格中正規化
        p = LatticePolytope(((0, 0), (3, 3)), 'diagonal')
        q = LatticePolytope(((1, 1), (2, 2)), 'inner')
        report = verify_pair(p, q)
        self.assertTrue(report.passed)
        self.assertEqual(report.delta_p, [1, 2])
        self.assertEqual(report.delta_q, [1])

    def test_rejects_non_nested(self):
        with self.assertRaises(ContainmentError):
            verify_pair(LatticePolytope(((0,), (1,))), LatticePolytope(((0,), (2,))))

    def test_report_serialization(self):
        report = verify_pair(LatticePolytope(((0,), (2,)), 'P'), LatticePolytope(((0,), (1,)), 'Q'))
        payload = report.to_dict()
        self.assertEqual(payload['P'], 'P')
        self.assertTrue(payload['passed'])
        self.assertNotIn('timing', payload)
        self.assertEqual(payload['methods_P'], {'count': [1, 1], 'boxes': [1, 1], 'orbifold': [1, 1]})
        self.assertIn('timing', report.to_dict(include_timing=True))


class TestVerifyPairs(unittest.TestCase):
    def setUp(self):
        silence()

    def test_batch_keeps_input_order_and_captures_errors(self):
        pairs = [random_pair(1 + i % 3, 3, seed=i) for i in range(6)]
        pairs.insert(2, (LatticePolytope(((0,), (1,)), 'small'), LatticePolytope(((0,), (5,)), 'big')))
        reports = verify_pairs(pairs, workers=3)
        self.assertEqual([r.p_name for r in reports], [p.name for p, _ in pairs])
        self.assertIsNotNone(reports[2].error)
        self.assertEqual(reports[2].error['error'], 'ContainmentError')
        self.assertFalse(reports[2].passed)
        for i, report in enumerate(reports):
            if i != 2:
                self.assertTrue(report.passed, report.to_dict())

    def test_failed_report_is_not_passed(self):
        report = PairReport(p_name='P', q_name='Q', seed=0, monotone=False, triple_p=True,
                            triple_q=True, linkwise=True, ring_hom=True, surjectivity=[True])
        self.assertFalse(report.passed)


if __name__ == '__main__':
    unittest.main()
