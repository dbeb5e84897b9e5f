import unittest
import sys
import os
import logging

from hypothesis import given, settings, strategies as st

# Add project root to path
sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

from src.corpus import golden_polytopes
from src.config import load_config
from src.errors import ContainmentError, NotGeneric, UsageError, VerificationFailed
from src.polytope import LatticePolytope, lattice_points, normalized, normalized_volume
from src.triangulation import (
    f_vector,
    generic_heights,
    h_polynomial,
    h_vector,
    is_unimodular,
    link,
    link_h_polynomial,
    pair_map,
    regular_subdivision,
    regular_triangulation,
    restrict_to,
    triangulation_of_pair,
    verify_regularity,
)

SEGMENT_POINTS = [(0,), (1,), (2,)]
SQUARE_POINTS = [(0, 0), (0, 1), (1, 0), (1, 1)]


class TestRegularSubdivision(unittest.TestCase):
    def setUp(self):
        logging.getLogger('src.triangulation').setLevel(logging.ERROR)

    def test_segment_lifted_midpoint_is_unused(self):
        T = regular_subdivision(SEGMENT_POINTS, [0, 5, 0])
        self.assertEqual(T.maximal_simplices, ((0, 2),))
        self.assertEqual(T.vertex_indices, (0, 2))

    def test_segment_lowered_midpoint_splits(self):
        T = regular_subdivision(SEGMENT_POINTS, [0, -1, 0])
        self.assertEqual(T.maximal_simplices, ((0, 1), (1, 2)))
        self.assertTrue(is_unimodular(T))

    def test_flat_heights_keep_simplicial_cell(self):
        # 共面的中點不是極點，胞腔仍是單形
        T = regular_subdivision(SEGMENT_POINTS, [0, 0, 0])
        self.assertEqual(T.maximal_simplices, ((0, 2),))

    def test_square_diagonals(self):
        T = regular_subdivision(SQUARE_POINTS, [0, 0, 0, 1])
        self.assertEqual(T.maximal_simplices, ((0, 1, 2), (1, 2, 3)))
        other = regular_subdivision(SQUARE_POINTS, [0, 1, 1, 0])
        self.assertEqual(other.maximal_simplices, ((0, 1, 3), (0, 2, 3)))

    def test_square_flat_heights_not_generic(self):
        with self.assertRaises(NotGeneric):
            regular_subdivision(SQUARE_POINTS, [0, 0, 0, 0])

    def test_height_count_mismatch(self):
        with self.assertRaises(UsageError):
            regular_subdivision(SQUARE_POINTS, [0, 0, 1])

    def test_generic_heights_deterministic(self):
        self.assertEqual(generic_heights(10, 7), generic_heights(10, 7))
        self.assertTrue(all(0 <= h < 2 ** 16 for h in generic_heights(50, 3)))
        penalized = generic_heights(3, 7, penalty=[0, 100, 0], bits=4)
        base = generic_heights(3, 7, bits=4)
        self.assertEqual(penalized[1] - base[1], 100)


class TestFacesAndHPolynomials(unittest.TestCase):
    def setUp(self):
        logging.getLogger('src.triangulation').setLevel(logging.ERROR)
        self.square = regular_subdivision(SQUARE_POINTS, [0, 0, 0, 1])

    def test_f_and_h_vector(self):
        self.assertEqual(f_vector(self.square), [1, 4, 5, 2])
        self.assertEqual(h_vector(self.square).to_list(), [1, 1])

    def test_link_of_boundary_vertex(self):
        self.assertEqual(link(self.square, (1,)), [(), (0,), (2,), (3,), (0, 2), (2, 3)])
        self.assertEqual(link_h_polynomial(self.square, (1,)).to_list(), [1, 1])

    def test_link_of_maximal_simplex(self):
        self.assertEqual(link(self.square, (0, 1, 2)), [()])
        self.assertEqual(link_h_polynomial(self.square, (0, 1, 2)).to_list(), [1])

    def test_link_rejects_non_face(self):
        with self.assertRaises(UsageError):
            link(self.square, (0, 3))

    def test_h_polynomial_of_empty_complex(self):
        self.assertEqual(h_polynomial([()], -1).to_list(), [1])
        with self.assertRaises(UsageError):
            h_polynomial([(), (0,), (1,), (0, 1)], 0)

    def test_restrict_to(self):
        self.assertEqual(restrict_to(self.square, [0, 1, 2]),
                         [(), (0,), (1,), (2,), (0, 1), (0, 2), (1, 2), (0, 1, 2)])


class TestRegularTriangulation(unittest.TestCase):
    def setUp(self):
        logging.getLogger('src.triangulation').setLevel(logging.ERROR)
        self.goldens = golden_polytopes()

    def test_reeve_is_single_non_unimodular_simplex(self):
        T = regular_triangulation(self.goldens['reeve_3'], seed=1)
        self.assertEqual(len(T.maximal_simplices), 1)
        self.assertFalse(is_unimodular(T))
        self.assertEqual(h_vector(T).to_list(), [1])

    def test_regularity_certificate(self):
        for name in ('unit_cube', 'dilated_triangle_2', 'segment_4'):
            with self.subTest(name=name):
                T = regular_triangulation(self.goldens[name], seed=2)
                certificate = verify_regularity(T)
                self.assertTrue(certificate['regular'])
                self.assertEqual(certificate['volume'], normalized_volume(self.goldens[name]))

    @settings(max_examples=20, deadline=None)
    @given(st.integers(min_value=0, max_value=10_000))
    def test_triangulation_is_seed_deterministic(self, seed):
        p = self.goldens['dilated_triangle_2']
        first = regular_triangulation(p, seed)
        second = regular_triangulation(p, seed)
        self.assertEqual(first.maximal_simplices, second.maximal_simplices)
        self.assertEqual(sum(first.simplex_volume(s) for s in first.maximal_simplices), 4)


class TestPairTriangulation(unittest.TestCase):
    def setUp(self):
        logging.getLogger('src.triangulation').setLevel(logging.ERROR)
        self.p = LatticePolytope(((0, 0), (2, 0), (0, 2)), 'P')
        self.q = LatticePolytope(((0, 0), (1, 0), (0, 1)), 'Q')

    def test_restriction_matches_subtriangulation(self):
        T, TQ = triangulation_of_pair(self.p, self.q, seed=5)
        mapping = pair_map(T, TQ, normalized(self.q)[1])
        self.assertEqual(len(TQ.maximal_simplices), 1)
        q_indices = [T.point_index[x] for x in lattice_points(self.q, 1)]
        expected = {tuple(sorted(mapping[j] for j in face)) for face in TQ.faces}
        self.assertEqual(set(restrict_to(T, q_indices)), expected)

    def test_lower_dimensional_q(self):
        edge = LatticePolytope(((0, 0), (2, 0)), 'edge')
        T, TQ = triangulation_of_pair(self.p, edge, seed=0)
        self.assertEqual(TQ.dim, 1)
        self.assertTrue(verify_regularity(T)['regular'])

    def test_point_q(self):
        T, TQ = triangulation_of_pair(self.p, LatticePolytope(((1, 1),)), seed=0)
        self.assertEqual(TQ.dim, 0)
        self.assertEqual(TQ.maximal_simplices, ((0,),))

    def test_rejects_non_nested(self):
        outside = LatticePolytope(((0, 0), (3, 0)), 'outside')
        with self.assertRaises(ContainmentError):
            triangulation_of_pair(self.p, outside)

    @settings(max_examples=10, deadline=None)
    @given(st.integers(min_value=0, max_value=10_000))
    def test_failure_carries_certificate(self, seed):
        # P∖Q 壓到 Q 下方：T 不會用到 Q 的斜邊，限制永遠與 TQ 不符
        config = load_config()
        config['pair'].update(penalty_start=-(1 << 20), max_attempts=1)
        with self.assertRaises(VerificationFailed) as ctx:
            triangulation_of_pair(self.p, self.q, seed=seed, config=config)
        certificate = ctx.exception.certificate
        self.assertEqual(certificate['seed'], seed)
        self.assertEqual(certificate['penalty'], -(1 << 20))
        self.assertEqual(len(certificate['heights']), 6)
        self.assertEqual(certificate['last_error']['error'], 'VerificationFailed')


if __name__ == '__main__':
    unittest.main()
