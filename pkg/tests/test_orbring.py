import unittest
import sys
import os
import logging

from hypothesis import given, settings, strategies as st

# Add project root to path
sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

from src.corpus import golden_polytopes
from src.ehrhart import delta_polynomial
from src.errors import UsageError
from src.exactmath import determinant
from src.orbring import (
    check_ring_hom,
    cone_points,
    deformed_multiply,
    graded_dimension,
    graded_slice,
    hilbert_vector,
    induced_surjectivity,
    orbifold_delta,
    random_unimodular_basis,
    relation_generators,
    restriction_j,
    vertex_monomial,
)
from src.polytope import LatticePolytope, normalized
from src.triangulation import regular_subdivision, regular_triangulation, triangulation_of_pair

SQUARE = LatticePolytope(((0, 0), (1, 0), (0, 1), (1, 1)), 'unit_square')


class TestDeformedRing(unittest.TestCase):
    def setUp(self):
        logging.getLogger('src.orbring').setLevel(logging.ERROR)
        logging.getLogger('src.triangulation').setLevel(logging.ERROR)
        # 對角線 (0,1)-(1,0)
        self.square = regular_subdivision([(0, 0), (0, 1), (1, 0), (1, 1)], [0, 0, 0, 1], polytope=SQUARE)

    def test_cone_points_and_carriers(self):
        degree_one = cone_points(self.square, 1)
        self.assertEqual([p.v for p in degree_one], [(0, 0, 1), (0, 1, 1), (1, 0, 1), (1, 1, 1)])
        self.assertEqual([p.carrier for p in degree_one], [(0,), (1,), (2,), (3,)])
        center = [p for p in cone_points(self.square, 2) if p.v == (1, 1, 2)][0]
        self.assertEqual(center.carrier, (1, 2))
        self.assertEqual(len(cone_points(self.square, 0)), 1)
        with self.assertRaises(UsageError):
            cone_points(self.square, -1)

    def test_deformed_multiply(self):
        a, b = vertex_monomial(self.square, 0), vertex_monomial(self.square, 1)
        product = deformed_multiply(a, b, self.square)
        self.assertEqual(product.v, (0, 1, 2))
        self.assertEqual(product.carrier, (0, 1))
        # (0,0) 與 (1,1) 不在同一個胞腔
        self.assertIsNone(deformed_multiply(a, vertex_monomial(self.square, 3), self.square))

    def test_relation_generators(self):
        generators = relation_generators(self.square)
        self.assertEqual(len(generators), 3)
        last = generators[-1]
        self.assertEqual(last.u, (0, 0, 1))
        self.assertTrue(all(c == 1 for _, c in last.terms))

    def test_graded_dimensions(self):
        self.assertEqual(graded_dimension(self.square, 0), 1)
        self.assertEqual(graded_dimension(self.square, 1), 1)
        self.assertEqual(graded_dimension(self.square, 2), 0)
        self.assertEqual(graded_dimension(self.square, 3), 0)
        self.assertEqual(hilbert_vector(self.square), [1, 1, 0])
        slice_1 = graded_slice(self.square, 1)
        self.assertEqual(len(slice_1.basis), 4)
        self.assertEqual(slice_1.rank, 3)
        self.assertEqual(len(slice_1.standard_monomials), 1)

    def test_orbifold_delta_vanishing(self):
        self.assertEqual(orbifold_delta(self.square, check_vanishing=True).to_list(), [1, 1])


class TestOrbifoldDelta(unittest.TestCase):
    def setUp(self):
        logging.getLogger('src.orbring').setLevel(logging.ERROR)
        logging.getLogger('src.triangulation').setLevel(logging.ERROR)
        self.goldens = golden_polytopes()

    def test_segment_two(self):
        T = regular_subdivision([(0,), (1,), (2,)], [0, 5, 0], polytope=self.goldens['segment_2'])
        self.assertEqual(hilbert_vector(T, upto=3), [1, 1, 0, 0])

    def test_matches_counting_on_goldens(self):
        for name, polytope in self.goldens.items():
            with self.subTest(name=name):
                T = regular_triangulation(polytope, seed=4)
                self.assertEqual(orbifold_delta(T, check_vanishing=True), delta_polynomial(polytope))

    @settings(max_examples=10, deadline=None)
    @given(st.integers(min_value=0, max_value=1000))
    def test_dimension_independent_of_dual_basis(self, seed):
        T = regular_triangulation(self.goldens['reeve_3'], seed=0)
        basis = random_unimodular_basis(T.dim + 1, seed)
        self.assertEqual(abs(determinant([list(r) for r in basis])), 1)
        for k in range(T.dim + 1):
            self.assertEqual(graded_dimension(T, k, basis), graded_dimension(T, k))


class TestRestriction(unittest.TestCase):
    def setUp(self):
        logging.getLogger('src.orbring').setLevel(logging.ERROR)
        logging.getLogger('src.triangulation').setLevel(logging.ERROR)
        self.p = LatticePolytope(((0, 0), (2, 0), (0, 2)), 'P')
        self.q = LatticePolytope(((0, 0), (1, 0), (0, 1)), 'Q')
        self.T, self.TQ = triangulation_of_pair(self.p, self.q, seed=1)
        self.embedding = normalized(self.q)[1]

    def test_restriction_kills_monomials_outside_q(self):
        far = next(i for i, x in enumerate(self.T.points) if x == (2, 0))
        self.assertIsNone(restriction_j(vertex_monomial(self.T, far), self.T, self.TQ, self.embedding))
        origin = next(i for i, x in enumerate(self.T.points) if x == (0, 0))
        image = restriction_j(vertex_monomial(self.T, origin), self.T, self.TQ, self.embedding)
        self.assertEqual(image.degree, 1)

    def test_ring_hom_and_surjectivity(self):
        passed, counterexample = check_ring_hom(self.T, self.TQ, self.embedding, sample_count=300, seed=2)
        self.assertTrue(passed)
        self.assertIsNone(counterexample)
        for k in range(self.TQ.dim + 1):
            with self.subTest(k=k):
                self.assertTrue(induced_surjectivity(self.T, self.TQ, self.embedding, k))


if __name__ == '__main__':
    unittest.main()
