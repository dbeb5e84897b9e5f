import unittest
import sys
import os
import logging
from fractions import Fraction

# Add project root to path
sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

from src.boxdecomp import (
    box_delta,
    box_points,
    box_poly,
    check_age_symmetry,
    check_parallelepiped_partition,
    decomposition_table,
    face_index,
)
from src.corpus import golden_polytopes
from src.ehrhart import delta_polynomial
from src.errors import UsageError
from src.polytope import LatticePolytope
from src.triangulation import regular_subdivision, regular_triangulation


class TestBoxPoints(unittest.TestCase):
    def setUp(self):
        logging.getLogger('src.boxdecomp').setLevel(logging.ERROR)
        logging.getLogger('src.triangulation').setLevel(logging.ERROR)
        # [0,2] 的平凡剖分：中點被抬高
        self.segment = regular_subdivision([(0,), (1,), (2,)], [0, 5, 0],
                                           polytope=LatticePolytope(((0,), (2,))))

    def test_box_of_long_edge(self):
        points = box_points((0, 2), self.segment)
        self.assertEqual(len(points), 1)
        self.assertEqual(points[0].w, (1, 1))
        self.assertEqual(points[0].q, (Fraction(1, 2), Fraction(1, 2)))
        self.assertEqual(points[0].age, 1)
        self.assertEqual(box_poly((0, 2), self.segment).to_list(), [0, 1])

    def test_box_of_empty_face_and_vertices(self):
        self.assertEqual(box_poly((), self.segment).to_list(), [1])
        self.assertEqual(box_points((0,), self.segment), [])

    def test_face_index(self):
        self.assertEqual(face_index((0, 2), self.segment), 2)
        self.assertEqual(face_index((0,), self.segment), 1)

    def test_rejects_non_face(self):
        with self.assertRaises(UsageError):
            box_points((0, 1), self.segment)

    def test_decomposition_table(self):
        rows = decomposition_table(self.segment)
        self.assertEqual(rows, [
            {'face': [], 'dim': -1, 'box': [1], 'link_h': [1]},
            {'face': [0, 2], 'dim': 1, 'box': [0, 1], 'link_h': [1]},
        ])
        self.assertEqual(box_delta(self.segment).to_list(), [1, 1])


class TestBoxDelta(unittest.TestCase):
    def setUp(self):
        logging.getLogger('src.boxdecomp').setLevel(logging.ERROR)
        logging.getLogger('src.triangulation').setLevel(logging.ERROR)
        self.goldens = golden_polytopes()

    def test_reeve_box_has_single_age_two_point(self):
        T = regular_triangulation(self.goldens['reeve_2'], seed=0)
        simplex = T.maximal_simplices[0]
        self.assertEqual(box_poly(simplex, T).to_list(), [0, 0, 1])
        self.assertEqual(box_delta(T).to_list(), [1, 0, 1])

    def test_agrees_with_counting_on_goldens(self):
        for name, polytope in self.goldens.items():
            for seed in range(2):
                with self.subTest(name=name, seed=seed):
                    T = regular_triangulation(polytope, seed)
                    self.assertEqual(box_delta(T, check=False), delta_polynomial(polytope))

    def test_structural_checks(self):
        for name in ('unit_cube', 'reeve_4', 'dilated_triangle_2', 'segment_3'):
            with self.subTest(name=name):
                T = regular_triangulation(self.goldens[name], seed=3)
                partition = check_parallelepiped_partition(T)
                self.assertEqual(partition['simplices'], len(T.maximal_simplices))
                check_age_symmetry(T)

    def test_age_symmetry_on_reeve(self):
        T = regular_triangulation(self.goldens['reeve_5'], seed=0)
        self.assertEqual(check_age_symmetry(T)['faces'], 1)
        ages = sorted(b.age for b in box_points(T.maximal_simplices[0], T))
        self.assertEqual(ages, [2, 2, 2, 2])


if __name__ == '__main__':
    unittest.main()
