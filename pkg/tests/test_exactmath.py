import unittest
import sys
import os
import logging
from fractions import Fraction
from itertools import combinations, product

from hypothesis import given, settings, strategies as st

# Add project root to path
sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

from src.errors import UsageError
from src.exactmath import (
    RowReducer,
    adjugate,
    determinant,
    hermite_affine_normalize,
    hermite_normal_form,
    integer_kernel_basis,
    orthogonal_normal,
    pairing,
    primitive,
    rank_exact,
    solve_exact,
)

small_ints = st.integers(min_value=-6, max_value=6)


def matrices(rows, cols):
    return st.lists(st.lists(small_ints, min_size=cols, max_size=cols), min_size=rows, max_size=rows)


def matmul(a, b):
    return [[sum(x * y for x, y in zip(row, col)) for col in zip(*b)] for row in a]


def barycentric(subset, x, m):
    """Σ λ_i v_i = x、Σ λ_i = m 的唯一解；子集仿射相依或無解時返回 None"""
    k = len(subset)
    rows = [[Fraction(v[j]) for v in subset] + [Fraction(x[j])] for j in range(len(x))]
    rows.append([Fraction(1)] * k + [Fraction(m)])
    for col in range(k):
        pivot = next((i for i in range(col, len(rows)) if rows[i][col] != 0), None)
        if pivot is None:
            return None
        rows[col], rows[pivot] = rows[pivot], rows[col]
        rows[col] = [a / rows[col][col] for a in rows[col]]
        for i in range(len(rows)):
            if i != col and rows[i][col] != 0:
                factor = rows[i][col]
                rows[i] = [a - factor * b for a, b in zip(rows[i], rows[col])]
    if any(row[k] != 0 for row in rows[k:]):
        return None
    return [rows[i][k] for i in range(k)]


def count_in_dilate(points, m):
    """暴力計數 m·conv(points) 的格點（外包盒 × 逐子集重心座標）"""
    n = len(points[0])
    ranges = [range(min(m * p[j] for p in points), max(m * p[j] for p in points) + 1) for j in range(n)]
    subsets = [s for size in range(1, len(points) + 1) for s in combinations(points, size)]
    return sum(1 for x in product(*ranges) if _inside(subsets, x, m))


def _inside(subsets, x, m):
    for subset in subsets:
        weights = barycentric(subset, x, m)
        if weights is not None and all(w >= 0 for w in weights):
            return True
    return False


class TestExactMath(unittest.TestCase):
    def setUp(self):
        logging.getLogger('src.exactmath').setLevel(logging.ERROR)

    def test_pairing(self):
        self.assertEqual(pairing((1, 2, 3), (4, 5, 6)), 32)
        with self.assertRaises(UsageError):
            pairing((1, 2), (1, 2, 3))

    def test_primitive(self):
        self.assertEqual(primitive((4, 6, -2)), (2, 3, -1))
        self.assertEqual(primitive((0, 0)), (0, 0))
        self.assertEqual(primitive((3, 5)), (3, 5))

    def test_determinant_small_cases(self):
        self.assertEqual(determinant([]), 1)
        self.assertEqual(determinant([[2, 0], [0, 3]]), 6)
        self.assertEqual(determinant([[1, 2], [3, 4]]), -2)
        self.assertEqual(determinant([[1, 2], [2, 4]]), 0)
        # 第一個主元為 0，需要換列
        self.assertEqual(determinant([[0, 1], [1, 0]]), -1)

    @settings(max_examples=60, deadline=None)
    @given(matrices(3, 3))
    def test_adjugate_identity(self, a):
        det = determinant(a)
        product = matmul(a, adjugate(a))
        self.assertEqual(product, [[det * int(i == j) for j in range(3)] for i in range(3)])

    def test_orthogonal_normal(self):
        self.assertEqual(orthogonal_normal([(1, 0, 0), (0, 1, 0)], 3), (0, 0, 1))
        normal = orthogonal_normal([(1, 2, 3), (4, 5, 6)], 3)
        self.assertEqual(pairing(normal, (1, 2, 3)), 0)
        self.assertEqual(pairing(normal, (4, 5, 6)), 0)
        self.assertNotEqual(normal, (0, 0, 0))

    def test_rank_exact(self):
        self.assertEqual(rank_exact([[1, 2], [2, 4]]), 1)
        self.assertEqual(rank_exact([[Fraction(1, 2), 1], [1, 2], [0, 1]]), 2)
        self.assertEqual(rank_exact([]), 0)

    @settings(max_examples=60, deadline=None)
    @given(matrices(3, 4))
    def test_rank_is_transpose_invariant(self, a):
        self.assertEqual(rank_exact(a), rank_exact([list(c) for c in zip(*a)]))

    def test_row_reducer(self):
        reducer = RowReducer()
        self.assertTrue(reducer.add({0: 1, 1: 1}))
        self.assertTrue(reducer.add({1: 2}))
        self.assertFalse(reducer.add({0: 3, 1: 5}))
        self.assertEqual(reducer.rank, 2)
        self.assertTrue(reducer.contains({0: 2, 1: -4}))

    def test_solve_exact(self):
        self.assertEqual(solve_exact([[2, 0], [0, 4]], [1, 1]), (Fraction(1, 2), Fraction(1, 4)))
        self.assertIsNone(solve_exact([[1], [1]], [1, 2]))
        with self.assertRaises(UsageError):
            solve_exact([[1, 1], [2, 2]], [1, 2])

    @settings(max_examples=60, deadline=None)
    @given(matrices(2, 3))
    def test_hermite_normal_form_transform(self, a):
        h, u, rank = hermite_normal_form(a)
        self.assertEqual(matmul(a, u), h)
        self.assertEqual(abs(determinant(u)), 1)
        self.assertEqual(rank, rank_exact(a))
        for row in h:
            self.assertTrue(all(x == 0 for x in row[rank:]))

    def test_integer_kernel_basis(self):
        basis = integer_kernel_basis([[1, 1, 1]], 3)
        self.assertEqual(len(basis), 2)
        for vector in basis:
            self.assertEqual(pairing(vector, (1, 1, 1)), 0)
        # 核格是飽和的：2·x 的核與 x 的核相同
        self.assertEqual(len(integer_kernel_basis([[2, 4]], 2)), 1)
        self.assertEqual(primitive(integer_kernel_basis([[2, 4]], 2)[0]),
                         integer_kernel_basis([[2, 4]], 2)[0])

    def test_hermite_affine_normalize_diagonal_segment(self):
        reduced, embedding = hermite_affine_normalize([(0, 0), (2, 2)])
        self.assertEqual(embedding.dim, 1)
        self.assertEqual(sorted(reduced), [(0,), (2,)])
        self.assertEqual(embedding.to_reduced((1, 1)), (1,))
        self.assertIsNone(embedding.to_reduced((1, 0)))

    def test_hermite_affine_normalize_single_point(self):
        reduced, embedding = hermite_affine_normalize([(3, -1, 2)])
        self.assertEqual(embedding.dim, 0)
        self.assertEqual(reduced, [()])
        self.assertEqual(embedding.to_ambient(()), (3, -1, 2))

    @settings(max_examples=50, deadline=None)
    @given(st.lists(st.tuples(small_ints, small_ints, small_ints), min_size=1, max_size=5))
    def test_affine_embedding_recovers_points(self, points):
        reduced, embedding = hermite_affine_normalize(points)
        for original, coords in zip(points, reduced):
            self.assertEqual(embedding.to_ambient(coords), tuple(original))
            self.assertEqual(embedding.to_reduced(original), tuple(coords))

    @settings(max_examples=25, deadline=None)
    @given(st.lists(st.tuples(*[st.integers(min_value=-1, max_value=1)] * 3), min_size=1, max_size=4),
           st.integers(min_value=0, max_value=3))
    def test_normalization_preserves_dilate_counts(self, points, m):
        reduced, _ = hermite_affine_normalize(points)
        self.assertEqual(count_in_dilate(reduced, m), count_in_dilate(points, m))

    def test_cone_coordinates(self):
        _, embedding = hermite_affine_normalize([(1, 1), (3, 3)])
        cone_point = embedding.cone_to_ambient((1, 2))
        self.assertEqual(embedding.cone_to_reduced(cone_point), (1, 2))


if __name__ == '__main__':
    unittest.main()
