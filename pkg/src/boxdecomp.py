"""
盒點分解模組
面的盒點與年齡、B_F(t)，以及 δ_P(t) = Σ_F B_F(t) · h_{link F}(t) 的分解計算
"""
import logging
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import gcd
from itertools import combinations
from typing import Dict, List, Sequence, Tuple

import numpy as np

from .ehrhart import DeltaPolynomial, delta_from_counts, ehrhart_counts
from .errors import InternalInconsistency, UsageError
from .exactmath import IntVector, RowReducer, adjugate, determinant
from .triangulation import Face, LatticeTriangulation, link_h_polynomial

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class BoxPoint:
    """
    盒點 w = Σ q_i · (v_i, 1)，0 < q_i < 1；age = w 的最後一個座標
    """
    face: Face
    w: IntVector
    q: Tuple[Fraction, ...]
    age: int

    def to_dict(self) -> Dict:
        return {'face': list(self.face), 'w': list(self.w),
                'q': [str(x) for x in self.q], 'age': self.age}


def _generators(T: LatticeTriangulation, face: Sequence[int]) -> List[IntVector]:
    return [tuple(T.points[i]) + (1,) for i in face]


def _parallelepiped_scan(generators: List[IntVector], half_open: bool) -> List[Tuple[IntVector, Tuple[Fraction, ...]]]:
    """
    掃描平行多面體 {Σ q_i g_i} 的外包盒，保留整數點

    half_open=False：0 < q_i < 1；half_open=True：0 ≤ q_i < 1
    """
    s = len(generators)
    e = np.array(generators, dtype=np.int64).T
    n = e.shape[0]

    chosen: List[int] = []
    reducer = RowReducer()
    for j in range(n):
        if reducer.add({i: int(v) for i, v in enumerate(e[j]) if v}):
            chosen.append(j)
        if len(chosen) == s:
            break
    square = e[chosen].tolist()
    det = determinant(square)
    adj = np.array(adjugate(square), dtype=np.int64)
    if det < 0:
        det, adj = -det, -adj

    lower = np.minimum(e, 0).sum(axis=1)
    upper = np.maximum(e, 0).sum(axis=1)
    axes = [np.arange(lower[j], upper[j] + 1, dtype=np.int64) for j in range(n - 1)]
    # 最後一列全為 1，所以最後座標（年齡）是 Σ q_i
    axes.append(np.arange(0 if half_open else 1, s, dtype=np.int64))
    grid = np.stack(np.meshgrid(*axes, indexing='ij'), axis=-1).reshape(-1, n)

    scaled_q = grid[:, chosen] @ adj.T
    consistent = np.all(scaled_q @ e.T == det * grid, axis=1)
    if half_open:
        in_box = np.all((scaled_q >= 0) & (scaled_q < det), axis=1)
    else:
        in_box = np.all((scaled_q > 0) & (scaled_q < det), axis=1)
    keep = consistent & in_box

    found = []
    for w, num in zip(grid[keep], scaled_q[keep]):
        found.append((tuple(int(x) for x in w), tuple(Fraction(int(x), det) for x in num)))
    found.sort()
    return found


def face_index(face: Sequence[int], T: LatticeTriangulation) -> int:
    """
    {(v_i, 1)} 生成子格在其飽和格中的指數（最大子式的最大公因數）
    = Σ_{G ⊆ F} #BOX(G)；指數為 1 的面沒有盒點
    """
    gens = _generators(T, face)
    if not gens:
        return 1
    columns = list(zip(*gens))
    g = 0
    for rows in combinations(range(len(columns)), len(gens)):
        g = gcd(g, determinant([columns[r] for r in rows]))
        if g == 1:
            return 1
    return abs(g)


@lru_cache(maxsize=65536)
def _box_points_cached(T: LatticeTriangulation, face: Face) -> Tuple[BoxPoint, ...]:
    if not face:
        return (BoxPoint((), tuple([0] * (T.dim + 1)), (), 0),)
    if len(face) == 1 or face_index(face, T) == 1:
        return ()
    return tuple(BoxPoint(face, w, q, w[-1])
                 for w, q in _parallelepiped_scan(_generators(T, face), half_open=False))


def box_points(face: Sequence[int], T: LatticeTriangulation) -> List[BoxPoint]:
    """
    BOX(F) 中的所有格點

    Args:
        face: T 的面（空面給出年齡 0 的零點）
        T: 格三角剖分

    Raises:
        UsageError: face 不是 T 的面
    """
    f = tuple(sorted(face))
    if f not in T.face_set:
        raise UsageError(f"{list(f)} 不是三角剖分的面", {'face': list(f)})
    return list(_box_points_cached(T, f))


def box_poly(face: Sequence[int], T: LatticeTriangulation) -> DeltaPolynomial:
    """B_F(t) = Σ_{w ∈ BOX(F)} t^{age(w)}"""
    points = box_points(face, T)
    if not points:
        return DeltaPolynomial((0,))
    coeffs = [0] * (max(b.age for b in points) + 1)
    for b in points:
        coeffs[b.age] += 1
    return DeltaPolynomial(tuple(coeffs))


def decomposition_table(T: LatticeTriangulation) -> List[Dict]:
    """每個帶盒點的面：(face, dim, B_F, h_link)，依面排序"""
    rows = []
    for face in T.faces:
        b = box_poly(face, T)
        if b.degree < 0:
            continue
        rows.append({
            'face': list(face),
            'dim': len(face) - 1,
            'box': b.to_list(),
            'link_h': link_h_polynomial(T, face).to_list(),
        })
    return rows


def box_delta(T: LatticeTriangulation, check: bool = True) -> DeltaPolynomial:
    """
    盒點分解計算 δ：Σ_{F ∈ T ∪ {∅}} B_F(t) · h_{link F}(t)

    三種 δ 算法中的分解法（`delta --method boxes`）；另兩種為
    ehrhart.delta_from_counts 與 orbring.orbifold_delta

    例：[0,2] 的平凡剖分（一條邊 {0,2}）：∅ 貢獻 1 · h_T = 1，
    邊貢獻 B = t 乘上 h({∅}) = 1，合計 1 + t

    Args:
        check: 與計數法 δ 比對

    Raises:
        InternalInconsistency: 與計數法不一致
    """
    total = DeltaPolynomial((0,))
    for face in T.faces:
        b = box_poly(face, T)
        if b.degree < 0:
            continue
        total = total + b * link_h_polynomial(T, face)

    if check:
        polytope = T.polytope
        counted = delta_from_counts(ehrhart_counts(polytope), T.dim)
        if counted != total:
            raise InternalInconsistency(
                f"❌ 盒點分解 δ {total.to_list()} 與計數 δ {counted.to_list()} 不一致",
                {'boxes': total.to_list(), 'count': counted.to_list(),
                 'triangulation': T.to_dict()})
    return total


# ==================== 結構檢查 ====================

def check_parallelepiped_partition(T: LatticeTriangulation) -> Dict:
    """
    每個最大單形 S：半開平行多面體的格點（暴力掃描）依支撐分類，
    必須等於各面盒點，且總數 = |det S|
    """
    checked = 0
    for simplex in T.maximal_simplices:
        scanned = _parallelepiped_scan(_generators(T, simplex), half_open=True)
        volume = T.simplex_volume(simplex)
        by_face = sum(len(box_points(f, T)) for k in range(len(simplex) + 1)
                      for f in combinations(simplex, k))
        if len(scanned) != volume or by_face != volume:
            raise InternalInconsistency(
                "半開平行多面體分割不成立",
                {'simplex': list(simplex), 'volume': volume,
                 'scanned': len(scanned), 'by_face': by_face})
        for w, q in scanned:
            support = tuple(i for i, x in zip(simplex, q) if x != 0)
            if w not in {b.w for b in box_points(support, T)}:
                raise InternalInconsistency("格點不在其支撐面的盒中",
                                            {'simplex': list(simplex), 'w': list(w)})
        checked += 1
    return {'simplices': checked}


def check_age_symmetry(T: LatticeTriangulation) -> Dict:
    """w ∈ BOX(F) ⟺ Σ(v_i, 1) - w ∈ BOX(F)，年齡兩兩相加為 dim F + 1"""
    faces_with_points = 0
    for face in T.faces:
        if not face:
            continue
        points = box_points(face, T)
        if not points:
            continue
        faces_with_points += 1
        total = [sum(col) for col in zip(*_generators(T, face))]
        ws = {b.w for b in points}
        for b in points:
            mirror = tuple(t - x for t, x in zip(total, b.w))
            if mirror not in ws or b.age + mirror[-1] != len(face):
                raise InternalInconsistency("盒點年齡對稱性不成立",
                                            {'face': list(face), 'w': list(b.w)})
    return {'faces': faces_with_points}
