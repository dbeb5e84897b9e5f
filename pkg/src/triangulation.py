"""
正則格三角剖分模組
提升高度 → 下凸包（精確禮物包裝法）、巢狀多胞形對的相容三角剖分、
面 / 鏈環 / f 向量 / h 多項式、么模性

所有點都以約化後的滿維座標表示；面是點索引的排序元組，空面為 ()
"""
import logging
from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from itertools import combinations
from typing import Dict, FrozenSet, List, Optional, Sequence, Set, Tuple

import numpy as np
from sympy import Poly, symbols
from tenacity import Retrying, retry_if_exception_type, stop_after_attempt

from .config import load_config
from .ehrhart import DeltaPolynomial
from .errors import (
    ContainmentError,
    DimensionError,
    InternalInconsistency,
    NotGeneric,
    UsageError,
    VerificationFailed,
)
from .exactmath import (
    AffineEmbedding,
    IntVector,
    adjugate,
    determinant,
    hermite_affine_normalize,
    orthogonal_normal,
    pairing,
)
from .polytope import (
    LatticePolytope,
    contains,
    contains_point,
    convex_hull_vertices,
    facet_system,
    lattice_points,
    normalized,
    normalized_volume,
)

logger = logging.getLogger(__name__)

Face = Tuple[int, ...]

_t = symbols('t')


@dataclass(frozen=True)
class LatticeTriangulation:
    """
    正則格三角剖分

    points 是 P 的全部格點（索引即點編號），heights 為對應的提升高度，
    maximal_simplices 是 d+1 個點索引的排序元組（字典序排列）
    """
    points: Tuple[IntVector, ...]
    heights: Tuple[int, ...]
    maximal_simplices: Tuple[Face, ...]
    polytope: Optional[LatticePolytope] = field(default=None, compare=False)

    @cached_property
    def _fingerprint(self) -> int:
        return hash((self.points, self.heights, self.maximal_simplices))

    def __hash__(self) -> int:
        return self._fingerprint

    @property
    def dim(self) -> int:
        return len(self.points[0])

    @cached_property
    def vertex_indices(self) -> Tuple[int, ...]:
        return tuple(sorted({i for s in self.maximal_simplices for i in s}))

    @property
    def vertex_set(self) -> List[IntVector]:
        return [self.points[i] for i in self.vertex_indices]

    @cached_property
    def faces(self) -> Tuple[Face, ...]:
        found: Set[Face] = set()
        for simplex in self.maximal_simplices:
            for k in range(len(simplex) + 1):
                found.update(combinations(simplex, k))
        return tuple(sorted(found, key=lambda f: (len(f), f)))

    @cached_property
    def face_set(self) -> FrozenSet[Face]:
        return frozenset(self.faces)

    @cached_property
    def point_index(self) -> Dict[IntVector, int]:
        return {p: i for i, p in enumerate(self.points)}

    def is_face(self, face: Sequence[int]) -> bool:
        return tuple(sorted(face)) in self.face_set

    def simplex_volume(self, simplex: Face) -> int:
        base = self.points[simplex[0]]
        edges = [[x - b for x, b in zip(self.points[i], base)] for i in simplex[1:]]
        return abs(determinant(edges))

    def to_dict(self) -> Dict:
        return {
            'dim': self.dim,
            'points': [list(p) for p in self.points],
            'heights': list(self.heights),
            'maximal_simplices': [list(s) for s in self.maximal_simplices],
        }


# ==================== 下凸包 ====================

class _LowerHull:
    """提升點集的下凸包（只處理滿維點集）"""

    def __init__(self, points: Sequence[IntVector], heights: Sequence[int], polytope: LatticePolytope):
        self.polytope = polytope
        self.points = [tuple(p) for p in points]
        self.heights = [int(h) for h in heights]
        self.dim = len(self.points[0])
        self._x = np.array(self.points, dtype=object).reshape(len(self.points), self.dim)
        self._x1 = np.hstack([self._x, np.ones((len(self.points), 1), dtype=object)])
        self._h = np.array(self.heights, dtype=object)

    def _side_normal(self, ridge: Face) -> IntVector:
        base = self.points[ridge[0]]
        edges = [[x - b for x, b in zip(self.points[i], base)] for i in ridge[1:]]
        return orthogonal_normal(edges, self.dim)

    def _gap(self, rows: List[List[int]], rhs: List[int]) -> np.ndarray:
        """
        解出仿射函數 D·φ(x) = c·(x,1)（D > 0），返回各點的 D·h - c·(x,1)
        """
        det = determinant(rows)
        if det == 0:
            raise InternalInconsistency("下凸包：支撐超平面退化", {'rows': rows})
        adj = adjugate(rows)
        c = [sum(a * r for a, r in zip(adj_row, rhs)) for adj_row in adj]
        if det < 0:
            det, c = -det, [-x for x in c]
        return det * self._h - self._x1.dot(np.array(c, dtype=object))

    def pivot(self, ridge: Face, normal: IntVector, side: int) -> Optional[Face]:
        """
        繞著脊 ridge 往 side 一側翻轉，找出相鄰的下凸包胞腔

        Returns:
            胞腔（d+1 個點索引），該側沒有點時返回 None

        Raises:
            NotGeneric: 胞腔不是單形
        """
        rows = [list(self.points[i]) + [1] for i in ridge] + [list(normal) + [0]]
        rhs = [self.heights[i] for i in ridge] + [0]
        gap = self._gap(rows, rhs)
        offset = pairing(normal, self.points[ridge[0]])
        t = side * (self._x.dot(np.array(normal, dtype=object)) - offset)

        candidates = [i for i in range(len(self.points)) if t[i] > 0]
        if not candidates:
            return None
        best = candidates[0]
        for q in candidates[1:]:
            if gap[q] * t[best] < gap[best] * t[q]:
                best = q

        residual = gap * t[best] - gap[best] * t
        below = [i for i in range(len(self.points)) if residual[i] < 0]
        if below:
            raise InternalInconsistency("下凸包：翻轉後仍有點位於超平面下方",
                                        {'ridge': list(ridge), 'below': below})
        on_plane = [i for i in range(len(self.points)) if residual[i] == 0]
        if any(t[i] < 0 for i in on_plane):
            raise NotGeneric("下凸包胞腔跨越脊", {'ridge': list(ridge), 'cell': on_plane})

        if len(on_plane) == self.dim + 1:
            cell = tuple(on_plane)
        else:
            extreme = set(convex_hull_vertices([self.points[i] for i in on_plane]))
            cell = tuple(i for i in on_plane if self.points[i] in extreme)
        if len(cell) != self.dim + 1 or not set(ridge) <= set(cell):
            raise NotGeneric(
                f"下凸包胞腔有 {len(cell)} 個極點（需要 {self.dim + 1}）",
                {'cell': [list(self.points[i]) for i in cell],
                 'on_plane': [list(self.points[i]) for i in on_plane]})
        return cell

    def opposite_side(self, ridge: Face, normal: IntVector, apex: int) -> int:
        value = pairing(normal, self.points[apex]) - pairing(normal, self.points[ridge[0]])
        return -1 if value > 0 else 1

    def start_cell(self) -> Face:
        """以 P 的第一個刻面遞迴求出邊界脊，再往內部翻轉"""
        facet = facet_system(self.polytope).facets[0]
        on_facet = [i for i, p in enumerate(self.points) if facet.value(p) == 0]
        reduced, embedding = hermite_affine_normalize([self.points[i] for i in on_facet])
        facet_polytope = LatticePolytope(tuple(
            embedding.to_reduced(v) for v in self.polytope.vertices if facet.value(v) == 0))
        sub_cells = _lower_cells(reduced, [self.heights[i] for i in on_facet], facet_polytope)
        ridge = tuple(sorted(on_facet[j] for j in sub_cells[0]))

        normal = self._side_normal(ridge)
        inside = next(i for i, p in enumerate(self.points) if facet.value(p) > 0)
        value = pairing(normal, self.points[inside]) - pairing(normal, self.points[ridge[0]])
        cell = self.pivot(ridge, normal, 1 if value > 0 else -1)
        if cell is None:
            raise InternalInconsistency("下凸包：邊界脊內側沒有點", {'ridge': list(ridge)})
        return cell

    def cells(self) -> List[Face]:
        first = self.start_cell()
        found: Set[Face] = set()
        done: Set[Face] = set()
        queue = deque([first])
        while queue:
            cell = queue.popleft()
            if cell in found:
                continue
            found.add(cell)
            for k in range(len(cell)):
                ridge = cell[:k] + cell[k + 1:]
                if ridge in done:
                    continue
                done.add(ridge)
                normal = self._side_normal(ridge)
                neighbour = self.pivot(ridge, normal, self.opposite_side(ridge, normal, cell[k]))
                if neighbour is not None and neighbour not in found:
                    queue.append(neighbour)
        return sorted(found)


def _lower_cells(points: Sequence[IntVector], heights: Sequence[int],
                 polytope: LatticePolytope) -> List[Face]:
    if len(points[0]) == 0:
        return [(0,)]
    return _LowerHull(points, heights, polytope).cells()


def regular_subdivision(points: Sequence[Sequence[int]], heights: Sequence[int],
                        polytope: Optional[LatticePolytope] = None) -> LatticeTriangulation:
    """
    提升點集下凸包的投影

    Args:
        points: P ∩ N（約化後的滿維座標）
        heights: 每個點一個整數高度
        polytope: 已知的多胞形（省略時取點集凸包）

    Returns:
        LatticeTriangulation；胞腔上多餘的非極點不會成為頂點

    Raises:
        NotGeneric: 有胞腔不是單形（請換高度重試）
    """
    pts = [tuple(int(x) for x in p) for p in points]
    if not pts:
        raise UsageError("regular_subdivision 需要非空點集")
    if len(heights) != len(pts):
        raise UsageError(f"高度數量 {len(heights)} 與點數 {len(pts)} 不一致")
    if len(set(pts)) != len(pts):
        raise UsageError("regular_subdivision 的點必須互異")
    _, embedding = hermite_affine_normalize(pts)
    if embedding.dim != len(pts[0]):
        raise DimensionError("regular_subdivision 需要滿維點集", {'dim': embedding.dim})

    polytope = polytope or LatticePolytope.from_points(pts)
    cells = _lower_cells(pts, heights, polytope)
    return LatticeTriangulation(
        points=tuple(pts),
        heights=tuple(int(h) for h in heights),
        maximal_simplices=tuple(cells),
        polytope=polytope,
    )


def generic_heights(n: int, seed: int, penalty: Optional[Sequence[int]] = None,
                    bits: Optional[int] = None) -> List[int]:
    """
    以種子決定的通用高度，均勻取自 [0, 2^bits)（預設 bits = 16）

    Args:
        n: 點數
        seed: 亂數種子
        penalty: 每個點額外加上的懲罰值
    """
    if n < 1:
        raise UsageError("generic_heights 需要 n ≥ 1")
    bits = bits or load_config()['heights']['bits']
    rng = np.random.default_rng(seed)
    values = [int(x) for x in rng.integers(0, 2 ** bits, size=n)]
    if penalty is not None:
        if len(penalty) != n:
            raise UsageError("penalty 長度與點數不一致")
        values = [v + int(p) for v, p in zip(values, penalty)]
    return values


def _reseed(seed: int, attempt: int) -> int:
    return seed if attempt == 1 else seed * 1_000_003 + attempt


def regular_triangulation(p: LatticePolytope, seed: int = 0,
                          config: Optional[Dict] = None) -> LatticeTriangulation:
    """
    以通用高度建立多胞形的正則格三角剖分（在 P 自身的約化座標中）

    NotGeneric 時換種子重試，最多 subdivision.max_reseeds 次
    """
    config = config or load_config()
    reduced, _ = normalized(p)
    points = lattice_points(reduced, 1)
    bits = config['heights']['bits']

    for attempt in Retrying(stop=stop_after_attempt(config['subdivision']['max_reseeds']),
                            retry=retry_if_exception_type(NotGeneric), reraise=True):
        with attempt:
            number = attempt.retry_state.attempt_number
            if number > 1:
                logger.warning(f"⚠️ 高度不夠通用，重新取種子（第 {number} 次）")
            heights = generic_heights(len(points), _reseed(seed, number), bits=bits)
            triangulation = regular_subdivision(points, heights, polytope=reduced)
    return triangulation


# ==================== 正則性憑證 ====================

def _simplex_matrix(points: Sequence[IntVector], simplex: Face) -> List[List[int]]:
    return [list(points[i]) + [1] for i in simplex]


def verify_regularity(triangulation: LatticeTriangulation, recompute: bool = True) -> Dict:
    """
    正則性憑證

    1. 每個單形的提升超平面支撐全部提升點，且只碰到單形內的點
    2. 覆蓋：Σ|det| = 正規化體積
    3. （recompute）以儲存的高度重算下凸包，胞腔完全相同

    Raises:
        VerificationFailed: 任何一項失敗
    """
    T = triangulation
    d = T.dim
    certificate = {'simplices': len(T.maximal_simplices)}
    if d == 0:
        return certificate

    x1 = [list(p) + [1] for p in T.points]
    for simplex in T.maximal_simplices:
        rows = _simplex_matrix(T.points, simplex)
        det = determinant(rows)
        if det == 0:
            raise VerificationFailed("退化單形", {'simplex': list(simplex)})
        adj = adjugate(rows)
        c = [sum(a * T.heights[i] for a, i in zip(adj_row, simplex)) for adj_row in adj]
        sign = 1 if det > 0 else -1
        # 重心座標 λ·det = adj(Mᵀ)·(x,1)
        bary = adjugate([list(col) for col in zip(*rows)])
        for q, row in enumerate(x1):
            gap = sign * (det * T.heights[q] - sum(ci * xi for ci, xi in zip(c, row)))
            if gap < 0:
                raise VerificationFailed("有點位於胞腔提升超平面下方",
                                         {'simplex': list(simplex), 'point': q})
            if gap == 0 and q not in simplex:
                lam = [sign * sum(a * xi for a, xi in zip(adj_row, row)) for adj_row in bary]
                if any(v < 0 for v in lam):
                    raise VerificationFailed("提升超平面接觸單形外的點",
                                             {'simplex': list(simplex), 'point': q})

    total = sum(T.simplex_volume(s) for s in T.maximal_simplices)
    polytope = T.polytope or LatticePolytope.from_points(T.points)
    volume = normalized_volume(polytope)
    certificate['volume'] = volume
    if total != volume:
        raise VerificationFailed(f"覆蓋檢查失敗: Σ|det| = {total} != {volume}", certificate)

    if recompute:
        again = _lower_cells(T.points, T.heights, polytope)
        if tuple(again) != T.maximal_simplices:
            raise VerificationFailed("重算下凸包結果不同",
                                     {'stored': [list(s) for s in T.maximal_simplices],
                                      'recomputed': [list(s) for s in again]})
    certificate['regular'] = True
    return certificate


# ==================== 相容三角剖分 ====================

def restrict_to(triangulation: LatticeTriangulation, indices: Sequence[int]) -> List[Face]:
    """所有頂點都在 indices 內的面（含空面）"""
    allowed = set(indices)
    return [f for f in triangulation.faces if set(f) <= allowed]


def _maximal(faces: Sequence[Face]) -> List[Face]:
    ordered = sorted(faces, key=len, reverse=True)
    kept: List[Face] = []
    for f in ordered:
        if not any(set(f) <= set(g) for g in kept):
            kept.append(f)
    return sorted(kept)


def triangulation_of_pair(p: LatticePolytope, q: LatticePolytope, seed: int = 0,
                          config: Optional[Dict] = None) -> Tuple[LatticeTriangulation, LatticeTriangulation]:
    """
    P ⊇ Q 的相容正則三角剖分

    Q 的格點取小的通用高度，P∖Q 的格點加上懲罰 M；建構後檢查 T 限制到 Q 的面
    恰好是 TQ 的面，失敗時 M 乘以 penalty_factor 並重抽高度

    Args:
        p: 滿維多胞形（P 的約化座標）
        q: 同座標下的子多胞形（可低維）

    Returns:
        (T, TQ)，TQ 在 Q 自身的約化座標中；TQ.points[j] 對應 T 的點 pair_map[j]

    Raises:
        ContainmentError: Q ⊄ P
        VerificationFailed: 重試次數用盡
    """
    config = config or load_config()
    pair_cfg = config['pair']
    bits = config['heights']['bits']
    if not contains(p, q):
        raise ContainmentError("Q 不包含於 P", {'P': p.to_dict(), 'Q': q.to_dict()})
    if p.ambient_rank != normalized(p)[1].dim:
        raise DimensionError("triangulation_of_pair 需要 P 為滿維", {'P': p.to_dict()})

    points = lattice_points(p, 1)
    in_q = [contains_point(q, x) for x in points]
    q_reduced, q_embedding = normalized(q)
    q_points = lattice_points(q_reduced, 1)
    index = {x: i for i, x in enumerate(points)}
    q_to_p = [index[q_embedding.to_ambient(y)] for y in q_points]

    certificate: Dict = {'seed': seed, 'P': p.to_dict(), 'Q': q.to_dict()}
    try:
        for attempt in Retrying(stop=stop_after_attempt(pair_cfg['max_attempts']),
                                retry=retry_if_exception_type((NotGeneric, VerificationFailed)),
                                reraise=True):
            with attempt:
                number = attempt.retry_state.attempt_number
                penalty_value = pair_cfg['penalty_start'] * pair_cfg['penalty_factor'] ** (number - 1)
                if number > 1:
                    logger.warning(f"⚠️ 相容三角剖分第 {number} 次嘗試，懲罰 M = {penalty_value}")
                penalty = [0 if inside else penalty_value for inside in in_q]
                heights = generic_heights(len(points), _reseed(seed, number), penalty, bits=bits)
                certificate.update({'attempt': number, 'penalty': penalty_value,
                                    'heights': heights})

                T = regular_subdivision(points, heights, polytope=p)
                verify_regularity(T, recompute=False)
                TQ = regular_subdivision(q_points, [heights[i] for i in q_to_p], polytope=q_reduced)
                verify_regularity(TQ, recompute=False)
                _check_restriction(T, TQ, q_to_p, [i for i, inside in enumerate(in_q) if inside])
    except (NotGeneric, VerificationFailed) as exc:
        certificate['last_error'] = exc.to_dict()
        logger.error(f"❌ 相容三角剖分失敗: {exc.message}")
        raise VerificationFailed("相容三角剖分在最大嘗試次數後仍未通過檢查", certificate) from exc

    logger.debug(f"✅ 相容三角剖分: |T| = {len(T.maximal_simplices)}, |TQ| = {len(TQ.maximal_simplices)}")
    return T, TQ


def _check_restriction(T: LatticeTriangulation, TQ: LatticeTriangulation,
                       q_to_p: Sequence[int], q_indices: Sequence[int]):
    """T 中頂點都在 Q 內的面 = TQ 的面（透過點對應）"""
    restricted = restrict_to(T, q_indices)
    expected = {tuple(sorted(q_to_p[j] for j in face)) for face in TQ.faces}
    if set(restricted) != expected:
        raise VerificationFailed(
            "T 限制到 Q 的面與 TQ 不一致",
            {'restricted_maximal': [list(f) for f in _maximal(restricted)],
             'tq_maximal': [sorted(q_to_p[j] for j in s) for s in TQ.maximal_simplices]})


def pair_map(T: LatticeTriangulation, TQ: LatticeTriangulation, embedding: AffineEmbedding) -> List[int]:
    """TQ 點索引 → T 點索引（embedding 為 Q 的正規化嵌入）"""
    return [T.point_index[embedding.to_ambient(y)] for y in TQ.points]


# ==================== 面、鏈環、h 多項式 ====================

def all_faces(triangulation: LatticeTriangulation) -> List[Face]:
    """全部面（含空面），依 (大小, 字典序) 排列"""
    return list(triangulation.faces)


def link(triangulation: LatticeTriangulation, face: Sequence[int]) -> List[Face]:
    """
    鏈環 { G : G ∩ F = ∅ 且 G ∪ F 是面 }（含空面）

    Raises:
        UsageError: F 不是 T 的面
    """
    f = tuple(sorted(face))
    if f not in triangulation.face_set:
        raise UsageError(f"{list(f)} 不是三角剖分的面", {'face': list(f)})
    if not f:
        return list(triangulation.faces)
    fset = set(f)
    found: Set[Face] = set()
    for simplex in triangulation.maximal_simplices:
        if fset <= set(simplex):
            rest = tuple(i for i in simplex if i not in fset)
            for k in range(len(rest) + 1):
                found.update(combinations(rest, k))
    return sorted(found, key=lambda g: (len(g), g))


def h_polynomial(faces: Sequence[Face], d_ref: int) -> DeltaPolynomial:
    """
    h(t) = Σ_F t^{dim F + 1} (1 - t)^{d_ref - dim F}

    Args:
        faces: 單純複形的全部面（含空面）
        d_ref: 參考維度（≥ 最大面維度）
    """
    sizes: Dict[int, int] = {}
    for f in faces:
        sizes[len(f)] = sizes.get(len(f), 0) + 1
    if sizes and max(sizes) - 1 > d_ref:
        raise UsageError(f"d_ref = {d_ref} 小於最大面維度 {max(sizes) - 1}")

    total = Poly(0, _t, domain='ZZ')
    for size, count in sizes.items():
        total += count * Poly(_t ** size, _t, domain='ZZ') * Poly(1 - _t, _t, domain='ZZ') ** (d_ref + 1 - size)
    h = DeltaPolynomial.from_poly(total)
    if not h.is_nonnegative():
        logger.warning(f"⚠️ h 多項式出現負係數: {h.to_list()}")
    return h


def h_vector(triangulation: LatticeTriangulation) -> DeltaPolynomial:
    return h_polynomial(triangulation.faces, triangulation.dim)


def link_h_polynomial(triangulation: LatticeTriangulation, face: Face) -> DeltaPolynomial:
    """鏈環的 h 多項式，參考維度 d - dim F - 1（空面用 d）"""
    d_ref = triangulation.dim - len(face)
    return h_polynomial(link(triangulation, face), d_ref)


def f_vector(triangulation: LatticeTriangulation) -> List[int]:
    """各維度的面數（dim = -1 .. d）"""
    counts = [0] * (triangulation.dim + 2)
    for f in triangulation.faces:
        counts[len(f)] += 1
    return counts


def is_unimodular(triangulation: LatticeTriangulation) -> bool:
    return all(triangulation.simplex_volume(s) == 1 for s in triangulation.maximal_simplices)
