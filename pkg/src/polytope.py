"""
格多胞形模組
頂點表示、窮舉式凸包刻面、包含關係、伸縮格點枚舉、正規化體積
"""
import logging
from dataclasses import dataclass, field
from functools import lru_cache
from itertools import combinations
from typing import List, Sequence, Tuple

import numpy as np

from .errors import DimensionError, PolytopeFormatError, UsageError
from .exactmath import (
    AffineEmbedding,
    IntVector,
    determinant,
    hermite_affine_normalize,
    orthogonal_normal,
    pairing,
    primitive,
    rank_exact,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Facet:
    """不等式 ⟨normal, x⟩ ≥ offset（normal 為本原內法向量）"""
    normal: IntVector
    offset: int

    def value(self, x: Sequence[int]) -> int:
        return pairing(self.normal, x) - self.offset


@dataclass(frozen=True)
class FacetSystem:
    facets: Tuple[Facet, ...]

    def __len__(self) -> int:
        return len(self.facets)

    def __iter__(self):
        return iter(self.facets)

    def satisfied(self, x: Sequence[int], scale: int = 1) -> bool:
        """x 是否滿足 scale 倍伸縮後的所有不等式"""
        return all(pairing(f.normal, x) >= scale * f.offset for f in self.facets)

    def as_arrays(self) -> Tuple[np.ndarray, np.ndarray]:
        """(A, c)：A·x ≥ c，int64 陣列"""
        a = np.array([f.normal for f in self.facets], dtype=np.int64)
        c = np.array([f.offset for f in self.facets], dtype=np.int64)
        return a, c


def _canonical_points(points: Sequence[Sequence[int]]) -> Tuple[IntVector, ...]:
    return tuple(sorted({tuple(int(x) for x in p) for p in points}))


@lru_cache(maxsize=4096)
def _facets_of_points(points: Tuple[IntVector, ...]) -> Tuple[Facet, ...]:
    """
    滿維點集的刻面：對每個 d 點子集求超平面，保留所有點都在同一側者

    Args:
        points: 已去重、排序的點（調用者保證仿射張成為整個空間）
    """
    d = len(points[0])
    found = set()
    for subset in combinations(range(len(points)), d):
        base = points[subset[0]]
        edges = [[x - b for x, b in zip(points[i], base)] for i in subset[1:]]
        normal = orthogonal_normal(edges, d)
        if not any(normal):
            continue
        normal = primitive(normal)
        offset = pairing(normal, base)
        values = [pairing(normal, p) for p in points]
        if all(v >= offset for v in values):
            found.add(Facet(normal, offset))
        elif all(v <= offset for v in values):
            found.add(Facet(tuple(-x for x in normal), -offset))
    return tuple(sorted(found, key=lambda f: (f.normal, f.offset)))


@lru_cache(maxsize=4096)
def _hull_vertices(points: Tuple[IntVector, ...]) -> Tuple[IntVector, ...]:
    if len(points) == 1:
        return points
    reduced, embedding = hermite_affine_normalize(points)
    d = embedding.dim
    if d == 0:
        return points[:1]
    facets = _facets_of_points(_canonical_points(reduced))
    vertices = []
    for original, r in zip(points, reduced):
        tight = [f.normal for f in facets if f.value(r) == 0]
        # 頂點 ⟺ 通過它的刻面法向量張成整個對偶空間
        if len(tight) >= d and rank_exact([list(n) for n in tight]) == d:
            vertices.append(original)
    return tuple(vertices)


def convex_hull_vertices(points: Sequence[Sequence[int]]) -> List[IntVector]:
    """
    有限點集凸包的頂點（精確窮舉，適用小點集）

    Returns:
        字典序排列的頂點列表
    """
    if not points:
        raise PolytopeFormatError("點集為空")
    return list(_hull_vertices(_canonical_points(points)))


@dataclass(frozen=True)
class LatticePolytope:
    """
    格多胞形（頂點表示）

    建構時檢查：至少一個頂點、座標為整數、無重複、每個頂點都是極點
    """
    vertices: Tuple[IntVector, ...]
    name: str = field(default='', compare=False)

    def __post_init__(self):
        raw = list(self.vertices)
        if not raw:
            raise PolytopeFormatError("多胞形至少需要一個頂點", {'field': 'vertices'})
        rank = None
        clean = []
        for i, v in enumerate(raw):
            try:
                coords = list(v)
            except TypeError:
                raise PolytopeFormatError(f"第 {i} 個頂點不是座標陣列",
                                          {'field': f'vertices[{i}]'})
            for j, x in enumerate(coords):
                if isinstance(x, bool) or not isinstance(x, (int, np.integer)):
                    raise PolytopeFormatError(f"座標必須是整數: vertices[{i}][{j}] = {x!r}",
                                              {'field': f'vertices[{i}][{j}]', 'value': repr(x)})
            if rank is None:
                rank = len(coords)
            elif len(coords) != rank:
                raise PolytopeFormatError(
                    f"第 {i} 個頂點長度 {len(coords)} 與環境秩 {rank} 不一致",
                    {'field': f'vertices[{i}]', 'expected_length': rank})
            clean.append(tuple(int(x) for x in coords))

        if len(set(clean)) != len(clean):
            seen = set()
            duplicate = next(v for v in clean if v in seen or seen.add(v))
            raise PolytopeFormatError(f"重複頂點 {list(duplicate)}",
                                      {'field': 'vertices', 'duplicate': list(duplicate)})

        extreme = set(_hull_vertices(_canonical_points(clean)))
        for i, v in enumerate(clean):
            if v not in extreme:
                raise PolytopeFormatError(f"頂點 {list(v)} 不是極點",
                                          {'field': f'vertices[{i}]', 'vertex': list(v)})
        object.__setattr__(self, 'vertices', tuple(clean))

    @classmethod
    def from_points(cls, points: Sequence[Sequence[int]], name: str = '') -> 'LatticePolytope':
        """任意有限點集的凸包"""
        return cls(tuple(convex_hull_vertices(points)), name)

    @property
    def ambient_rank(self) -> int:
        return len(self.vertices[0])

    def to_dict(self) -> dict:
        return {'name': self.name, 'vertices': [list(v) for v in self.vertices]}

    def __repr__(self) -> str:
        label = self.name or 'P'
        return f"LatticePolytope({label}, {len(self.vertices)} vertices in ℤ^{self.ambient_rank})"


# ==================== 維度與正規化 ====================

@lru_cache(maxsize=1024)
def normalized(p: LatticePolytope) -> Tuple[LatticePolytope, AffineEmbedding]:
    """在仿射張成格的座標下重寫多胞形"""
    reduced, embedding = hermite_affine_normalize(p.vertices)
    return LatticePolytope(tuple(reduced), p.name), embedding


def dimension(p: LatticePolytope) -> int:
    return normalized(p)[1].dim


def is_full_dimensional(p: LatticePolytope) -> bool:
    return dimension(p) == p.ambient_rank


def _require_full_dimensional(p: LatticePolytope, operation: str):
    d = dimension(p)
    if d != p.ambient_rank:
        raise DimensionError(
            f"{operation} 需要滿維多胞形（dim={d}, ambient={p.ambient_rank}），請先 hermite_affine_normalize",
            {'polytope': p.to_dict(), 'dim': d})


@lru_cache(maxsize=1024)
def facet_system(p: LatticePolytope) -> FacetSystem:
    """
    滿維多胞形的不可約不等式描述

    Raises:
        DimensionError: 非滿維
    """
    _require_full_dimensional(p, 'facet_system')
    if p.ambient_rank == 0:
        return FacetSystem(())
    return FacetSystem(_facets_of_points(_canonical_points(p.vertices)))


# ==================== 格點 ====================

@lru_cache(maxsize=2048)
def _lattice_points_cached(p: LatticePolytope, m: int) -> Tuple[IntVector, ...]:
    d = p.ambient_rank
    if m == 0 or d == 0:
        return (tuple([0] * d),)

    verts = np.array(p.vertices, dtype=np.int64) * m
    lower = verts.min(axis=0)
    upper = verts.max(axis=0)
    axes = [np.arange(lo, hi + 1, dtype=np.int64) for lo, hi in zip(lower, upper)]
    grid = np.stack(np.meshgrid(*axes, indexing='ij'), axis=-1).reshape(-1, d)

    a, c = facet_system(p).as_arrays()
    inside = np.all(grid @ a.T >= m * c, axis=1)
    kept = grid[inside]
    # meshgrid(ij) 已是字典序，仍顯式排序
    order = np.lexsort(kept.T[::-1])
    return tuple(tuple(int(x) for x in row) for row in kept[order])


def lattice_points(p: LatticePolytope, m: int = 1) -> List[IntVector]:
    """
    第 m 個伸縮 mP 的所有格點（字典序）

    Args:
        p: 滿維多胞形
        m: 伸縮倍數（m = 0 返回原點）
    """
    if m < 0:
        raise UsageError(f"伸縮倍數必須 ≥ 0，收到 {m}")
    _require_full_dimensional(p, 'lattice_points')
    return list(_lattice_points_cached(p, m))


def contains_point(p: LatticePolytope, x: Sequence[int]) -> bool:
    """單一格點是否屬於 p（任意維度的 p）"""
    if len(x) != p.ambient_rank:
        raise UsageError("contains_point 維度不一致")
    reduced_p, embedding = normalized(p)
    r = embedding.to_reduced(x)
    if r is None:
        return False
    if embedding.dim == 0:
        return True
    return facet_system(reduced_p).satisfied(r)


def contains(p: LatticePolytope, q: LatticePolytope) -> bool:
    """Q ⊆ P：Q 的每個頂點都滿足 P 的刻面系統"""
    if p.ambient_rank != q.ambient_rank:
        raise UsageError(f"環境秩不一致: {p.ambient_rank} != {q.ambient_rank}")
    return all(contains_point(p, v) for v in q.vertices)


# ==================== 三角剖分與體積 ====================

def _pulling(points: Tuple[IntVector, ...]) -> List[Tuple[IntVector, ...]]:
    """滿維頂點集的拉取三角剖分（從字典序最小頂點出發，遞迴到不含它的刻面）"""
    d = len(points[0])
    if d == 0:
        return [points[:1]]
    if len(points) == d + 1:
        return [points]
    apex = min(points)
    simplices = []
    for facet in _facets_of_points(points):
        if facet.value(apex) == 0:
            continue
        on_facet = [v for v in points if facet.value(v) == 0]
        reduced, embedding = hermite_affine_normalize(on_facet)
        for cell in _pulling(_canonical_points(reduced)):
            simplices.append((apex,) + tuple(embedding.to_ambient(c) for c in cell))
    return simplices


@lru_cache(maxsize=1024)
def pulling_triangulation(p: LatticePolytope) -> Tuple[Tuple[IntVector, ...], ...]:
    """
    頂點拉取三角剖分（格三角剖分，頂點都是 p 的頂點）

    Returns:
        單形列表，每個單形是 d+1 個頂點
    """
    _require_full_dimensional(p, 'pulling_triangulation')
    return tuple(_pulling(_canonical_points(p.vertices)))


def simplex_volume(simplex: Sequence[Sequence[int]]) -> int:
    """單形的正規化體積 |det(邊矩陣)|"""
    base = simplex[0]
    edges = [[x - b for x, b in zip(v, base)] for v in simplex[1:]]
    return abs(determinant(edges))


@lru_cache(maxsize=1024)
def normalized_volume(p: LatticePolytope) -> int:
    """d! 乘以歐氏體積（任一格三角剖分上 |det| 的總和）"""
    _require_full_dimensional(p, 'normalized_volume')
    return sum(simplex_volume(s) for s in pulling_triangulation(p))


def dilate(p: LatticePolytope, m: int) -> LatticePolytope:
    if m < 1:
        raise UsageError("dilate 需要 m ≥ 1")
    return LatticePolytope(tuple(tuple(m * x for x in v) for v in p.vertices),
                           f"{m}·{p.name}" if p.name else '')
