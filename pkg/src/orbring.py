"""
變形群環模組
ℚ[N×ℤ]^Δ 的單項式（錐點）、變形乘法、一次線性關係 θ_u、
商環各次分量的維度、限制映射 j 與逐次滿射檢查

次數 deg y^v = ψ(v) = v 的最後一個座標
"""
import logging
from dataclasses import dataclass
from functools import cached_property, lru_cache
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .config import load_config
from .ehrhart import DeltaPolynomial
from .errors import InternalInconsistency, UsageError
from .exactmath import AffineEmbedding, IntVector, Row, RowReducer, adjugate, determinant, pairing
from .polytope import lattice_points
from .triangulation import Face, LatticeTriangulation, pair_map

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ConePoint:
    """錐 σ 中的格點 v ∈ N×ℤ，carrier 是包含它的最小面（v = 0 時為空面）"""
    v: IntVector
    carrier: Face

    @property
    def degree(self) -> int:
        return self.v[-1]

    def to_dict(self) -> Dict:
        return {'v': list(self.v), 'carrier': list(self.carrier)}


@dataclass(frozen=True)
class RelationGenerator:
    """θ_u = Σ_i ⟨(v_i, 1), u⟩ y^{(v_i, 1)}，i 走遍 T 的頂點"""
    u: IntVector
    terms: Tuple[Tuple[ConePoint, int], ...]

    def to_dict(self) -> Dict:
        return {'u': list(self.u),
                'terms': [{'v': list(p.v), 'coefficient': c} for p, c in self.terms]}


@dataclass(frozen=True)
class GradedSlice:
    """
    商環的第 k 次分量：單項式基底 + 關係矩陣（稀疏列）

    pivot_columns 來自列階梯形，其餘欄對應的單項式構成商空間的基底
    """
    degree: int
    basis: Tuple[ConePoint, ...]
    relation_rows: Tuple[Row, ...]
    rank: int
    pivot_columns: Tuple[int, ...]

    @property
    def dimension(self) -> int:
        return len(self.basis) - self.rank

    @cached_property
    def column_of(self) -> Dict[IntVector, int]:
        return {p.v: i for i, p in enumerate(self.basis)}

    @property
    def standard_monomials(self) -> List[ConePoint]:
        pivots = set(self.pivot_columns)
        return [p for i, p in enumerate(self.basis) if i not in pivots]

    @property
    def relation_matrix(self) -> List[List[int]]:
        n = len(self.basis)
        return [[row.get(j, 0) for j in range(n)] for row in self.relation_rows]


# ==================== 錐點 ====================

@lru_cache(maxsize=512)
def _cone_slice(T: LatticeTriangulation, k: int) -> Tuple[ConePoint, ...]:
    d = T.dim
    if k == 0:
        return (ConePoint(tuple([0] * (d + 1)), ()),)

    points = lattice_points(T.polytope, k)
    n = len(points)
    x = np.array(points, dtype=np.int64).reshape(n, d)
    x1 = np.hstack([x, np.full((n, 1), k, dtype=np.int64)])

    carriers: List[Optional[Face]] = [None] * n
    remaining = np.arange(n)
    for simplex in T.maximal_simplices:
        e = [[T.points[i][r] for i in simplex] for r in range(d)] + [[1] * len(simplex)]
        det = determinant(e)
        adj = np.array(adjugate(e), dtype=np.int64)
        if det < 0:
            adj = -adj
        # 重心座標（乘以 |det|）
        lam = x1[remaining] @ adj.T
        inside = np.all(lam >= 0, axis=1)
        for idx, row in zip(remaining[inside], lam[inside]):
            carriers[idx] = tuple(s for s, value in zip(simplex, row) if value > 0)
        remaining = remaining[~inside]
        if remaining.size == 0:
            break
    if remaining.size:
        raise InternalInconsistency("點定位失敗：有格點不在任何單形中",
                                    {'degree': k, 'points': [list(points[i]) for i in remaining[:5]]})
    return tuple(ConePoint(tuple(p) + (k,), c) for p, c in zip(points, carriers))


def cone_points(T: LatticeTriangulation, k: int) -> List[ConePoint]:
    """第 k 次的單項式基底（kP 的格點 x 對應 v = (x, k)），依字典序"""
    if k < 0:
        raise UsageError(f"次數必須 ≥ 0，收到 {k}")
    return list(_cone_slice(T, k))


def vertex_monomial(T: LatticeTriangulation, i: int) -> ConePoint:
    return ConePoint(tuple(T.points[i]) + (1,), (i,))


def deformed_multiply(a: ConePoint, b: ConePoint, T: LatticeTriangulation) -> Optional[ConePoint]:
    """
    y^a · y^b = y^{a+b}（carrier(a) ∪ carrier(b) 是 T 的面），否則為 0（返回 None）
    """
    union = tuple(sorted(set(a.carrier) | set(b.carrier)))
    if union not in T.face_set:
        return None
    return ConePoint(tuple(x + y for x, y in zip(a.v, b.v)), union)


# ==================== 關係與分次分量 ====================

def standard_dual_basis(n: int) -> Tuple[IntVector, ...]:
    return tuple(tuple(int(i == j) for j in range(n)) for i in range(n))


def random_unimodular_basis(n: int, seed: int, steps: int = 24) -> Tuple[IntVector, ...]:
    """以隨機初等列運算得到 ℤ^n 的另一組基底（行列式 ±1）"""
    rng = np.random.default_rng(seed)
    rows = [list(r) for r in standard_dual_basis(n)]
    if n < 2:
        return tuple(tuple(r) for r in rows)
    for _ in range(steps):
        i, j = (int(x) for x in rng.choice(n, size=2, replace=False))
        factor = int(rng.integers(-2, 3))
        rows[i] = [a + factor * b for a, b in zip(rows[i], rows[j])]
        if rng.random() < 0.3:
            rows[i], rows[j] = rows[j], rows[i]
    if abs(determinant(rows)) != 1:
        raise InternalInconsistency("隨機基底不是么模的", {'rows': rows})
    return tuple(tuple(r) for r in rows)


def relation_generators(T: LatticeTriangulation,
                        dual_basis: Optional[Sequence[IntVector]] = None) -> List[RelationGenerator]:
    """對偶基底中每個 u 的 θ_u（d+1 個）"""
    basis = dual_basis or standard_dual_basis(T.dim + 1)
    generators = []
    for u in basis:
        terms = tuple((vertex_monomial(T, i), pairing(tuple(T.points[i]) + (1,), u))
                      for i in T.vertex_indices)
        generators.append(RelationGenerator(tuple(u), terms))
    return generators


@lru_cache(maxsize=256)
def graded_slice(T: LatticeTriangulation, k: int,
                 dual_basis: Optional[Tuple[IntVector, ...]] = None) -> GradedSlice:
    """
    第 k 次分量：基底 = 次數 k 的單項式，關係 = { y^w · θ_u : ψ(w) = k - 1 }

    Args:
        dual_basis: M×ℤ 的基底（預設標準基底）
    """
    basis = _cone_slice(T, k)
    if k == 0:
        return GradedSlice(0, basis, (), 0, ())

    column = {p.v: i for i, p in enumerate(basis)}
    generators = relation_generators(T, dual_basis)
    star: Dict[Face, List[int]] = {}

    rows: List[Row] = []
    reducer = RowReducer()
    for w in _cone_slice(T, k - 1):
        allowed = star.get(w.carrier)
        if allowed is None:
            carrier = set(w.carrier)
            allowed = sorted({i for s in T.maximal_simplices if carrier <= set(s) for i in s})
            star[w.carrier] = allowed
        allowed_set = set(allowed)
        for theta in generators:
            row: Row = {}
            for monomial, coefficient in theta.terms:
                if coefficient == 0 or monomial.carrier[0] not in allowed_set:
                    continue
                target = tuple(x + y for x, y in zip(w.v, monomial.v))
                row[column[target]] = row.get(column[target], 0) + coefficient
            row = {j: c for j, c in row.items() if c}
            if row:
                rows.append(row)
                reducer.add(row)

    return GradedSlice(k, basis, tuple(rows), reducer.rank, tuple(reducer.pivot_columns))


def graded_dimension(T: LatticeTriangulation, k: int,
                     dual_basis: Optional[Tuple[IntVector, ...]] = None) -> int:
    """
    dim_ℚ 第 k 次商 = f_P(k) - rank(關係)

    Raises:
        InternalInconsistency: 維度為負
    """
    if k < 0:
        raise UsageError(f"次數必須 ≥ 0，收到 {k}")
    slice_k = graded_slice(T, k, dual_basis)
    if slice_k.dimension < 0:
        raise InternalInconsistency(f"第 {k} 次商維度為負", {'degree': k})
    return slice_k.dimension


def hilbert_vector(T: LatticeTriangulation, upto: Optional[int] = None,
                   dual_basis: Optional[Tuple[IntVector, ...]] = None) -> List[int]:
    """k = 0..upto 的分次維度（預設 upto = d）"""
    upto = T.dim if upto is None else upto
    return [graded_dimension(T, k, dual_basis) for k in range(upto + 1)]


def orbifold_delta(T: LatticeTriangulation, check_vanishing: bool = False) -> DeltaPolynomial:
    """
    商環的 Hilbert 向量作為 δ

    Args:
        check_vanishing: 額外檢查 k = d+1, d+2 的分量為零
    """
    d = T.dim
    if check_vanishing:
        for k in (d + 1, d + 2):
            dim_k = graded_dimension(T, k)
            if dim_k != 0:
                raise InternalInconsistency(f"❌ 第 {k} 次商維度應為 0，實得 {dim_k}",
                                            {'degree': k, 'dimension': dim_k})
    return DeltaPolynomial(tuple(hilbert_vector(T, d)))


# ==================== 限制映射 j ====================

class RestrictionMap:
    """
    j: ℚ[N×ℤ]^Δ → ℚ[N'×ℤ]^Σ，carrier 在 Q 內的單項式保留（換成 Q 的座標），其餘送到 0

    embedding 是 Q 的正規化嵌入（Q 約化座標 → P 約化座標）
    """

    def __init__(self, T: LatticeTriangulation, TQ: LatticeTriangulation, embedding: AffineEmbedding):
        self.T = T
        self.TQ = TQ
        self.embedding = embedding
        self.p_to_q: Dict[int, int] = {i: j for j, i in enumerate(pair_map(T, TQ, embedding))}

    def __call__(self, a: ConePoint) -> Optional[ConePoint]:
        if not all(i in self.p_to_q for i in a.carrier):
            return None
        carrier = tuple(sorted(self.p_to_q[i] for i in a.carrier))
        if carrier not in self.TQ.face_set:
            return None
        v = self.embedding.cone_to_reduced(a.v)
        if v is None:
            raise InternalInconsistency("限制映射：錐點不在 Q 的格中", {'v': list(a.v)})
        return ConePoint(v, carrier)

    def map_row(self, row: Row, source: GradedSlice, target: GradedSlice) -> Row:
        """把 P 側的一列（單項式係數）送到 Q 側"""
        image: Row = {}
        for col, coefficient in row.items():
            mapped = self(source.basis[col])
            if mapped is None:
                continue
            j = target.column_of[mapped.v]
            image[j] = image.get(j, 0) + coefficient
        return {j: c for j, c in image.items() if c}


def restriction_j(a: ConePoint, T: LatticeTriangulation, TQ: LatticeTriangulation,
                  embedding: AffineEmbedding) -> Optional[ConePoint]:
    return RestrictionMap(T, TQ, embedding)(a)


def check_ring_hom(T: LatticeTriangulation, TQ: LatticeTriangulation, embedding: AffineEmbedding,
                   sample_count: Optional[int] = None, seed: int = 0,
                   max_degree: Optional[int] = None) -> Tuple[bool, Optional[Dict]]:
    """
    抽樣檢查 j(a·b) = j(a)·j(b)

    Returns:
        (是否通過, 第一個反例)
    """
    cfg = load_config()['ring_check']
    sample_count = sample_count or cfg['samples']
    max_degree = cfg['max_degree'] if max_degree is None else max_degree
    j = RestrictionMap(T, TQ, embedding)

    pool = [p for k in range(max_degree + 1) for p in _cone_slice(T, k)]
    inside_q = [p for p in pool if j(p) is not None]
    rng = np.random.default_rng(seed)
    for n in range(sample_count):
        a = pool[int(rng.integers(len(pool)))]
        # 一半的樣本讓 b 落在 Q 內，才會測到非零乘積
        source = inside_q if inside_q and n % 2 else pool
        b = source[int(rng.integers(len(source)))]

        product = deformed_multiply(a, b, T)
        lhs = j(product) if product is not None else None
        ja, jb = j(a), j(b)
        rhs = deformed_multiply(ja, jb, TQ) if ja is not None and jb is not None else None
        if (lhs is None) != (rhs is None) or (lhs is not None and lhs.v != rhs.v):
            counterexample = {
                'a': a.to_dict(), 'b': b.to_dict(),
                'j_of_product': lhs.to_dict() if lhs else None,
                'product_of_j': rhs.to_dict() if rhs else None,
            }
            logger.error(f"❌ 環同態檢查失敗: {counterexample}")
            return False, counterexample
    return True, None


def induced_surjectivity(T: LatticeTriangulation, TQ: LatticeTriangulation,
                         embedding: AffineEmbedding, k: int) -> bool:
    """
    j 誘導的第 k 次商映射 A_P,k → A_Q,k 是否滿射

    同時檢查：j 把 P 側關係送進 Q 側關係（映射良定），
    且 j(θ^P) 與 θ^Q 張成相同空間

    Raises:
        InternalInconsistency: 映射不良定
    """
    if k < 0:
        raise UsageError(f"次數必須 ≥ 0，收到 {k}")
    j = RestrictionMap(T, TQ, embedding)
    source = graded_slice(T, k)
    target = graded_slice(TQ, k)
    if k == 0:
        return target.dimension == 1 and j(source.basis[0]) is not None

    image_rows = [j.map_row(row, source, target) for row in source.relation_rows]
    combined = RowReducer()
    for row in target.relation_rows:
        combined.add(row)
    for row in image_rows:
        if combined.add(row):
            raise InternalInconsistency(f"j 在第 {k} 次沒有把關係送進關係",
                                        {'degree': k, 'row': {str(c): v for c, v in row.items()}})

    if k == 1:
        _check_generator_spans(j, T, TQ)

    quotient = RowReducer()
    quotient.pivots = dict(combined.pivots)
    for monomial in source.standard_monomials:
        mapped = j(monomial)
        if mapped is not None:
            quotient.add({target.column_of[mapped.v]: 1})
    image_dim = quotient.rank - combined.rank
    surjective = image_dim == target.dimension
    if not surjective:
        logger.error(f"❌ 第 {k} 次不是滿射: image={image_dim}, target={target.dimension}")
    return surjective


def _check_generator_spans(j: RestrictionMap, T: LatticeTriangulation, TQ: LatticeTriangulation):
    degree_one_p = graded_slice(T, 1)
    degree_one_q = graded_slice(TQ, 1)

    def as_row(theta: RelationGenerator, slice_: GradedSlice) -> Row:
        return {slice_.column_of[m.v]: c for m, c in theta.terms if c}

    images = [j.map_row(as_row(g, degree_one_p), degree_one_p, degree_one_q)
              for g in relation_generators(T)]
    q_rows = [as_row(g, degree_one_q) for g in relation_generators(TQ)]

    only_images = RowReducer()
    for row in images:
        only_images.add(row)
    both = RowReducer()
    for row in images + q_rows:
        both.add(row)
    only_q = RowReducer()
    for row in q_rows:
        only_q.add(row)
    if not (only_images.rank == both.rank == only_q.rank):
        raise InternalInconsistency("j(θ^P) 與 θ^Q 張成不同空間",
                                    {'images': only_images.rank, 'q': only_q.rank, 'both': both.rank})
