"""
精確算術模組
整數 / 有理數向量與矩陣、Bareiss 行列式、稀疏列化簡求秩、Hermite 標準形、
仿射張成格的重新座標化

全部運算都是精確的（Python int 與 fractions.Fraction），不使用浮點數
"""
import logging
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from math import gcd, lcm
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from .errors import UsageError

logger = logging.getLogger(__name__)

IntVector = Tuple[int, ...]
Row = Dict[int, int]


def _as_rows(matrix) -> List[List]:
    """接受 list of lists 或 numpy 陣列，統一轉成 list of lists"""
    if isinstance(matrix, np.ndarray):
        if matrix.ndim != 2:
            raise UsageError(f"需要二維矩陣，收到 ndim={matrix.ndim}")
        return [list(row) for row in matrix.tolist()]
    return [list(row) for row in matrix]


def pairing(u: Sequence[int], v: Sequence[int]) -> int:
    """
    標準內積 ⟨u, v⟩（以對偶座標把 M×ℤ 視為 ℤ^{d+1}）

    Raises:
        UsageError: 長度不一致
    """
    if len(u) != len(v):
        raise UsageError(f"pairing 長度不一致: {len(u)} != {len(v)}",
                         {'u': list(u), 'v': list(v)})
    return sum(a * b for a, b in zip(u, v))


def transpose(matrix) -> List[List]:
    rows = _as_rows(matrix)
    if not rows:
        return []
    return [list(col) for col in zip(*rows)]


def primitive(vector: Sequence[int]) -> IntVector:
    """除以所有分量的最大公因數（零向量原樣返回）"""
    g = 0
    for x in vector:
        g = gcd(g, int(x))
    if g <= 1:
        return tuple(int(x) for x in vector)
    return tuple(int(x) // g for x in vector)


def determinant(matrix) -> int:
    """
    Bareiss 無分數消去法計算整數方陣行列式

    Args:
        matrix: n×n 整數矩陣（n = 0 時返回 1）
    """
    a = [[int(x) for x in row] for row in _as_rows(matrix)]
    n = len(a)
    if n == 0:
        return 1
    if any(len(row) != n for row in a):
        raise UsageError("determinant 需要方陣")

    sign = 1
    prev = 1
    for k in range(n - 1):
        if a[k][k] == 0:
            swap = next((i for i in range(k + 1, n) if a[i][k] != 0), None)
            if swap is None:
                return 0
            a[k], a[swap] = a[swap], a[k]
            sign = -sign
        pivot = a[k][k]
        for i in range(k + 1, n):
            aik = a[i][k]
            row_i = a[i]
            row_k = a[k]
            for j in range(k + 1, n):
                row_i[j] = (row_i[j] * pivot - aik * row_k[j]) // prev
        prev = pivot
    return sign * a[n - 1][n - 1]


def adjugate(matrix) -> List[List[int]]:
    """整數方陣的伴隨矩陣 adj(A)，滿足 A·adj(A) = det(A)·I"""
    a = [[int(x) for x in row] for row in _as_rows(matrix)]
    n = len(a)
    if n == 1:
        return [[1]]
    adj = [[0] * n for _ in range(n)]
    for i in range(n):
        for j in range(n):
            minor = [row[:j] + row[j + 1:] for k, row in enumerate(a) if k != i]
            # adj 是餘因子矩陣的轉置
            adj[j][i] = (-1) ** (i + j) * determinant(minor)
    return adj


def orthogonal_normal(vectors: Sequence[Sequence[int]], dim: int) -> IntVector:
    """
    廣義外積：ℤ^dim 中 dim-1 個向量的整數法向量

    ν_j = (-1)^j det(去掉第 j 欄的矩陣)；向量線性相依時得到零向量
    """
    rows = [list(v) for v in vectors]
    if len(rows) != dim - 1:
        raise UsageError(f"orthogonal_normal 需要 {dim - 1} 個向量，收到 {len(rows)}")
    normal = []
    for j in range(dim):
        minor = [row[:j] + row[j + 1:] for row in rows]
        normal.append((-1) ** j * determinant(minor))
    return tuple(normal)


# ==================== 稀疏列化簡 ====================

def _integer_row(row: Iterable) -> Row:
    """把有理數列放大成整數稀疏列"""
    values = list(row)
    denominators = [Fraction(x).denominator for x in values if x != 0]
    scale = lcm(*denominators) if denominators else 1
    return {j: int(Fraction(x) * scale) for j, x in enumerate(values) if x != 0}


def _primitive_row(row: Row) -> Row:
    g = 0
    for v in row.values():
        g = gcd(g, v)
    lead = row[min(row)]
    if lead < 0:
        g = -g
    if g in (0, 1):
        return row
    return {j: v // g for j, v in row.items()}


class RowReducer:
    """
    遞增式稀疏列化簡（整數係數、每列除以內容）

    pivots 以主元欄索引為鍵；每個主元列的最小欄就是它的主元欄，
    所以化簡結果是列階梯形，非主元欄對應商空間的標準基底
    """

    def __init__(self):
        self.pivots: Dict[int, Row] = {}

    @property
    def rank(self) -> int:
        return len(self.pivots)

    @property
    def pivot_columns(self) -> List[int]:
        return sorted(self.pivots)

    def reduce(self, row: Row) -> Row:
        """以現有主元化簡一列，返回餘列（空字典表示在張成空間內）"""
        r = {j: v for j, v in row.items() if v}
        while r:
            c = min(r)
            p = self.pivots.get(c)
            if p is None:
                return _primitive_row(r)
            a, b = p[c], r[c]
            g = gcd(a, b)
            a //= g
            b //= g
            new = {j: a * v for j, v in r.items()}
            for j, v in p.items():
                value = new.get(j, 0) - b * v
                if value:
                    new[j] = value
                else:
                    new.pop(j, None)
            r = _primitive_row(new) if new else new
        return r

    def add(self, row: Row) -> bool:
        """加入一列；線性獨立時返回 True"""
        r = self.reduce(row)
        if not r:
            return False
        self.pivots[min(r)] = r
        return True

    def contains(self, row: Row) -> bool:
        return not self.reduce(row)


def rank_exact(matrix) -> int:
    """
    有理數矩陣的精確秩（空矩陣秩為 0）

    Args:
        matrix: list of lists / numpy 陣列，元素為 int 或 Fraction
    """
    reducer = RowReducer()
    for row in _as_rows(matrix):
        reducer.add(_integer_row(row))
    return reducer.rank


def solve_exact(a, b: Sequence) -> Optional[Tuple[Fraction, ...]]:
    """
    解滿欄秩線性系統 a·x = b

    Returns:
        唯一解（Fraction 元組）；系統不相容時返回 None

    Raises:
        UsageError: 系統欄秩不足（解不唯一）
    """
    rows = _as_rows(a)
    m = len(rows)
    n = len(rows[0]) if rows else 0
    if len(b) != m:
        raise UsageError("solve_exact 維度不一致")
    aug = [[Fraction(x) for x in rows[i]] + [Fraction(b[i])] for i in range(m)]

    pivot_cols = []
    r = 0
    for c in range(n):
        pivot = next((i for i in range(r, m) if aug[i][c] != 0), None)
        if pivot is None:
            continue
        aug[r], aug[pivot] = aug[pivot], aug[r]
        inv = 1 / aug[r][c]
        aug[r] = [x * inv for x in aug[r]]
        for i in range(m):
            if i != r and aug[i][c] != 0:
                factor = aug[i][c]
                aug[i] = [x - factor * y for x, y in zip(aug[i], aug[r])]
        pivot_cols.append(c)
        r += 1
        if r == m:
            break

    if any(aug[i][n] != 0 for i in range(r, m)):
        return None
    if len(pivot_cols) < n:
        raise UsageError(f"solve_exact 系統欄秩不足: rank={len(pivot_cols)} < {n}")
    solution = [Fraction(0)] * n
    for i, c in enumerate(pivot_cols):
        solution[c] = aug[i][n]
    return tuple(solution)


# ==================== Hermite 標準形 ====================

def _ext_gcd(a: int, b: int) -> Tuple[int, int, int]:
    """返回 (g, x, y)，x·a + y·b = g ≥ 0"""
    old_r, r = a, b
    old_s, s = 1, 0
    old_t, t = 0, 1
    while r:
        q = old_r // r
        old_r, r = r, old_r - q * r
        old_s, s = s, old_s - q * s
        old_t, t = t, old_t - q * t
    if old_r < 0:
        return -old_r, -old_s, -old_t
    return old_r, old_s, old_t


def hermite_normal_form(matrix, ncols: Optional[int] = None) -> Tuple[List[List[int]], List[List[int]], int]:
    """
    欄式 Hermite 標準形

    Args:
        matrix: m×n 整數矩陣
        ncols: 當 m = 0 時需要指定欄數

    Returns:
        (H, U, rank)：matrix·U = H，U 為么模矩陣；H 的第 rank 欄之後全為零，
        因此 U 的最後 n - rank 欄是核格 {x : matrix·x = 0} 的 ℤ-基底
    """
    h = [[int(x) for x in row] for row in _as_rows(matrix)]
    m = len(h)
    n = len(h[0]) if m else (ncols or 0)
    u = [[int(i == j) for j in range(n)] for i in range(n)]

    def column_op(k: int, j: int, x: int, y: int, p: int, q: int):
        # (col_k, col_j) <- (x·col_k + y·col_j, p·col_k + q·col_j)
        for mat in (h, u):
            for row in mat:
                ck, cj = row[k], row[j]
                row[k] = x * ck + y * cj
                row[j] = p * ck + q * cj

    k = 0
    for i in range(m):
        if k == n:
            break
        for j in range(k + 1, n):
            b = h[i][j]
            if b == 0:
                continue
            a = h[i][k]
            g, x, y = _ext_gcd(a, b)
            column_op(k, j, x, y, -b // g, a // g)
        pivot = h[i][k]
        if pivot == 0:
            continue
        if pivot < 0:
            for mat in (h, u):
                for row in mat:
                    row[k] = -row[k]
            pivot = -pivot
        for j in range(k):
            q = h[i][j] // pivot
            if q:
                for mat in (h, u):
                    for row in mat:
                        row[j] -= q * row[k]
        k += 1
    return h, u, k


def integer_kernel_basis(matrix, ncols: int) -> List[IntVector]:
    """整數矩陣核格 {x ∈ ℤ^n : matrix·x = 0} 的基底（飽和格）"""
    _, u, rank = hermite_normal_form(matrix, ncols=ncols)
    return [tuple(u[i][j] for i in range(ncols)) for j in range(rank, ncols)]


def _sign_normalize(vector: IntVector) -> IntVector:
    lead = next((x for x in vector if x != 0), 0)
    return tuple(-x for x in vector) if lead < 0 else vector


# ==================== 仿射重新座標化 ====================

@dataclass(frozen=True)
class AffineEmbedding:
    """
    仿射嵌入資料：ambient = origin + Σ c_i · basis[i]

    basis 是 (仿射張成 ∩ 環境格) 的 ℤ-基底，所以重新座標化保持格點計數
    """
    origin: IntVector
    basis: Tuple[IntVector, ...]

    @property
    def ambient_rank(self) -> int:
        return len(self.origin)

    @property
    def dim(self) -> int:
        return len(self.basis)

    def to_ambient(self, coords: Sequence[int]) -> IntVector:
        point = list(self.origin)
        for c, b in zip(coords, self.basis):
            for j in range(len(point)):
                point[j] += c * b[j]
        return tuple(point)

    def linear_to_ambient(self, coords: Sequence[int]) -> IntVector:
        vec = [0] * self.ambient_rank
        for c, b in zip(coords, self.basis):
            for j in range(len(vec)):
                vec[j] += c * b[j]
        return tuple(vec)

    @cached_property
    def _left_inverse(self) -> Tuple[Tuple[int, ...], List[List[int]], int]:
        """選一組 dim 個獨立列，返回 (列索引, adj, det)"""
        if self.dim == 0:
            return (), [], 1
        columns = [list(b) for b in self.basis]
        rows = transpose(columns)
        chosen: List[int] = []
        reducer = RowReducer()
        for i, row in enumerate(rows):
            if reducer.add({j: v for j, v in enumerate(row) if v}):
                chosen.append(i)
            if len(chosen) == self.dim:
                break
        square = [rows[i] for i in chosen]
        return tuple(chosen), adjugate(square), determinant(square)

    def linear_to_reduced(self, vector: Sequence[int]) -> Optional[IntVector]:
        """
        線性部分的反映射；向量不在基底的 ℤ-張成內時返回 None
        """
        if self.dim == 0:
            return () if all(x == 0 for x in vector) else None
        chosen, adj, det = self._left_inverse
        rhs = [vector[i] for i in chosen]
        coords = []
        for adj_row in adj:
            num = sum(a * r for a, r in zip(adj_row, rhs))
            if num % det:
                return None
            coords.append(num // det)
        if self.linear_to_ambient(coords) != tuple(vector):
            return None
        return tuple(coords)

    def to_reduced(self, point: Sequence[int]) -> Optional[IntVector]:
        """環境座標 → 約化座標；不在仿射張成的格上時返回 None"""
        if len(point) != self.ambient_rank:
            raise UsageError("to_reduced 維度不一致")
        return self.linear_to_reduced([x - o for x, o in zip(point, self.origin)])

    def cone_to_reduced(self, vector: Sequence[int]) -> Optional[IntVector]:
        """
        錐點 (x, h) ∈ N×ℤ → 約化錐座標 (x', h)，其中 x = h·origin + B·x'
        """
        *x, h = vector
        linear = self.linear_to_reduced([xi - h * oi for xi, oi in zip(x, self.origin)])
        if linear is None:
            return None
        return linear + (h,)

    def cone_to_ambient(self, vector: Sequence[int]) -> IntVector:
        *x, h = vector
        lifted = self.linear_to_ambient(x)
        return tuple(h * o + v for o, v in zip(self.origin, lifted)) + (h,)


def hermite_affine_normalize(points: Sequence[Sequence[int]]) -> Tuple[List[IntVector], AffineEmbedding]:
    """
    把點集改寫成仿射張成格的座標（第一個點平移到原點）

    作法：差向量矩陣 D 的整數核給出正交補 K，再取 K 的整數核得到
    span(D) ∩ ℤ^n 的飽和基底（皆由欄式 Hermite 標準形求得）

    Args:
        points: 非空點列表

    Returns:
        (約化座標點列表, AffineEmbedding)
    """
    if not points:
        raise UsageError("hermite_affine_normalize 需要非空點列表")
    pts = [tuple(int(x) for x in p) for p in points]
    n = len(pts[0])
    if any(len(p) != n for p in pts):
        raise UsageError("點的維度不一致")
    origin = pts[0]
    diffs = [[x - o for x, o in zip(p, origin)] for p in pts[1:]]
    diffs = [row for row in diffs if any(row)]

    complement = integer_kernel_basis(diffs, n) if diffs else [
        tuple(int(i == j) for j in range(n)) for i in range(n)
    ]
    if complement:
        basis = integer_kernel_basis([list(c) for c in complement], n)
    else:
        basis = [tuple(int(i == j) for j in range(n)) for i in range(n)]
    basis = tuple(_sign_normalize(b) for b in basis)

    embedding = AffineEmbedding(origin=origin, basis=basis)
    reduced = []
    for p in pts:
        coords = embedding.to_reduced(p)
        if coords is None:
            # 差向量必然落在飽和格內，走到這裡代表基底計算有誤
            raise UsageError("重新座標化失敗", {'point': list(p)})
        reduced.append(coords)
    logger.debug(f"仿射重新座標化: ambient={n}, dim={embedding.dim}")
    return reduced, embedding
