"""
Ehrhart 計數模組
f_P(m) 計數、Ehrhart 多項式插值、δ 多項式（生成級數二項式變換）、逐係數比較
"""
import logging
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import comb, factorial
from typing import Dict, Iterable, List, Sequence, Tuple

from sympy import Poly, interpolate, symbols

from .errors import DimensionError, InternalInconsistency, UsageError
from .polytope import LatticePolytope, dimension, lattice_points, normalized, normalized_volume

logger = logging.getLogger(__name__)

_m, _t = symbols('m t')


@dataclass(frozen=True)
class DeltaPolynomial:
    """
    整數係數多項式（低次在前，去除尾端零）

    δ 多項式與 h 多項式共用此型別
    """
    coefficients: Tuple[int, ...]

    def __post_init__(self):
        coeffs = [int(c) for c in self.coefficients]
        while len(coeffs) > 1 and coeffs[-1] == 0:
            coeffs.pop()
        object.__setattr__(self, 'coefficients', tuple(coeffs) if coeffs else (0,))

    @classmethod
    def of(cls, coefficients: Iterable[int]) -> 'DeltaPolynomial':
        return cls(tuple(coefficients))

    @property
    def degree(self) -> int:
        if self.coefficients == (0,):
            return -1
        return len(self.coefficients) - 1

    def __getitem__(self, i: int) -> int:
        return self.coefficients[i] if 0 <= i < len(self.coefficients) else 0

    @classmethod
    def from_poly(cls, poly: Poly) -> 'DeltaPolynomial':
        return cls(tuple(int(c) for c in reversed(poly.all_coeffs())))

    def to_poly(self) -> Poly:
        return Poly(list(reversed(self.coefficients)), _t, domain='ZZ')

    def __add__(self, other: 'DeltaPolynomial') -> 'DeltaPolynomial':
        return DeltaPolynomial.from_poly(self.to_poly() + other.to_poly())

    def __mul__(self, other: 'DeltaPolynomial') -> 'DeltaPolynomial':
        return DeltaPolynomial.from_poly(self.to_poly() * other.to_poly())

    def at_one(self) -> int:
        return sum(self.coefficients)

    def is_nonnegative(self) -> bool:
        return all(c >= 0 for c in self.coefficients)

    def padded(self, length: int) -> List[int]:
        return [self[i] for i in range(max(length, len(self.coefficients)))]

    def to_list(self) -> List[int]:
        return list(self.coefficients)


@dataclass(frozen=True)
class EhrhartPolynomial:
    """f_P(m) 在單項式基底 1, m, m², … 下的有理係數"""
    coefficients: Tuple[Fraction, ...]

    @property
    def degree(self) -> int:
        return len(self.coefficients) - 1

    @property
    def leading_coefficient(self) -> Fraction:
        return self.coefficients[-1]

    def evaluate(self, m: int) -> Fraction:
        value = Fraction(0)
        for c in reversed(self.coefficients):
            value = value * m + c
        return value

    def to_list(self) -> List[str]:
        return [str(c) for c in self.coefficients]


def ehrhart_counts(p: LatticePolytope) -> List[int]:
    """
    計數 f_P(0), …, f_P(d)

    Args:
        p: 滿維多胞形（維度 d）
    """
    d = p.ambient_rank
    if dimension(p) != d:
        raise DimensionError("ehrhart_counts 需要滿維多胞形，請先正規化",
                             {'polytope': p.to_dict()})
    counts = [len(lattice_points(p, m)) for m in range(d + 1)]
    logger.debug(f"Ehrhart 計數 {p.name or ''}: {counts}")
    return counts


def ehrhart_polynomial(counts: Sequence[int], d: int) -> EhrhartPolynomial:
    """
    通過 (m, f(m)), m = 0..d 的唯一插值多項式

    Args:
        counts: d+1 個計數
        d: 維度
    """
    if len(counts) != d + 1:
        raise UsageError(f"ehrhart_polynomial 需要 {d + 1} 個計數，收到 {len(counts)}")
    if d == 0:
        return EhrhartPolynomial((Fraction(counts[0]),))
    expr = interpolate([(m, int(f)) for m, f in enumerate(counts)], _m)
    poly = Poly(expr, _m, domain='QQ')
    coeffs = [Fraction(int(c.p), int(c.q)) for c in reversed(poly.all_coeffs())]
    coeffs += [Fraction(0)] * (d + 1 - len(coeffs))
    return EhrhartPolynomial(tuple(coeffs))


def delta_from_counts(counts: Sequence[int], d: int) -> DeltaPolynomial:
    """
    生成級數變換：δ_i = Σ_{j=0..i} (-1)^j C(d+1, j) f(i-j)

    Raises:
        InternalInconsistency: δ_0 ≠ 1 或出現負係數（計數有誤）
    """
    if len(counts) != d + 1:
        raise UsageError(f"delta_from_counts 需要 {d + 1} 個計數，收到 {len(counts)}")
    delta = [
        sum((-1) ** j * comb(d + 1, j) * counts[i - j] for j in range(i + 1))
        for i in range(d + 1)
    ]
    if delta[0] != 1 or any(c < 0 for c in delta):
        raise InternalInconsistency(
            f"❌ δ 係數異常: {delta}",
            {'counts': list(counts), 'd': d, 'delta': delta})
    return DeltaPolynomial(tuple(delta))


def poly_leq(f: DeltaPolynomial, g: DeltaPolynomial) -> bool:
    """逐係數比較 f ≤ g（缺少的係數視為 0）"""
    n = max(len(f.coefficients), len(g.coefficients))
    return all(f[i] <= g[i] for i in range(n))


@lru_cache(maxsize=1024)
def delta_polynomial(p: LatticePolytope) -> DeltaPolynomial:
    """任意多胞形的 δ 多項式（先在自身的格中正規化）"""
    reduced, _ = normalized(p)
    d = reduced.ambient_rank
    return delta_from_counts(ehrhart_counts(reduced), d)


def deep_verify(p: LatticePolytope) -> Dict:
    """
    深度檢查：插值多項式在 m = d+1, d+2 的值必須等於直接計數，
    首項係數必須等於 normalized_volume / d!

    Returns:
        檢查紀錄

    Raises:
        InternalInconsistency: 任何一項不一致
    """
    reduced, _ = normalized(p)
    d = reduced.ambient_rank
    counts = ehrhart_counts(reduced)
    poly = ehrhart_polynomial(counts, d)

    record = {'name': p.name, 'counts': counts, 'checks': []}
    for m in (d + 1, d + 2):
        predicted = poly.evaluate(m)
        actual = len(lattice_points(reduced, m))
        record['checks'].append({'m': m, 'predicted': str(predicted), 'actual': actual})
        if predicted != actual:
            raise InternalInconsistency(
                f"❌ Ehrhart 插值在 m={m} 不符: {predicted} != {actual}", record)

    volume = normalized_volume(reduced)
    if poly.leading_coefficient != Fraction(volume, factorial(d)):
        record['volume'] = volume
        raise InternalInconsistency(
            f"❌ Ehrhart 首項係數 {poly.leading_coefficient} != {volume}/{d}!", record)
    if poly.evaluate(0) != 1:
        raise InternalInconsistency("❌ Ehrhart 常數項不是 1", record)
    return record
