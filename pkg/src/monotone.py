"""
單調性驗證模組
隨機巢狀多胞形對、完整驗證流程（δ_Q ≤ δ_P 及其組合影子）、鏈環 h 向量單調性
"""
import logging
import time
from concurrent.futures import ThreadPoolExecutor, as_completed
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from tenacity import Retrying, retry_if_exception_type, stop_after_attempt

from .boxdecomp import box_delta
from .config import load_config
from .ehrhart import DeltaPolynomial, delta_polynomial, poly_leq
from .errors import ContainmentError, DegenerateDraw, EngineError, UsageError
from .exactmath import AffineEmbedding, hermite_affine_normalize
from .orbring import check_ring_hom, induced_surjectivity, orbifold_delta, RestrictionMap
from .polytope import LatticePolytope, contains, lattice_points, normalized
from .triangulation import LatticeTriangulation, h_polynomial, link, triangulation_of_pair

logger = logging.getLogger(__name__)


# ==================== 隨機巢狀對 ====================

def random_polytope(dim: int, max_coord: int, rng: np.random.Generator, cfg: Dict,
                    name: str = '') -> LatticePolytope:
    """[0, max_coord]^dim 中 dim+1+[0, extra_points) 個隨機格點的凸包（滿維）"""
    for attempt in Retrying(stop=stop_after_attempt(cfg['max_draws']),
                            retry=retry_if_exception_type(DegenerateDraw), reraise=True):
        with attempt:
            count = dim + 1 + int(rng.integers(0, cfg['extra_points']))
            sample = [tuple(int(x) for x in row)
                      for row in rng.integers(0, max_coord + 1, size=(count, dim))]
            _, embedding = hermite_affine_normalize(sample)
            if embedding.dim != dim:
                raise DegenerateDraw("抽樣不是滿維",
                                     {'name': name, 'sample': [list(s) for s in sample]})
    return LatticePolytope.from_points(sample, name=name)


def random_pair(dim: int, max_coord: int, seed: int,
                config: Optional[Dict] = None) -> Tuple[LatticePolytope, LatticePolytope]:
    """
    隨機巢狀多胞形對 Q ⊆ P

    P = [0, max_coord]^dim 中隨機格點的凸包（拒絕非滿維抽樣），
    Q = P 的 1..dim+2 個隨機格點的凸包（可低維）

    Raises:
        UsageError: 超出維度 / 座標範圍
        DegenerateDraw: 重抽次數用盡
    """
    config = config or load_config()
    cfg = config['random_pair']
    if not 1 <= dim <= cfg['max_dim']:
        raise UsageError(f"維度必須在 1..{cfg['max_dim']}，收到 {dim}")
    if not 1 <= max_coord <= cfg['max_coord']:
        raise UsageError(f"max_coord 必須在 1..{cfg['max_coord']}，收到 {max_coord}")

    rng = np.random.default_rng(seed)
    p = random_polytope(dim, max_coord, rng, cfg, name=f"P_{seed}")

    points = lattice_points(p, 1)
    size = min(len(points), int(rng.integers(1, dim + 3)))
    chosen = sorted(int(i) for i in rng.choice(len(points), size=size, replace=False))
    q = LatticePolytope.from_points([points[i] for i in chosen], name=f"Q_{seed}")
    return p, q


# ==================== 鏈環單調性 ====================

def linkwise_monotonicity(T: LatticeTriangulation, TQ: LatticeTriangulation,
                          embedding: AffineEmbedding) -> Tuple[bool, Optional[Dict]]:
    """
    TQ 的每個非空面 F：h_{link_TQ F} ≤ h_{link_T F}（補零後逐係數比較）

    Returns:
        (是否全部通過, 第一個失敗的面)
    """
    q_to_p = {q: p for p, q in RestrictionMap(T, TQ, embedding).p_to_q.items()}
    for face in TQ.faces:
        if not face:
            continue
        dim_face = len(face) - 1
        h_q = h_polynomial(link(TQ, face), TQ.dim - dim_face - 1)
        p_face = tuple(sorted(q_to_p[i] for i in face))
        h_p = h_polynomial(link(T, p_face), T.dim - dim_face - 1)
        if not poly_leq(h_q, h_p):
            counterexample = {'face_q': list(face), 'face_p': list(p_face),
                              'h_q': h_q.to_list(), 'h_p': h_p.to_list()}
            logger.error(f"❌ 鏈環單調性失敗: {counterexample}")
            return False, counterexample
    return True, None


# ==================== 驗證報告 ====================

@dataclass
class PairReport:
    """一對 Q ⊆ P 的驗證結果；passed ⟺ 所有判定為真"""
    p_name: str
    q_name: str
    seed: int
    dim_p: int = 0
    dim_q: int = 0
    delta_p: List[int] = field(default_factory=list)
    delta_q: List[int] = field(default_factory=list)
    methods_p: Dict[str, List[int]] = field(default_factory=dict)
    methods_q: Dict[str, List[int]] = field(default_factory=dict)
    monotone: bool = False
    triple_p: bool = False
    triple_q: bool = False
    linkwise: bool = False
    ring_hom: bool = False
    surjectivity: List[bool] = field(default_factory=list)
    counterexamples: Dict[str, Dict] = field(default_factory=dict)
    certificate: Dict = field(default_factory=dict)
    timing: Dict[str, float] = field(default_factory=dict)
    error: Optional[Dict] = None

    @property
    def passed(self) -> bool:
        return (self.error is None and self.monotone and self.triple_p and self.triple_q
                and self.linkwise and self.ring_hom and all(self.surjectivity))

    def to_dict(self, include_timing: bool = False) -> Dict:
        report = {
            'P': self.p_name,
            'Q': self.q_name,
            'seed': self.seed,
            'dim_P': self.dim_p,
            'dim_Q': self.dim_q,
            'delta_P': self.delta_p,
            'delta_Q': self.delta_q,
            'methods_P': self.methods_p,
            'methods_Q': self.methods_q,
            'monotone': self.monotone,
            'triple_agreement_P': self.triple_p,
            'triple_agreement_Q': self.triple_q,
            'linkwise': self.linkwise,
            'ring_hom': self.ring_hom,
            'surjectivity': self.surjectivity,
            'passed': self.passed,
        }
        if self.counterexamples:
            report['counterexamples'] = self.counterexamples
        if self.certificate:
            report['certificate'] = self.certificate
        if self.error:
            report['error'] = self.error
        if include_timing:
            report['timing'] = self.timing
        return report


def _three_deltas(polytope: LatticePolytope, T: LatticeTriangulation) -> Dict[str, DeltaPolynomial]:
    return {
        'count': delta_polynomial(polytope),
        'boxes': box_delta(T, check=False),
        'orbifold': orbifold_delta(T),
    }


def _lift_into(p_embedding: AffineEmbedding, q: LatticePolytope) -> LatticePolytope:
    """以 P 的約化座標表示 Q"""
    return LatticePolytope(tuple(p_embedding.to_reduced(v) for v in q.vertices), q.name)


def verify_pair(p: LatticePolytope, q: LatticePolytope, seed: int = 0,
                config: Optional[Dict] = None) -> PairReport:
    """
    完整流程：正規化 → 相容三角剖分 → 三種方法的 δ_P、δ_Q →
    δ_Q ≤ δ_P、鏈環單調性、環同態抽樣、各次滿射

    Raises:
        ContainmentError: Q ⊄ P
        InternalInconsistency: 子模組檢查失敗
    """
    config = config or load_config()
    if p.ambient_rank != q.ambient_rank or not contains(p, q):
        raise ContainmentError("Q 不包含於 P", {'P': p.to_dict(), 'Q': q.to_dict()})

    report = PairReport(p_name=p.name, q_name=q.name, seed=seed)
    clock = time.perf_counter()

    p_reduced, p_embedding = normalized(p)
    q_in_p = _lift_into(p_embedding, q)
    T, TQ = triangulation_of_pair(p_reduced, q_in_p, seed, config)
    q_embedding = normalized(q_in_p)[1]
    report.dim_p, report.dim_q = T.dim, TQ.dim
    report.timing['triangulation'] = time.perf_counter() - clock

    clock = time.perf_counter()
    deltas_p = _three_deltas(p_reduced, T)
    deltas_q = _three_deltas(q_in_p, TQ)
    report.methods_p = {k: v.to_list() for k, v in deltas_p.items()}
    report.methods_q = {k: v.to_list() for k, v in deltas_q.items()}
    report.delta_p = deltas_p['count'].to_list()
    report.delta_q = deltas_q['count'].to_list()
    report.triple_p = len(set(deltas_p.values())) == 1
    report.triple_q = len(set(deltas_q.values())) == 1
    report.monotone = poly_leq(deltas_q['count'], deltas_p['count'])
    report.timing['deltas'] = time.perf_counter() - clock

    clock = time.perf_counter()
    report.linkwise, link_failure = linkwise_monotonicity(T, TQ, q_embedding)
    if link_failure:
        report.counterexamples['linkwise'] = link_failure
    ring_cfg = config['ring_check']
    report.ring_hom, ring_failure = check_ring_hom(T, TQ, q_embedding, ring_cfg['samples'], seed,
                                                   ring_cfg['max_degree'])
    if ring_failure:
        report.counterexamples['ring_hom'] = ring_failure
    report.surjectivity = [induced_surjectivity(T, TQ, q_embedding, k) for k in range(TQ.dim + 1)]
    report.timing['ring'] = time.perf_counter() - clock

    if not report.passed:
        report.certificate = {
            'seed': seed,
            'P': p.to_dict(),
            'Q': q.to_dict(),
            'delta_P': report.delta_p,
            'delta_Q': report.delta_q,
            'heights': list(T.heights),
        }
        logger.error(f"❌ 驗證失敗 {p.name} ⊇ {q.name} (seed={seed})")
    else:
        logger.info(f"✅ {p.name} ⊇ {q.name}: δ_Q={report.delta_q} ≤ δ_P={report.delta_p}")
    return report


def verify_pairs(pairs: Sequence[Tuple[LatticePolytope, LatticePolytope]], seed: int = 0,
                 workers: int = 4, config: Optional[Dict] = None) -> List[PairReport]:
    """
    批次驗證（執行緒池），報告依輸入順序返回；個別失敗以 error 欄位記錄
    """
    config = config or load_config()
    reports: List[Optional[PairReport]] = [None] * len(pairs)
    with ThreadPoolExecutor(max_workers=max(1, workers)) as executor:
        futures = {executor.submit(verify_pair, p, q, seed, config): i
                   for i, (p, q) in enumerate(pairs)}
        for future in as_completed(futures):
            i = futures[future]
            try:
                reports[i] = future.result()
            except EngineError as exc:
                p, q = pairs[i]
                logger.error(f"❌ 第 {i} 對驗證中止: {exc.message}")
                reports[i] = PairReport(p_name=p.name, q_name=q.name, seed=seed, error=exc.to_dict())
    return reports
