"""
自我測試套件
黃金值、三法一致、h 向量夾擠、結構恆等式、正則性憑證、單調性批次驗證

每項檢查在執行緒池中跑完所有案例，依案例順序合併，回傳 CheckResult
"""
import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple

from .boxdecomp import box_delta, check_age_symmetry, check_parallelepiped_partition
from .config import load_config
from .corpus import generated_corpus, golden_polytopes, load_goldens
from .ehrhart import delta_polynomial, deep_verify, poly_leq
from .errors import EngineError, InternalInconsistency
from .monotone import random_pair, verify_pairs
from .orbring import orbifold_delta
from .polytope import LatticePolytope, lattice_points, normalized, normalized_volume
from .triangulation import (
    LatticeTriangulation,
    h_vector,
    is_unimodular,
    regular_triangulation,
    verify_regularity,
)

logger = logging.getLogger(__name__)


@dataclass
class CheckResult:
    name: str
    passed: bool
    cases: int = 0
    certificate: Dict = field(default_factory=dict)
    seconds: float = 0.0

    def to_dict(self) -> Dict:
        return {'name': self.name, 'passed': self.passed, 'cases': self.cases,
                'certificate': self.certificate}


def _run_cases(name: str, cases: Sequence, check: Callable, workers: int) -> CheckResult:
    """
    在執行緒池中逐案檢查；check 失敗時拋出 EngineError

    Returns:
        CheckResult，certificate 為第一個（依案例順序）失敗案例的憑證
    """
    start = time.perf_counter()
    with ThreadPoolExecutor(max_workers=max(1, workers)) as executor:
        futures = [executor.submit(check, case) for case in cases]
        outcomes: List[Optional[EngineError]] = []
        for future in futures:
            try:
                future.result()
                outcomes.append(None)
            except EngineError as exc:
                outcomes.append(exc)

    failures = [exc for exc in outcomes if exc is not None]
    result = CheckResult(name=name, passed=not failures, cases=len(cases),
                         seconds=time.perf_counter() - start)
    if failures:
        result.certificate = failures[0].to_dict()
        result.certificate['failed_cases'] = len(failures)
        logger.error(f"❌ {name}: {len(failures)}/{len(cases)} 個案例失敗")
    else:
        logger.info(f"✅ {name}: {len(cases)} 個案例通過 ({result.seconds:.1f}s)")
    return result


# ==================== 各項檢查 ====================

def _check_golden(case: Tuple[str, List[int], Optional[LatticePolytope]]):
    name, expected, polytope = case
    if polytope is None:
        raise InternalInconsistency(f"黃金值 {name} 沒有對應的多胞形", {'name': name})
    actual = delta_polynomial(polytope).to_list()
    if actual != expected:
        raise InternalInconsistency(f"黃金值 {name} 不符: {actual} != {expected}",
                                    {'name': name, 'expected': expected, 'actual': actual,
                                     'polytope': polytope.to_dict()})


def _check_triple(case: Tuple[LatticePolytope, int, Dict]):
    polytope, seed, config = case
    T = regular_triangulation(polytope, seed, config)
    deltas = {'count': delta_polynomial(polytope),
              'boxes': box_delta(T, check=False),
              'orbifold': orbifold_delta(T)}
    if len(set(deltas.values())) != 1:
        raise InternalInconsistency(
            f"三種 δ 不一致 ({polytope.name}, seed={seed})",
            {'polytope': polytope.to_dict(), 'seed': seed,
             **{k: v.to_list() for k, v in deltas.items()}, 'heights': list(T.heights)})


def _check_sandwich(T: LatticeTriangulation) -> bool:
    """0 ≤ h_T ≤ δ_P，且 h_T = δ_P ⟺ T 么模；回傳 T 是否么模"""
    h = h_vector(T)
    delta = delta_polynomial(T.polytope)
    unimodular = is_unimodular(T)
    certificate = {'polytope': T.polytope.to_dict(), 'h': h.to_list(), 'delta': delta.to_list(),
                   'unimodular': unimodular, 'heights': list(T.heights)}
    if not h.is_nonnegative() or not poly_leq(h, delta):
        raise InternalInconsistency("h 向量夾擠 0 ≤ h_T ≤ δ_P 不成立", certificate)
    if (h == delta) != unimodular:
        raise InternalInconsistency("h_T = δ_P 與么模性不一致", certificate)
    return unimodular


def _check_structure(T: LatticeTriangulation):
    polytope = T.polytope
    d = T.dim
    delta = delta_polynomial(polytope)
    volume = normalized_volume(polytope)
    certificate = {'polytope': polytope.to_dict(), 'delta': delta.to_list(), 'volume': volume}
    if delta.at_one() != volume:
        raise InternalInconsistency("δ(1) ≠ 正規化體積", certificate)
    interior_count = len(lattice_points(polytope, 1)) - d - 1
    if d >= 1 and delta[1] != interior_count:
        raise InternalInconsistency("δ_1 ≠ #(P∩N) - d - 1", {**certificate, 'expected': interior_count})
    check_parallelepiped_partition(T)
    check_age_symmetry(T)
    orbifold_delta(T, check_vanishing=True)


def _check_regularity(T: LatticeTriangulation):
    verify_regularity(T, recompute=True)


def _check_deep(polytope: LatticePolytope):
    deep_verify(polytope)


# ==================== 套件 ====================

def run_selftest(deep: bool = False, goldens_path: Optional[str] = None,
                 config: Optional[Dict] = None) -> List[CheckResult]:
    """
    執行完整自我測試

    Args:
        deep: 加入 m = d+1, d+2 檢查並擴大單調性批次
        goldens_path: 黃金值表（預設 config 中的 goldens）

    Returns:
        各項檢查結果（固定順序）
    """
    config = config or load_config()
    cfg = config['selftest']
    workers = cfg['workers']
    results: List[CheckResult] = []

    goldens = load_goldens(goldens_path)
    golden = golden_polytopes()
    results.append(_run_cases('goldens', [(name, expected, golden.get(name))
                                          for name, expected in goldens.items()],
                              _check_golden, workers))

    corpus = list(golden.values()) + generated_corpus(cfg['corpus_size'], cfg['corpus_max_coord'],
                                                      seed=0, config=config)
    corpus = [normalized(p)[0] for p in corpus]
    seeds = range(cfg['triangulation_seeds'])
    results.append(_run_cases('triple_agreement', [(p, s, config) for p in corpus for s in seeds],
                              _check_triple, workers))

    triangulations = _triangulate_all(corpus, config, workers)
    unimodular_flags: List[bool] = []

    def sandwich(T: LatticeTriangulation):
        unimodular_flags.append(_check_sandwich(T))

    sandwich_result = _run_cases('h_sandwich', triangulations, sandwich, workers)
    sandwich_result.certificate.setdefault('unimodular', sum(unimodular_flags))
    sandwich_result.certificate.setdefault('non_unimodular', len(unimodular_flags) - sum(unimodular_flags))
    results.append(sandwich_result)

    results.append(_run_cases('structural_identities', triangulations, _check_structure, workers))
    results.append(_run_cases('regularity', triangulations, _check_regularity, workers))
    results.append(_check_monotone_pairs(cfg['deep_pair_count'] if deep else cfg['pair_count'],
                                         cfg['corpus_max_coord'], config, workers))
    if deep:
        results.append(_run_cases('deep_counts', corpus, _check_deep, workers))
    return results


def _triangulate_all(corpus: Sequence[LatticePolytope], config: Dict,
                     workers: int) -> List[LatticeTriangulation]:
    with ThreadPoolExecutor(max_workers=max(1, workers)) as executor:
        return list(executor.map(lambda p: regular_triangulation(p, 0, config), corpus))


def _check_monotone_pairs(count: int, max_coord: int, config: Dict, workers: int) -> CheckResult:
    start = time.perf_counter()
    pairs = [random_pair(1 + i % 3, max_coord, seed=i, config=config) for i in range(count)]
    reports = verify_pairs(pairs, seed=0, workers=workers, config=config)
    failed = [r for r in reports if not r.passed]
    result = CheckResult(name='monotone_pairs', passed=not failed, cases=count,
                         seconds=time.perf_counter() - start)
    if failed:
        result.certificate = {'failed_cases': len(failed), 'first': failed[0].to_dict()}
        logger.error(f"❌ monotone_pairs: {len(failed)}/{count} 對失敗")
    else:
        logger.info(f"✅ monotone_pairs: {count} 對通過 ({result.seconds:.1f}s)")
    return result
