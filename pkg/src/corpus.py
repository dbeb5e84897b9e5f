"""
多胞形語料庫
黃金多胞形（已知 δ）與隨機產生的滿維多胞形
"""
import logging
from typing import Dict, List, Optional

import numpy as np
import yaml

from .config import load_config, resolve_path
from .errors import PolytopeFormatError
from .monotone import random_polytope
from .polytope import LatticePolytope, dilate

logger = logging.getLogger(__name__)


def segment(k: int) -> LatticePolytope:
    return LatticePolytope(((0,), (k,)), f"segment_{k}")


def unit_cube(d: int, name: str = '') -> LatticePolytope:
    vertices = tuple(tuple((i >> j) & 1 for j in range(d)) for i in range(2 ** d))
    return LatticePolytope(vertices, name or f"unit_cube_{d}")


def standard_simplex(d: int, scale: int = 1, name: str = '') -> LatticePolytope:
    vertices = [tuple([0] * d)] + [tuple(int(i == j) for j in range(d)) for i in range(d)]
    simplex = LatticePolytope(tuple(vertices))
    if scale != 1:
        simplex = dilate(simplex, scale)
    return LatticePolytope(simplex.vertices, name or f"standard_simplex_{d}")


def reeve_simplex(h: int) -> LatticePolytope:
    """conv{0, e1, e2, (1, 1, h)}：只有頂點四個格點，體積 h"""
    return LatticePolytope(((0, 0, 0), (1, 0, 0), (0, 1, 0), (1, 1, h)), f"reeve_{h}")


def golden_polytopes() -> Dict[str, LatticePolytope]:
    """名稱 → 黃金多胞形（名稱與 goldens.yaml 的鍵一致）"""
    polytopes: Dict[str, LatticePolytope] = {}
    for k in range(1, 5):
        polytopes[f"segment_{k}"] = segment(k)
    polytopes['unit_square'] = unit_cube(2, 'unit_square')
    polytopes['unit_cube'] = unit_cube(3, 'unit_cube')
    polytopes['dilated_triangle_2'] = standard_simplex(2, scale=2, name='dilated_triangle_2')
    for d in range(1, 4):
        polytopes[f"standard_simplex_{d}"] = standard_simplex(d)
    for h in range(2, 6):
        polytopes[f"reeve_{h}"] = reeve_simplex(h)
    return polytopes


def load_goldens(path: Optional[str] = None) -> Dict[str, List[int]]:
    """
    載入黃金 δ 表

    Raises:
        PolytopeFormatError: 檔案不存在或格式不符
    """
    path = resolve_path(path or load_config()['goldens'])
    try:
        with open(path, 'r', encoding='utf-8') as f:
            table = yaml.safe_load(f) or {}
    except FileNotFoundError:
        raise PolytopeFormatError(f"找不到黃金值表 {path}", {'path': path})
    if not isinstance(table, dict):
        raise PolytopeFormatError("黃金值表必須是名稱 → 係數列表", {'path': path})
    goldens = {}
    for name, coefficients in table.items():
        if not isinstance(coefficients, list) or not all(isinstance(c, int) for c in coefficients):
            raise PolytopeFormatError(f"黃金值 {name} 必須是整數列表", {'path': path, 'field': name})
        goldens[str(name)] = coefficients
    logger.debug(f"已載入 {len(goldens)} 個黃金值")
    return goldens


def generated_corpus(size: int, max_coord: int, seed: int,
                     config: Optional[Dict] = None) -> List[LatticePolytope]:
    """
    隨機滿維多胞形，維度依序 1, 2, 3 循環

    Args:
        size: 多胞形數量
        max_coord: 座標上限
        seed: 亂數種子
    """
    config = config or load_config()
    cfg = config['random_pair']
    rng = np.random.default_rng(seed)
    return [random_polytope(1 + i % 3, max_coord, rng, cfg, name=f"corpus_{seed}_{i}")
            for i in range(size)]
