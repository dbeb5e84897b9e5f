"""
引擎配置載入
從 config/config.yaml 讀取參數，缺少的鍵以預設值補齊
"""
import copy
import logging
import os
from functools import lru_cache
from typing import Dict, Optional

import yaml

logger = logging.getLogger(__name__)

PROJECT_ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
DEFAULT_CONFIG_PATH = os.path.join(PROJECT_ROOT, 'config', 'config.yaml')

DEFAULT_CONFIG = {
    'heights': {
        'bits': 16,             # 通用高度取自 [0, 2^bits)
    },
    'pair': {
        'penalty_start': 1 << 20,
        'penalty_factor': 16,
        'max_attempts': 8,
    },
    'subdivision': {
        'max_reseeds': 8,
    },
    'random_pair': {
        'max_dim': 3,
        'max_coord': 6,
        'max_draws': 64,
        'extra_points': 3,
    },
    'ring_check': {
        'samples': 1000,
        'max_degree': 3,
    },
    'selftest': {
        'corpus_size': 50,
        'corpus_max_coord': 4,
        'triangulation_seeds': 3,
        'pair_count': 100,
        'deep_pair_count': 300,
        'workers': 4,
    },
    'goldens': 'config/goldens.yaml',
}


def _deep_merge(base: Dict, override: Dict) -> Dict:
    merged = copy.deepcopy(base)
    for key, value in (override or {}).items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = _deep_merge(merged[key], value)
        else:
            merged[key] = value
    return merged


@lru_cache(maxsize=8)
def _load_cached(path: str) -> Dict:
    try:
        with open(path, 'r', encoding='utf-8') as f:
            loaded = yaml.safe_load(f) or {}
        logger.debug(f"✅ 已載入配置: {path}")
        return _deep_merge(DEFAULT_CONFIG, loaded)
    except FileNotFoundError:
        logger.warning(f"⚠️ 找不到配置文件 {path}，使用預設值")
        return copy.deepcopy(DEFAULT_CONFIG)


def load_config(path: Optional[str] = None) -> Dict:
    """
    載入引擎配置

    Args:
        path: YAML 配置文件路徑（預設 config/config.yaml）

    Returns:
        合併預設值後的配置字典（呼叫端可自由修改，不影響快取）
    """
    return copy.deepcopy(_load_cached(os.path.abspath(path or DEFAULT_CONFIG_PATH)))


def resolve_path(path: str) -> str:
    """相對路徑以專案根目錄為基準"""
    if os.path.isabs(path):
        return path
    return os.path.join(PROJECT_ROOT, path)
