"""
命令列介面
多胞形檔案讀寫、語料產生、各項計算與批次驗證入口

stdout 只輸出 JSON；診斷訊息走 stderr（logging）
結束碼：0 通過、1 驗證失敗 / 內部不一致、2 使用錯誤
"""
import argparse
import json
import logging
import os
import sys
from typing import Dict, List, Optional, Tuple

from .boxdecomp import box_delta, decomposition_table
from .config import load_config
from .ehrhart import deep_verify, delta_polynomial
from .errors import ContainmentError, EngineError, PolytopeFormatError, UsageError
from .monotone import random_pair, verify_pair
from .orbring import graded_slice, orbifold_delta
from .polytope import LatticePolytope, contains
from .report_formatter import ReportFormatter
from .selftest import run_selftest
from .triangulation import f_vector, h_vector, is_unimodular, regular_triangulation

logger = logging.getLogger(__name__)

METHODS = ('count', 'boxes', 'orbifold')


# ==================== 檔案讀寫 ====================

def _read_json(path: str) -> object:
    try:
        with open(path, 'r', encoding='utf-8') as f:
            return json.load(f)
    except FileNotFoundError:
        raise UsageError(f"找不到檔案 {path}", {'path': path})
    except UnicodeDecodeError as exc:
        raise PolytopeFormatError(f"{path}: 不是 UTF-8 文字 (位元組 {exc.start}): {exc.reason}",
                                  {'path': path, 'byte': exc.start})
    except OSError as exc:
        raise UsageError(f"無法讀取 {path}: {exc.strerror or exc}", {'path': path})
    except json.JSONDecodeError as exc:
        raise PolytopeFormatError(f"{path}: JSON 格式錯誤 (第 {exc.lineno} 行第 {exc.colno} 欄): {exc.msg}",
                                  {'path': path, 'line': exc.lineno, 'column': exc.colno})


def _parse_polytope(body: object, path: str, label: str = '') -> LatticePolytope:
    prefix = f"{label}." if label else ''
    if not isinstance(body, dict):
        raise PolytopeFormatError(f"{path}: {label or '檔案'} 必須是物件",
                                  {'path': path, 'field': label or '$'})
    vertices = body.get('vertices')
    if not isinstance(vertices, list) or not all(isinstance(v, list) for v in vertices):
        raise PolytopeFormatError(f"{path}: {prefix}vertices 必須是整數陣列的陣列",
                                  {'path': path, 'field': f'{prefix}vertices'})
    name = body.get('name', '')
    if not isinstance(name, str):
        raise PolytopeFormatError(f"{path}: {prefix}name 必須是字串",
                                  {'path': path, 'field': f'{prefix}name'})
    try:
        return LatticePolytope(tuple(tuple(v) for v in vertices), name)
    except PolytopeFormatError as exc:
        certificate = dict(exc.certificate, path=path)
        if 'field' in certificate:
            certificate['field'] = prefix + certificate['field']
        raise PolytopeFormatError(f"{path}: {exc.message}", certificate) from exc


def load_polytope_file(path: str) -> LatticePolytope:
    """讀取 {"name": ..., "vertices": [[...], ...]}"""
    return _parse_polytope(_read_json(path), path)


def load_pair_file(path: str) -> Tuple[LatticePolytope, LatticePolytope]:
    """
    讀取 {"P": {...}, "Q": {...}}，載入時檢查 Q ⊆ P

    Raises:
        PolytopeFormatError: 格式錯誤
        ContainmentError: Q ⊄ P
    """
    body = _read_json(path)
    if not isinstance(body, dict) or 'P' not in body or 'Q' not in body:
        raise PolytopeFormatError(f"{path}: 多胞形對檔案需要 P 與 Q 兩個欄位", {'path': path})
    p = _parse_polytope(body['P'], path, 'P')
    q = _parse_polytope(body['Q'], path, 'Q')
    if p.ambient_rank != q.ambient_rank or not contains(p, q):
        raise ContainmentError(f"{path}: Q 不包含於 P",
                               {'path': path, 'P': p.to_dict(), 'Q': q.to_dict()})
    return p, q


def write_pair_file(path: str, p: LatticePolytope, q: LatticePolytope):
    with open(path, 'w', encoding='utf-8') as f:
        json.dump({'P': p.to_dict(), 'Q': q.to_dict()}, f, ensure_ascii=False, indent=2)
        f.write('\n')


# ==================== 子命令 ====================

def cmd_delta(args, config: Dict) -> Tuple[object, int]:
    p = load_polytope_file(args.file)
    methods = METHODS if args.method == 'all' else (args.method,)
    results = {}
    T = None
    for method in methods:
        if method == 'count':
            results[method] = delta_polynomial(p)
            continue
        T = T or regular_triangulation(p, args.seed, config)
        results[method] = box_delta(T, check=False) if method == 'boxes' else orbifold_delta(T)
    if args.deep:
        deep_verify(p)
    payload = ReportFormatter.format_delta(results)
    if len(results) > 1 and not payload['agree']:
        logger.error(f"❌ δ 計算方法不一致: {payload}")
        return payload, 1
    return payload, 0


def cmd_hvector(args, config: Dict) -> Tuple[object, int]:
    T = regular_triangulation(load_polytope_file(args.file), args.seed, config)
    return ReportFormatter.format_hvector(h_vector(T), is_unimodular(T),
                                          len(T.maximal_simplices), f_vector(T)), 0


def cmd_decompose(args, config: Dict) -> Tuple[object, int]:
    T = regular_triangulation(load_polytope_file(args.file), args.seed, config)
    return ReportFormatter.format_decomposition(decomposition_table(T), box_delta(T, check=True)), 0


def cmd_orbifold(args, config: Dict) -> Tuple[object, int]:
    T = regular_triangulation(load_polytope_file(args.file), args.seed, config)
    upto = T.dim if args.upto is None else args.upto
    if upto < 0:
        raise UsageError(f"--upto 必須 ≥ 0，收到 {upto}")
    rows = []
    for k in range(upto + 1):
        slice_k = graded_slice(T, k)
        rows.append({'degree': k, 'basis': len(slice_k.basis), 'relation_rank': slice_k.rank})
    return ReportFormatter.format_orbifold(rows), 0


def cmd_monotone(args, config: Dict) -> Tuple[object, int]:
    p, q = load_pair_file(args.file)
    report = verify_pair(p, q, args.seed, config)
    return ReportFormatter.format_pair_report(report), 0 if report.passed else 1


def cmd_gen(args, config: Dict) -> Tuple[object, int]:
    """產生 pair_<seed>_<index>.json；第 index 個檔案用種子 seed·100003 + index"""
    if args.count < 0:
        raise UsageError(f"--count 必須 ≥ 0，收到 {args.count}")
    os.makedirs(args.out, exist_ok=True)
    paths: List[str] = []
    for index in range(args.count):
        p, q = random_pair(args.dim, args.max_coord, args.seed * 100003 + index, config)
        path = os.path.join(args.out, f"pair_{args.seed}_{index}.json")
        write_pair_file(path, p, q)
        paths.append(path)
    logger.info(f"✅ 已寫入 {len(paths)} 個多胞形對到 {args.out}")
    return paths, 0


def cmd_selftest(args, config: Dict) -> Tuple[object, int]:
    results = run_selftest(deep=args.deep, goldens_path=args.goldens, config=config)
    payload = ReportFormatter.format_checks([r.to_dict() for r in results], args.deep)
    return payload, 0 if payload['passed'] else 1


COMMANDS = {
    'delta': cmd_delta,
    'hvector': cmd_hvector,
    'decompose': cmd_decompose,
    'orbifold': cmd_orbifold,
    'monotone': cmd_monotone,
    'gen': cmd_gen,
    'selftest': cmd_selftest,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog='main.py', description='格多胞形 δ 向量單調性驗證引擎')
    parser.add_argument('--config', help='YAML 配置文件路徑')
    parser.add_argument('--verbose', action='store_true', help='輸出 DEBUG 日誌')
    sub = parser.add_subparsers(dest='command', required=True)

    delta = sub.add_parser('delta', help='計算 δ 多項式')
    delta.add_argument('file')
    delta.add_argument('--method', choices=METHODS + ('all',), default='count')
    delta.add_argument('--seed', type=int, default=0)
    delta.add_argument('--deep', action='store_true', help='額外檢查 m = d+1, d+2')

    for name, help_text in (('hvector', '三角剖分的 h 向量與么模性'),
                            ('decompose', '每個面的盒點多項式與鏈環 h 向量'),
                            ('orbifold', '商環各次分量的維度')):
        command = sub.add_parser(name, help=help_text)
        command.add_argument('file')
        command.add_argument('--seed', type=int, default=0)
        if name == 'orbifold':
            command.add_argument('--upto', type=int, default=None)

    monotone = sub.add_parser('monotone', help='驗證一對 Q ⊆ P')
    monotone.add_argument('file')
    monotone.add_argument('--seed', type=int, default=0)

    gen = sub.add_parser('gen', help='產生隨機巢狀多胞形對')
    gen.add_argument('--dim', type=int, required=True)
    gen.add_argument('--max-coord', dest='max_coord', type=int, required=True)
    gen.add_argument('--count', type=int, default=1)
    gen.add_argument('--seed', type=int, default=0)
    gen.add_argument('--out', required=True)

    selftest = sub.add_parser('selftest', help='執行自我測試套件')
    selftest.add_argument('--deep', action='store_true')
    selftest.add_argument('--goldens', default=None, help='黃金值表路徑')
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    """
    解析命令列並執行子命令

    Returns:
        結束碼 0 / 1 / 2
    """
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code == 0 else 2

    root = logging.getLogger()
    if args.verbose:
        root.setLevel(logging.DEBUG)
    else:
        root.setLevel(logging.INFO if args.command == 'selftest' else logging.WARNING)

    try:
        config = load_config(args.config)
        payload, code = COMMANDS[args.command](args, config)
    except EngineError as exc:
        if exc.exit_code == 2:
            logger.error(f"❌ {exc.message}")
            print(ReportFormatter.to_json(ReportFormatter.format_error(exc)), file=sys.stderr)
        else:
            logger.error(f"❌ {type(exc).__name__}: {exc.message}")
            print(ReportFormatter.to_json(ReportFormatter.format_error(exc)))
        return exc.exit_code

    print(ReportFormatter.to_json(payload))
    return code
