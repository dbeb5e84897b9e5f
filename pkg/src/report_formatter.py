"""
報告格式化工具
把引擎結果整理成 JSON 可序列化的字典；表格以 pandas DataFrame 組裝
"""
import json
from typing import Dict, List, Optional

import pandas as pd

from .ehrhart import DeltaPolynomial


class ReportFormatter:
    """引擎結果 → JSON 負載"""

    @staticmethod
    def to_json(payload) -> str:
        return json.dumps(payload, ensure_ascii=False, separators=(',', ':'))

    @staticmethod
    def format_delta(results: Dict[str, DeltaPolynomial]) -> object:
        """單一方法輸出裸陣列；多個方法輸出物件並附 agree"""
        if len(results) == 1:
            return next(iter(results.values())).to_list()
        payload = {method: poly.to_list() for method, poly in results.items()}
        payload['agree'] = len(set(results.values())) == 1
        return payload

    @staticmethod
    def format_hvector(h: DeltaPolynomial, unimodular: bool, simplices: int,
                       f_vector: List[int]) -> Dict:
        return {'h': h.to_list(), 'unimodular': unimodular,
                'simplices': simplices, 'f_vector': f_vector}

    @staticmethod
    def format_decomposition(rows: List[Dict], delta: DeltaPolynomial) -> Dict:
        """每個面的 B_F 與鏈環 h 向量"""
        frame = pd.DataFrame(rows, columns=['face', 'dim', 'box', 'link_h'])
        if not frame.empty:
            frame = frame.sort_values(by='dim', kind='stable')
        records = [{'face': list(r['face']), 'dim': int(r['dim']), 'box': list(r['box']),
                    'link_h': list(r['link_h'])} for r in frame.to_dict(orient='records')]
        return {'rows': records, 'delta': delta.to_list()}

    @staticmethod
    def format_orbifold(rows: List[Dict]) -> Dict:
        """每個次數的基底大小、關係秩、商維度"""
        frame = pd.DataFrame(rows, columns=['degree', 'basis', 'relation_rank'])
        frame['dimension'] = frame['basis'] - frame['relation_rank']
        records = [{key: int(value) for key, value in record.items()}
                   for record in frame.to_dict(orient='records')]
        return {'rows': records}

    @staticmethod
    def format_checks(checks: List[Dict], deep: bool) -> Dict:
        """自我測試摘要"""
        frame = pd.DataFrame(checks, columns=['name', 'passed', 'cases', 'certificate'])
        failed = frame[~frame['passed']]
        return {
            'deep': deep,
            'passed': bool(frame['passed'].all()) if not frame.empty else True,
            'checks': [{'name': r['name'], 'passed': bool(r['passed']), 'cases': int(r['cases'])}
                       for r in frame.to_dict(orient='records')],
            'failures': [{'name': r['name'], 'certificate': r['certificate']}
                         for r in failed.to_dict(orient='records')],
        }

    @staticmethod
    def format_pair_report(report, include_timing: bool = False) -> Dict:
        return report.to_dict(include_timing=include_timing)

    @staticmethod
    def format_error(error) -> Optional[Dict]:
        return error.to_dict() if error is not None else None
