"""
驗證引擎錯誤類型
所有錯誤都帶有 certificate 字典（可序列化為 JSON），CLI 直接輸出
"""
from typing import Dict, Optional


class EngineError(Exception):
    """引擎錯誤基底類"""

    exit_code = 1

    def __init__(self, message: str, certificate: Optional[Dict] = None):
        super().__init__(message)
        self.message = message
        self.certificate = certificate or {}

    def to_dict(self) -> Dict:
        return {
            'error': type(self).__name__,
            'message': self.message,
            'certificate': self.certificate,
        }


class UsageError(EngineError):
    """呼叫端違反前置條件"""
    exit_code = 2


class DimensionError(UsageError):
    """輸入不是滿維（請先 hermite_affine_normalize）"""


class PolytopeFormatError(UsageError):
    """多胞形檔案或頂點列表格式錯誤"""


class ContainmentError(UsageError):
    """Q 不包含於 P"""


class NotGeneric(EngineError):
    """下凸包出現非單形胞腔，需換高度重試"""


class VerificationFailed(EngineError):
    """憑證檢查在重試後仍失敗"""


class InternalInconsistency(EngineError):
    """兩種計算結果不一致或不變量被破壞"""


class DegenerateDraw(EngineError):
    """隨機抽樣不是滿維"""
