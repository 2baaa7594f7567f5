"""异常定义

所有异常继承自 ValueError，调用方可以统一按参数错误处理。
"""
from typing import Optional


class ChronologyError(ValueError):
    """年代学引擎基础异常"""


class CurveFormatError(ChronologyError):
    """校准曲线格式错误"""

    def __init__(self, message: str, line: Optional[int] = None):
        self.line = line
        if line is not None:
            message = f"第 {line} 行: {message}"
        super().__init__(message)


class CalibrationRangeError(ChronologyError):
    """查询年龄超出校准曲线范围"""


class DataValidationError(ChronologyError):
    """输入数据校验失败"""


class ConfigError(ChronologyError):
    """运行配置无效"""


class InitializationError(ChronologyError):
    """在重试预算内找不到合法初始状态"""


class InvalidStateError(ChronologyError):
    """状态违反模型约束"""
