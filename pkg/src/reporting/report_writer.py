"""产物写出: CSV 网格/表格、JSON 报告、PNG"""
import json
import math
from datetime import datetime
from enum import Enum
from pathlib import Path
from typing import Any, Dict, List, Union

import numpy as np
import pandas as pd

from src.core.logger import get_logger

logger = get_logger(__name__)


def to_jsonable(value: Any) -> Any:
    """把 numpy / pandas / Path 等对象转换为可 JSON 序列化的结构，非有限浮点写为 None"""
    if isinstance(value, dict):
        return {str(k): to_jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_jsonable(v) for v in value]
    if isinstance(value, pd.DataFrame):
        return to_jsonable(value.to_dict(orient='records'))
    if isinstance(value, np.ndarray):
        return to_jsonable(value.tolist())
    if isinstance(value, np.generic):
        return to_jsonable(value.item())
    if isinstance(value, float) and not math.isfinite(value):
        return None
    if isinstance(value, Path):
        return str(value)
    if isinstance(value, Enum):
        return value.value
    return value


def write_json_report(data: Dict[str, Any], path: Union[str, Path]) -> Path:
    """
    写出 JSON 报告（键排序，UTF-8）

    Args:
        data: 报告内容
        path: 输出路径

    Returns:
        写出的路径
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(
        json.dumps(to_jsonable(data), indent=2, sort_keys=True, ensure_ascii=False),
        encoding='utf-8'
    )
    logger.info(f"JSON report saved to {path}")
    return path


def write_grid_csv(grid: np.ndarray, path: Union[str, Path]) -> Path:
    """写出无表头的 C1 行 x C2 列网格"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    pd.DataFrame(np.asarray(grid)).to_csv(path, header=False, index=False)
    return path


def write_table_csv(table: pd.DataFrame, path: Union[str, Path]) -> Path:
    """写出带表头的表格"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    table.to_csv(path, index=False)
    return path


class ReportWriter:
    """
    单次运行的产物目录

    记录写出的每个文件，供 manifest 汇总。
    """

    def __init__(self, output_dir: Union[str, Path]):
        self.output_dir = Path(output_dir)
        self.output_dir.mkdir(parents=True, exist_ok=True)
        self.artifacts: List[Path] = []

    def _path(self, name: str) -> Path:
        return self.output_dir / name

    def _track(self, path: Path) -> Path:
        self.artifacts.append(path)
        return path

    def grid(self, name: str, grid: np.ndarray) -> Path:
        return self._track(write_grid_csv(grid, self._path(name)))

    def table(self, name: str, table: pd.DataFrame) -> Path:
        return self._track(write_table_csv(table, self._path(name)))

    def json(self, name: str, data: Dict[str, Any]) -> Path:
        return self._track(write_json_report(data, self._path(name)))

    def png(self, name: str, content: bytes) -> Path:
        path = self._path(name)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_bytes(content)
        logger.info(f"PNG saved to {path}")
        return self._track(path)

    def track(self, path: Union[str, Path]) -> Path:
        """登记由其他模块写出的文件"""
        return self._track(Path(path))

    @staticmethod
    def timestamp() -> str:
        return datetime.now().strftime('%Y-%m-%d %H:%M:%S')
