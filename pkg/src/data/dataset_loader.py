"""数据集加载

dates.csv 表头: id,pit,c14_age,c14_error,material,delta_r,delta_r_error
    可选列 include（保留/剔除）与 phase（已知阶段）
pits.csv 表头: pit,x,y
"""
import math
from dataclasses import dataclass
from pathlib import Path
from typing import IO, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from src.calibration.likelihood import RadiocarbonDate
from src.core.constants import DEFAULT_CELL_SIDE, PIN_TOLERANCE, Material
from src.core.exceptions import DataValidationError
from src.core.logger import get_logger
from src.onsetfield.lattice import Lattice, cell_of

logger = get_logger(__name__)

DATE_COLUMNS = ['id', 'pit', 'c14_age', 'c14_error', 'material', 'delta_r', 'delta_r_error']
PIT_COLUMNS = ['pit', 'x', 'y']
TRUE_VALUES = {'true', '1', 'yes', 'y', 't'}
FALSE_VALUES = {'false', '0', 'no', 'n', 'f'}

TableSource = Union[str, Path, IO[str]]


class DateList(list):
    """测年列表，附带被 include 列剔除的数量"""

    def __init__(self, dates=(), excluded: int = 0):
        super().__init__(dates)
        self.excluded = excluded


@dataclass(frozen=True)
class Pit:
    """探坑（点位置）"""
    name: str
    x: float
    y: float


def _read_table(source: TableSource, required: Sequence[str]) -> pd.DataFrame:
    frame = pd.read_csv(source, dtype=str, keep_default_na=False, comment='#', skipinitialspace=True)
    frame.columns = [c.strip() for c in frame.columns]
    missing = [c for c in required if c not in frame.columns]
    if missing:
        raise DataValidationError(f"缺少列: {', '.join(missing)} (需要 {', '.join(required)})")
    return frame


def _number(value: str, column: str, row: int, default: Optional[float] = None) -> float:
    text = str(value).strip()
    if text == '' and default is not None:
        return default
    try:
        number = float(text)
    except ValueError:
        raise DataValidationError(f"第 {row} 行 {column} 不是数值: '{value}'") from None
    if not math.isfinite(number):
        raise DataValidationError(f"第 {row} 行 {column} 不是有限数值: '{value}'")
    return number


def parse_dates(source: TableSource) -> DateList:
    """
    解析测年 CSV

    Args:
        source: 文件路径或文本流

    Returns:
        DateList（excluded 属性为 include=false 剔除的行数）

    Raises:
        DataValidationError: 缺列、非数值、未知材料、误差非正等
    """
    frame = _read_table(source, DATE_COLUMNS)
    allowed = [m.value for m in Material]
    dates = []
    excluded = 0

    for offset, record in enumerate(frame.to_dict('records')):
        row = offset + 2  # 表头占第1行
        if 'include' in frame.columns:
            flag = str(record['include']).strip().lower()
            if flag in FALSE_VALUES:
                excluded += 1
                continue
            if flag not in TRUE_VALUES and flag != '':
                raise DataValidationError(f"第 {row} 行 include 取值无效: '{record['include']}'")

        material = str(record['material']).strip().lower()
        if material not in allowed:
            raise DataValidationError(
                f"第 {row} 行材料类型未知: '{record['material']}'，可选: {', '.join(allowed)}"
            )
        phase = None
        if 'phase' in frame.columns and str(record['phase']).strip() != '':
            phase_value = _number(record['phase'], 'phase', row)
            if phase_value != int(phase_value):
                raise DataValidationError(f"第 {row} 行 phase 必须为整数: '{record['phase']}'")
            phase = int(phase_value)

        values = {
            'y': _number(record['c14_age'], 'c14_age', row),
            'sigma_lab': _number(record['c14_error'], 'c14_error', row),
            'delta_r': _number(record['delta_r'], 'delta_r', row, default=0.0),
            'delta_r_sigma': _number(record['delta_r_error'], 'delta_r_error', row, default=0.0),
        }
        try:
            dates.append(RadiocarbonDate(
                id=str(record['id']).strip(),
                pit=str(record['pit']).strip(),
                material=Material(material),
                phase=phase,
                **values,
            ))
        except DataValidationError as e:
            raise DataValidationError(f"第 {row} 行: {e}") from None

    ids = [d.id for d in dates]
    if len(set(ids)) != len(ids):
        raise DataValidationError("样本编号重复")

    logger.info(f"读取测年 {len(dates)} 条，剔除 {excluded} 条")
    return DateList(dates, excluded)


def parse_pits(source: TableSource) -> List[Pit]:
    """
    解析探坑 CSV

    Args:
        source: 文件路径或文本流

    Returns:
        探坑列表

    Raises:
        DataValidationError: 缺列、非数值或探坑名称重复
    """
    frame = _read_table(source, PIT_COLUMNS)
    pits = []
    seen = set()
    for offset, record in enumerate(frame.to_dict('records')):
        row = offset + 2
        name = str(record['pit']).strip()
        if name in seen:
            raise DataValidationError(f"第 {row} 行探坑名称重复: '{name}'")
        seen.add(name)
        pits.append(Pit(name, _number(record['x'], 'x', row), _number(record['y'], 'y', row)))
    logger.info(f"读取探坑 {len(pits)} 个")
    return pits


@dataclass
class Dataset:
    """
    测年 + 探坑 + 格点框

    Attributes:
        dates: 保留的测年
        pits: 探坑
        lattice: 与数据对齐的格点框
    """
    dates: List[RadiocarbonDate]
    pits: List[Pit]
    lattice: Lattice

    def __post_init__(self):
        if not self.dates:
            raise DataValidationError("数据集至少需要1条测年")
        names = {p.name for p in self.pits}
        unknown = sorted({d.pit for d in self.dates} - names)
        if unknown:
            raise DataValidationError(f"测年引用了不存在的探坑: {', '.join(unknown)}")
        for pit in self.pits:
            cell_of(self.lattice, pit.x, pit.y)

    @property
    def pit_map(self) -> Dict[str, Pit]:
        return {p.name: p for p in self.pits}

    @property
    def pit_cells(self) -> Dict[str, int]:
        """探坑名称 -> 格子编号"""
        return {p.name: cell_of(self.lattice, p.x, p.y) for p in self.pits}

    @property
    def date_cells(self) -> np.ndarray:
        """每条测年所在格子编号"""
        cells = self.pit_cells
        return np.array([cells[d.pit] for d in self.dates], dtype=np.int64)

    def subset(self, pit: str) -> 'Dataset':
        """只含一个探坑测年的子数据集"""
        return Dataset([d for d in self.dates if d.pit == pit], self.pits, self.lattice)


def fit_lattice(
    pits: Sequence[Pit],
    cells: Optional[Tuple[int, int]] = None,
    cell_side: float = DEFAULT_CELL_SIDE,
    along_axis: Optional[str] = None
) -> Lattice:
    """
    把格点框对齐到探坑分布

    给定 cells 时框大小固定并以探坑包围盒为中心；否则把包围盒扩展到
    整数个格子，长轴取数据范围较宽的方向。

    Args:
        pits: 探坑
        cells: (C1, C2)，None 表示自动拟合
        cell_side: 格子边长
        along_axis: 沿海滩坐标轴，None 时取数据较宽的方向

    Returns:
        Lattice

    Raises:
        DataValidationError: 固定尺寸的框装不下探坑
    """
    if not pits:
        raise DataValidationError("至少需要1个探坑")
    xs = np.array([p.x for p in pits])
    ys = np.array([p.y for p in pits])
    width_x = xs.max() - xs.min()
    width_y = ys.max() - ys.min()
    if along_axis is None:
        along_axis = 'x' if width_x >= width_y else 'y'
    along_width, cross_width = (width_x, width_y) if along_axis == 'x' else (width_y, width_x)

    if cells is None:
        C2 = int(np.floor(along_width / cell_side)) + 1
        C1 = int(np.floor(cross_width / cell_side)) + 1
    else:
        C1, C2 = int(cells[0]), int(cells[1])
        slack = 1.0 + PIN_TOLERANCE
        if along_width > C2 * cell_side * slack or cross_width > C1 * cell_side * slack:
            raise DataValidationError(
                f"{C1}x{C2} 格点（边长 {cell_side}）装不下探坑范围 "
                f"{along_width:.2f} x {cross_width:.2f}，请增大格点或使用自动拟合"
            )

    along_len, cross_len = C2 * cell_side, C1 * cell_side
    size_x, size_y = (along_len, cross_len) if along_axis == 'x' else (cross_len, along_len)
    # 居中；恰好装满时原点落在最小坐标上
    origin = (
        min((xs.min() + xs.max()) / 2.0 - size_x / 2.0, xs.min()),
        min((ys.min() + ys.max()) / 2.0 - size_y / 2.0, ys.min()),
    )
    lattice = Lattice(C1, C2, cell_side, origin, along_axis)
    logger.info(f"格点框: {C1}x{C2}, 边长 {cell_side}, 沿海滩轴 {along_axis}, 原点 {origin}")
    return lattice


def build_dataset(
    dates: Sequence[RadiocarbonDate],
    pits: Sequence[Pit],
    cells: Optional[Tuple[int, int]] = None,
    cell_side: float = DEFAULT_CELL_SIDE,
    along_axis: Optional[str] = None,
    lattice: Optional[Lattice] = None
) -> Dataset:
    """组装并交叉校验数据集，未给出 lattice 时自动对齐"""
    if lattice is None:
        lattice = fit_lattice(pits, cells, cell_side, along_axis)
    return Dataset(list(dates), list(pits), lattice)


def load_dataset(dates_path: TableSource, pits_path: TableSource, **lattice_options) -> Dataset:
    """读取 dates.csv 与 pits.csv 并组装数据集"""
    return build_dataset(parse_dates(dates_path), parse_pits(pits_path), **lattice_options)


def write_dates(dates: Sequence[RadiocarbonDate], path: Union[str, Path]) -> Path:
    """写出测年 CSV（parse_dates 的逆操作）"""
    rows = [{
        'id': d.id,
        'pit': d.pit,
        'c14_age': repr(float(d.y)),
        'c14_error': repr(float(d.sigma_lab)),
        'material': d.material.value,
        'delta_r': repr(float(d.delta_r)),
        'delta_r_error': repr(float(d.delta_r_sigma)),
        'phase': '' if d.phase is None else str(d.phase),
    } for d in dates]
    columns = DATE_COLUMNS + (['phase'] if any(d.phase is not None for d in dates) else [])
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    pd.DataFrame(rows, columns=DATE_COLUMNS + ['phase'])[columns].to_csv(path, index=False)
    return path


def write_pits(pits: Sequence[Pit], path: Union[str, Path]) -> Path:
    """写出探坑 CSV（parse_pits 的逆操作）"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    pd.DataFrame(
        [{'pit': p.name, 'x': repr(float(p.x)), 'y': repr(float(p.y))} for p in pits],
        columns=PIT_COLUMNS
    ).to_csv(path, index=False)
    return path
