"""校准曲线模块 - 加载、插值与查表"""
import io
from dataclasses import dataclass
from pathlib import Path
from typing import IO, Tuple, Union

import numpy as np

from src.core.constants import Material
from src.core.exceptions import CalibrationRangeError, ChronologyError, CurveFormatError
from src.core.logger import get_logger

logger = get_logger(__name__)

CurveSource = Union[str, Path, bytes, IO[bytes], IO[str]]


@dataclass(frozen=True)
class CalibrationCurve:
    """
    校准曲线 mu(theta), sigma(theta)

    Attributes:
        cal_age: 日历年龄（BP，整数），按原始表格顺序
        c14_age: 放射性碳年龄
        error: 曲线误差（> 0）
        kind: 材料类型
    """
    cal_age: np.ndarray
    c14_age: np.ndarray
    error: np.ndarray
    kind: Material

    def __len__(self) -> int:
        return len(self.cal_age)

    @property
    def age_range(self) -> Tuple[int, int]:
        """曲线覆盖的日历年龄范围 (min, max)"""
        return int(self.cal_age.min()), int(self.cal_age.max())

    @property
    def is_annual(self) -> bool:
        """是否已是升序的1年步长表"""
        return len(self.cal_age) >= 1 and bool(np.all(np.diff(self.cal_age) == 1))


def _read_text(source: CurveSource) -> str:
    if isinstance(source, bytes):
        return source.decode('utf-8')
    if isinstance(source, (str, Path)):
        return Path(source).read_text(encoding='utf-8')
    data = source.read()
    return data.decode('utf-8') if isinstance(data, bytes) else data


def _split_row(line: str) -> list:
    sep = '\t' if '\t' in line else ','
    return [field.strip() for field in line.split(sep)]


def _is_number(text: str) -> bool:
    try:
        float(text)
        return True
    except ValueError:
        return False


def load_curve(source: CurveSource, kind: Union[Material, str] = Material.TERRESTRIAL) -> CalibrationCurve:
    """
    解析校准曲线文件

    每行 cal_age,c14_age,error（逗号或制表符分隔），'#' 开头为注释。
    第一条非注释行若全部为非数字字段则视为表头。保留原始步长与顺序。

    Args:
        source: 文件路径、字节串或文件对象
        kind: 曲线类型

    Returns:
        未插值的校准曲线

    Raises:
        CurveFormatError: 行格式错误、日历年龄不单调、误差非正或曲线为空
    """
    kind = Material(kind)
    text = _read_text(source)

    rows = []
    line_numbers = []
    header_allowed = True
    for line_no, raw in enumerate(io.StringIO(text), start=1):
        line = raw.strip()
        if not line or line.startswith('#'):
            continue
        fields = _split_row(line)
        if header_allowed and not any(_is_number(f) for f in fields):
            header_allowed = False
            continue
        header_allowed = False

        if len(fields) < 3:
            raise CurveFormatError(f"需要3列 (cal_age, c14_age, error)，实际 {len(fields)} 列", line_no)
        try:
            cal, c14, err = (float(f) for f in fields[:3])
        except ValueError:
            raise CurveFormatError(f"无法解析数值: {line}", line_no) from None
        if cal != round(cal):
            raise CurveFormatError(f"日历年龄必须为整数年: {fields[0]}", line_no)
        if err <= 0:
            raise CurveFormatError(f"曲线误差必须为正: {fields[2]}", line_no)
        rows.append((int(round(cal)), c14, err))
        line_numbers.append(line_no)

    if not rows:
        raise CurveFormatError("校准曲线为空")

    cal_age = np.array([r[0] for r in rows], dtype=np.int64)
    steps = np.diff(cal_age)
    if len(steps):
        bad = (steps == 0) | (np.sign(steps) != np.sign(steps[0]))
        if bad.any():
            raise CurveFormatError("日历年龄必须严格单调", line_numbers[int(np.argmax(bad)) + 1])

    curve = CalibrationCurve(
        cal_age=cal_age,
        c14_age=np.array([r[1] for r in rows], dtype=float),
        error=np.array([r[2] for r in rows], dtype=float),
        kind=kind,
    )
    logger.debug(f"加载{kind.value}校准曲线: {len(curve)} 行, 范围 {curve.age_range}")
    return curve


def interpolate_curve(curve: CalibrationCurve) -> CalibrationCurve:
    """
    线性插值到1年步长

    c14_age 与 error（而非方差）都做线性插值，结果按日历年龄升序排列。

    Args:
        curve: 原始曲线（至少2行）

    Returns:
        1年步长曲线；输入已是升序1年步长时原样返回
    """
    if len(curve) < 2:
        raise ChronologyError("插值至少需要2行曲线数据")
    if curve.is_annual:
        return curve

    order = np.argsort(curve.cal_age)
    cal = curve.cal_age[order]
    grid = np.arange(cal[0], cal[-1] + 1, dtype=np.int64)
    return CalibrationCurve(
        cal_age=grid,
        c14_age=np.interp(grid, cal, curve.c14_age[order]),
        error=np.interp(grid, cal, curve.error[order]),
        kind=curve.kind,
    )


def round_age(theta) -> np.ndarray:
    """日历年龄取整到整数年（半年向上）"""
    return np.floor(np.asarray(theta, dtype=float) + 0.5).astype(np.int64)


def mu_sigma(curve: CalibrationCurve, theta: float) -> Tuple[float, float]:
    """
    查表得到 (mu(theta), sigma(theta))

    Args:
        curve: 已插值的曲线
        theta: 日历年龄（BP），取整后查表

    Returns:
        (mu, sigma)

    Raises:
        CalibrationRangeError: theta 超出曲线范围
    """
    if not curve.is_annual:
        raise ChronologyError("查表前必须先调用 interpolate_curve")
    age = int(round_age(theta))
    lo, hi = curve.age_range
    if age < lo or age > hi:
        raise CalibrationRangeError(f"年龄 {theta} 超出{curve.kind.value}曲线范围 [{lo}, {hi}]")
    idx = age - lo
    return float(curve.c14_age[idx]), float(curve.error[idx])


def mu_sigma_grid(curve: CalibrationCurve, ages: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    批量查表，不抛出范围错误

    Args:
        curve: 已插值的曲线
        ages: 整数年龄数组

    Returns:
        (mu, sigma, inside) 三个数组，范围外位置 inside 为 False，mu/sigma 为 nan
    """
    ages = np.asarray(ages, dtype=np.int64)
    lo, hi = curve.age_range
    inside = (ages >= lo) & (ages <= hi)
    idx = np.clip(ages - lo, 0, len(curve) - 1)
    mu = np.where(inside, curve.c14_age[idx], np.nan)
    sigma = np.where(inside, curve.error[idx], np.nan)
    return mu, sigma, inside


def load_curve_set(paths: dict) -> dict:
    """
    按材料类型加载并插值多条曲线

    Args:
        paths: {'terrestrial': 路径, 'marine': 路径}，值为空的条目跳过

    Returns:
        Material -> 已插值曲线
    """
    curves = {}
    for kind, path in paths.items():
        if not path:
            continue
        material = Material(kind)
        curves[material] = interpolate_curve(load_curve(path, material))
        logger.info(f"校准曲线 {material.value}: {path} -> 范围 {curves[material].age_range}")
    return curves
