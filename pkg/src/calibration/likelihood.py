"""观测模型似然

对单个放射性碳测年:
    log l(theta) = -1/2 log s^2 - (mu(theta) + dR - y)^2 / (2 s^2)
    s^2 = sigma_lab^2 + sigma(theta)^2 + sigma_dR^2
省略了与 theta 无关的 2*pi 常数。
"""
import math
from dataclasses import dataclass
from typing import Dict, Mapping, Optional, Sequence

import numpy as np

from src.calibration.curve import CalibrationCurve, mu_sigma, mu_sigma_grid, round_age
from src.core.constants import Material
from src.core.exceptions import CalibrationRangeError, DataValidationError
from src.core.logger import get_logger

logger = get_logger(__name__)

CurveSet = Mapping[Material, CalibrationCurve]


@dataclass(frozen=True)
class RadiocarbonDate:
    """
    放射性碳测年记录

    Attributes:
        id: 样本编号
        pit: 所属探坑名称
        y: 放射性碳年龄
        sigma_lab: 实验室标准误差
        material: 材料类型
        delta_r: 海洋库效应偏移均值
        delta_r_sigma: 海洋库效应偏移误差
        phase: 已知地层阶段（可选，1为最年轻）
    """
    id: str
    pit: str
    y: float
    sigma_lab: float
    material: Material = Material.TERRESTRIAL
    delta_r: float = 0.0
    delta_r_sigma: float = 0.0
    phase: Optional[int] = None

    def __post_init__(self):
        object.__setattr__(self, 'material', Material(self.material))
        if not self.sigma_lab > 0:
            raise DataValidationError(f"样本 {self.id}: 实验室误差必须为正 ({self.sigma_lab})")
        if self.delta_r_sigma < 0:
            raise DataValidationError(f"样本 {self.id}: 库效应误差不能为负 ({self.delta_r_sigma})")
        if self.material is Material.TERRESTRIAL and (self.delta_r != 0 or self.delta_r_sigma != 0):
            raise DataValidationError(f"样本 {self.id}: 陆生样本不能设置库效应偏移")
        if self.phase is not None and self.phase < 1:
            raise DataValidationError(f"样本 {self.id}: 阶段编号必须 >= 1 ({self.phase})")


def _curve_for(date: RadiocarbonDate, curves: CurveSet) -> CalibrationCurve:
    try:
        return curves[date.material]
    except KeyError:
        raise DataValidationError(f"缺少{date.material.value}校准曲线 (样本 {date.id})") from None


def _log_normal_kernel(mu, sigma, date: RadiocarbonDate):
    s2 = date.sigma_lab ** 2 + np.square(sigma) + date.delta_r_sigma ** 2
    resid = mu + date.delta_r - date.y
    return -0.5 * np.log(s2) - resid * resid / (2.0 * s2)


def log_likelihood(date: RadiocarbonDate, theta: float, curves: CurveSet) -> float:
    """
    单个测年的对数似然

    Args:
        date: 测年记录
        theta: 日历年龄（BP）
        curves: 材料类型 -> 已插值曲线

    Returns:
        对数似然值

    Raises:
        CalibrationRangeError: theta 超出曲线范围
    """
    mu, sigma = mu_sigma(_curve_for(date, curves), theta)
    return float(_log_normal_kernel(mu, sigma, date))


def log_likelihood_total(theta_vec: Sequence[float], dates: Sequence[RadiocarbonDate], curves: CurveSet) -> float:
    """
    所有测年的对数似然之和

    Args:
        theta_vec: 每个测年一个年龄
        dates: 测年列表
        curves: 校准曲线

    Returns:
        对数似然之和
    """
    if len(theta_vec) != len(dates):
        raise DataValidationError(f"年龄数量 {len(theta_vec)} 与测年数量 {len(dates)} 不一致")
    return float(sum(log_likelihood(d, t, curves) for d, t in zip(dates, theta_vec)))


class LikelihoodTable:
    """
    预计算的似然表

    在整数年网格 [floor(L), ceil(U)] 上为每个测年预先计算对数似然，
    MCMC 中按取整年龄直接索引。曲线范围外的格点为 -inf。

    Attributes:
        lo: 网格起点年龄
        values: 形状 (K, G) 的对数似然表
        flat: 是否为平坦似然（先验模拟）
    """

    def __init__(
        self,
        dates: Sequence[RadiocarbonDate],
        curves: Optional[CurveSet],
        L: float,
        U: float,
        flat: bool = False
    ):
        self.lo = int(math.floor(L))
        self.hi = int(math.ceil(U))
        self.flat = flat
        ages = np.arange(self.lo, self.hi + 1, dtype=np.int64)
        self.values = np.zeros((len(dates), len(ages)))

        if not flat:
            cache: Dict[Material, tuple] = {}
            for k, date in enumerate(dates):
                if date.material not in cache:
                    cache[date.material] = mu_sigma_grid(_curve_for(date, curves), ages)
                mu, sigma, inside = cache[date.material]
                row = np.full(len(ages), -np.inf)
                row[inside] = _log_normal_kernel(mu[inside], sigma[inside], date)
                self.values[k] = row
                if not inside.any():
                    raise CalibrationRangeError(f"样本 {date.id}: 校准曲线与 [L, U] 没有交集")

        logger.debug(f"似然表: {len(dates)} 个测年 x {len(ages)} 年, 平坦={flat}")

    def _index(self, theta) -> np.ndarray:
        return round_age(theta) - self.lo

    def value(self, k: int, theta: float) -> float:
        """第 k 个测年在 theta 处的对数似然"""
        idx = int(self._index(theta))
        if idx < 0 or idx >= self.values.shape[1]:
            return -np.inf
        return float(self.values[k, idx])

    def total(self, theta: np.ndarray) -> float:
        """所有测年的对数似然之和"""
        if len(theta) == 0:
            return 0.0
        idx = self._index(theta)
        if idx.min() < 0 or idx.max() >= self.values.shape[1]:
            return -np.inf
        return float(self.values[np.arange(len(idx)), idx].sum())

    def mode(self, k: int) -> Optional[float]:
        """第 k 个测年的似然众数年龄，平坦似然时为 None"""
        if self.flat:
            return None
        return float(self.lo + int(np.argmax(self.values[k])))
