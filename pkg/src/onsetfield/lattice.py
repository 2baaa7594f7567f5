"""格点几何

C1 行（横跨海滩）x C2 列（沿海滩），格子编号 c = r * C2 + q。
同一行相邻为沿海滩邻居（速率 beta1），同一列相邻为横跨海滩邻居（速率 beta2）。
"""
from dataclasses import dataclass
from functools import cached_property
from typing import List, Tuple

import numpy as np

from src.core.constants import ALONG_AXES, DEFAULT_CELL_SIDE, PIN_TOLERANCE
from src.core.exceptions import ConfigError, DataValidationError, InvalidStateError

ALONG = 'along'
CROSS = 'cross'


@dataclass(frozen=True)
class MigrationRates:
    """
    起始场速率参数（每年）

    Attributes:
        alpha: 迁入速率
        beta1: 沿海滩迁移速率
        beta2: 横跨海滩迁移速率
    """
    alpha: float
    beta1: float
    beta2: float

    def __post_init__(self):
        if not (self.alpha > 0 and self.beta1 > 0 and self.beta2 > 0):
            raise InvalidStateError(
                f"速率必须为正: alpha={self.alpha}, beta1={self.beta1}, beta2={self.beta2}"
            )

    def scaled(self, z: float) -> 'MigrationRates':
        """三个速率同乘 z"""
        return MigrationRates(self.alpha * z, self.beta1 * z, self.beta2 * z)


@dataclass(frozen=True)
class Lattice:
    """
    C1 x C2 方形格点

    Attributes:
        C1: 横跨海滩格数
        C2: 沿海滩格数
        cell_side: 格子边长（米）
        origin: 格点框左下角的发掘坐标 (x, y)
        along_axis: 沿海滩方向对应的坐标轴 'x' 或 'y'
    """
    C1: int
    C2: int
    cell_side: float = DEFAULT_CELL_SIDE
    origin: Tuple[float, float] = (0.0, 0.0)
    along_axis: str = 'x'

    def __post_init__(self):
        if self.C1 < 1 or self.C2 < 1:
            raise ConfigError(f"格点尺寸必须 >= 1: {self.C1}x{self.C2}")
        if not self.cell_side > 0:
            raise ConfigError(f"格子边长必须为正: {self.cell_side}")
        if self.along_axis not in ALONG_AXES:
            raise ConfigError(f"along_axis 必须是 {ALONG_AXES} 之一: {self.along_axis}")
        object.__setattr__(self, 'origin', (float(self.origin[0]), float(self.origin[1])))

    @property
    def shape(self) -> Tuple[int, int]:
        return self.C1, self.C2

    @property
    def C(self) -> int:
        return self.C1 * self.C2

    @property
    def extent(self) -> Tuple[float, float, float, float]:
        """框的坐标范围 (xmin, xmax, ymin, ymax)"""
        along_len = self.C2 * self.cell_side
        cross_len = self.C1 * self.cell_side
        x0, y0 = self.origin
        if self.along_axis == 'x':
            return x0, x0 + along_len, y0, y0 + cross_len
        return x0, x0 + cross_len, y0, y0 + along_len

    def index(self, r: int, q: int) -> int:
        """(行, 列) -> 格子编号"""
        return r * self.C2 + q

    def position(self, c: int) -> Tuple[int, int]:
        """格子编号 -> (行, 列)"""
        return divmod(c, self.C2)

    @cached_property
    def neighbor_table(self) -> List[List[Tuple[int, str]]]:
        """每个格子的 (邻居编号, 方向) 列表"""
        table = []
        for c in range(self.C):
            r, q = self.position(c)
            cells = []
            if r > 0:
                cells.append((self.index(r - 1, q), CROSS))
            if q > 0:
                cells.append((self.index(r, q - 1), ALONG))
            if q < self.C2 - 1:
                cells.append((self.index(r, q + 1), ALONG))
            if r < self.C1 - 1:
                cells.append((self.index(r + 1, q), CROSS))
            table.append(cells)
        return table

    def transposed(self) -> 'Lattice':
        """交换行列后的格点（用于对称性检验）"""
        return Lattice(self.C2, self.C1, self.cell_side, self.origin, self.along_axis)


def neighbors(lattice: Lattice, c: int) -> List[int]:
    """
    四邻域（边界处截断）

    Args:
        lattice: 格点
        c: 格子编号

    Returns:
        升序的邻居编号列表
    """
    if not 0 <= c < lattice.C:
        raise InvalidStateError(f"格子编号越界: {c} (C={lattice.C})")
    return sorted(d for d, _ in lattice.neighbor_table[c])


def cell_of(lattice: Lattice, x: float, y: float) -> int:
    """
    发掘坐标所在的格子

    落在格子边界上的点归入各轴上编号较大的格子；框的远端边界归入最后一个格子。
    距框边界不超过舍入误差的点视为在框内。

    Args:
        lattice: 格点
        x, y: 发掘坐标（米）

    Returns:
        格子编号

    Raises:
        DataValidationError: 点在框外
    """
    xmin, xmax, ymin, ymax = lattice.extent
    slack = PIN_TOLERANCE * max(1.0, abs(xmin), abs(xmax), abs(ymin), abs(ymax))
    if not (xmin - slack <= x <= xmax + slack and ymin - slack <= y <= ymax + slack):
        raise DataValidationError(
            f"坐标 ({x}, {y}) 不在格点框 x[{xmin}, {xmax}] y[{ymin}, {ymax}] 内"
        )
    along, cross = (x - xmin, y - ymin) if lattice.along_axis == 'x' else (y - ymin, x - xmin)
    q = min(max(int(np.floor(along / lattice.cell_side)), 0), lattice.C2 - 1)
    r = min(max(int(np.floor(cross / lattice.cell_side)), 0), lattice.C1 - 1)
    return lattice.index(r, q)
