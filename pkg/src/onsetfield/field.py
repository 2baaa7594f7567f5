"""起始场过程: 模拟与精确密度

迁入-迁移过程从 psi_M 向更早（年龄更小）方向推进:
每个未占据格子的速率为 alpha 加上已占据邻居贡献的 beta，
按 Exp(R) 间隔依次占据格子，记录占据年龄 phi_c。
"""
import json
from pathlib import Path
from typing import Optional, Tuple, Union

import numpy as np
import pandas as pd

from src.core.constants import PIN_TOLERANCE
from src.core.logger import get_logger
from src.onsetfield.lattice import ALONG, CROSS, Lattice, MigrationRates

logger = get_logger(__name__)


def as_grid(field: np.ndarray, lattice: Lattice) -> np.ndarray:
    """把长度 C 的向量或 (..., C1, C2) 数组整理为网格形状"""
    field = np.asarray(field, dtype=float)
    if field.shape[-2:] == lattice.shape:
        return field
    return field.reshape(field.shape[:-1] + lattice.shape)


def _later_neighbor_counts(grid: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """
    每个格子中 phi 更大（更早占据）的沿海滩/横跨海滩邻居数

    Args:
        grid: (..., C1, C2)

    Returns:
        (along_count, cross_count)
    """
    along = np.zeros(grid.shape)
    cross = np.zeros(grid.shape)
    right_larger = grid[..., :, 1:] > grid[..., :, :-1]
    left_larger = grid[..., :, :-1] > grid[..., :, 1:]
    along[..., :, :-1] += right_larger
    along[..., :, 1:] += left_larger
    down_larger = grid[..., 1:, :] > grid[..., :-1, :]
    up_larger = grid[..., :-1, :] > grid[..., 1:, :]
    cross[..., :-1, :] += down_larger
    cross[..., 1:, :] += up_larger
    return along, cross


def rho_grid(field: np.ndarray, rates: MigrationRates, lattice: Lattice) -> np.ndarray:
    """所有格子的占据速率 rho(phi, c)，形状 (..., C1, C2)"""
    grid = as_grid(field, lattice)
    along, cross = _later_neighbor_counts(grid)
    return rates.alpha + rates.beta1 * along + rates.beta2 * cross


def rho(field: np.ndarray, c: int, rates: MigrationRates, lattice: Lattice) -> float:
    """
    格子 c 的占据速率

    rho = alpha + sum_{c' in N(c)} beta_{c,c'} 1[phi_c' > phi_c]

    Args:
        field: 起始场
        c: 格子编号
        rates: 速率参数
        lattice: 格点

    Returns:
        每年速率
    """
    phi = as_grid(field, lattice).ravel()
    value = rates.alpha
    for d, kind in lattice.neighbor_table[c]:
        if phi[d] > phi[c]:
            value += rates.beta1 if kind == ALONG else rates.beta2
    return float(value)


def simulate_field(
    rates: MigrationRates,
    lattice: Lattice,
    psi_M: float,
    condition_first_arrival: bool,
    rng: np.random.Generator
) -> np.ndarray:
    """
    模拟起始场

    维护各格子速率 r_c 与总速率 R，间隔 delta ~ Exp(均值 1/R)，
    按 r_c / R 选择格子，占据后清零其速率并给未占据邻居加上 beta。
    condition_first_arrival 为真时第一个到达恰好在 psi_M。

    Args:
        rates: 速率参数
        lattice: 格点
        psi_M: 最早阶段边界年龄
        condition_first_arrival: 是否把第一个到达固定在 psi_M
        rng: 随机数生成器

    Returns:
        (C1, C2) 起始场
    """
    C = lattice.C
    beta = {ALONG: rates.beta1, CROSS: rates.beta2}
    r = np.full(C, rates.alpha)
    phi = np.empty(C)
    t = float(psi_M)

    for n in range(C):
        total = r.sum()
        if not (n == 0 and condition_first_arrival):
            t -= rng.exponential(1.0 / total)
        cumulative = np.cumsum(r)
        c = int(np.searchsorted(cumulative, rng.random() * cumulative[-1], side='right'))
        if c >= C or r[c] == 0.0:
            c = int(np.flatnonzero(r)[-1])
        phi[c] = t
        r[c] = 0.0
        for d, kind in lattice.neighbor_table[c]:
            if r[d] > 0.0:
                r[d] += beta[kind]

    return phi.reshape(lattice.shape)


def log_density_fields(
    fields: np.ndarray,
    rates: MigrationRates,
    lattice: Lattice,
    psi_M: float,
    conditioned: bool = False
) -> np.ndarray:
    """
    批量计算起始场对数密度

    sum_c [log rho_c - alpha (psi_M - phi_c)] - beta1 sum|沿海滩差| - beta2 sum|横跨海滩差|
    条件形式（max phi = psi_M）再减去 log alpha。

    Args:
        fields: (..., C1, C2) 或 (..., C)
        rates: 速率参数
        lattice: 格点
        psi_M: 最早阶段边界年龄
        conditioned: 是否为条件密度

    Returns:
        形状为批维度的对数密度数组，越界处为 -inf
    """
    grid = as_grid(fields, lattice)
    flat = grid.reshape(grid.shape[:-2] + (-1,))
    log_rho = np.log(rho_grid(grid, rates, lattice)).reshape(flat.shape).sum(axis=-1)
    along_diff = np.abs(np.diff(grid, axis=-1)).sum(axis=(-2, -1))
    cross_diff = np.abs(np.diff(grid, axis=-2)).sum(axis=(-2, -1))
    value = (
        log_rho
        - rates.alpha * (psi_M - flat).sum(axis=-1)
        - rates.beta1 * along_diff
        - rates.beta2 * cross_diff
    )

    top = flat.max(axis=-1)
    valid = top <= psi_M
    if conditioned:
        value = value - np.log(rates.alpha)
        valid &= np.abs(top - psi_M) <= PIN_TOLERANCE * max(1.0, abs(psi_M))
    return np.where(valid, value, -np.inf)


def log_density_field(
    field: np.ndarray,
    rates: MigrationRates,
    lattice: Lattice,
    psi_M: float,
    conditioned: bool = False
) -> float:
    """单个起始场的对数密度，见 log_density_fields"""
    return float(log_density_fields(as_grid(field, lattice), rates, lattice, psi_M, conditioned))


def arrival_count(field: np.ndarray, lattice: Lattice) -> int:
    """
    到达事件数 V(phi)

    严格局部极大（大于所有邻居）的格子数。

    Args:
        field: 起始场
        lattice: 格点

    Returns:
        局部极大格子数
    """
    grid = as_grid(field, lattice)
    padded = np.pad(grid, 1, constant_values=-np.inf)
    center = padded[1:-1, 1:-1]
    is_max = (
        (center > padded[:-2, 1:-1]) & (center > padded[2:, 1:-1])
        & (center > padded[1:-1, :-2]) & (center > padded[1:-1, 2:])
    )
    return int(is_max.sum())


def field_in_bounds(field: np.ndarray, psi_0: float, psi_M: float) -> bool:
    """所有格子满足 psi_0 < phi_c <= psi_M"""
    field = np.asarray(field)
    return bool(np.all(field > psi_0) and np.all(field <= psi_M))


def front_speed(field: np.ndarray, lattice: Lattice) -> float:
    """
    推进速度估计（格/年）

    以最早到达格子为中心，对格子距离与经过时间 (max phi - phi_c) 做最小二乘斜率。

    Args:
        field: 起始场
        lattice: 格点

    Returns:
        距离对经过时间的回归斜率
    """
    grid = as_grid(field, lattice)
    r0, q0 = np.unravel_index(int(np.argmax(grid)), grid.shape)
    rows, cols = np.indices(grid.shape)
    distance = np.hypot(rows - r0, cols - q0).ravel()
    elapsed = (grid.max() - grid).ravel()
    slope, _ = np.polyfit(elapsed, distance, 1)
    return float(slope)


def export_field(field: np.ndarray, lattice: Lattice, path: Union[str, Path]) -> Tuple[Path, Path]:
    """
    导出起始场: C1 行 x C2 列的 CSV，几何信息写入同名 JSON

    Args:
        field: 起始场
        lattice: 格点
        path: CSV 路径

    Returns:
        (csv 路径, json 路径)
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    pd.DataFrame(as_grid(field, lattice)).to_csv(path, header=False, index=False)
    sidecar = path.with_suffix('.json')
    sidecar.write_text(json.dumps(lattice_geometry(lattice), indent=2), encoding='utf-8')
    logger.debug(f"起始场已导出: {path}")
    return path, sidecar


def lattice_geometry(lattice: Lattice) -> dict:
    """格点几何描述（写入 JSON）"""
    xmin, xmax, ymin, ymax = lattice.extent
    return {
        'C1': lattice.C1,
        'C2': lattice.C2,
        'cell_side': lattice.cell_side,
        'origin': list(lattice.origin),
        'along_axis': lattice.along_axis,
        'extent': {'xmin': xmin, 'xmax': xmax, 'ymin': ymin, 'ymax': ymax},
        'index': 'c = row * C2 + column',
    }


def load_grid(path: Union[str, Path]) -> np.ndarray:
    """读取无表头的 CSV 网格"""
    return pd.read_csv(path, header=None).to_numpy(dtype=float)


def lattice_from_geometry(geometry: dict) -> Lattice:
    """由 JSON 几何描述重建格点"""
    return Lattice(
        C1=int(geometry['C1']),
        C2=int(geometry['C2']),
        cell_side=float(geometry['cell_side']),
        origin=tuple(geometry.get('origin', (0.0, 0.0))),
        along_axis=geometry.get('along_axis', 'x'),
    )
