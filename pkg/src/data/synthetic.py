"""合成数据生成

用于验收测试与演示: 线性校准曲线、按观测模型抽样的测年，
以及三类典型场景（单阶段、单中心扩散、带间断的多阶段）。
"""
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from src.calibration.curve import CalibrationCurve, mu_sigma_grid, round_age
from src.calibration.likelihood import CurveSet, RadiocarbonDate
from src.core.constants import DEFAULT_CELL_SIDE, DEFAULT_LATTICE, DEFAULT_L, DEFAULT_U, Material
from src.core.exceptions import ChronologyError
from src.core.logger import get_logger
from src.data.dataset_loader import Dataset, Pit, write_dates, write_pits
from src.onsetfield.field import simulate_field
from src.onsetfield.lattice import Lattice, MigrationRates, cell_of

logger = get_logger(__name__)

MARINE_OFFSET = 400.0
MAX_FIELD_TRIES = 1000


def make_linear_curve(
    lo: int,
    hi: int,
    kind: Union[Material, str] = Material.TERRESTRIAL,
    slope: float = 1.0,
    offset: float = 0.0,
    error: float = 10.0
) -> CalibrationCurve:
    """
    线性校准曲线 mu(theta) = offset + slope * theta，误差为常数

    Args:
        lo, hi: 日历年龄范围（含端点）
        kind: 材料类型
        slope: 斜率
        offset: 截距
        error: 曲线误差

    Returns:
        1年步长的升序曲线
    """
    if hi <= lo:
        raise ChronologyError(f"曲线范围无效: [{lo}, {hi}]")
    if not error > 0:
        raise ChronologyError(f"曲线误差必须为正: {error}")
    ages = np.arange(int(lo), int(hi) + 1, dtype=np.int64)
    return CalibrationCurve(
        cal_age=ages,
        c14_age=offset + slope * ages.astype(float),
        error=np.full(len(ages), float(error)),
        kind=Material(kind),
    )


def write_curve(curve: CalibrationCurve, path: Union[str, Path]) -> Path:
    """写出曲线 CSV（带表头，load_curve 可直接读取）"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    pd.DataFrame({
        'cal_age': curve.cal_age,
        'c14_age': curve.c14_age,
        'error': curve.error,
    }).to_csv(path, index=False)
    return path


def simulate_observations(
    theta: Sequence[float],
    pits: Sequence[str],
    curves: CurveSet,
    rng: np.random.Generator,
    sigma_lab: float = 40.0,
    materials: Optional[Sequence[Material]] = None,
    delta_r: float = 0.0,
    delta_r_sigma: float = 30.0,
    id_prefix: str = 'S'
) -> List[RadiocarbonDate]:
    """
    按观测模型抽样放射性碳年龄

    y_i ~ N(mu(theta_i) + dR, sigma_lab^2 + sigma(theta_i)^2 + sigma_dR^2)

    Args:
        theta: 真实日历年龄
        pits: 每条测年的探坑名称
        curves: 材料 -> 已插值曲线
        rng: 随机数生成器
        sigma_lab: 实验室误差
        materials: 每条测年的材料，默认全部陆生
        delta_r, delta_r_sigma: 海洋样本的库效应偏移
        id_prefix: 样本编号前缀

    Returns:
        RadiocarbonDate 列表
    """
    theta = np.asarray(theta, dtype=float)
    if len(pits) != len(theta):
        raise ChronologyError(f"探坑数 {len(pits)} 与年龄数 {len(theta)} 不一致")
    if materials is None:
        materials = [Material.TERRESTRIAL] * len(theta)

    dates = []
    for k, (age, pit, material) in enumerate(zip(theta, pits, materials)):
        material = Material(material)
        marine = material is Material.MARINE
        mu, sigma, inside = mu_sigma_grid(curves[material], round_age([age]))
        if not inside[0]:
            raise ChronologyError(f"年龄 {age} 超出{material.value}曲线范围")
        dr = delta_r if marine else 0.0
        dr_sigma = delta_r_sigma if marine else 0.0
        scale = np.sqrt(sigma_lab ** 2 + sigma[0] ** 2 + dr_sigma ** 2)
        dates.append(RadiocarbonDate(
            id=f"{id_prefix}{k + 1:03d}",
            pit=pit,
            y=float(np.round(rng.normal(mu[0] + dr, scale))),
            sigma_lab=float(sigma_lab),
            material=material,
            delta_r=dr,
            delta_r_sigma=dr_sigma,
        ))
    return dates


def place_pits(lattice: Lattice, n_pits: int, rng: np.random.Generator, cells: Optional[Sequence[int]] = None) -> List[Pit]:
    """
    在格点中随机选择互不相同的格子放置探坑（格子中心附近）

    Args:
        lattice: 格点
        n_pits: 探坑数
        rng: 随机数生成器
        cells: 指定格子编号，None 时随机抽取

    Returns:
        探坑列表，名称 P01, P02, ...
    """
    if cells is None:
        if n_pits > lattice.C:
            raise ChronologyError(f"探坑数 {n_pits} 超过格子数 {lattice.C}")
        cells = rng.choice(lattice.C, size=n_pits, replace=False)
    xmin, _, ymin, _ = lattice.extent
    side = lattice.cell_side
    pits = []
    for i, c in enumerate(cells):
        r, q = lattice.position(int(c))
        along, cross = (q + 0.5) * side, (r + 0.5) * side
        jitter = rng.uniform(-0.25, 0.25, size=2) * side
        dx, dy = (along, cross) if lattice.along_axis == 'x' else (cross, along)
        pits.append(Pit(f"P{i + 1:02d}", float(xmin + dx + jitter[0]), float(ymin + dy + jitter[1])))
    return pits


@dataclass
class SyntheticDataset:
    """
    合成数据集及真值

    Attributes:
        dataset: 测年 + 探坑 + 格点
        curves: 生成所用校准曲线
        L, U: 先验上下限
        truth: 真值（theta, psi, 阶段分配, 起始场等）
    """
    dataset: Dataset
    curves: Dict[Material, CalibrationCurve]
    L: float
    U: float
    truth: Dict[str, object] = field(default_factory=dict)

    def write(self, directory: Union[str, Path]) -> Dict[str, Path]:
        """
        写出 dates.csv, pits.csv, 曲线 CSV 与 truth.json

        Returns:
            名称 -> 路径
        """
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        paths = {
            'dates': write_dates(self.dataset.dates, directory / 'dates.csv'),
            'pits': write_pits(self.dataset.pits, directory / 'pits.csv'),
        }
        for material, curve in self.curves.items():
            paths[f"curve_{material.value}"] = write_curve(curve, directory / f"curve_{material.value}.csv")

        truth = {key: np.asarray(value).tolist() if isinstance(value, np.ndarray) else value
                 for key, value in self.truth.items()}
        truth.update({'L': self.L, 'U': self.U, 'lattice': list(self.dataset.lattice.shape)})
        paths['truth'] = directory / 'truth.json'
        paths['truth'].write_text(json.dumps(truth, indent=2, ensure_ascii=False), encoding='utf-8')
        logger.info(f"合成数据已写出: {directory}")
        return paths


def _curves_for(L: float, U: float, margin: int = 300) -> Dict[Material, CalibrationCurve]:
    lo, hi = int(L) - margin, int(U) + margin
    return {
        Material.TERRESTRIAL: make_linear_curve(lo, hi, Material.TERRESTRIAL),
        Material.MARINE: make_linear_curve(lo, hi, Material.MARINE, offset=MARINE_OFFSET),
    }


def _pit_sequence(pits: Sequence[Pit], K: int, rng: np.random.Generator) -> List[str]:
    """每个探坑至少1条测年，其余随机分配"""
    names = [p.name for p in pits]
    extra = rng.choice(len(names), size=max(K - len(names), 0), replace=True)
    sequence = names[:K] + [names[i] for i in extra]
    return [sequence[i] for i in rng.permutation(len(sequence))]


def _materials(K: int, marine_fraction: float, rng: np.random.Generator) -> List[Material]:
    return [Material.MARINE if u < marine_fraction else Material.TERRESTRIAL for u in rng.random(K)]


def generate_single_phase_dataset(
    rng: np.random.Generator,
    K: int = 49,
    n_pits: int = 24,
    psi: Tuple[float, float] = (2700.0, 3000.0),
    L: float = DEFAULT_L,
    U: float = DEFAULT_U,
    cells: Tuple[int, int] = DEFAULT_LATTICE,
    cell_side: float = DEFAULT_CELL_SIDE,
    marine_fraction: float = 0.25,
    sigma_lab: float = 40.0
) -> SyntheticDataset:
    """
    单阶段数据: theta_i ~ U(psi_0, psi_1)，与位置无关

    不存在空间扩散，拟合 SPOF 时不应检测到定居过程。

    Args:
        rng: 随机数生成器
        K: 测年数
        n_pits: 探坑数
        psi: (psi_0, psi_1)
        L, U: 先验上下限
        cells: 格点尺寸
        cell_side: 格子边长
        marine_fraction: 海洋样本比例
        sigma_lab: 实验室误差

    Returns:
        SyntheticDataset
    """
    psi_0, psi_1 = psi
    if not L < psi_0 < psi_1 < U:
        raise ChronologyError(f"需要 L < psi_0 < psi_1 < U: {L}, {psi}, {U}")
    lattice = Lattice(cells[0], cells[1], cell_side)
    pits = place_pits(lattice, n_pits, rng)
    curves = _curves_for(L, U)
    theta = rng.uniform(psi_0, psi_1, size=K)
    dates = simulate_observations(
        theta, _pit_sequence(pits, K, rng), curves, rng,
        sigma_lab=sigma_lab, materials=_materials(K, marine_fraction, rng),
    )
    logger.info(f"单阶段合成数据: K={K}, 探坑 {n_pits}, psi={psi}")
    return SyntheticDataset(
        Dataset(dates, pits, lattice), curves, L, U,
        truth={'theta': theta, 'psi': list(psi), 'M': 1},
    )


def generate_spreading_dataset(
    rng: np.random.Generator,
    K: int = 60,
    n_pits: int = 30,
    psi: Tuple[float, float] = (2500.0, 3000.0),
    beta2: float = 0.05,
    alpha: float = 1e-5,
    L: float = DEFAULT_L,
    U: float = DEFAULT_U,
    cells: Tuple[int, int] = DEFAULT_LATTICE,
    cell_side: float = DEFAULT_CELL_SIDE,
    sigma_lab: float = 30.0
) -> SyntheticDataset:
    """
    单中心扩散数据

    以 beta1 = 2 * beta2 模拟条件起始场（第一个到达在 psi_1），alpha 很小因而
    几乎只有一次迁入。起始场整体须晚于 psi_0，否则重新模拟。
    theta_i ~ U(psi_0, min(phi_c, psi_1))。

    Args:
        rng: 随机数生成器
        K: 测年数
        n_pits: 探坑数
        psi: (psi_0, psi_1)
        beta2: 横跨海滩迁移速率，沿海滩取 2 * beta2
        alpha: 迁入速率
        L, U: 先验上下限
        cells: 格点尺寸
        cell_side: 格子边长
        sigma_lab: 实验室误差

    Returns:
        SyntheticDataset（truth 含 field 与 seed_cell）
    """
    psi_0, psi_1 = psi
    if not L < psi_0 < psi_1 < U:
        raise ChronologyError(f"需要 L < psi_0 < psi_1 < U: {L}, {psi}, {U}")
    lattice = Lattice(cells[0], cells[1], cell_side)
    rates = MigrationRates(alpha, 2.0 * beta2, beta2)

    for attempt in range(MAX_FIELD_TRIES):
        grid = simulate_field(rates, lattice, psi_1, True, rng)
        if grid.min() > psi_0:
            break
    else:
        raise ChronologyError(f"{MAX_FIELD_TRIES} 次模拟内未得到满足条件的起始场")
    phi = grid.ravel()
    origin = int(np.argmax(phi))

    pits = place_pits(lattice, n_pits, rng)
    pit_names = _pit_sequence(pits, K, rng)
    pit_cell = {pit.name: cell_of(lattice, pit.x, pit.y) for pit in pits}
    upper = np.array([min(phi[pit_cell[name]], psi_1) for name in pit_names])
    theta = rng.uniform(psi_0, upper)

    curves = _curves_for(L, U)
    dates = simulate_observations(theta, pit_names, curves, rng, sigma_lab=sigma_lab)
    logger.info(f"扩散合成数据: K={K}, 起源格子 {origin}, 尝试 {attempt + 1} 次")
    return SyntheticDataset(
        Dataset(dates, pits, lattice), curves, L, U,
        truth={
            'theta': theta, 'psi': list(psi), 'M': 1, 'field': grid,
            'seed_cell': origin, 'alpha': alpha, 'beta1': 2.0 * beta2, 'beta2': beta2,
        },
    )


def generate_hiatus_dataset(
    rng: np.random.Generator,
    K: int = 28,
    psi: Tuple[float, ...] = (500.0, 800.0, 1300.0, 1600.0),
    n_pits: int = 6,
    L: float = 0.0,
    U: float = 2000.0,
    sigma_lab: float = 25.0,
    cells: Tuple[int, int] = (4, 8)
) -> SyntheticDataset:
    """
    带沉积间断的多阶段数据

    默认三阶段，中间阶段 (800, 1300) 为500年空白，测年平均分配到首末两个阶段。

    Args:
        rng: 随机数生成器
        K: 测年数
        psi: 阶段边界（升序），空阶段为中间各阶段
        n_pits: 探坑数
        L, U: 先验上下限
        sigma_lab: 实验室误差
        cells: 格点尺寸（仅用于放置探坑）

    Returns:
        SyntheticDataset（truth 含 assignment，1为最年轻阶段）
    """
    psi = tuple(float(b) for b in psi)
    if len(psi) < 2 or not (L < psi[0] and psi[-1] < U) or np.any(np.diff(psi) <= 0):
        raise ChronologyError(f"阶段边界无效: {psi} (L={L}, U={U})")
    M = len(psi) - 1
    occupied = [1, M] if M > 1 else [1]
    assignment = np.array([occupied[k % len(occupied)] for k in range(K)], dtype=np.int64)
    theta = rng.uniform(np.array(psi)[assignment - 1], np.array(psi)[assignment])

    lattice = Lattice(cells[0], cells[1], DEFAULT_CELL_SIDE)
    pits = place_pits(lattice, n_pits, rng)
    curves = _curves_for(L, U, margin=0)
    dates = simulate_observations(theta, _pit_sequence(pits, K, rng), curves, rng, sigma_lab=sigma_lab)
    logger.info(f"间断合成数据: K={K}, M={M}, psi={psi}")
    return SyntheticDataset(
        Dataset(dates, pits, lattice), curves, L, U,
        truth={'theta': theta, 'psi': list(psi), 'M': M, 'assignment': assignment},
    )
