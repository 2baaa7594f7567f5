"""起始场后验汇总

所有概率都是抽稀记录上的经验频率，并给出二项蒙特卡洛标准误。
"""
from dataclasses import dataclass
from typing import Dict, Optional, Sequence

import numpy as np
import pandas as pd

from src.core.constants import DEFAULT_BIN_WIDTH, DEFAULT_P_STAR, DEFAULT_T_STAR, PartitionLabel
from src.core.exceptions import ChronologyError
from src.core.logger import get_logger
from src.mcmc.chain_output import ChainOutput

logger = get_logger(__name__)


def _require_fields(chain: ChainOutput) -> np.ndarray:
    if chain.fields is None or chain.n_records == 0:
        raise ChronologyError(f"链 ({chain.variant}) 没有起始场记录")
    return chain.fields


def _elapsed(chain: ChainOutput) -> np.ndarray:
    """每条记录每格的经过时间 psi_M - phi_c"""
    fields = _require_fields(chain)
    return chain.psi_M[:, None, None] - fields


def mc_standard_error(p, n: int):
    """二项频率的蒙特卡洛标准误 sqrt(p(1-p)/n)"""
    p = np.asarray(p, dtype=float)
    return np.sqrt(p * (1.0 - p) / max(n, 1))


@dataclass
class FieldSummary:
    """
    逐格起始场统计

    Attributes:
        mean: phi_c 后验均值
        std: phi_c 后验标准差
        elapsed_mean: psi_M - phi_c 均值
        elapsed_std: psi_M - phi_c 标准差
    """
    mean: np.ndarray
    std: np.ndarray
    elapsed_mean: np.ndarray
    elapsed_std: np.ndarray


def field_summary(chain: ChainOutput) -> FieldSummary:
    """
    逐格样本均值与标准差

    Args:
        chain: 含起始场记录的链

    Returns:
        FieldSummary
    """
    fields = _require_fields(chain)
    elapsed = _elapsed(chain)
    return FieldSummary(
        mean=fields.mean(axis=0),
        std=fields.std(axis=0),
        elapsed_mean=elapsed.mean(axis=0),
        elapsed_std=elapsed.std(axis=0),
    )


@dataclass
class Partition:
    """
    绿/蓝/红分区

    Attributes:
        labels: (C1, C2) 标签字符串
        T_star: 经过时间阈值
        p_star: 概率阈值
        p_early: P(psi_M - phi_c > T*)
        p_late: P(psi_M - phi_c < T*)
        n_records: 用于估计的记录数
    """
    labels: np.ndarray
    T_star: float
    p_star: float
    p_early: np.ndarray
    p_late: np.ndarray
    n_records: int

    def count(self, label: PartitionLabel) -> int:
        return int((self.labels == label.value).sum())

    @property
    def green(self) -> np.ndarray:
        return self.labels == PartitionLabel.GREEN.value

    @property
    def blue(self) -> np.ndarray:
        return self.labels == PartitionLabel.BLUE.value

    @property
    def codes(self) -> np.ndarray:
        """数值编码: green=0, blue=1, red=2"""
        order = [PartitionLabel.GREEN.value, PartitionLabel.BLUE.value, PartitionLabel.RED.value]
        return np.vectorize(order.index)(self.labels)


def _label_grid(p_early: np.ndarray, p_late: np.ndarray, p_star: float) -> np.ndarray:
    labels = np.full(p_early.shape, PartitionLabel.RED.value, dtype=object)
    labels[p_late > p_star] = PartitionLabel.BLUE.value
    labels[p_early > p_star] = PartitionLabel.GREEN.value
    return labels


def partition(chain: ChainOutput, T_star: float = DEFAULT_T_STAR, p_star: float = DEFAULT_P_STAR) -> Partition:
    """
    按经过时间划分格子

    green: P(psi_M - phi_c > T*) > p*；blue: P(psi_M - phi_c < T*) > p*；其余为 red。
    p* < 1/2 时两者可能同时成立，此时记为 green。

    Args:
        chain: 含起始场记录的链
        T_star: 阈值（年）
        p_star: 概率阈值

    Returns:
        Partition
    """
    elapsed = _elapsed(chain)
    p_early = (elapsed > T_star).mean(axis=0)
    p_late = (elapsed < T_star).mean(axis=0)
    return Partition(
        labels=_label_grid(p_early, p_late, p_star),
        T_star=float(T_star),
        p_star=float(p_star),
        p_early=p_early,
        p_late=p_late,
        n_records=chain.n_records,
    )


@dataclass
class ThresholdScan:
    """
    阈值扫描结果

    Attributes:
        table: 列 T_star, green, blue 的表
        p_star: 概率阈值
    """
    table: pd.DataFrame
    p_star: float

    @property
    def splitting(self) -> pd.DataFrame:
        """green 与 blue 同时非空的行"""
        return self.table[(self.table['green'] > 0) & (self.table['blue'] > 0)]

    @property
    def any_split(self) -> bool:
        """是否存在同时产生 green 与 blue 的 T*（定居检测判据）"""
        return not self.splitting.empty


def threshold_scan(
    chain: ChainOutput,
    p_star: float = DEFAULT_P_STAR,
    thresholds: Optional[Sequence[float]] = None
) -> ThresholdScan:
    """
    在 T* 网格上统计 green/blue 大小

    Args:
        chain: 含起始场记录的链
        p_star: 概率阈值
        thresholds: T* 网格，默认 0..500 步长 10

    Returns:
        ThresholdScan
    """
    elapsed = _elapsed(chain)
    grid = np.arange(0.0, 501.0, 10.0) if thresholds is None else np.asarray(thresholds, dtype=float)
    rows = []
    for T in grid:
        labels = _label_grid((elapsed > T).mean(axis=0), (elapsed < T).mean(axis=0), p_star)
        rows.append({
            'T_star': float(T),
            'green': int((labels == PartitionLabel.GREEN.value).sum()),
            'blue': int((labels == PartitionLabel.BLUE.value).sum()),
        })
    scan = ThresholdScan(pd.DataFrame(rows, columns=['T_star', 'green', 'blue']), float(p_star))
    logger.info(f"阈值扫描 p*={p_star}: {len(grid)} 个 T*, 可分割 {len(scan.splitting)} 个")
    return scan


def arrival_odds(posterior_chain: ChainOutput, prior_chain: ChainOutput) -> pd.DataFrame:
    """
    到达事件数 V 的后验/先验比

    Args:
        posterior_chain: 后验链
        prior_chain: 先验链（平坦似然）

    Returns:
        列 V, posterior, prior, odds, undefined 的表；先验中未出现的 V 标记 undefined
    """
    post = pd.Series(posterior_chain.arrivals[posterior_chain.arrivals >= 0])
    prior = pd.Series(prior_chain.arrivals[prior_chain.arrivals >= 0])
    if post.empty or prior.empty:
        raise ChronologyError("到达数比较需要两条含起始场记录的链")
    post_pmf = post.value_counts(normalize=True)
    prior_pmf = prior.value_counts(normalize=True)
    values = sorted(set(post_pmf.index) | set(prior_pmf.index))

    table = pd.DataFrame({'V': values})
    table['posterior'] = [float(post_pmf.get(v, 0.0)) for v in values]
    table['prior'] = [float(prior_pmf.get(v, 0.0)) for v in values]
    table['undefined'] = table['prior'] == 0.0
    table['odds'] = table['posterior'] / table['prior'].replace(0.0, np.nan)
    return table[['V', 'posterior', 'prior', 'odds', 'undefined']]


def pit_onset_histograms(
    chain: ChainOutput,
    pit_cells: Dict[str, int],
    bin_width: float = DEFAULT_BIN_WIDTH
) -> pd.DataFrame:
    """
    每个探坑所在格子的起始年龄直方图

    组边界对齐到 bin_width 的整数倍，所有探坑共用同一组边界。

    Args:
        chain: 含起始场记录的链
        pit_cells: 探坑名称 -> 格子编号
        bin_width: 组距（年）

    Returns:
        列 pit, bin_start, bin_end, count, frequency 的长表
    """
    if bin_width <= 0:
        raise ChronologyError(f"组距必须为正: {bin_width}")
    fields = _require_fields(chain)
    flat = fields.reshape(len(fields), -1)
    values = {pit: flat[:, cell] for pit, cell in pit_cells.items()}
    if not values:
        return pd.DataFrame(columns=['pit', 'bin_start', 'bin_end', 'count', 'frequency'])

    lowest = min(v.min() for v in values.values())
    highest = max(v.max() for v in values.values())
    start = np.floor(lowest / bin_width) * bin_width
    stop = (np.floor(highest / bin_width) + 1) * bin_width
    edges = np.arange(start, stop + bin_width / 2, bin_width)

    frames = []
    for pit, samples in values.items():
        counts, _ = np.histogram(samples, bins=edges)
        frames.append(pd.DataFrame({
            'pit': pit,
            'bin_start': edges[:-1],
            'bin_end': edges[1:],
            'count': counts,
            'frequency': counts / len(samples),
        }))
    return pd.concat(frames, ignore_index=True)
