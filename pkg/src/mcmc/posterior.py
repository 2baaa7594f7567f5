"""后验密度

log p = l(theta; y) + 先验项，先验项按变体组合:
    SP   : psi + theta
    SPOF : psi + theta + (alpha, beta) + 条件起始场密度 + 约束
    RP   : psi + theta + M + lambda + 分配
    RPOF : 以上全部
"""
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from src.calibration.likelihood import CurveSet, LikelihoodTable, RadiocarbonDate
from src.core.constants import Variant
from src.core.exceptions import DataValidationError
from src.core.logger import get_logger
from src.mcmc.config import RunConfig
from src.model.priors import (
    log_prior_alpha_beta, log_prior_assignment, log_prior_M, log_prior_psi,
    log_prior_rates, log_prior_theta
)
from src.model.state import ChronologyState
from src.onsetfield.field import field_in_bounds, log_density_field
from src.onsetfield.lattice import Lattice

logger = get_logger(__name__)


@dataclass
class PosteriorContext:
    """
    后验计算所需的不可变数据

    Attributes:
        variant: 模型变体
        dates: 测年记录
        table: 预计算似然表
        L, U, A, B: 先验超参数
        lattice: 格点（起始场变体）
        date_cells: 每个样本所在格子编号
        fixed_assignment: 已知阶段分配（单阶段族可选）
    """
    variant: Variant
    dates: Sequence[RadiocarbonDate]
    table: LikelihoodTable
    L: float
    U: float
    A: float
    B: float
    lattice: Optional[Lattice] = None
    date_cells: Optional[np.ndarray] = None
    fixed_assignment: Optional[np.ndarray] = None

    @property
    def K(self) -> int:
        return len(self.dates)

    @property
    def fixed_M(self) -> Optional[int]:
        """单阶段族的固定阶段数"""
        if self.variant.random_phases:
            return None
        if self.fixed_assignment is not None and len(self.fixed_assignment):
            return int(self.fixed_assignment.max())
        return 1

    @classmethod
    def build(
        cls,
        config: RunConfig,
        dates: Sequence[RadiocarbonDate],
        curves: Optional[CurveSet],
        lattice: Optional[Lattice] = None,
        date_cells: Optional[np.ndarray] = None
    ) -> 'PosteriorContext':
        """
        由运行配置与数据构造后验上下文

        Args:
            config: 运行配置
            dates: 测年记录
            curves: 校准曲线（平坦似然时可为 None）
            lattice: 格点
            date_cells: 样本格子编号

        Returns:
            PosteriorContext

        Raises:
            DataValidationError: 起始场变体缺少格点，或已知阶段列不完整
        """
        variant = config.variant
        if variant.has_field and lattice is None:
            raise DataValidationError(f"{variant.value} 需要格点定义")
        if date_cells is None:
            date_cells = np.zeros(len(dates), dtype=np.int64)

        fixed = None
        phases = [d.phase for d in dates]
        if any(p is not None for p in phases):
            if variant.random_phases:
                logger.warning(f"{variant.value} 变体忽略已知阶段列")
            elif any(p is None for p in phases):
                raise DataValidationError("已知阶段列必须对所有保留样本给出")
            else:
                fixed = np.asarray(phases, dtype=np.int64)
                logger.info(f"使用已知阶段分配: M={fixed.max()}")

        table = LikelihoodTable(dates, curves, config.L, config.U, flat=config.flat_likelihood)
        return cls(
            variant=variant,
            dates=list(dates),
            table=table,
            L=config.L,
            U=config.U,
            A=config.A,
            B=config.B,
            lattice=lattice if variant.has_field else None,
            date_cells=np.asarray(date_cells, dtype=np.int64),
            fixed_assignment=fixed,
        )


def log_prior(state: ChronologyState, context: PosteriorContext) -> float:
    """变体对应的全部先验项之和，非法状态为 -inf"""
    variant = context.variant
    field = state.field if variant.has_field else None

    total = log_prior_psi(state.phases, normalized=True)
    if not np.isfinite(total):
        return -np.inf
    total += log_prior_theta(state.theta, state.phases, state.assignment, field, context.date_cells)
    if not np.isfinite(total):
        return -np.inf

    if variant.has_field:
        psi = state.phases.psi
        if field is None or not field_in_bounds(field, psi[0], psi[-1]):
            return -np.inf
        total += log_prior_alpha_beta(
            state.alpha, state.beta1, state.beta2,
            context.A, context.B, context.lattice, context.L, context.U
        )
        if not np.isfinite(total):
            return -np.inf
        total += log_density_field(field, state.migration, context.lattice, psi[-1], conditioned=True)

    if variant.random_phases:
        total += log_prior_M(state.M)
        total += log_prior_rates(state.rates)
        total += log_prior_assignment(
            state.assignment, state.rates, state.phases, field, context.date_cells
        )
    elif context.fixed_M is not None and state.M != context.fixed_M:
        return -np.inf

    return float(total) if np.isfinite(total) else -np.inf


def log_posterior(state: ChronologyState, context: PosteriorContext) -> float:
    """
    未归一化的对数后验

    Args:
        state: 年代学状态
        context: 后验上下文（数据、曲线、超参数）

    Returns:
        对数后验，非法状态为 -inf
    """
    prior = log_prior(state, context)
    if not np.isfinite(prior):
        return -np.inf
    value = prior + context.table.total(state.theta)
    return float(value) if np.isfinite(value) else -np.inf
