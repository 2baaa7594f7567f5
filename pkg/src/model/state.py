"""年代学状态

年龄单位均为距今年数（BP），数值越大越古老。
阶段 m 占据区间 (psi_{m-1}, psi_m)，阶段 1 最年轻，阶段 M 最古老。
"""
from dataclasses import dataclass, field as dc_field
from typing import Optional

import numpy as np

from src.core.constants import Variant
from src.onsetfield.lattice import MigrationRates


@dataclass
class PhaseStructure:
    """
    阶段边界 psi_0 < psi_1 < ... < psi_M

    Attributes:
        psi: 长度 M+1 的边界年龄
        L: 年龄下界
        U: 年龄上界
    """
    psi: np.ndarray
    L: float
    U: float

    def __post_init__(self):
        self.psi = np.asarray(self.psi, dtype=float)

    @property
    def M(self) -> int:
        return len(self.psi) - 1

    @property
    def span(self) -> float:
        return float(self.psi[-1] - self.psi[0])

    def is_valid(self) -> bool:
        """L < psi_0, psi_M < U，边界严格递增"""
        return bool(
            self.M >= 1
            and self.L < self.psi[0]
            and self.psi[-1] < self.U
            and np.all(np.diff(self.psi) > 0)
        )

    def copy(self) -> 'PhaseStructure':
        return PhaseStructure(self.psi.copy(), self.L, self.U)


@dataclass
class Assignment:
    """
    测年到阶段的分配 m(i)，取值 1..M
    """
    m: np.ndarray

    def __post_init__(self):
        self.m = np.asarray(self.m, dtype=np.int64)

    def counts(self, M: int) -> np.ndarray:
        """各阶段测年数 K_1..K_M"""
        return np.bincount(self.m, minlength=M + 1)[1:M + 1]

    def is_valid(self, M: int) -> bool:
        return bool(len(self.m) == 0 or (self.m.min() >= 1 and self.m.max() <= M))

    def copy(self) -> 'Assignment':
        return Assignment(self.m.copy())


@dataclass
class DepositionRates:
    """各阶段的测年样本沉积速率 lambda_{theta,m}"""
    lambda_theta: np.ndarray

    def __post_init__(self):
        self.lambda_theta = np.asarray(self.lambda_theta, dtype=float)

    def is_valid(self) -> bool:
        return bool(np.all(self.lambda_theta > 0))

    def copy(self) -> 'DepositionRates':
        return DepositionRates(self.lambda_theta.copy())


@dataclass
class ChronologyState:
    """
    MCMC 完整状态

    Attributes:
        theta: K 个样本年龄
        phases: 阶段边界
        assignment: 阶段分配
        rates: 沉积速率
        alpha, beta1, beta2: 起始场速率（无起始场变体中不使用）
        field: (C1, C2) 起始场，无起始场变体为 None
        variant: 模型变体
    """
    theta: np.ndarray
    phases: PhaseStructure
    assignment: Assignment
    rates: DepositionRates
    variant: Variant
    alpha: float = np.nan
    beta1: float = np.nan
    beta2: float = np.nan
    field: Optional[np.ndarray] = dc_field(default=None)

    def __post_init__(self):
        self.theta = np.asarray(self.theta, dtype=float)
        self.variant = Variant(self.variant)

    @property
    def M(self) -> int:
        return self.phases.M

    @property
    def K(self) -> int:
        return len(self.theta)

    @property
    def migration(self) -> MigrationRates:
        """起始场速率参数"""
        return MigrationRates(self.alpha, self.beta1, self.beta2)

    def copy(self) -> 'ChronologyState':
        """深拷贝（提议在副本上构造）"""
        return ChronologyState(
            theta=self.theta.copy(),
            phases=self.phases.copy(),
            assignment=self.assignment.copy(),
            rates=self.rates.copy(),
            variant=self.variant,
            alpha=self.alpha,
            beta1=self.beta1,
            beta2=self.beta2,
            field=None if self.field is None else self.field.copy(),
        )
