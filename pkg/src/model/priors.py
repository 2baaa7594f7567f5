"""先验密度

所有指数分布均按均值参数化。非法状态返回 -inf，不抛出异常。
"""
import math
from typing import Optional, Sequence, Tuple, Union

import numpy as np
from scipy.special import gammaln
from scipy.stats import expon, poisson

from src.core.constants import PHASE_COUNT_PRIOR_MEAN, RATE_PRIOR_MEAN
from src.model.state import Assignment, DepositionRates, PhaseStructure
from src.onsetfield.lattice import Lattice

NEG_INF = -np.inf


# ==================== 阶段边界 ====================

def log_prior_psi(phases: PhaseStructure, normalized: bool = False) -> float:
    """
    阶段边界先验 p(psi | M)

    -log(U - L - s) - (M - 1) log s，其中 s = psi_M - psi_0。
    normalized 为真时再加上 log((M-1)!) - log(U - L)，
    此时密度在有序单纯形上积分为1，等于 sample_prior_psi 的抽样密度；
    阶段数可变时必须使用归一化形式。

    Args:
        phases: 阶段边界
        normalized: 是否包含与 M 有关的归一化常数

    Returns:
        对数密度，非法状态为 -inf
    """
    if not phases.is_valid():
        return NEG_INF
    width = phases.U - phases.L
    span = phases.span
    if span >= width:
        return NEG_INF
    M = phases.M
    value = -math.log(width - span) - (M - 1) * math.log(span)
    if normalized:
        value += gammaln(M) - math.log(width)
    return float(value)


# ==================== 样本年龄 ====================

def theta_windows(
    phases: PhaseStructure,
    assignment: Assignment,
    field: Optional[np.ndarray] = None,
    date_cells: Optional[np.ndarray] = None
) -> Tuple[np.ndarray, np.ndarray]:
    """
    每个样本的合法年龄区间 (psi_{m(i)-1}, min(phi_{c(i)}, psi_{m(i)}))

    Returns:
        (lo, hi) 两个长度 K 的数组
    """
    m = assignment.m
    lo = phases.psi[m - 1]
    hi = phases.psi[m]
    if field is not None:
        hi = np.minimum(hi, np.asarray(field).ravel()[date_cells])
    return lo, hi


def log_prior_theta(
    theta: np.ndarray,
    phases: PhaseStructure,
    assignment: Assignment,
    field: Optional[np.ndarray] = None,
    date_cells: Optional[np.ndarray] = None
) -> float:
    """
    样本年龄条件先验

    -sum_i log(min(phi_{c(i)}, psi_{m(i)}) - psi_{m(i)-1})

    Args:
        theta: 样本年龄
        phases: 阶段边界
        assignment: 阶段分配
        field: 起始场（可选）
        date_cells: 每个样本所在格子编号（有起始场时必需）

    Returns:
        对数密度，任一样本在区间外时为 -inf
    """
    theta = np.asarray(theta, dtype=float)
    if len(theta) == 0:
        return 0.0
    if not assignment.is_valid(phases.M):
        return NEG_INF
    lo, hi = theta_windows(phases, assignment, field, date_cells)
    if np.any(hi <= lo) or np.any(theta <= lo) or np.any(theta >= hi):
        return NEG_INF
    return float(-np.log(hi - lo).sum())


# ==================== 阶段分配 ====================

def delta_span(m: int, onset: Optional[float], phases: PhaseStructure) -> float:
    """
    探坑在阶段 m 内的沉积跨度

    max(0, min(phi, psi_m) - psi_{m-1})，无起始场时为阶段全长。

    Args:
        m: 阶段编号 1..M
        onset: 探坑所在格子的起始年龄 phi_{c(x_h)}，无起始场传 None
        phases: 阶段边界

    Returns:
        跨度（年）
    """
    upper = phases.psi[m] if onset is None else min(onset, phases.psi[m])
    return float(max(0.0, upper - phases.psi[m - 1]))


def delta_spans(phases: PhaseStructure, onsets: Optional[np.ndarray], K: int) -> np.ndarray:
    """所有样本在各阶段的跨度，形状 (K, M)"""
    upper = np.broadcast_to(phases.psi[1:], (K, phases.M))
    if onsets is not None:
        upper = np.minimum(upper, np.asarray(onsets, dtype=float)[:, None])
    return np.maximum(0.0, upper - phases.psi[:-1])


def assignment_probabilities(
    rates: DepositionRates,
    phases: PhaseStructure,
    onsets: Optional[np.ndarray],
    K: int
) -> np.ndarray:
    """
    分配概率 p_{m,i} = lambda_m Delta_{m,i} / sum_m' lambda_m' Delta_{m',i}

    Returns:
        (K, M) 概率矩阵；分母为零的行为 nan
    """
    weights = rates.lambda_theta[None, :] * delta_spans(phases, onsets, K)
    total = weights.sum(axis=1, keepdims=True)
    with np.errstate(invalid='ignore', divide='ignore'):
        return weights / total


def log_prior_assignment(
    assignment: Assignment,
    rates: DepositionRates,
    phases: PhaseStructure,
    field: Optional[np.ndarray] = None,
    date_cells: Optional[np.ndarray] = None
) -> float:
    """
    阶段分配先验 sum_i log p_{m(i),i}（不含多项式系数）

    Args:
        assignment: 阶段分配
        rates: 沉积速率（M 个）
        phases: 阶段边界
        field: 起始场（可选）
        date_cells: 样本所在格子编号

    Returns:
        对数概率，某样本所有跨度为零或分配概率为零时为 -inf
    """
    K = len(assignment.m)
    if K == 0:
        return 0.0
    if len(rates.lambda_theta) != phases.M or not rates.is_valid() or not assignment.is_valid(phases.M):
        return NEG_INF
    onsets = None if field is None else np.asarray(field).ravel()[date_cells]
    probs = assignment_probabilities(rates, phases, onsets, K)
    chosen = probs[np.arange(K), assignment.m - 1]
    if not np.all(chosen > 0):
        return NEG_INF
    return float(np.log(chosen).sum())


# ==================== 阶段数与速率 ====================

def log_prior_M(M: int) -> float:
    """阶段数先验: M-1 ~ Poisson(log 2)"""
    if M < 1:
        return NEG_INF
    return float(poisson.logpmf(M - 1, PHASE_COUNT_PRIOR_MEAN))


def poisson_phase_prior(M: int) -> float:
    """阶段数先验概率 Pr(M)"""
    return float(math.exp(log_prior_M(M))) if M >= 1 else 0.0


def log_prior_rates(rates: Union[DepositionRates, Sequence[float]]) -> float:
    """沉积速率先验: 每个 lambda ~ Exp(均值1)"""
    lam = rates.lambda_theta if isinstance(rates, DepositionRates) else np.asarray(rates, dtype=float)
    if len(lam) == 0 or np.any(lam <= 0):
        return NEG_INF
    return float(expon.logpdf(lam, scale=RATE_PRIOR_MEAN).sum())


# ==================== 起始场速率 ====================

def alpha_prior_mean(A: float, lattice: Lattice, L: float, U: float) -> float:
    """E(alpha) = A / (C (U - L))"""
    return A / (lattice.C * (U - L))


def beta_prior_mean(B: float, lattice: Lattice, L: float, U: float) -> float:
    """E(beta_j) = B max(C1, C2) / (2 (U - L))"""
    return B * max(lattice.C1, lattice.C2) / (2.0 * (U - L))


def log_prior_alpha_beta(
    alpha: float,
    beta1: float,
    beta2: float,
    A: float,
    B: float,
    lattice: Lattice,
    L: float,
    U: float
) -> float:
    """
    起始场速率的最大熵先验

    alpha、beta1、beta2 相互独立，均为指数分布，
    均值分别为 E(alpha) 与 E(beta)。

    Returns:
        对数密度，任一速率非正时为 -inf
    """
    if not (alpha > 0 and beta1 > 0 and beta2 > 0):
        return NEG_INF
    mean_alpha = alpha_prior_mean(A, lattice, L, U)
    mean_beta = beta_prior_mean(B, lattice, L, U)
    return float(
        expon.logpdf(alpha, scale=mean_alpha)
        + expon.logpdf(beta1, scale=mean_beta)
        + expon.logpdf(beta2, scale=mean_beta)
    )


# ==================== Polya 近似 ====================

def polya_log_pmf(counts: Sequence[int]) -> float:
    """
    多元 Polya 分布（Dirichlet(1/2,...,1/2) 混合多项分布）的对数概率

    K!/prod K_m! * Gamma(M/2)/Gamma(K+M/2) * prod Gamma(K_m+1/2)/sqrt(pi)

    Args:
        counts: 各阶段测年数 K_1..K_M

    Returns:
        对数概率
    """
    counts = np.asarray(counts, dtype=float)
    K = counts.sum()
    M = len(counts)
    return float(
        gammaln(K + 1) - gammaln(counts + 1).sum()
        + gammaln(M / 2.0) - gammaln(K + M / 2.0)
        + (gammaln(counts + 0.5) - 0.5 * math.log(math.pi)).sum()
    )
