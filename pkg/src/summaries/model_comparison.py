"""阶段结构证据: 模型概率、Bayes 因子与分配散点"""
from dataclasses import dataclass
from typing import Callable, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from src.core.exceptions import ChronologyError
from src.core.logger import get_logger
from src.mcmc.chain_output import ChainOutput
from src.mcmc.posterior import PosteriorContext
from src.model.prior_sampler import sample_prior_state
from src.model.priors import poisson_phase_prior
from src.summaries.field_summary import mc_standard_error

logger = get_logger(__name__)

# (M, m) -> bool，m 为长度 K 的阶段分配
StructurePredicate = Callable[[int, np.ndarray], bool]


@dataclass
class ModelHypothesis:
    """
    关于阶段结构的模型假设

    Attributes:
        name: 名称
        predicate: 作用于 (M, m) 的谓词
        prior_probability: 先验概率 Pr(假设)
    """
    name: str
    predicate: StructurePredicate
    prior_probability: float


def phase_count_is(M: int) -> StructurePredicate:
    """M 等于给定值"""
    return lambda n_phases, m: n_phases == M


def phase_counts_are(counts: Sequence[int]) -> StructurePredicate:
    """阶段数与各阶段测年数都等于给定值，如 (13, 0, 15)"""
    target = np.asarray(counts, dtype=np.int64)

    def predicate(n_phases: int, m: np.ndarray) -> bool:
        if n_phases != len(target):
            return False
        return bool(np.array_equal(np.bincount(m, minlength=n_phases + 1)[1:], target))

    return predicate


def has_empty_phase(M: int, phase: int) -> StructurePredicate:
    """M 个阶段且第 phase 个阶段没有测年"""
    return lambda n_phases, m: n_phases == M and not np.any(m == phase)


def _frequency(chain: ChainOutput, predicate: StructurePredicate) -> float:
    if chain.n_records == 0:
        raise ChronologyError("链没有记录")
    hits = sum(bool(predicate(int(chain.M[r]), chain.assignment[r])) for r in range(chain.n_records))
    return hits / chain.n_records


def model_probabilities(chain: ChainOutput, max_M: Optional[int] = None) -> pd.DataFrame:
    """
    各阶段数的后验概率与证据 e_m = Pr(M=m|y) / Pr(M=m)

    Args:
        chain: 阶段数可变的链
        max_M: 表中列出的最大 M，默认取观测到的最大值

    Returns:
        列 M, count, posterior, mc_se, prior, evidence 的表
    """
    if chain.n_records == 0:
        raise ChronologyError("链没有记录")
    top = int(chain.M.max()) if max_M is None else max(int(max_M), int(chain.M.max()))
    counts = np.bincount(chain.M, minlength=top + 1)[1:top + 1]
    posterior = counts / chain.n_records
    prior = np.array([poisson_phase_prior(m) for m in range(1, top + 1)])
    return pd.DataFrame({
        'M': np.arange(1, top + 1),
        'count': counts,
        'posterior': posterior,
        'mc_se': mc_standard_error(posterior, chain.n_records),
        'prior': prior,
        'evidence': posterior / prior,
    })


def bayes_factor(chain: ChainOutput, model_a: ModelHypothesis, model_b: ModelHypothesis) -> float:
    """
    后验比与先验比之比 [P(A|y)/P(B|y)] * [Pr(B)/Pr(A)]

    Args:
        chain: 后验链
        model_a: 假设 A
        model_b: 假设 B

    Returns:
        Bayes 因子；A 未出现为 0，B 未出现为 inf，两者都未出现为 nan
    """
    p_a = _frequency(chain, model_a.predicate)
    p_b = _frequency(chain, model_b.predicate)
    if model_a.prior_probability <= 0 or model_b.prior_probability <= 0:
        raise ChronologyError("假设的先验概率必须为正")
    if p_a == 0 and p_b == 0:
        return float('nan')
    if p_b == 0:
        return float('inf')
    factor = (p_a / p_b) * (model_b.prior_probability / model_a.prior_probability)
    logger.info(
        f"Bayes因子 {model_a.name} vs {model_b.name}: {factor:.4g} "
        f"(P(A|y)={p_a:.4f}, P(B|y)={p_b:.4f})"
    )
    return float(factor)


def posterior_probability(chain: ChainOutput, predicate: StructurePredicate) -> Tuple[float, float]:
    """谓词的后验频率及其蒙特卡洛标准误"""
    p = _frequency(chain, predicate)
    return p, float(mc_standard_error(p, chain.n_records))


def phase_scatter(
    chain: ChainOutput,
    date_ids: Sequence[str],
    date_pits: Sequence[str],
    pit_coordinates: dict,
    M_condition: int
) -> pd.DataFrame:
    """
    在 M = M_condition 条件下每个样本的众数阶段及其后验概率

    Args:
        chain: 后验链
        date_ids: 样本编号
        date_pits: 样本所属探坑
        pit_coordinates: 探坑名称 -> (x, y)
        M_condition: 条件阶段数

    Returns:
        列 phase, date, pit, x, y, probability 的表，按阶段排序
    """
    columns = ['phase', 'date', 'pit', 'x', 'y', 'probability']
    selected = chain.assignment[chain.M == M_condition]
    if len(selected) == 0:
        logger.warning(f"链中没有 M={M_condition} 的记录")
        return pd.DataFrame(columns=columns)

    rows = []
    for k, (date_id, pit) in enumerate(zip(date_ids, date_pits)):
        freq = np.bincount(selected[:, k], minlength=M_condition + 1)[1:] / len(selected)
        mode = int(np.argmax(freq)) + 1
        x, y = pit_coordinates[pit]
        rows.append({
            'phase': mode, 'date': date_id, 'pit': pit,
            'x': x, 'y': y, 'probability': float(freq[mode - 1]),
        })
    return pd.DataFrame(rows, columns=columns).sort_values(['phase', 'date'], kind='stable').reset_index(drop=True)


def estimate_prior_probability(
    predicate: StructurePredicate,
    context: PosteriorContext,
    n_draws: int,
    rng: np.random.Generator
) -> Tuple[float, float]:
    """
    用先验直接抽样估计 (M, m) 谓词的先验概率

    Args:
        predicate: 结构谓词
        context: 后验上下文（提供变体、K、格点与超参数）
        n_draws: 抽样次数
        rng: 随机数生成器

    Returns:
        (概率估计, 蒙特卡洛标准误)
    """
    if n_draws < 1:
        raise ChronologyError(f"抽样次数必须 >= 1: {n_draws}")
    hits = 0
    for _ in range(n_draws):
        state = sample_prior_state(
            context.variant, context.K, context.L, context.U, rng,
            lattice=context.lattice, date_cells=context.date_cells,
            A=context.A, B=context.B, M=context.fixed_M, assignment=context.fixed_assignment,
        )
        hits += bool(predicate(state.M, state.assignment.m))
    p = hits / n_draws
    return p, float(mc_standard_error(p, n_draws))
