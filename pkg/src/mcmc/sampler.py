"""Metropolis-Hastings 与可逆跳采样器

每次迭代按权重选择一个更新族。所有提议都在状态副本上构造，
拒绝时当前状态保持不变。接受率 log A = 目标比 + 提议比，nan 一律拒绝。
"""
from collections import defaultdict
from typing import Optional, Tuple

import numpy as np
from joblib import Parallel, delayed
from tqdm import tqdm

from src.core.constants import (
    MOVE_ASSIGNMENT, MOVE_FIELD_CONDITIONAL, MOVE_FIELD_JOINT, MOVE_PSI, MOVE_RATES,
    MOVE_RJ, MOVE_SCALE_RATES, MOVE_THETA, RATE_PRIOR_MEAN, SCALE_HIGH, SCALE_LOW
)
from src.core.exceptions import InitializationError
from src.core.logger import get_logger
from src.mcmc.chain_output import ChainOutput
from src.mcmc.config import RunConfig
from src.mcmc.posterior import PosteriorContext, log_posterior
from src.model.prior_sampler import sample_alpha_beta, sample_prior_state
from src.model.priors import log_prior_alpha_beta, theta_windows
from src.model.state import Assignment, ChronologyState, DepositionRates, PhaseStructure
from src.onsetfield.field import arrival_count, field_in_bounds, log_density_field, simulate_field
from src.onsetfield.lattice import MigrationRates

logger = get_logger(__name__)

RJ_ADD = 'rj_add'
RJ_DELETE = 'rj_delete'


# ==================== 可逆跳提议 ====================

def propose_add(state: ChronologyState, j: int, b: float, u: float) -> Tuple[ChronologyState, float]:
    """
    在阶段 j 内插入边界 b，新的上半子阶段 j+1 的速率为 u

    阶段 j 内 theta > b 的样本移入 j+1，更老阶段编号加一。

    Args:
        state: 当前状态
        j: 被拆分的阶段 1..M
        b: 新边界，psi_{j-1} < b < psi_j
        u: 新阶段速率

    Returns:
        (新状态, 提议密度比的对数 log(psi_j - psi_{j-1}) + u)
    """
    psi = state.phases.psi
    width = psi[j] - psi[j - 1]
    m = state.assignment.m
    new = state.copy()
    new.phases = PhaseStructure(np.insert(psi, j, b), state.phases.L, state.phases.U)
    new.rates = DepositionRates(np.insert(state.rates.lambda_theta, j, u))
    new.assignment = Assignment(m + (m > j) + ((m == j) & (state.theta > b)))
    return new, float(np.log(width) + u)


def propose_delete(state: ChronologyState, k: int) -> Tuple[ChronologyState, float]:
    """
    删除内部边界 psi_k，合并阶段 k 与 k+1（保留 lambda_k）

    Args:
        state: 当前状态（M >= 2）
        k: 内部边界编号 1..M-1

    Returns:
        (新状态, 提议密度比的对数 -log(psi_{k+1} - psi_{k-1}) - lambda_{k+1})
    """
    psi = state.phases.psi
    width = psi[k + 1] - psi[k - 1]
    removed_rate = state.rates.lambda_theta[k]
    m = state.assignment.m
    new = state.copy()
    new.phases = PhaseStructure(np.delete(psi, k), state.phases.L, state.phases.U)
    new.rates = DepositionRates(np.delete(state.rates.lambda_theta, k))
    new.assignment = Assignment(m - (m > k))
    return new, float(-np.log(width) - removed_rate)


# ==================== 初始化 ====================

def _boundaries_around(theta: np.ndarray, m: np.ndarray, M: int, L: float, U: float,
                       rng: np.random.Generator) -> Optional[np.ndarray]:
    """按样本年龄向外构造阶段边界，无法满足顺序时返回 None"""
    psi = np.empty(M + 1)
    previous = L
    for k in range(M + 1):
        below = theta[m <= k]
        above = theta[m >= k + 1]
        lower = max(previous, below.max()) if len(below) else previous
        upper = min(U, above.min()) if len(above) else U
        if not upper > lower:
            return None
        psi[k] = lower + (upper - lower) * rng.uniform(0.05, 0.5)
        previous = psi[k]
    return psi


def _contract_field(field: np.ndarray, psi_0: float, psi_M: float, floors: np.ndarray) -> np.ndarray:
    """把起始场向 psi_M 收缩，使每格都高于其下限（psi_0 与格内样本年龄）"""
    flat = field.ravel()
    gap = psi_M - flat
    need = np.maximum(psi_0, floors)
    moving = gap > 0
    if not moving.any():
        return field
    ratio = (psi_M - need[moving]) / gap[moving]
    scale = min(1.0, 0.9 * float(ratio.min()))
    return (psi_M - scale * gap).reshape(field.shape)


def _initial_from_likelihood(context: PosteriorContext, config: RunConfig,
                             rng: np.random.Generator) -> Optional[ChronologyState]:
    K, L, U = context.K, context.L, context.U
    margin = 0.01 * (U - L)
    theta = np.empty(K)
    for k in range(K):
        mode = context.table.mode(k)
        centre = rng.uniform(L, U) if mode is None else mode + rng.uniform(-0.5, 0.5)
        theta[k] = np.clip(centre, L + margin, U - margin)

    if context.fixed_assignment is not None:
        m = context.fixed_assignment.copy()
        M = int(m.max())
    else:
        m = np.ones(K, dtype=np.int64)
        M = 1

    psi = _boundaries_around(theta, m, M, L, U, rng)
    if psi is None:
        return None

    state = ChronologyState(
        theta=theta,
        phases=PhaseStructure(psi, L, U),
        assignment=Assignment(m),
        rates=DepositionRates(rng.exponential(RATE_PRIOR_MEAN, size=M)),
        variant=context.variant,
    )
    if context.variant.has_field:
        lattice = context.lattice
        migration = sample_alpha_beta(context.A, context.B, lattice, L, U, rng)
        field = simulate_field(migration, lattice, psi[-1], True, rng)
        floors = np.full(lattice.C, -np.inf)
        if K:
            np.maximum.at(floors, context.date_cells, theta)
        state.field = _contract_field(field, psi[0], psi[-1], floors)
        state.alpha, state.beta1, state.beta2 = migration.alpha, migration.beta1, migration.beta2
    return state


def initialize_state(context: PosteriorContext, config: RunConfig,
                     rng: np.random.Generator) -> ChronologyState:
    """
    构造合法初始状态

    先把每个样本放在其似然众数附近并向外修补 psi 与 phi，
    失败后改用先验抽样，总次数不超过 config.init_retries。

    Raises:
        InitializationError: 重试预算内没有合法状态
    """
    for attempt in range(config.init_retries):
        if attempt < max(1, config.init_retries // 2):
            state = _initial_from_likelihood(context, config, rng)
        else:
            try:
                state = sample_prior_state(
                    context.variant, context.K, context.L, context.U, rng,
                    lattice=context.lattice, date_cells=context.date_cells,
                    A=context.A, B=context.B, M=context.fixed_M,
                    assignment=context.fixed_assignment, max_tries=100,
                )
            except InitializationError:
                state = None
        if state is not None and np.isfinite(log_posterior(state, context)):
            logger.debug(f"第 {attempt + 1} 次尝试得到初始状态")
            return state
    raise InitializationError(f"{config.init_retries} 次尝试内找不到合法初始状态")


# ==================== 采样器 ====================

class ChronologySampler:
    """
    年代学模型 MCMC 采样器

    Attributes:
        context: 后验上下文
        config: 运行配置
        rng: 随机数生成器
        state: 当前状态
        log_post: 当前对数后验
        proposed / accepted: 各更新族计数
    """

    def __init__(
        self,
        context: PosteriorContext,
        config: RunConfig,
        rng: np.random.Generator,
        state: Optional[ChronologyState] = None
    ):
        self.context = context
        self.config = config
        self.rng = rng
        self.state = state if state is not None else initialize_state(context, config, rng)
        self.log_post = log_posterior(self.state, context)
        if not np.isfinite(self.log_post):
            raise InitializationError("初始状态的后验密度为零")

        self.proposed = defaultdict(int)
        self.accepted = defaultdict(int)

        weights = config.weights()
        if context.K == 0:
            weights.pop(MOVE_THETA, None)
            weights.pop(MOVE_ASSIGNMENT, None)
        total = sum(weights.values())
        if total <= 0:
            raise InitializationError("没有可用的更新族")
        self._families = list(weights)
        self._probs = np.array([weights[f] / total for f in self._families])

        self._dispatch = {
            MOVE_THETA: lambda: self.update_theta(int(self.rng.integers(self.context.K))),
            MOVE_PSI: lambda: self.update_psi(int(self.rng.integers(self.state.M + 1))),
            MOVE_FIELD_JOINT: self.update_field_joint,
            MOVE_FIELD_CONDITIONAL: self.update_field_conditional,
            MOVE_SCALE_RATES: self.update_scale_rates,
            MOVE_RJ: self.update_rj,
            MOVE_ASSIGNMENT: lambda: self.update_assignment(int(self.rng.integers(self.context.K))),
            MOVE_RATES: self.update_rates,
        }

    # ---------- 接受/拒绝 ----------

    def _accept(self, log_ratio: float) -> bool:
        if np.isnan(log_ratio):
            return False
        if log_ratio >= 0:
            return True
        return bool(np.log(self.rng.random()) < log_ratio)

    def _reject(self, name: str) -> bool:
        self.proposed[name] += 1
        return False

    def _commit(self, name: str, proposal: ChronologyState, log_q_ratio: float = 0.0) -> bool:
        """按完整后验差加提议比决定是否接受 proposal"""
        self.proposed[name] += 1
        new_log_post = log_posterior(proposal, self.context)
        if not np.isfinite(new_log_post):
            return False
        if self._accept(new_log_post - self.log_post + log_q_ratio):
            self.state = proposal
            self.log_post = new_log_post
            self.accepted[name] += 1
            return True
        return False

    def _window(self, i: int, m: int) -> Tuple[float, float]:
        """样本 i 若属于阶段 m 时的年龄区间"""
        state = self.state
        lo, hi = theta_windows(
            state.phases, Assignment(np.array([m])), state.field if self.context.variant.has_field else None,
            None if self.context.date_cells is None else self.context.date_cells[i:i + 1]
        )
        return float(lo[0]), float(hi[0])

    # ---------- 单样本年龄 ----------

    def update_theta(self, i: int) -> bool:
        """
        在当前合法区间上均匀提议 theta_i

        提议对称，接受率只含似然比。
        """
        lo, hi = self._window(i, int(self.state.assignment.m[i]))
        new_theta = self.rng.uniform(lo, hi)
        table = self.context.table
        log_ratio = table.value(i, new_theta) - table.value(i, self.state.theta[i])
        self.proposed[MOVE_THETA] += 1
        if self._accept(log_ratio):
            self.state.theta[i] = new_theta
            self.log_post += log_ratio
            self.accepted[MOVE_THETA] += 1
            return True
        return False

    # ---------- 阶段边界 ----------

    def update_psi(self, m: int) -> bool:
        """
        在保持所有约束可满足的最大区间上均匀提议 psi_m

        起始场变体中 psi_M 与被固定的最大格子一起平移。
        """
        state = self.state
        psi = state.phases.psi
        M = state.M
        theta = state.theta
        phase = state.assignment.m

        lo = psi[m - 1] if m > 0 else self.context.L
        hi = psi[m + 1] if m < M else self.context.U
        inside = theta[phase == m]
        if len(inside):
            lo = max(lo, inside.max())
        above = theta[phase == m + 1]
        if len(above):
            hi = min(hi, above.min())

        pinned = None
        if self.context.variant.has_field:
            flat = state.field.ravel()
            if m == 0:
                hi = min(hi, flat.min())
            if m == M:
                pinned = int(np.argmax(flat))
                if flat.size > 1:
                    lo = max(lo, np.delete(flat, pinned).max())

        if not lo < hi:
            return self._reject(MOVE_PSI)

        value = self.rng.uniform(lo, hi)
        proposal = state.copy()
        proposal.phases.psi[m] = value
        if pinned is not None:
            proposal.field.flat[pinned] = value
        return self._commit(MOVE_PSI, proposal)

    # ---------- 起始场 ----------

    def _field_move(self, name: str, migration: MigrationRates, with_rate_prior: bool) -> bool:
        state = self.state
        ctx = self.context
        psi = state.phases.psi
        new_field = simulate_field(migration, ctx.lattice, psi[-1], True, self.rng)
        if not field_in_bounds(new_field, psi[0], psi[-1]):
            return self._reject(name)

        proposal = state.copy()
        proposal.field = new_field
        proposal.alpha, proposal.beta1, proposal.beta2 = migration.alpha, migration.beta1, migration.beta2

        def log_q(s: ChronologyState) -> float:
            value = log_density_field(s.field, s.migration, ctx.lattice, psi[-1], conditioned=True)
            if with_rate_prior:
                value += log_prior_alpha_beta(s.alpha, s.beta1, s.beta2, ctx.A, ctx.B, ctx.lattice, ctx.L, ctx.U)
            return value

        return self._commit(name, proposal, log_q(state) - log_q(proposal))

    def update_field_joint(self) -> bool:
        """独立提议: (alpha, beta) 取自先验，phi 取自条件起始场过程"""
        ctx = self.context
        migration = sample_alpha_beta(ctx.A, ctx.B, ctx.lattice, ctx.L, ctx.U, self.rng)
        return self._field_move(MOVE_FIELD_JOINT, migration, with_rate_prior=True)

    def update_field_conditional(self) -> bool:
        """独立提议: alpha, beta 固定，phi 取自条件起始场过程"""
        return self._field_move(MOVE_FIELD_CONDITIONAL, self.state.migration, with_rate_prior=False)

    def update_scale_rates(self, z: Optional[float] = None) -> bool:
        """
        alpha, beta1, beta2 同乘 z ~ U(1/2, 2)

        三维乘性映射与逆映射 z -> 1/z 的 Jacobian 为 z^3 / z^2，提议比为 log z。
        """
        if z is None:
            z = self.rng.uniform(SCALE_LOW, SCALE_HIGH)
        proposal = self.state.copy()
        proposal.alpha *= z
        proposal.beta1 *= z
        proposal.beta2 *= z
        return self._commit(MOVE_SCALE_RATES, proposal, float(np.log(z)))

    # ---------- 阶段数 ----------

    def update_rj(self) -> bool:
        """各以 1/2 概率尝试增加或删除一个阶段"""
        if self.rng.random() < 0.5:
            return self.rj_add_phase()
        return self.rj_delete_phase()

    def rj_add_phase(self) -> bool:
        """均匀选阶段 j，在其中均匀放置新边界，新阶段速率 ~ Exp(1)"""
        state = self.state
        j = int(self.rng.integers(1, state.M + 1))
        b = self.rng.uniform(state.phases.psi[j - 1], state.phases.psi[j])
        u = self.rng.exponential(RATE_PRIOR_MEAN)
        proposal, log_q = propose_add(state, j, b, u)
        return self._commit(RJ_ADD, proposal, log_q)

    def rj_delete_phase(self) -> bool:
        """均匀选内部边界并合并相邻两阶段；M=1 时记为拒绝"""
        state = self.state
        if state.M == 1:
            return self._reject(RJ_DELETE)
        k = int(self.rng.integers(1, state.M))
        proposal, log_q = propose_delete(state, k)
        return self._commit(RJ_DELETE, proposal, log_q)

    # ---------- 阶段分配 ----------

    def update_assignment(self, i: int) -> bool:
        """
        把样本 i 移到相邻阶段，并在目标区间上重抽 theta_i

        提议比为 log|W'| - log|W|。
        """
        state = self.state
        if state.M == 1:
            return self._reject(MOVE_ASSIGNMENT)
        current = int(state.assignment.m[i])
        target = current + (1 if self.rng.random() < 0.5 else -1)
        if target < 1 or target > state.M:
            return self._reject(MOVE_ASSIGNMENT)
        new_lo, new_hi = self._window(i, target)
        if not new_hi > new_lo:
            return self._reject(MOVE_ASSIGNMENT)
        lo, hi = self._window(i, current)

        proposal = state.copy()
        proposal.assignment.m[i] = target
        proposal.theta[i] = self.rng.uniform(new_lo, new_hi)
        return self._commit(MOVE_ASSIGNMENT, proposal, float(np.log(new_hi - new_lo) - np.log(hi - lo)))

    def update_rates(self, z: Optional[np.ndarray] = None) -> bool:
        """逐阶段乘性更新 lambda_m，提议比为 -log z"""
        accepted = False
        for m in range(self.state.M):
            factor = self.rng.uniform(SCALE_LOW, SCALE_HIGH) if z is None else float(z[m])
            proposal = self.state.copy()
            proposal.rates.lambda_theta[m] *= factor
            accepted |= self._commit(MOVE_RATES, proposal, float(-np.log(factor)))
        return accepted

    # ---------- 主循环 ----------

    def step(self) -> None:
        """按权重随机选择一个更新族执行一次"""
        family = self._families[int(self.rng.choice(len(self._families), p=self._probs))]
        self._dispatch[family]()

    def run(self) -> ChainOutput:
        """
        运行整条链并记录抽稀样本

        Returns:
            ChainOutput
        """
        cfg = self.config
        ctx = self.context
        n = cfg.n_records
        K = ctx.K
        has_field = ctx.variant.has_field

        iteration = np.empty(n, dtype=np.int64)
        log_post = np.empty(n)
        M = np.empty(n, dtype=np.int64)
        theta = np.empty((n, K))
        assignment = np.empty((n, K), dtype=np.int64)
        alpha = np.full(n, np.nan)
        beta1 = np.full(n, np.nan)
        beta2 = np.full(n, np.nan)
        arrivals = np.full(n, -1, dtype=np.int64)
        fields = np.empty((n,) + ctx.lattice.shape) if has_field else None
        psi, rates = [], []

        logger.info("=" * 60)
        logger.info(f"开始采样: {ctx.variant.value}, K={K}, 迭代 {cfg.iterations}, "
                    f"预烧 {cfg.burn_in}, 抽稀 {cfg.thinning}, 种子 {cfg.seed}")
        logger.info("=" * 60)

        r = 0
        for t in tqdm(range(1, cfg.iterations + 1), disable=not cfg.progress, desc=ctx.variant.value):
            self.step()
            if t > cfg.burn_in and (t - cfg.burn_in) % cfg.thinning == 0 and r < n:
                s = self.state
                iteration[r] = t
                log_post[r] = self.log_post
                M[r] = s.M
                theta[r] = s.theta
                assignment[r] = s.assignment.m
                psi.append(s.phases.psi.copy())
                rates.append(s.rates.lambda_theta.copy())
                if has_field:
                    alpha[r], beta1[r], beta2[r] = s.alpha, s.beta1, s.beta2
                    arrivals[r] = arrival_count(s.field, ctx.lattice)
                    fields[r] = s.field
                r += 1

        acceptance = {
            name: {'proposed': int(self.proposed[name]), 'accepted': int(self.accepted[name])}
            for name in sorted(self.proposed)
        }
        output = ChainOutput(
            variant=ctx.variant.value,
            iteration=iteration,
            log_post=log_post,
            M=M,
            psi=psi,
            rates=rates,
            theta=theta,
            assignment=assignment,
            alpha=alpha,
            beta1=beta1,
            beta2=beta2,
            arrivals=arrivals,
            fields=fields,
            acceptance=acceptance,
            meta={
                'seed': cfg.seed,
                'date_ids': [d.id for d in ctx.dates],
                'lattice': list(ctx.lattice.shape) if has_field else None,
                'L': ctx.L,
                'U': ctx.U,
            },
        )
        for name, rate in output.acceptance_rates().items():
            logger.info(f"  接受率 {name:<18} {rate:.3f}")
        return output


def run_chain(config: RunConfig, context: PosteriorContext,
              seed: Optional[np.random.SeedSequence] = None) -> ChainOutput:
    """
    运行单条链，给定种子时结果逐位可复现

    Args:
        config: 运行配置
        context: 后验上下文
        seed: 可选的 SeedSequence（多链时使用），默认用 config.seed

    Returns:
        ChainOutput
    """
    rng = np.random.default_rng(config.seed if seed is None else seed)
    return ChronologySampler(context, config, rng).run()


def run_chains(config: RunConfig, context: PosteriorContext, n_chains: int = 1,
               n_jobs: int = 1) -> list:
    """
    并行运行多条独立链

    各链使用 SeedSequence(config.seed).spawn 派生的独立随机流，结果与调度无关。

    Args:
        config: 运行配置
        context: 后验上下文
        n_chains: 链数
        n_jobs: 并行进程数

    Returns:
        ChainOutput 列表（按链序号排列）
    """
    if n_chains <= 1:
        return [run_chain(config, context)]
    children = np.random.SeedSequence(config.seed).spawn(n_chains)
    logger.info(f"并行运行 {n_chains} 条链 (n_jobs={n_jobs})")
    chains = Parallel(n_jobs=n_jobs)(delayed(run_chain)(config, context, child) for child in children)
    for index, chain in enumerate(chains):
        chain.meta['chain'] = index
    return chains
