"""链输出: 记录、序列化与合并

磁盘格式:
    trace.csv       每条记录一行的标量轨迹（变长量用 ';' 连接）
    fields.bin      起始场，行优先，8字节小端浮点，每条记录 C1*C2 个
    fields.json     fields.bin 的布局描述
    acceptance.json 各更新族的提议/接受次数
    chain.json      链元信息
"""
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Union

import numpy as np
import pandas as pd

from src.core.constants import (
    ACCEPTANCE_FILE, FIELDS_DTYPE, FIELDS_FILE, FIELDS_LAYOUT_FILE, FIELDS_ORDER, TRACE_FILE
)
from src.core.exceptions import ChronologyError
from src.core.logger import get_logger

logger = get_logger(__name__)

CHAIN_META_FILE = 'chain.json'


def _join(values) -> str:
    return ';'.join(repr(float(v)) if isinstance(v, (float, np.floating)) else str(int(v)) for v in values)


def _split(text, dtype=float) -> np.ndarray:
    if isinstance(text, float) and np.isnan(text) or text == '':
        return np.array([], dtype=dtype)
    return np.array([dtype(v) for v in str(text).split(';')], dtype=dtype)


@dataclass
class ChainOutput:
    """
    抽稀后的链记录

    Attributes:
        variant: 模型变体名
        iteration: 每条记录对应的迭代序号
        log_post: 对数后验
        M: 阶段数
        psi: 每条记录的阶段边界（长度 M+1）
        rates: 每条记录的沉积速率（长度 M）
        theta: (n, K) 样本年龄
        assignment: (n, K) 阶段分配
        alpha, beta1, beta2: 起始场速率（无起始场时为 nan）
        arrivals: V(phi)（无起始场时为 -1）
        fields: (n, C1, C2) 起始场，无起始场时为 None
        acceptance: 更新族 -> {'proposed', 'accepted'}
        meta: 元信息（种子、样本编号等）
    """
    variant: str
    iteration: np.ndarray
    log_post: np.ndarray
    M: np.ndarray
    psi: List[np.ndarray]
    rates: List[np.ndarray]
    theta: np.ndarray
    assignment: np.ndarray
    alpha: np.ndarray
    beta1: np.ndarray
    beta2: np.ndarray
    arrivals: np.ndarray
    fields: Optional[np.ndarray] = None
    acceptance: Dict[str, Dict[str, int]] = field(default_factory=dict)
    meta: Dict[str, Any] = field(default_factory=dict)

    @property
    def n_records(self) -> int:
        return len(self.iteration)

    @property
    def psi_0(self) -> np.ndarray:
        return np.array([p[0] for p in self.psi])

    @property
    def psi_M(self) -> np.ndarray:
        return np.array([p[-1] for p in self.psi])

    @property
    def span(self) -> np.ndarray:
        return self.psi_M - self.psi_0

    def counts(self, r: int) -> np.ndarray:
        """第 r 条记录的各阶段测年数 K_m"""
        return np.bincount(self.assignment[r], minlength=int(self.M[r]) + 1)[1:int(self.M[r]) + 1]

    def acceptance_rates(self) -> Dict[str, float]:
        """各更新族接受率"""
        return {
            name: (c['accepted'] / c['proposed'] if c['proposed'] else float('nan'))
            for name, c in sorted(self.acceptance.items())
        }

    def to_frame(self) -> pd.DataFrame:
        """标量轨迹表"""
        frame = pd.DataFrame({
            'iteration': self.iteration,
            'log_posterior': self.log_post,
            'M': self.M,
            'psi_0': self.psi_0,
            'psi_M': self.psi_M,
            'span': self.span,
            'alpha': self.alpha,
            'beta1': self.beta1,
            'beta2': self.beta2,
            'V': self.arrivals,
            'psi': [_join(p) for p in self.psi],
            'lambda': [_join(r) for r in self.rates],
            'counts': [_join(self.counts(r)) for r in range(self.n_records)],
            'assignment': [_join(a) for a in self.assignment],
        })
        ids = self.meta.get('date_ids') or [str(i + 1) for i in range(self.theta.shape[1])]
        for k, date_id in enumerate(ids):
            frame[f'theta_{date_id}'] = self.theta[:, k]
        return frame

    # ==================== 序列化 ====================

    def save(self, directory: Union[str, Path]) -> Path:
        """
        写出链到目录

        Args:
            directory: 输出目录

        Returns:
            输出目录路径
        """
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        self.to_frame().to_csv(directory / TRACE_FILE, index=False, float_format='%.17g')

        if self.fields is not None:
            n, c1, c2 = self.fields.shape
            np.ascontiguousarray(self.fields, dtype=FIELDS_DTYPE).tofile(directory / FIELDS_FILE)
            layout = {
                'dtype': FIELDS_DTYPE,
                'order': 'row-major' if FIELDS_ORDER == 'C' else 'column-major',
                'records': n,
                'C1': c1,
                'C2': c2,
                'record_bytes': c1 * c2 * 8,
            }
            (directory / FIELDS_LAYOUT_FILE).write_text(json.dumps(layout, indent=2), encoding='utf-8')

        acceptance = {
            name: {**counts, 'rate': self.acceptance_rates()[name]}
            for name, counts in sorted(self.acceptance.items())
        }
        (directory / ACCEPTANCE_FILE).write_text(json.dumps(acceptance, indent=2), encoding='utf-8')
        meta = {**self.meta, 'variant': self.variant, 'records': self.n_records}
        (directory / CHAIN_META_FILE).write_text(json.dumps(meta, indent=2), encoding='utf-8')

        logger.info(f"链输出已保存: {directory} ({self.n_records} 条记录)")
        return directory

    @classmethod
    def load(cls, directory: Union[str, Path]) -> 'ChainOutput':
        """
        从目录读取链

        Args:
            directory: save 写出的目录

        Returns:
            ChainOutput
        """
        directory = Path(directory)
        if not (directory / TRACE_FILE).exists():
            raise ChronologyError(f"找不到链轨迹文件: {directory / TRACE_FILE}")
        frame = pd.read_csv(directory / TRACE_FILE, dtype={'psi': str, 'lambda': str, 'counts': str, 'assignment': str})
        meta = json.loads((directory / CHAIN_META_FILE).read_text(encoding='utf-8'))
        acceptance_raw = json.loads((directory / ACCEPTANCE_FILE).read_text(encoding='utf-8'))
        acceptance = {
            name: {'proposed': int(v['proposed']), 'accepted': int(v['accepted'])}
            for name, v in acceptance_raw.items()
        }

        theta_cols = [c for c in frame.columns if c.startswith('theta_')]
        n = len(frame)
        assignment = np.array([_split(a, int) for a in frame['assignment'].fillna('')], dtype=np.int64)
        if assignment.size == 0:
            assignment = np.zeros((n, len(theta_cols)), dtype=np.int64)

        fields = None
        if (directory / FIELDS_LAYOUT_FILE).exists():
            layout = json.loads((directory / FIELDS_LAYOUT_FILE).read_text(encoding='utf-8'))
            raw = np.fromfile(directory / FIELDS_FILE, dtype=layout['dtype'])
            fields = raw.reshape(layout['records'], layout['C1'], layout['C2']).astype(float)

        meta.pop('records', None)
        variant = meta.pop('variant')
        return cls(
            variant=variant,
            iteration=frame['iteration'].to_numpy(dtype=np.int64),
            log_post=frame['log_posterior'].to_numpy(dtype=float),
            M=frame['M'].to_numpy(dtype=np.int64),
            psi=[_split(p) for p in frame['psi']],
            rates=[_split(r) for r in frame['lambda'].fillna('')],
            theta=frame[theta_cols].to_numpy(dtype=float).reshape(n, len(theta_cols)),
            assignment=assignment.reshape(n, len(theta_cols)),
            alpha=frame['alpha'].to_numpy(dtype=float),
            beta1=frame['beta1'].to_numpy(dtype=float),
            beta2=frame['beta2'].to_numpy(dtype=float),
            arrivals=frame['V'].to_numpy(dtype=np.int64),
            fields=fields,
            acceptance=acceptance,
            meta=meta,
        )

    @classmethod
    def combine(cls, chains: Sequence['ChainOutput']) -> 'ChainOutput':
        """
        合并多条独立链（记录拼接，接受计数相加）

        Args:
            chains: 同一变体、同一数据的链

        Returns:
            合并后的 ChainOutput
        """
        if not chains:
            raise ChronologyError("没有可合并的链")
        first = chains[0]
        for chain in chains[1:]:
            if chain.variant != first.variant or chain.theta.shape[1] != first.theta.shape[1]:
                raise ChronologyError("只能合并同一变体、同一数据集的链")
            if (chain.fields is None) != (first.fields is None):
                raise ChronologyError("起始场记录不一致，无法合并")

        acceptance: Dict[str, Dict[str, int]] = {}
        for chain in chains:
            for name, counts in chain.acceptance.items():
                slot = acceptance.setdefault(name, {'proposed': 0, 'accepted': 0})
                slot['proposed'] += counts['proposed']
                slot['accepted'] += counts['accepted']

        meta = dict(first.meta)
        meta['chains'] = len(chains)
        meta['seeds'] = [c.meta.get('seed') for c in chains]
        return cls(
            variant=first.variant,
            iteration=np.concatenate([c.iteration for c in chains]),
            log_post=np.concatenate([c.log_post for c in chains]),
            M=np.concatenate([c.M for c in chains]),
            psi=[p for c in chains for p in c.psi],
            rates=[r for c in chains for r in c.rates],
            theta=np.concatenate([c.theta for c in chains]),
            assignment=np.concatenate([c.assignment for c in chains]),
            alpha=np.concatenate([c.alpha for c in chains]),
            beta1=np.concatenate([c.beta1 for c in chains]),
            beta2=np.concatenate([c.beta2 for c in chains]),
            arrivals=np.concatenate([c.arrivals for c in chains]),
            fields=None if first.fields is None else np.concatenate([c.fields for c in chains]),
            acceptance=acceptance,
            meta=meta,
        )
