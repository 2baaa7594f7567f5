"""运行配置"""
from dataclasses import asdict, dataclass, field
from typing import Any, Dict, Optional, Tuple

from src.core.config_manager import ConfigManager
from src.core.constants import (
    DEFAULT_A, DEFAULT_B, DEFAULT_BURN_IN, DEFAULT_CELL_SIDE, DEFAULT_INIT_RETRIES,
    DEFAULT_ITERATIONS, DEFAULT_L, DEFAULT_LATTICE, DEFAULT_THINNING, DEFAULT_U,
    VARIANT_MOVES, Variant
)
from src.core.exceptions import ConfigError


@dataclass
class RunConfig:
    """
    单条链的运行配置

    Attributes:
        variant: 模型变体
        iterations: 总迭代次数
        burn_in: 预烧期
        thinning: 抽稀间隔
        seed: 随机种子
        move_weights: 更新族 -> 相对频率
        A, B, L, U: 先验超参数
        lattice_cells: (C1, C2)，为 None 时按数据自动拟合
        cell_side: 格子边长（米）
        along_axis: 沿海滩坐标轴
        flat_likelihood: 似然置零（先验模拟）
        init_retries: 初始化重试次数
        progress: 是否显示进度条
    """
    variant: Variant = Variant.SP
    iterations: int = DEFAULT_ITERATIONS
    burn_in: int = DEFAULT_BURN_IN
    thinning: int = DEFAULT_THINNING
    seed: int = 0
    move_weights: Dict[str, float] = field(default_factory=dict)
    A: float = DEFAULT_A
    B: float = DEFAULT_B
    L: float = DEFAULT_L
    U: float = DEFAULT_U
    lattice_cells: Optional[Tuple[int, int]] = DEFAULT_LATTICE
    cell_side: float = DEFAULT_CELL_SIDE
    along_axis: str = 'x'
    flat_likelihood: bool = False
    init_retries: int = DEFAULT_INIT_RETRIES
    progress: bool = False

    def __post_init__(self):
        try:
            self.variant = Variant(self.variant)
        except ValueError:
            raise ConfigError(f"未知模型变体: {self.variant}") from None
        if self.lattice_cells is not None:
            self.lattice_cells = tuple(int(c) for c in self.lattice_cells)
        self.validate()

    def validate(self) -> None:
        """
        校验配置

        Raises:
            ConfigError: 任一约束不满足
        """
        if self.burn_in < 0:
            raise ConfigError(f"burn_in 不能为负: {self.burn_in}")
        if self.iterations <= self.burn_in:
            raise ConfigError(f"iterations ({self.iterations}) 必须大于 burn_in ({self.burn_in})")
        if self.thinning < 1:
            raise ConfigError(f"thinning 必须 >= 1: {self.thinning}")
        if self.n_records == 0:
            raise ConfigError("预烧期之后没有任何记录 (iterations - burn_in < thinning)")
        if not self.U > self.L:
            raise ConfigError(f"U ({self.U}) 必须大于 L ({self.L})")
        if not (self.A > 0 and self.B > 0):
            raise ConfigError(f"A、B 必须为正: A={self.A}, B={self.B}")
        if any(w < 0 for w in self.move_weights.values()):
            raise ConfigError(f"更新权重不能为负: {self.move_weights}")
        unknown = set(self.move_weights) - set(VARIANT_MOVES[Variant.RPOF])
        if unknown:
            raise ConfigError(f"未知更新族: {sorted(unknown)}")
        if sum(self.weights().values()) <= 0:
            raise ConfigError(f"{self.variant.value} 可用更新族的权重不能全为0")

    @property
    def n_records(self) -> int:
        """记录条数 (iterations - burn_in) // thinning"""
        return max(0, (self.iterations - self.burn_in) // self.thinning)

    def weights(self) -> Dict[str, float]:
        """当前变体可用更新族的权重，未配置的默认为1"""
        return {name: float(self.move_weights.get(name, 1.0)) for name in VARIANT_MOVES[self.variant]}

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        data['variant'] = self.variant.value
        data['lattice_cells'] = list(self.lattice_cells) if self.lattice_cells else None
        return data

    @classmethod
    def from_config(cls, **overrides) -> 'RunConfig':
        """
        由 mcmc.yaml 默认值加覆盖项构造

        Args:
            **overrides: 覆盖字段（值为 None 的忽略）

        Returns:
            RunConfig
        """
        config = ConfigManager()
        priors = config.get('mcmc.priors', {}) or {}
        lattice = config.get('mcmc.lattice', {}) or {}
        run = config.get('mcmc.run', {}) or {}
        values = {
            'iterations': run.get('iterations', DEFAULT_ITERATIONS),
            'burn_in': run.get('burn_in', DEFAULT_BURN_IN),
            'thinning': run.get('thinning', DEFAULT_THINNING),
            'seed': run.get('seed', 0),
            'init_retries': run.get('init_retries', DEFAULT_INIT_RETRIES),
            'progress': run.get('progress', False),
            'move_weights': dict(config.get('mcmc.move_weights', {}) or {}),
            'A': priors.get('A', DEFAULT_A),
            'B': priors.get('B', DEFAULT_B),
            'L': priors.get('L', DEFAULT_L),
            'U': priors.get('U', DEFAULT_U),
            'lattice_cells': lattice.get('cells', DEFAULT_LATTICE),
            'cell_side': lattice.get('cell_side', DEFAULT_CELL_SIDE),
            'along_axis': lattice.get('along_axis', 'x'),
        }
        values.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**values)
