"""系统常量定义"""
import math
from enum import Enum


# ==================== 枚举类型 ====================

class Variant(Enum):
    """模型变体"""
    SP = 'SP'                      # 单阶段
    SPOF = 'SPOF'                  # 单阶段 + 起始场
    RP = 'RP'                      # 随机阶段数
    RPOF = 'RPOF'                  # 随机阶段数 + 起始场

    @property
    def has_field(self) -> bool:
        """是否包含起始场"""
        return self in (Variant.SPOF, Variant.RPOF)

    @property
    def random_phases(self) -> bool:
        """阶段数是否可变"""
        return self in (Variant.RP, Variant.RPOF)


class Material(Enum):
    """样本材料类型"""
    TERRESTRIAL = 'terrestrial'    # 陆生
    MARINE = 'marine'              # 海洋


class PartitionLabel(Enum):
    """格点分区标签"""
    GREEN = 'green'                # 确定较早定居
    BLUE = 'blue'                  # 确定较晚定居
    RED = 'red'                    # 不确定


# ==================== 先验常量 ====================

# 年龄边界（距今年数，BP）
DEFAULT_L = 2000.0                 # 下界 L
DEFAULT_U = 3500.0                 # 上界 U

# 起始场超参数
DEFAULT_A = 10.0                   # 迁入强度超参数 A
DEFAULT_B = 1.0                    # 迁移强度超参数 B

# 阶段数先验: M-1 ~ Poisson(log 2)，使 P(M=1)=1/2
PHASE_COUNT_PRIOR_MEAN = math.log(2.0)

# 沉积速率先验均值: lambda ~ Exp(均值1)
RATE_PRIOR_MEAN = 1.0

# ==================== 格点常量 ====================

DEFAULT_LATTICE = (13, 32)         # (C1 横跨海滩, C2 沿海滩)
DEFAULT_CELL_SIDE = 2.375          # 格子边长（米）
ALONG_AXES = ('x', 'y')            # 沿海滩方向可选坐标轴

# ==================== MCMC常量 ====================

DEFAULT_ITERATIONS = 1_000_000     # 默认迭代次数
DEFAULT_BURN_IN = 100_000          # 默认预烧期
DEFAULT_THINNING = 100             # 默认抽稀间隔
DEFAULT_INIT_RETRIES = 200         # 初始化最大重试次数

# 更新族名称
MOVE_THETA = 'theta'
MOVE_PSI = 'psi'
MOVE_FIELD_JOINT = 'field_joint'
MOVE_FIELD_CONDITIONAL = 'field_conditional'
MOVE_SCALE_RATES = 'scale_rates'
MOVE_RJ = 'rj'
MOVE_ASSIGNMENT = 'assignment'
MOVE_RATES = 'rates'

# 各变体可用的更新族
VARIANT_MOVES = {
    Variant.SP: (MOVE_THETA, MOVE_PSI),
    Variant.SPOF: (MOVE_THETA, MOVE_PSI, MOVE_FIELD_JOINT,
                   MOVE_FIELD_CONDITIONAL, MOVE_SCALE_RATES),
    Variant.RP: (MOVE_THETA, MOVE_PSI, MOVE_RJ, MOVE_ASSIGNMENT, MOVE_RATES),
    Variant.RPOF: (MOVE_THETA, MOVE_PSI, MOVE_FIELD_JOINT, MOVE_FIELD_CONDITIONAL,
                   MOVE_SCALE_RATES, MOVE_RJ, MOVE_ASSIGNMENT, MOVE_RATES),
}

# 乘性提议 z ~ U(1/2, 2)
SCALE_LOW = 0.5
SCALE_HIGH = 2.0

# 起始场最大值与 psi_M 的匹配容差（年）
PIN_TOLERANCE = 1e-9

# ==================== 汇总常量 ====================

DEFAULT_T_STAR = 150.0             # 分区阈值 T*（年）
DEFAULT_P_STAR = 0.8               # 分区概率阈值 p*
DEFAULT_BIN_WIDTH = 10.0           # 直方图组距（年）

# ==================== 输出格式 ====================

TRACE_FILE = 'trace.csv'
FIELDS_FILE = 'fields.bin'
FIELDS_LAYOUT_FILE = 'fields.json'
ACCEPTANCE_FILE = 'acceptance.json'
MANIFEST_FILE = 'manifest.json'

# 起始场二进制布局: 行优先, 8字节小端浮点, 每条记录 C1*C2
FIELDS_DTYPE = '<f8'
FIELDS_ORDER = 'C'

# 输出目录环境变量
OUTPUT_DIR_ENV = 'CHRONOLOGY_OUTPUT_DIR'
