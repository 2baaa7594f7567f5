#!/usr/bin/env python
"""
放射性碳年代学分析脚本

读取测年与探坑数据，运行 SP/SPOF/RP/RPOF 变体的 MCMC，输出后验汇总、热图与运行清单。

用法:
    python scripts/run_chronology.py fit --variant SPOF --dates data/dates.csv --pits data/pits.csv
    python scripts/run_chronology.py simulate-prior --variant SPOF --dates data/dates.csv --pits data/pits.csv
    python scripts/run_chronology.py summarize --chain output/chain --prior-chain output/prior/chain
    python scripts/run_chronology.py render --grid output/field_mean.csv
    python scripts/run_chronology.py synthesize --scenario spreading --output data/synthetic
"""
import argparse
import hashlib
import json
import os
import platform
import sys
import traceback
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple

# 添加项目根目录到路径
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

import matplotlib
import numpy as np
import pandas as pd
import scipy
from dotenv import load_dotenv
from tabulate import tabulate

from src.calibration.curve import load_curve_set
from src.core.config_manager import ConfigManager
from src.core.constants import (
    DEFAULT_BIN_WIDTH, DEFAULT_P_STAR, DEFAULT_T_STAR, MANIFEST_FILE, OUTPUT_DIR_ENV, PartitionLabel,
    Variant
)
from src.core.exceptions import ConfigError
from src.core.logger import get_logger
from src.data.dataset_loader import Dataset, load_dataset
from src.data.synthetic import (
    generate_hiatus_dataset, generate_single_phase_dataset, generate_spreading_dataset
)
from src.mcmc.chain_output import ChainOutput
from src.mcmc.config import RunConfig
from src.mcmc.posterior import PosteriorContext
from src.mcmc.sampler import run_chains
from src.onsetfield.field import lattice_from_geometry, lattice_geometry, load_grid
from src.onsetfield.lattice import Lattice, cell_of
from src.reporting.heatmap import render_heatmap, render_partition
from src.reporting.report_writer import ReportWriter, write_json_report
from src.summaries.field_summary import (
    arrival_odds, field_summary, partition, pit_onset_histograms, threshold_scan
)
from src.summaries.model_comparison import model_probabilities, phase_scatter

logger = get_logger(__name__)

VERSION = '0.1.0'
COMMANDS = ('simulate-prior', 'fit', 'summarize', 'render', 'synthesize')
SCENARIOS = {
    'single-phase': generate_single_phase_dataset,
    'spreading': generate_spreading_dataset,
    'hiatus': generate_hiatus_dataset,
}
CHAIN_DIR = 'chain'
LATTICE_FILE = 'lattice.json'
MIN_SCALE, MAX_SCALE = 4, 40


@dataclass
class RunSpec:
    """
    一次命令行运行的完整描述

    Attributes:
        command: 子命令
        output_dir: 输出目录
        config: MCMC 运行配置（simulate-prior / fit）
        dates_path, pits_path: 数据文件
        curve_paths: 材料 -> 曲线文件
        chains, n_jobs: 链数与并行进程数
        per_pit: 是否逐探坑运行单阶段分析
        T_star, p_star: 分区阈值
        bin_width: 直方图组距
        scan: 阈值扫描 (start, stop, step)
        chain_dirs: summarize 读取的链目录
        prior_chain_dir: 先验链目录（到达数比较）
        grid_path: render 读取的网格 CSV
        palette, scale: 热图配色与每格像素数
        scenario: synthesize 的场景名
        seed: synthesize 的随机种子
    """
    command: str
    output_dir: Path
    config: Optional[RunConfig] = None
    dates_path: Optional[str] = None
    pits_path: Optional[str] = None
    curve_paths: Dict[str, str] = field(default_factory=dict)
    chains: int = 1
    n_jobs: int = 1
    per_pit: bool = False
    T_star: float = DEFAULT_T_STAR
    p_star: float = DEFAULT_P_STAR
    bin_width: float = DEFAULT_BIN_WIDTH
    scan: Tuple[float, float, float] = (0.0, 500.0, 10.0)
    chain_dirs: List[str] = field(default_factory=list)
    prior_chain_dir: Optional[str] = None
    grid_path: Optional[str] = None
    palette: str = 'viridis'
    scale: int = 12
    scenario: Optional[str] = None
    seed: Optional[int] = None

    def validate(self) -> None:
        """
        检查运行所需输入

        Raises:
            ConfigError: 缺少输入或参数越界
        """
        if self.command not in COMMANDS:
            raise ConfigError(f"未知命令: {self.command}")
        if self.command in ('simulate-prior', 'fit'):
            if self.config is None:
                raise ConfigError(f"{self.command} 需要运行配置")
            for label, path in (('测年文件', self.dates_path), ('探坑文件', self.pits_path)):
                if not path:
                    raise ConfigError(f"{self.command} 需要{label}")
                if not Path(path).exists():
                    raise ConfigError(f"{label}不存在: {path}")
            if self.chains < 1:
                raise ConfigError(f"链数必须 >= 1: {self.chains}")
            if self.per_pit and self.command != 'fit':
                raise ConfigError("--per-pit 只用于 fit")
        if self.command == 'fit':
            if not any(self.curve_paths.values()):
                raise ConfigError("fit 需要至少一条校准曲线")
            for kind, path in self.curve_paths.items():
                if path and not Path(path).exists():
                    raise ConfigError(f"{kind} 校准曲线不存在: {path}")
        if self.command == 'summarize':
            if not self.chain_dirs:
                raise ConfigError("summarize 需要 --chain")
            for path in self.chain_dirs + ([self.prior_chain_dir] if self.prior_chain_dir else []):
                if not Path(path).is_dir():
                    raise ConfigError(f"链目录不存在: {path}")
        if self.command == 'render':
            if not self.grid_path or not Path(self.grid_path).exists():
                raise ConfigError(f"网格文件不存在: {self.grid_path}")
        if self.command == 'synthesize' and self.scenario not in SCENARIOS:
            raise ConfigError(f"未知场景: {self.scenario}，可选: {', '.join(SCENARIOS)}")
        if not 0 < self.p_star < 1:
            raise ConfigError(f"p* 必须在 (0, 1) 内: {self.p_star}")
        if self.bin_width <= 0:
            raise ConfigError(f"组距必须为正: {self.bin_width}")
        if not MIN_SCALE <= self.scale <= MAX_SCALE:
            raise ConfigError(f"每格像素数必须在 [{MIN_SCALE}, {MAX_SCALE}] 内: {self.scale}")
        start, stop, step = self.scan
        if step <= 0 or stop < start:
            raise ConfigError(f"阈值扫描网格无效: {self.scan}")

    def to_dict(self) -> Dict[str, Any]:
        """可复现运行所需的全部字段（不含输出目录）"""
        data = asdict(self)
        data.pop('output_dir')
        data['config'] = self.config.to_dict() if self.config else None
        data['scan'] = list(self.scan)
        return data

    @property
    def run_seed(self) -> Optional[int]:
        return self.config.seed if self.config else self.seed


# ==================== 清单 ====================

def config_hash(spec: RunSpec) -> str:
    """规范化 JSON 的 sha256"""
    canonical = json.dumps(spec.to_dict(), sort_keys=True, separators=(',', ':'), default=str)
    return hashlib.sha256(canonical.encode('utf-8')).hexdigest()


def library_versions() -> Dict[str, str]:
    return {
        'chronology': VERSION,
        'python': platform.python_version(),
        'numpy': np.__version__,
        'scipy': scipy.__version__,
        'pandas': pd.__version__,
        'matplotlib': matplotlib.__version__,
    }


def write_manifest(spec: RunSpec, status: str, artifacts: List[Path], error: Optional[str] = None) -> Path:
    """写出 manifest.json，产物路径相对输出目录"""
    output_dir = Path(spec.output_dir)
    manifest = {
        'status': status,
        'command': spec.command,
        'config_hash': config_hash(spec),
        'seed': spec.run_seed,
        'spec': spec.to_dict(),
        'versions': library_versions(),
        'artifacts': sorted(str(Path(p).relative_to(output_dir)) for p in artifacts),
        'timestamp': ReportWriter.timestamp(),
    }
    if error:
        manifest['error'] = error
    return write_json_report(manifest, output_dir / MANIFEST_FILE)


# ==================== 汇总 ====================

def boundary_table(chain: ChainOutput) -> pd.DataFrame:
    """psi_0, psi_M 与跨度的后验均值和分位数"""
    rows = []
    for name, values in (('psi_0', chain.psi_0), ('psi_M', chain.psi_M), ('span', chain.span)):
        q = np.quantile(values, [0.025, 0.5, 0.975])
        rows.append({
            'quantity': name, 'mean': float(values.mean()), 'std': float(values.std()),
            'q025': float(q[0]), 'median': float(q[1]), 'q975': float(q[2]),
        })
    return pd.DataFrame(rows)


def pit_cells_for(lattice: Lattice, dataset: Optional[Dataset]) -> Dict[str, int]:
    if dataset is None:
        return {}
    return {p.name: cell_of(lattice, p.x, p.y) for p in dataset.pits}


def summarize_chain(
    chain: ChainOutput,
    spec: RunSpec,
    writer: ReportWriter,
    lattice: Optional[Lattice] = None,
    dataset: Optional[Dataset] = None,
    prior_chain: Optional[ChainOutput] = None
) -> Dict[str, Any]:
    """
    写出一条链的全部汇总产物

    Args:
        chain: 后验链
        spec: 运行描述（阈值、组距、配色）
        writer: 产物目录
        lattice: 格点（起始场变体）
        dataset: 数据集（探坑直方图与阶段散点）
        prior_chain: 先验链（到达数比较）

    Returns:
        JSON 报告内容
    """
    report: Dict[str, Any] = {
        'variant': chain.variant,
        'records': chain.n_records,
        'acceptance': chain.acceptance_rates(),
    }
    boundaries = boundary_table(chain)
    writer.table('boundaries.csv', boundaries)
    report['boundaries'] = boundaries
    print(tabulate(boundaries, headers='keys', tablefmt='simple', showindex=False, floatfmt='.1f'))

    if chain.fields is not None:
        summary = field_summary(chain)
        for name, grid in (('field_mean', summary.mean), ('field_std', summary.std),
                           ('elapsed_mean', summary.elapsed_mean), ('elapsed_std', summary.elapsed_std)):
            writer.grid(f'{name}.csv', grid)
            writer.png(f'{name}.png', render_heatmap(grid, spec.palette, spec.scale, title=name))

        split = partition(chain, spec.T_star, spec.p_star)
        writer.grid('partition.csv', split.labels)
        writer.png('partition.png', render_partition(split.labels, spec.scale))
        start, stop, step = spec.scan
        scan = threshold_scan(chain, spec.p_star, np.arange(start, stop + step / 2, step))
        writer.table('threshold_scan.csv', scan.table)
        report['partition'] = {
            'T_star': split.T_star, 'p_star': split.p_star,
            **{label.value: split.count(label) for label in PartitionLabel},
        }
        report['threshold_scan'] = {
            'splitting_T_star': scan.splitting['T_star'].tolist(),
            'any_split': scan.any_split,
        }
        if lattice is not None and dataset is not None:
            histograms = pit_onset_histograms(chain, pit_cells_for(lattice, dataset), spec.bin_width)
            writer.table('pit_histograms.csv', histograms)
        if prior_chain is not None and prior_chain.fields is not None:
            odds = arrival_odds(chain, prior_chain)
            writer.table('arrival_odds.csv', odds)
            report['arrival_odds'] = odds

    if Variant(chain.variant).random_phases:
        probabilities = model_probabilities(chain)
        writer.table('model_probabilities.csv', probabilities)
        report['model_probabilities'] = probabilities
        print(tabulate(probabilities, headers='keys', tablefmt='simple', showindex=False, floatfmt='.4f'))
        if dataset is not None:
            mode_M = int(probabilities.loc[probabilities['posterior'].idxmax(), 'M'])
            pits = {p.name: (p.x, p.y) for p in dataset.pits}
            scatter = phase_scatter(
                chain, [d.id for d in dataset.dates], [d.pit for d in dataset.dates], pits, mode_M
            )
            writer.table(f'phase_scatter_M{mode_M}.csv', scatter)

    writer.json('report.json', report)
    return report


# ==================== 子命令 ====================

def _materials_in(dataset: Dataset) -> set:
    return {d.material.value for d in dataset.dates}


def _load(spec: RunSpec) -> Dataset:
    """读取数据集；无起始场的变体不使用固定格点尺寸"""
    cfg = spec.config
    cells = cfg.lattice_cells if cfg.variant.has_field else None
    return load_dataset(
        spec.dates_path, spec.pits_path,
        cells=cells, cell_side=cfg.cell_side, along_axis=cfg.along_axis,
    )


def _sample(spec: RunSpec, config: RunConfig, dataset: Dataset, curves) -> ChainOutput:
    context = PosteriorContext.build(
        config, dataset.dates, curves,
        lattice=dataset.lattice, date_cells=dataset.date_cells,
    )
    chains = run_chains(config, context, n_chains=spec.chains, n_jobs=spec.n_jobs)
    return chains[0] if len(chains) == 1 else ChainOutput.combine(chains)


def run_sampling(spec: RunSpec, writer: ReportWriter, flat: bool) -> None:
    """simulate-prior 与 fit 的共同流程: 读取 -> 抽样 -> 汇总 -> 绘图"""
    dataset = _load(spec)
    config = replace(spec.config, flat_likelihood=flat)
    curves = None
    if not flat:
        used = _materials_in(dataset)
        curves = load_curve_set({k: v for k, v in spec.curve_paths.items() if k in used})

    chain = _sample(spec, config, dataset, curves)
    chain_dir = writer.output_dir / CHAIN_DIR
    chain.save(chain_dir)
    for path in sorted(chain_dir.iterdir()):
        writer.track(path)
    if config.variant.has_field:
        writer.json(LATTICE_FILE, lattice_geometry(dataset.lattice))

    summarize_chain(chain, spec, writer, dataset.lattice if config.variant.has_field else None, dataset)

    if spec.per_pit:
        run_per_pit(spec, writer, dataset, curves)


def run_per_pit(spec: RunSpec, writer: ReportWriter, dataset: Dataset, curves) -> None:
    """每个探坑单独运行单阶段模型，写出 psi_0 / psi_M 的直方图"""
    config = replace(spec.config, variant=Variant.SP, progress=False)
    samples = []
    for pit in dataset.pits:
        if not any(d.pit == pit.name for d in dataset.dates):
            continue
        subset = dataset.subset(pit.name)
        logger.info(f"探坑 {pit.name}: {len(subset.dates)} 条测年")
        chain = _sample(spec, config, subset, curves)
        samples.append(pd.DataFrame({'pit': pit.name, 'psi_0': chain.psi_0, 'psi_M': chain.psi_M}))

    if not samples:
        return
    frame = pd.concat(samples, ignore_index=True)
    writer.table('per_pit_boundaries.csv', frame)
    low = np.floor(frame[['psi_0', 'psi_M']].min().min() / spec.bin_width) * spec.bin_width
    high = (np.floor(frame[['psi_0', 'psi_M']].max().max() / spec.bin_width) + 1) * spec.bin_width
    edges = np.arange(low, high + spec.bin_width / 2, spec.bin_width)
    rows = []
    for pit, group in frame.groupby('pit', sort=False):
        for quantity in ('psi_0', 'psi_M'):
            counts, _ = np.histogram(group[quantity], bins=edges)
            rows.append(pd.DataFrame({
                'pit': pit, 'quantity': quantity,
                'bin_start': edges[:-1], 'bin_end': edges[1:], 'count': counts,
            }))
    writer.table('per_pit_histograms.csv', pd.concat(rows, ignore_index=True))


def run_summarize(spec: RunSpec, writer: ReportWriter) -> None:
    chains = [ChainOutput.load(path) for path in spec.chain_dirs]
    chain = chains[0] if len(chains) == 1 else ChainOutput.combine(chains)
    prior = ChainOutput.load(spec.prior_chain_dir) if spec.prior_chain_dir else None

    lattice = None
    geometry_file = Path(spec.chain_dirs[0]).parent / LATTICE_FILE
    if geometry_file.exists():
        lattice = lattice_from_geometry(json.loads(geometry_file.read_text(encoding='utf-8')))
    dataset = None
    if spec.dates_path and spec.pits_path:
        dataset = load_dataset(spec.dates_path, spec.pits_path, lattice=lattice)
    summarize_chain(chain, spec, writer, lattice, dataset, prior)


def run_render(spec: RunSpec, writer: ReportWriter) -> None:
    raw = pd.read_csv(spec.grid_path, header=None, dtype=str)
    stem = Path(spec.grid_path).stem
    numeric = pd.to_numeric(raw.stack(), errors='coerce')
    if numeric.notna().all():
        content = render_heatmap(load_grid(spec.grid_path), spec.palette, spec.scale, title=stem)
    else:
        content = render_partition(raw.to_numpy(dtype=object), spec.scale, title=stem)
    writer.png(f'{stem}.png', content)


def run_synthesize(spec: RunSpec, writer: ReportWriter) -> None:
    rng = np.random.default_rng(spec.seed)
    synthetic = SCENARIOS[spec.scenario](rng)
    for path in synthetic.write(writer.output_dir).values():
        writer.track(path)


HANDLERS = {
    'simulate-prior': lambda spec, writer: run_sampling(spec, writer, flat=True),
    'fit': lambda spec, writer: run_sampling(spec, writer, flat=False),
    'summarize': run_summarize,
    'render': run_render,
    'synthesize': run_synthesize,
}


def run(spec: RunSpec) -> Tuple[int, List[Path]]:
    """
    执行一次运行并写出清单

    Args:
        spec: 运行描述

    Returns:
        (退出码, 产物路径列表)；spec 无效时只写出失败状态的清单
    """
    output_dir = Path(spec.output_dir)
    try:
        spec.validate()
    except ConfigError as e:
        logger.error(f"运行描述无效: {e}")
        output_dir.mkdir(parents=True, exist_ok=True)
        write_manifest(spec, 'failed', [], str(e))
        return 1, []

    writer = ReportWriter(output_dir)
    logger.info(f"开始 {spec.command}，输出目录 {output_dir}")
    try:
        HANDLERS[spec.command](spec, writer)
    except Exception as e:
        logger.error(f"{spec.command} 失败: {e}")
        write_manifest(spec, 'failed', writer.artifacts, f"{type(e).__name__}: {e}")
        raise
    write_manifest(spec, 'ok', writer.artifacts)
    logger.info(f"{spec.command} 完成，产物 {len(writer.artifacts)} 个")
    return 0, writer.artifacts


# ==================== 命令行 ====================

def _add_run_options(parser: argparse.ArgumentParser) -> None:
    parser.add_argument('--variant', choices=[v.value for v in Variant], default='SP', help='模型变体')
    parser.add_argument('--dates', help='测年 CSV')
    parser.add_argument('--pits', help='探坑 CSV')
    parser.add_argument('--iterations', type=int, help='总迭代次数')
    parser.add_argument('--burn-in', type=int, help='预烧期')
    parser.add_argument('--thinning', type=int, help='抽稀间隔')
    parser.add_argument('--seed', type=int, help='随机种子')
    parser.add_argument('--A', type=float, help='迁入强度超参数')
    parser.add_argument('--B', type=float, help='迁移强度超参数')
    parser.add_argument('--L', type=float, help='年龄下界 (BP)')
    parser.add_argument('--U', type=float, help='年龄上界 (BP)')
    parser.add_argument('--lattice', type=int, nargs=2, metavar=('C1', 'C2'), help='格点尺寸')
    parser.add_argument('--auto-lattice', action='store_true', help='按探坑范围自动拟合格点')
    parser.add_argument('--cell-side', type=float, help='格子边长（米）')
    parser.add_argument('--along-axis', choices=['x', 'y'], help='沿海滩坐标轴')
    parser.add_argument('--chains', type=int, help='独立链数量')
    parser.add_argument('--n-jobs', type=int, help='并行进程数')
    parser.add_argument('--no-progress', action='store_true', help='不显示进度条')


def _add_summary_options(parser: argparse.ArgumentParser) -> None:
    parser.add_argument('--T-star', type=float, help='经过时间阈值 T*（年）')
    parser.add_argument('--p-star', type=float, help='概率阈值 p*')
    parser.add_argument('--bin-width', type=float, help='直方图组距（年）')
    parser.add_argument('--palette', help='热图配色')
    parser.add_argument('--scale', type=int, help='每格像素数')


def parse_arguments(argv: Optional[List[str]] = None) -> argparse.Namespace:
    """
    解析命令行参数

    Returns:
        解析后的参数对象
    """
    parser = argparse.ArgumentParser(
        description='放射性碳年代学 MCMC 工具',
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
示例:
  # 单阶段模型
  python scripts/run_chronology.py fit --variant SP --dates dates.csv --pits pits.csv

  # 带起始场的单阶段模型，同时逐探坑分析
  python scripts/run_chronology.py fit --variant SPOF --dates dates.csv --pits pits.csv --per-pit

  # 先验模拟（用于到达数比较）
  python scripts/run_chronology.py simulate-prior --variant SPOF --dates dates.csv --pits pits.csv

  # 重新汇总已保存的链
  python scripts/run_chronology.py summarize --chain output/chain --T-star 100

  # 生成合成数据
  python scripts/run_chronology.py synthesize --scenario hiatus --seed 7
        """
    )
    parser.add_argument('--output', help=f'输出目录（也可用环境变量 {OUTPUT_DIR_ENV}）')
    parser.add_argument('--verbose', action='store_true', help='显示详细输出')
    commands = parser.add_subparsers(dest='command', required=True)

    for name, help_text in (('simulate-prior', '平坦似然下的先验模拟'), ('fit', '拟合后验')):
        sub = commands.add_parser(name, help=help_text)
        _add_run_options(sub)
        _add_summary_options(sub)
        sub.add_argument('--curve-terrestrial', help='陆生样本校准曲线')
        sub.add_argument('--curve-marine', help='海洋样本校准曲线')
        if name == 'fit':
            sub.add_argument('--per-pit', action='store_true', help='逐探坑运行单阶段模型')

    sub = commands.add_parser('summarize', help='汇总已保存的链')
    sub.add_argument('--chain', nargs='+', required=True, help='链目录（多个时合并）')
    sub.add_argument('--prior-chain', help='先验链目录')
    sub.add_argument('--dates', help='测年 CSV（阶段散点）')
    sub.add_argument('--pits', help='探坑 CSV（探坑直方图）')
    _add_summary_options(sub)

    sub = commands.add_parser('render', help='把网格 CSV 渲染为 PNG')
    sub.add_argument('--grid', required=True, help='网格 CSV')
    sub.add_argument('--palette', help='热图配色')
    sub.add_argument('--scale', type=int, help='每格像素数')

    sub = commands.add_parser('synthesize', help='生成合成数据集')
    sub.add_argument('--scenario', required=True, choices=list(SCENARIOS), help='场景')
    sub.add_argument('--seed', type=int, default=0, help='随机种子')

    return parser.parse_args(argv)


def resolve_output_dir(cli_value: Optional[str]) -> Path:
    """命令行 > 环境变量 > config.yaml"""
    if cli_value:
        return Path(cli_value)
    env_value = os.environ.get(OUTPUT_DIR_ENV)
    if env_value:
        return Path(env_value)
    return Path(ConfigManager().get('output.directory', './output'))


def build_spec(args: argparse.Namespace) -> RunSpec:
    """
    由命令行参数与 YAML 默认值构造 RunSpec

    Raises:
        ConfigError: 配置无效
    """
    config_manager = ConfigManager()
    summaries = config_manager.get('summaries', {}) or {}
    scan = summaries.get('threshold_scan', {}) or {}
    get = lambda name: getattr(args, name, None)

    config = None
    if args.command in ('simulate-prior', 'fit'):
        run_cfg = config_manager.get('mcmc.run', {}) or {}
        config = RunConfig.from_config(
            variant=args.variant,
            iterations=get('iterations'),
            burn_in=get('burn_in'),
            thinning=get('thinning'),
            seed=get('seed'),
            A=get('A'), B=get('B'), L=get('L'), U=get('U'),
            lattice_cells=get('lattice'),
            cell_side=get('cell_side'),
            along_axis=get('along_axis'),
            progress=False if get('no_progress') else None,
        )
        if get('auto_lattice'):
            config.lattice_cells = None
        chains = get('chains') or run_cfg.get('chains', 1)
        n_jobs = get('n_jobs') or run_cfg.get('n_jobs', 1)
    else:
        chains, n_jobs = 1, 1

    curves = config_manager.get('curves', {}) or {}
    curve_paths = {
        'terrestrial': get('curve_terrestrial') or curves.get('terrestrial'),
        'marine': get('curve_marine') or curves.get('marine'),
    }

    def pick(value, default):
        return default if value is None else value

    return RunSpec(
        command=args.command,
        output_dir=resolve_output_dir(args.output),
        config=config,
        dates_path=get('dates'),
        pits_path=get('pits'),
        curve_paths={k: v for k, v in curve_paths.items() if v} if args.command == 'fit' else {},
        chains=int(chains),
        n_jobs=int(n_jobs),
        per_pit=bool(get('per_pit')),
        T_star=pick(get('T_star'), summaries.get('partition', {}).get('T_star', DEFAULT_T_STAR)),
        p_star=pick(get('p_star'), summaries.get('partition', {}).get('p_star', DEFAULT_P_STAR)),
        bin_width=pick(get('bin_width'), summaries.get('histogram', {}).get('bin_width', DEFAULT_BIN_WIDTH)),
        scan=(float(scan.get('start', 0)), float(scan.get('stop', 500)), float(scan.get('step', 10))),
        chain_dirs=list(get('chain') or []),
        prior_chain_dir=get('prior_chain'),
        grid_path=get('grid'),
        palette=pick(get('palette'), config_manager.get('output.palette', 'viridis')),
        scale=pick(get('scale'), config_manager.get('output.pixels_per_cell', 12)),
        scenario=get('scenario'),
        seed=get('seed') if args.command == 'synthesize' else None,
    )


def main(argv: Optional[List[str]] = None):
    """主函数"""
    load_dotenv()
    args = parse_arguments(argv)

    print("=" * 70)
    print("                   放射性碳年代学分析")
    print("=" * 70)
    print(f"命令: {args.command}")
    if getattr(args, 'variant', None):
        print(f"变体: {args.variant}")
    print("=" * 70)
    print()

    try:
        spec = build_spec(args)
        status, artifacts = run(spec)
        if status != 0:
            print(f"\n[ERROR] 运行描述无效，详见 {Path(spec.output_dir) / MANIFEST_FILE}")
            sys.exit(status)
        print(f"\n[OK] 完成，{len(artifacts)} 个产物写入 {spec.output_dir}")

    except ValueError as e:
        print(f"\n[ERROR] 参数错误: {e}")
        logger.error(f"参数错误: {e}")
        if args.verbose:
            traceback.print_exc()
        sys.exit(1)

    except Exception as e:
        print(f"\n[ERROR] 运行失败: {e}")
        logger.error(f"运行失败: {e}")
        if args.verbose:
            traceback.print_exc()
        sys.exit(1)


if __name__ == '__main__':
    main()
