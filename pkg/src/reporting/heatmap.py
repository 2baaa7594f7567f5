"""格点热图（PNG）"""
import io
from typing import Dict, Optional

import matplotlib
matplotlib.use('Agg')  # 非交互式后端
import numpy as np
from matplotlib.backends.backend_agg import FigureCanvasAgg
from matplotlib.colors import ListedColormap, Normalize
from matplotlib.figure import Figure

from src.core.constants import PartitionLabel
from src.core.exceptions import ChronologyError
from src.core.logger import get_logger

logger = get_logger(__name__)

DEFAULT_PALETTE = 'viridis'
DEFAULT_SCALE = 12
DPI = 100
PARTITION_COLORS = {
    PartitionLabel.GREEN.value: '#2ca02c',
    PartitionLabel.BLUE.value: '#1f77b4',
    PartitionLabel.RED.value: '#d62728',
}


def _as_2d(grid) -> np.ndarray:
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 2 or grid.size == 0:
        raise ChronologyError(f"热图需要非空二维网格，实际形状 {grid.shape}")
    if not np.all(np.isfinite(grid)):
        raise ChronologyError("热图网格含非有限值")
    return grid


def heatmap_annotations(grid) -> Dict[str, float]:
    """色标标注的最小/最大值"""
    grid = _as_2d(grid)
    return {'min': float(grid.min()), 'max': float(grid.max())}


def _norm(grid: np.ndarray) -> Normalize:
    low, high = float(grid.min()), float(grid.max())
    if low == high:
        low, high = low - 0.5, high + 0.5
    return Normalize(vmin=low, vmax=high)


def heatmap_rgba(grid, palette: str = DEFAULT_PALETTE) -> np.ndarray:
    """
    每格 RGBA 颜色

    Args:
        grid: (C1, C2) 数值网格
        palette: matplotlib 色板名

    Returns:
        (C1, C2, 4) 颜色数组
    """
    grid = _as_2d(grid)
    cmap = matplotlib.colormaps[palette]
    return cmap(_norm(grid)(grid))


def _figure(grid: np.ndarray, scale: int) -> Figure:
    if scale < 1:
        raise ChronologyError(f"每格像素数必须 >= 1: {scale}")
    rows, cols = grid.shape
    width = max(cols * scale, 40) + 120
    height = max(rows * scale, 40) + 60
    return Figure(figsize=(width / DPI, height / DPI), dpi=DPI)


def _png(fig: Figure) -> bytes:
    buffer = io.BytesIO()
    FigureCanvasAgg(fig).print_png(buffer)
    return buffer.getvalue()


def render_heatmap(
    grid,
    palette: str = DEFAULT_PALETTE,
    scale: int = DEFAULT_SCALE,
    label: str = 'years BP',
    title: Optional[str] = None
) -> bytes:
    """
    绘制逐格着色的热图，带年份色标

    Args:
        grid: (C1, C2) 数值网格（第0行在下方）
        palette: 色板名
        scale: 每格像素数
        label: 色标标题
        title: 图标题

    Returns:
        PNG 字节
    """
    grid = _as_2d(grid)
    notes = heatmap_annotations(grid)
    fig = _figure(grid, scale)
    ax = fig.add_subplot(1, 1, 1)
    image = ax.imshow(
        grid, cmap=palette, norm=_norm(grid), origin='lower',
        interpolation='nearest', aspect='equal',
    )
    bar = fig.colorbar(image, ax=ax)
    bar.set_label(label)
    if notes['min'] != notes['max']:
        bar.set_ticks([notes['min'], notes['max']])
    else:
        bar.set_ticks([notes['min']])
    bar.set_ticklabels([f"{v:.0f}" for v in bar.get_ticks()])
    ax.set_xlabel('along-beach cell')
    ax.set_ylabel('cross-beach cell')
    if title:
        ax.set_title(title)
    fig.tight_layout()
    logger.debug(f"热图 {grid.shape}: min={notes['min']:.1f}, max={notes['max']:.1f}")
    return _png(fig)


def render_partition(labels, scale: int = DEFAULT_SCALE, title: Optional[str] = None) -> bytes:
    """
    绘制绿/蓝/红分区图

    Args:
        labels: (C1, C2) 标签字符串网格
        scale: 每格像素数
        title: 图标题

    Returns:
        PNG 字节
    """
    labels = np.asarray(labels, dtype=object)
    order = list(PARTITION_COLORS)
    unknown = set(labels.ravel()) - set(order)
    if unknown:
        raise ChronologyError(f"未知分区标签: {sorted(map(str, unknown))}")
    codes = np.vectorize(order.index)(labels).astype(float)
    fig = _figure(codes, scale)
    ax = fig.add_subplot(1, 1, 1)
    ax.imshow(
        codes, cmap=ListedColormap([PARTITION_COLORS[k] for k in order]),
        vmin=-0.5, vmax=len(order) - 0.5, origin='lower', interpolation='nearest',
    )
    counts = {k: int((labels == k).sum()) for k in order}
    ax.set_xlabel('along-beach cell')
    ax.set_ylabel('cross-beach cell')
    ax.set_title(title or ', '.join(f"{k}={n}" for k, n in counts.items()))
    fig.tight_layout()
    return _png(fig)
