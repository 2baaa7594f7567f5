"""日志模块"""
import sys
from pathlib import Path
from typing import Optional, Union
from loguru import logger
from src.core.config_manager import ConfigManager


_logger_initialized = False
_logger_cache = {}

DEFAULT_FORMAT = (
    "<green>{time:YYYY-MM-DD HH:mm:ss}</green> | "
    "<level>{level: <8}</level> | "
    "<cyan>{name}</cyan>:<cyan>{function}</cyan>:<cyan>{line}</cyan> - "
    "<level>{message}</level>"
)


def _add_file_sink(path: Union[str, Path], level: str, log_format: str, log_config: dict) -> None:
    """添加一个带轮转的文件输出"""
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    logger.add(
        str(path),
        format=log_format,
        level=level,
        rotation=log_config.get('rotation', '100 MB'),
        retention=log_config.get('retention', '30 days'),
        compression='zip',
        encoding='utf-8'
    )


def setup_logger(
    log_dir: Optional[str] = None,
    force: bool = False,
    level: Optional[str] = None
) -> None:
    """
    设置全局logger

    Args:
        log_dir: 日志目录路径，为空时使用配置中的文件路径
        force: 是否强制重新初始化
        level: 控制台日志级别，为空时使用配置
    """
    global _logger_initialized

    if _logger_initialized and not force:
        return

    logger.remove()

    log_config = ConfigManager().get('logging', {}) or {}
    console_level = level or log_config.get('level', 'INFO')
    log_format = log_config.get('format', DEFAULT_FORMAT)

    # 控制台输出
    logger.add(sys.stderr, format=log_format, level=console_level, colorize=True)

    # 文件输出
    if log_dir is None:
        log_files = log_config.get('files', {})
        app_log = log_files.get('app', './logs/app.log')
        error_log = log_files.get('error', './logs/error.log')
    else:
        app_log = Path(log_dir) / 'app.log'
        error_log = Path(log_dir) / 'error.log'

    _add_file_sink(app_log, 'DEBUG', log_format, log_config)
    _add_file_sink(error_log, 'ERROR', log_format, log_config)

    _logger_initialized = True


def get_logger(name: str):
    """
    获取logger实例

    Args:
        name: logger名称

    Returns:
        绑定了名称的logger
    """
    if not _logger_initialized:
        setup_logger()

    if name not in _logger_cache:
        _logger_cache[name] = logger.bind(name=name)

    return _logger_cache[name]
