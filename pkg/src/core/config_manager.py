"""配置管理器模块"""
import yaml
from pathlib import Path
from typing import Any, Dict


class ConfigManager:
    """配置管理器（单例模式）"""

    _instance = None
    _config: Dict[str, Any] = {}

    # 子配置文件 -> 合并到主配置中的键
    SECTION_FILES = {
        'mcmc': 'mcmc.yaml',
        'summaries': 'summaries.yaml',
    }

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
            cls._instance._load_config()
        return cls._instance

    @staticmethod
    def _read_yaml(path: Path) -> Dict[str, Any]:
        with open(path, 'r', encoding='utf-8') as f:
            return yaml.safe_load(f) or {}

    def _load_config(self) -> None:
        """加载所有配置文件"""
        config_dir = Path(__file__).parent.parent.parent / 'config'

        # 加载主配置
        config_file = config_dir / 'config.yaml'
        self._config = self._read_yaml(config_file) if config_file.exists() else {}

        # 合并 MCMC 与汇总配置
        for key, filename in self.SECTION_FILES.items():
            section_file = config_dir / filename
            if section_file.exists():
                self._config[key] = self._read_yaml(section_file)

    @property
    def config(self) -> Dict[str, Any]:
        """获取完整配置"""
        return self._config

    def get(self, key: str, default: Any = None) -> Any:
        """
        获取配置值（支持点号分隔的嵌套键）

        Args:
            key: 配置键，支持 'mcmc.priors.A' 格式
            default: 默认值

        Returns:
            配置值
        """
        value = self._config
        for k in key.split('.'):
            if isinstance(value, dict) and k in value:
                value = value[k]
            else:
                return default
        return value

    def reload(self) -> None:
        """重新加载配置"""
        self._load_config()
