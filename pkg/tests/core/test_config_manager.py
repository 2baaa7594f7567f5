import pytest
from pathlib import Path
from src.core.config_manager import ConfigManager


class TestConfigManager:
    def test_singleton_pattern(self):
        """测试单例模式"""
        config1 = ConfigManager()
        config2 = ConfigManager()
        assert config1 is config2

    def test_load_config(self):
        """测试加载配置文件及子配置合并"""
        config = ConfigManager()
        assert config.config is not None
        assert 'logging' in config.config
        assert 'mcmc' in config.config
        assert 'summaries' in config.config

    def test_get_value(self):
        """测试获取配置值"""
        config = ConfigManager()
        assert config.get('mcmc.priors.A') == 10
        assert config.get('mcmc.priors.B') == 1

    def test_get_nested_value(self):
        """测试获取嵌套配置值"""
        config = ConfigManager()
        assert config.get('mcmc.lattice.cells') == [13, 32]
        assert config.get('summaries.partition.T_star') == 150
        assert config.get('summaries.partition.p_star') == 0.8

    def test_get_default_value(self):
        """测试获取默认值"""
        config = ConfigManager()
        value = config.get('non.existent.key', default='default_value')
        assert value == 'default_value'

    def test_get_section(self):
        """测试获取整个配置节"""
        config = ConfigManager()
        priors = config.get('mcmc.priors')
        assert isinstance(priors, dict)
        assert priors['L'] < priors['U']

    def test_move_weights_cover_all_families(self):
        """测试配置的更新族与常量一致"""
        from src.core.constants import VARIANT_MOVES, Variant
        weights = ConfigManager().get('mcmc.move_weights')
        assert set(weights) == set(VARIANT_MOVES[Variant.RPOF])

    def test_reload(self):
        """测试重新加载后配置不变"""
        config = ConfigManager()
        before = config.get('mcmc.run.seed')
        config.reload()
        assert config.get('mcmc.run.seed') == before
