import pytest
from loguru import logger as root_logger

from src.core.logger import get_logger, setup_logger


@pytest.fixture
def log_dir(tmp_path):
    """把全局logger重定向到临时目录"""
    directory = tmp_path / "logs"
    setup_logger(log_dir=str(directory), force=True, level="WARNING")
    yield directory
    root_logger.complete()


class TestLogger:
    def test_same_name_is_cached(self):
        """测试同名logger只绑定一次"""
        assert get_logger("src.mcmc.sampler") is get_logger("src.mcmc.sampler")
        assert get_logger("src.mcmc.sampler") is not get_logger("src.mcmc.posterior")

    def test_name_is_bound(self):
        """测试名称写入记录的 extra 字段"""
        names = []
        handler = root_logger.add(lambda message: names.append(message.record["extra"].get("name")))
        try:
            get_logger("src.onsetfield.field").info("模拟起始场")
        finally:
            root_logger.remove(handler)
        assert names == ["src.onsetfield.field"]

    def test_creates_log_dir(self, log_dir):
        """测试setup_logger创建日志目录与两个文件"""
        assert log_dir.exists()
        assert (log_dir / "app.log").exists()
        assert (log_dir / "error.log").exists()

    def test_app_log_keeps_debug(self, log_dir):
        """测试应用日志记录 DEBUG，错误日志只记录 ERROR"""
        log = get_logger("src.mcmc.sampler")
        log.debug("第 3 次尝试得到初始状态")
        log.error("初始化失败")
        root_logger.complete()

        app = (log_dir / "app.log").read_text(encoding="utf-8")
        error = (log_dir / "error.log").read_text(encoding="utf-8")
        assert "第 3 次尝试得到初始状态" in app
        assert "初始化失败" in app
        assert "初始化失败" in error
        assert "第 3 次尝试得到初始状态" not in error

    def test_setup_is_idempotent_without_force(self, log_dir, tmp_path):
        """测试未指定 force 时不会重复初始化"""
        other = tmp_path / "other"
        setup_logger(log_dir=str(other))
        assert not other.exists()
