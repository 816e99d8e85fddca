import os
import sys
from typing import Any, Mapping, Optional

from loguru import logger

CONSOLE_FORMAT = ("<green>{time:YYYY-MM-DD HH:mm:ss}</green> | <level>{level: <8}</level> | "
                  "<cyan>{name}</cyan>:<cyan>{function}</cyan>:<cyan>{line}</cyan> - <level>{message}</level>")
FILE_FORMAT = "{time:YYYY-MM-DD HH:mm:ss} | {level: <8} | {name}:{function}:{line} - {message}"


class HardyLogger:
    """
    求解器日志：标准输出留给证书，控制台日志一律写到标准错误；
    配置了 logging.file 时再加一个滚动文件处理器
    """

    def __init__(self, level: str = "INFO", log_file: Optional[str] = None, rotation: str = "50 MB",
                 retention: str = "10 days"):
        self.level = level
        self.log_file = log_file
        self.rotation = rotation
        self.retention = retention
        self._install()

    def _install(self) -> None:
        # 移除默认的处理器
        logger.remove()
        logger.add(sys.stderr, format=CONSOLE_FORMAT, level=self.level)
        if self.log_file:
            directory = os.path.dirname(self.log_file)
            if directory and not os.path.exists(directory):
                os.makedirs(directory)
            logger.add(self.log_file, format=FILE_FORMAT, level="DEBUG", rotation=self.rotation,
                       retention=self.retention, encoding="utf-8")

    def configure(self, config: Any = None, level: Optional[str] = None) -> None:
        """
        按配置重新安装处理器
        :param config: ConfigLoader 或 logging 节的字典
        :param level: 命令行 --log-level，优先于配置
        """
        section: Mapping[str, Any] = {}
        if config is not None:
            section = config.get_value("logging", {}) if hasattr(config, "get_value") else config
        self.level = level or section.get("level", self.level)
        self.log_file = section.get("file", self.log_file)
        self.rotation = section.get("rotation", self.rotation)
        self.retention = section.get("retention", self.retention)
        self._install()

    @staticmethod
    def info(msg: str, *args, **kwargs):
        """记录信息级别日志"""
        logger.info(msg, *args, **kwargs)

    @staticmethod
    def debug(msg: str, *args, **kwargs):
        logger.debug(msg, *args, **kwargs)

    @staticmethod
    def warning(msg: str, *args, **kwargs):
        logger.warning(msg, *args, **kwargs)

    @staticmethod
    def error(msg: str, *args, **kwargs):
        """记录错误级别日志"""
        logger.error(msg, *args, **kwargs)

    @staticmethod
    def exception(msg: str, *args, **kwargs):
        logger.exception(msg, *args, **kwargs)


# 创建全局日志记录器实例
hardy_logger = HardyLogger()
