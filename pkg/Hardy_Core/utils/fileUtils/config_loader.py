import copy
import os
from typing import Any, Dict, Optional

import yaml
from loguru import logger

DEFAULT_CONFIG_PATH = os.path.abspath(
    os.path.join(os.path.dirname(__file__), "..", "..", "..", "Resources", "config", "config.yaml"))

# 配置文件缺失时使用的内置默认值，与 Resources/config/config.yaml 保持一致
DEFAULTS: Dict[str, Any] = {
    "numerics": {
        "psd_tol": 1e-8,
        "minimax": {"max_rounds": 10000, "bisection_steps": 60, "tol": 1e-6},
    },
    "grid": {"radial": 16, "angular": 256, "max_radius": 0.995},
    "quadrature": {"nodes": 4096},
    "outer": {"max_radius": 0.995},
    "family": {"samples": 512, "refine": True, "refine_steps": 50},
    "solve": {"degree": 8},
    "sampling": {"seed": 0},
    "duality": {"starts": 64, "steps": 500, "tol": 1e-9},
    "parallel": {"max_workers": 4},
    "certificate": {"include_timing": False},
    "logging": {"level": "INFO", "file": None, "rotation": "50 MB", "retention": "10 days"},
}


class ConfigLoader:
    def __init__(self, config_path: Optional[str] = None):
        self.config_path = config_path or DEFAULT_CONFIG_PATH
        self.config: Dict[str, Any] = {}
        self.load_config()

    def load_config(self) -> None:
        """加载配置文件，文件不存在时退回内置默认值"""
        if not os.path.exists(self.config_path):
            logger.warning(f"配置文件不存在: {self.config_path}，使用内置默认值")
            self.config = copy.deepcopy(DEFAULTS)
            return
        try:
            with open(self.config_path, "r", encoding="utf-8") as f:
                loaded = yaml.safe_load(f) or {}
            self.config = self.merge_configs(copy.deepcopy(DEFAULTS), loaded)
            logger.debug(f"配置文件加载成功: {self.config_path}")
        except yaml.YAMLError as e:
            logger.error(f"加载配置文件失败: {str(e)}")
            raise

    def get_value(self, key: str, default: Any = None) -> Any:
        """
        获取配置值
        :param key: 配置键，支持点号分隔的多级键
        :param default: 默认值
        :return: 配置值
        """
        try:
            value = self.config
            for k in key.split("."):
                value = value[k]
            return value
        except (KeyError, TypeError):
            logger.warning(f"配置项不存在: {key}，使用默认值: {default}")
            return default

    def update_config(self, key: str, value: Any) -> None:
        """
        更新配置值
        :param key: 配置键
        :param value: 配置值
        """
        keys = key.split(".")
        current = self.config
        for k in keys[:-1]:
            current = current.setdefault(k, {})
        current[keys[-1]] = value
        logger.debug(f"配置已更新: {key} = {value}")

    def overlay(self, options: Dict[str, Any]) -> None:
        """把问题文件中的 options 节覆盖到当前配置上"""
        if options:
            self.config = self.merge_configs(self.config, options)

    @staticmethod
    def merge_configs(base_config: Dict[str, Any], override_config: Dict[str, Any]) -> Dict[str, Any]:
        """
        合并配置
        :param base_config: 基础配置
        :param override_config: 覆盖配置
        :return: 合并后的配置
        """
        result = base_config.copy()
        for key, value in override_config.items():
            if isinstance(value, dict) and key in result and isinstance(result[key], dict):
                result[key] = ConfigLoader.merge_configs(result[key], value)
            else:
                result[key] = value
        return result
