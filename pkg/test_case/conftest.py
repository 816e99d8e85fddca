import os

import numpy as np
import pytest

from Hardy_Core.core.numerics import DiskGrid, QuadratureRule, disk_grid
from Hardy_Core.utils.fileUtils.config_loader import ConfigLoader
from Hardy_Core.utils.logUtils.logger import hardy_logger

TEST_DATA_DIR = os.path.join(os.path.dirname(os.path.dirname(os.path.abspath(__file__))), "Resources", "test_data")


def pytest_runtest_setup(item):
    """测试用例开始前的处理"""
    hardy_logger.info(f"开始执行测试用例: {item.name}")


def pytest_runtest_teardown(item):
    """测试用例结束后的处理"""
    hardy_logger.info(f"测试用例执行完成: {item.name}")


def pytest_runtest_logreport(report):
    """测试用例执行结果的处理"""
    if report.when == "call":
        if report.passed:
            hardy_logger.info(f"测试用例通过: {report.nodeid}")
        elif report.failed:
            hardy_logger.error(f"测试用例失败: {report.nodeid}")
            if hasattr(report, "longrepr"):
                hardy_logger.error(f"失败原因: {report.longrepr}")
        elif report.skipped:
            hardy_logger.warning(f"测试用例跳过: {report.nodeid}")


@pytest.fixture(scope="session", autouse=True)
def session_setup_teardown():
    """测试会话的开始和结束处理"""
    hardy_logger.info("=== 测试会话开始 ===")
    yield
    hardy_logger.info("=== 测试会话结束 ===")


@pytest.fixture(autouse=True)
def case_setup_teardown():
    hardy_logger.info("--- 测试用例开始 ---")
    yield
    hardy_logger.info("--- 测试用例结束 ---")


@pytest.fixture
def rng() -> np.random.Generator:
    """每个用例独立的固定种子生成器，xdist 下结果不依赖执行顺序"""
    return np.random.default_rng(20240607)


@pytest.fixture
def config() -> ConfigLoader:
    return ConfigLoader()


@pytest.fixture(scope="session")
def test_data_dir() -> str:
    return TEST_DATA_DIR


@pytest.fixture(scope="session")
def small_grid() -> DiskGrid:
    return disk_grid(6, 64, 0.995)


@pytest.fixture(scope="session")
def fine_grid() -> DiskGrid:
    """16 × 256 = 4096 个点，半径 0.995"""
    return disk_grid(16, 256, 0.995)


@pytest.fixture(scope="session")
def quadrature() -> QuadratureRule:
    return QuadratureRule(4096)
