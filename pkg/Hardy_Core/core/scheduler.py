import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, List, Optional, TypeVar

from dotenv import load_dotenv
from loguru import logger

T = TypeVar("T")
R = TypeVar("R")

THREADS_ENV = "HARDY_INTERP_THREADS"
DEFAULT_WORKERS = 4


def worker_cap(configured: Optional[int] = None) -> int:
    """
    计算实际工作线程数：配置值受环境变量 HARDY_INTERP_THREADS 限制
    :param configured: 配置中的 parallel.max_workers
    :return: 至少为 1 的线程数
    """
    load_dotenv()
    workers = configured or DEFAULT_WORKERS
    raw = os.environ.get(THREADS_ENV)
    if raw:
        try:
            workers = min(workers, int(raw))
        except ValueError:
            logger.warning(f"环境变量 {THREADS_ENV} 不是整数: {raw}，忽略")
    return max(1, workers)


class SweepScheduler:
    """按下标顺序归约的并行扫描：结果顺序与输入顺序一致，与线程数无关"""

    def __init__(self, max_workers: Optional[int] = None):
        self.max_workers = worker_cap(max_workers)

    def map(self, fn: Callable[[T], R], items: Iterable[T]) -> List[R]:
        tasks = list(items)
        if self.max_workers == 1 or len(tasks) <= 1:
            return [fn(item) for item in tasks]
        logger.debug(f"并行扫描 {len(tasks)} 项，线程数 {self.max_workers}")
        with ThreadPoolExecutor(max_workers=self.max_workers) as pool:
            return list(pool.map(fn, tasks))
