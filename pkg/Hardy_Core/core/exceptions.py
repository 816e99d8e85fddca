from typing import Any, Optional


class HardyError(Exception):
    """所有求解器异常的基类"""


# 输入校验类错误，同时是 ValueError，命令行统一映射为退出码 2
class InvalidMatrix(HardyError, ValueError):
    pass


class InvalidRadius(HardyError, ValueError):
    pass


class InvalidProblem(HardyError, ValueError):
    pass


class OutsideDisk(HardyError, ValueError):
    pass


class NotNormalized(HardyError, ValueError):
    pass


class KernelMismatch(HardyError, ValueError):
    pass


class DuplicateNodes(HardyError, ValueError):
    pass


class InconsistentData(HardyError, ValueError):
    pass


class NotLogIntegrable(HardyError, ValueError):
    pass


class InvalidTruncation(HardyError, ValueError):
    pass


class ProblemFileError(HardyError, ValueError):
    """问题文件解析失败，position 为 "行:列" 形式的位置"""

    def __init__(self, message: str, position: Optional[str] = None):
        self.position = position
        super().__init__(f"{position}: {message}" if position else message)


# 数学上的否定结论，命令行映射为退出码 1
class InfeasibleConstraints(HardyError):
    pass


class Infeasible(HardyError):
    pass


class NoSolutionExists(HardyError):
    pass


class DegreeTooSmall(HardyError):
    pass


class DegenerateBoundaryData(HardyError):
    pass


class HypothesisInsufficientAtScale(HardyError):
    """有限节点集上的 corona 假设不足，report 为失败时的证书"""

    def __init__(self, message: str, report: Any = None):
        self.report = report
        super().__init__(message)


class NotConverged(HardyError):
    """迭代上限内未收敛，best 为目前最好的结果"""

    def __init__(self, message: str, best: Any = None):
        self.best = best
        super().__init__(message)
