"""
Toeplitz corona：在点集与核族上检验 [(⟨F(x_j)*,F(x_i)*⟩ − δ²)K(x_i,x_j)] ≥ 0，
并把 FG = 1 的求解化为 v_j = F(x_j)*、w_j = δ、α = 1 的切向插值问题。
"""
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np
from loguru import logger

from Hardy_Core.core.exceptions import (HypothesisInsufficientAtScale, InfeasibleConstraints, InvalidProblem,
                                        NoSolutionExists)
from Hardy_Core.core.numerics import BISECTION_STEPS, MAX_ROUNDS, PSD_TOL, DiskGrid, hermitian_min_eig
from Hardy_Core.core.pick import AlgebraSpec, TangentialProblem, Verdict, pick_entries
from Hardy_Core.core.rkhs import CyclicKernel, KernelSpec, SzegoKernel, as_disk_points, sample_model_sphere
from Hardy_Core.core.scheduler import SweepScheduler
from Hardy_Core.core.solve import VectorAnalyticFunction, tangential_solve

__all__ = ["CoronaProblem", "CoronaReport", "corona_check", "corona_solve", "corona_delta_from_grid",
           "corona_kernels"]


@dataclass(frozen=True, eq=False)
class CoronaProblem:
    F: VectorAnalyticFunction
    delta: float
    algebra: AlgebraSpec = field(default_factory=AlgebraSpec)

    def __post_init__(self):
        delta = float(self.delta)
        if not delta > 0.0:
            raise InvalidProblem(f"δ 必须为正: {delta}")
        if not self.algebra.contains(self.F.algebra):
            raise InvalidProblem(f"F 的分量不在 {self.algebra.describe()} 中")
        object.__setattr__(self, "delta", delta)

    def scaled(self, factor: float) -> "CoronaProblem":
        return CoronaProblem(self.F.scaled(factor), self.delta * factor, self.algebra)


@dataclass(eq=False)
class CoronaReport:
    verdict: Verdict
    worst_point_set: Optional[int] = None
    worst_points: Optional[np.ndarray] = None
    worst_kernel: str = ""
    worst_min_eig: float = float("inf")
    sets_tested: int = 0
    kernels_tested: int = 0
    node_residual: Optional[float] = None
    grid_residual: Optional[float] = None
    g_norm: Optional[float] = None
    slack: Optional[float] = None

    @property
    def passed(self) -> bool:
        return self.verdict is Verdict.FEASIBLE


def corona_kernels(algebra: AlgebraSpec, samples: int, seed: int) -> List[KernelSpec]:
    """FullHinf 只有 Szegő 核；C+BH∞ 取常函数投影的循环核加上球面采样"""
    if algebra.is_full:
        return [SzegoKernel()]
    kernels: List[KernelSpec] = [algebra.canonical_kernel()]
    if samples > 0:
        kernels += [CyclicKernel(algebra.blaschke, v) for v in sample_model_sphere(algebra.blaschke, samples, seed)]
    return kernels


def _set_min_eig(cp: CoronaProblem, points: np.ndarray, kernel: KernelSpec) -> float:
    directions = np.conj(cp.F.evaluate(points))
    entries = pick_entries(points, directions, np.full(points.size, cp.delta, dtype=complex), 1.0, kernel)
    return hermitian_min_eig(0.5 * (entries + entries.conj().T))


def corona_check(cp: CoronaProblem, point_sets: Sequence, samples: int = 0, tol: float = PSD_TOL, seed: int = 0,
                 scheduler: Optional[SweepScheduler] = None) -> CoronaReport:
    """
    逐个点集、逐个核检验 corona 假设，遇到第一个反例即返回
    :param cp: corona 问题
    :param point_sets: 非空点集的列表
    :param samples: C+BH∞ 下额外采样的核参数个数
    :param tol: 半正定容差
    :param seed: 采样种子
    :return: CoronaReport
    """
    sets = [as_disk_points(s) for s in point_sets]
    if not sets or any(s.size == 0 for s in sets):
        raise InvalidProblem("点集列表与每个点集都不能为空")
    kernels = corona_kernels(cp.algebra, samples, seed)
    scheduler = scheduler or SweepScheduler(1)
    report = CoronaReport(verdict=Verdict.FEASIBLE)

    for index, points in enumerate(sets):
        eigs = scheduler.map(lambda kernel: _set_min_eig(cp, points, kernel), kernels)
        report.sets_tested += 1
        report.kernels_tested += len(kernels)
        worst = int(np.argmin(eigs))
        if eigs[worst] < report.worst_min_eig:
            report.worst_min_eig = float(eigs[worst])
            report.worst_point_set, report.worst_points = index, points
            report.worst_kernel = kernels[worst].tag
        failed = [k for k, lam in enumerate(eigs) if lam < -tol]
        if failed:
            first = failed[0]
            report.verdict = Verdict.INFEASIBLE
            report.worst_min_eig = float(eigs[first])
            report.worst_point_set, report.worst_points = index, points
            report.worst_kernel = kernels[first].tag
            logger.info(f"corona 假设在第 {index} 个点集、核 {report.worst_kernel} 上不成立，"
                        f"λ_min = {report.worst_min_eig:.6e}")
            return report
    logger.info(f"corona 假设通过 {report.sets_tested} 个点集 × {len(kernels)} 个核，"
                f"最小特征值 {report.worst_min_eig:.6e}")
    return report


def _identity_residual(F: VectorAnalyticFunction, G: VectorAnalyticFunction, z) -> float:
    product = np.sum(F.evaluate(z) * G.evaluate(z), axis=-1)
    return float(np.max(np.abs(product - 1.0)))


def corona_solve(cp: CoronaProblem, node_set, degree: int, grid: DiskGrid, samples: int = 0,
                 tol: float = 1e-6, psd_tol: float = PSD_TOL, seed: int = 0, max_rounds: int = MAX_ROUNDS,
                 bisection_steps: int = BISECTION_STEPS) -> Tuple[VectorAnalyticFunction, CoronaReport]:
    """
    在节点集上求 G_Y，使 F(x_j)G_Y(x_j) = δ 且网格范数近最优，返回 G = G_Y/δ。
    节点外的恒等式残差只在网格上报告，不作保证。
    """
    nodes = as_disk_points(node_set)
    report = corona_check(cp, [nodes], samples, psd_tol, seed)
    if not report.passed:
        raise HypothesisInsufficientAtScale(
            f"节点集上的 corona 假设不成立，λ_min = {report.worst_min_eig:.6e}", report=report)

    problem = TangentialProblem(nodes, np.conj(cp.F.evaluate(nodes)), np.full(nodes.size, cp.delta), 1.0,
                                cp.algebra)
    try:
        solution = tangential_solve(problem, degree, grid, level=1.0, tol=tol, max_rounds=max_rounds,
                                    bisection_steps=bisection_steps)
    except (NoSolutionExists, InfeasibleConstraints) as exc:
        report.verdict = Verdict.INFEASIBLE
        raise HypothesisInsufficientAtScale(f"切向插值步骤失败: {exc}", report=report) from exc

    G = solution.function.scaled(1.0 / cp.delta)
    report.node_residual = _identity_residual(cp.F, G, nodes)
    report.grid_residual = _identity_residual(cp.F, G, grid.points)
    report.g_norm = G.grid_norm(grid)
    report.slack = report.g_norm * cp.delta - 1.0
    logger.info(f"corona 解: 节点残差 {report.node_residual:.2e}，网格残差 {report.grid_residual:.2e}，"
                f"‖G‖ = {report.g_norm:.8f}（δ⁻¹ = {1.0 / cp.delta:.8f}）")
    return G, report


def corona_delta_from_grid(F: VectorAnalyticFunction, grid: DiskGrid) -> float:
    """网格上 ‖F(z)‖ 的最小值，仅在显式请求时作为 δ 使用"""
    return float(np.min(np.linalg.norm(F.evaluate(grid.points), axis=-1)))
