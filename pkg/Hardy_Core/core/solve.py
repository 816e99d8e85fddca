"""
插值函数的构造：标量 H∞ 问题的 Schur 递推精确解、点分离引理给出的见证插值（不控制范数）、
基于约束 minimax 的近最优切向解，以及解对问题数据的验证。
"""
from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np
from loguru import logger
from numpy.polynomial import polynomial as P
from scipy import linalg

from Hardy_Core.core.exceptions import (DegenerateBoundaryData, DegreeTooSmall, DuplicateNodes, Infeasible,
                                        InvalidProblem, NoSolutionExists)
from Hardy_Core.core.numerics import (AffineConstraints, DiskGrid, HermitianMatrix, MAX_ROUNDS, BISECTION_STEPS,
                                      is_psd, minimax_affine)
from Hardy_Core.core.pick import AlgebraSpec, TangentialProblem, Verdict, feasible_single, pick_entries
from Hardy_Core.core.rkhs import SzegoKernel, as_disk_points, blaschke_eval

__all__ = [
    "AlgebraBasis", "AnalyticMap", "VectorAnalyticFunction", "SchurInterpolant", "SeparationPartition",
    "WitnessConstruction", "TangentialSolution", "VerificationReport", "schur_interpolate", "schur_minimal_norm",
    "separation_classes", "separating_idempotents", "witness_interpolant", "tangential_constraints",
    "tangential_solve", "verify_solution", "constraint_residuals",
]

SAME_POINT_TOL = 1e-14
SCHUR_PSD_TOL = 1e-10
BOUNDARY_TOL = 1e-10
IDEMPOTENT_TOL = 1e-9
RANGE_TOL = 1e-8


@dataclass(frozen=True, eq=False)
class AlgebraBasis:
    """FullHinf: z^0..z^d；C+BH∞: {1} ∪ {B·z^0..B·z^d}"""
    algebra: AlgebraSpec
    degree: int

    def __post_init__(self):
        if self.degree < 0:
            raise InvalidProblem(f"基的次数不能为负: {self.degree}")

    @property
    def size(self) -> int:
        return self.degree + 1 if self.algebra.is_full else self.degree + 2

    def evaluate(self, z) -> np.ndarray:
        zz = np.asarray(z, dtype=complex)
        powers = zz[..., None] ** np.arange(self.degree + 1)
        if self.algebra.is_full:
            return powers
        bz = np.asarray(blaschke_eval(self.algebra.blaschke, zz))
        return np.concatenate([np.ones(zz.shape + (1,), dtype=complex), bz[..., None] * powers], axis=-1)


class AnalyticMap(ABC):
    """m 分量解析函数的公共接口"""

    @property
    @abstractmethod
    def components(self) -> int:
        ...

    @abstractmethod
    def evaluate(self, z) -> np.ndarray:
        """返回形状 z.shape + (m,)"""

    def __call__(self, z) -> np.ndarray:
        return self.evaluate(z)

    def grid_norm(self, grid: DiskGrid) -> float:
        return float(np.max(np.linalg.norm(self.evaluate(grid.points), axis=-1)))


@dataclass(frozen=True, eq=False)
class VectorAnalyticFunction(AnalyticMap):
    basis: AlgebraBasis
    coefficients: np.ndarray

    def __post_init__(self):
        coefficients = np.atleast_2d(np.asarray(self.coefficients, dtype=complex))
        if coefficients.shape[1] != self.basis.size:
            raise InvalidProblem(f"系数列数 {coefficients.shape[1]} 与基大小 {self.basis.size} 不一致")
        object.__setattr__(self, "coefficients", coefficients)

    @property
    def components(self) -> int:
        return self.coefficients.shape[0]

    @property
    def algebra(self) -> AlgebraSpec:
        return self.basis.algebra

    def evaluate(self, z) -> np.ndarray:
        return self.basis.evaluate(z) @ self.coefficients.T

    def scaled(self, factor: complex) -> "VectorAnalyticFunction":
        return VectorAnalyticFunction(self.basis, factor * self.coefficients)

    @classmethod
    def constant(cls, vector, algebra: Optional[AlgebraSpec] = None) -> "VectorAnalyticFunction":
        basis = AlgebraBasis(algebra or AlgebraSpec.full_hinf(), 0)
        coefficients = np.zeros((np.size(vector), basis.size), dtype=complex)
        coefficients[:, 0] = np.ravel(vector)
        return cls(basis, coefficients)


@dataclass(frozen=True, eq=False)
class SchurInterpolant(AnalyticMap):
    """
    Schur 递推得到的标量有理函数 f = α·s，
    s = T_1 ∘ … ∘ T_k(terminal)，T_j(s) = (γ_j + b_j s)/(1 + conj(γ_j) b_j s)，b_j 为节点 a_j 的 Möbius 因子
    """
    alpha: float
    nodes: np.ndarray
    gammas: np.ndarray
    terminal: complex

    @property
    def components(self) -> int:
        return 1

    @property
    def degree(self) -> int:
        return len(self.nodes)

    def evaluate(self, z) -> np.ndarray:
        zz = np.asarray(z, dtype=complex)
        s = np.full(zz.shape, self.terminal, dtype=complex)
        for a, gamma in zip(self.nodes[::-1], self.gammas[::-1]):
            b = (zz - a) / (1.0 - np.conj(a) * zz)
            s = (gamma + b * s) / (1.0 + np.conj(gamma) * b * s)
        return (self.alpha * s)[..., None]

    def rational_coefficients(self) -> Tuple[np.ndarray, np.ndarray]:
        """分子、分母多项式系数（升幂）"""
        numerator = np.array([self.terminal], dtype=complex)
        denominator = np.array([1.0], dtype=complex)
        for a, gamma in zip(self.nodes[::-1], self.gammas[::-1]):
            left = np.array([1.0, -np.conj(a)], dtype=complex)
            right = np.array([-a, 1.0], dtype=complex)
            numerator, denominator = (
                P.polyadd(gamma * P.polymul(left, denominator), P.polymul(right, numerator)),
                P.polyadd(P.polymul(left, denominator), np.conj(gamma) * P.polymul(right, numerator)),
            )
        return self.alpha * numerator, denominator


def _reject_duplicates(x: np.ndarray) -> None:
    gaps = np.abs(x[:, None] - x[None, :]) + np.eye(x.size)
    if np.any(gaps < SAME_POINT_TOL):
        raise DuplicateNodes("Schur 递推要求节点两两不同")


def schur_interpolate(points, values, alpha: float, tol: float = SCHUR_PSD_TOL) -> SchurInterpolant:
    """
    Schur–Nevanlinna 递推：先按 α 归一化，逐点剥离 Möbius 因子，末端取常数
    :param points: 两两不同的圆盘内节点
    :param values: 目标值
    :param alpha: 范数界
    :param tol: Pick 矩阵的半正定容差
    :return: SchurInterpolant
    """
    x = as_disk_points(points)
    w = np.atleast_1d(np.asarray(values, dtype=complex))
    if w.size != x.size:
        raise InvalidProblem(f"节点数 {x.size} 与目标值个数 {w.size} 不一致")
    _reject_duplicates(x)
    problem = TangentialProblem(x, np.ones((x.size, 1)), w, alpha)
    report = feasible_single(problem, SzegoKernel(), tol)
    if report.verdict is not Verdict.FEASIBLE:
        raise Infeasible(f"Pick 矩阵不半正定，λ_min = {report.worst_min_eig:.6e}")

    nodes: List[complex] = []
    gammas: List[complex] = []
    current_x, current_u = x, w / problem.alpha
    while True:
        if current_x.size == 1:
            terminal = complex(current_u[0])
            if abs(terminal) > 1.0:
                terminal /= abs(terminal)
            break
        a, gamma = current_x[0], complex(current_u[0])
        if abs(gamma) >= 1.0 - BOUNDARY_TOL:
            if np.all(np.abs(current_u - gamma) <= 1e-8):
                terminal = gamma / abs(gamma)
                break
            raise DegenerateBoundaryData(f"节点 {a} 处 |w|/α = {abs(gamma):.12f} 位于边界，而其余数据不相同")
        rest_x, rest_u = current_x[1:], current_u[1:]
        b = (rest_x - a) / (1.0 - np.conj(a) * rest_x)
        current_u = (rest_u - gamma) / ((1.0 - np.conj(gamma) * rest_u) * b)
        current_x = rest_x
        nodes.append(a)
        gammas.append(gamma)
        logger.debug(f"Schur 递推: 节点 {a}, 参数 γ = {gamma}")

    f = SchurInterpolant(problem.alpha, np.array(nodes, dtype=complex), np.array(gammas, dtype=complex), terminal)
    residual = float(np.max(np.abs(f.evaluate(x)[:, 0] - w)))
    if residual > 1e-8:
        logger.warning(f"Schur 插值残差 {residual:.3e} 偏大")
    return f


def schur_minimal_norm(points, values, tol: float = 1e-10) -> float:
    """对 α 二分，求标量 Nevanlinna–Pick 问题的最小可行范数"""
    w = np.atleast_1d(np.asarray(values, dtype=complex))
    lo = float(np.max(np.abs(w)))
    if lo == 0.0:
        return 0.0

    def feasible(alpha: float) -> bool:
        try:
            schur_interpolate(points, w, alpha)
            return True
        except DegenerateBoundaryData:
            return True
        except Infeasible:
            return False

    hi = lo
    while not feasible(hi):
        lo, hi = hi, 2.0 * hi
    for _ in range(200):
        if hi - lo <= tol * max(1.0, hi):
            break
        mid = 0.5 * (lo + hi)
        if feasible(mid):
            hi = mid
        else:
            lo = mid
    return hi


@dataclass(frozen=True, eq=False)
class SeparationPartition:
    """按可分离性分组后的节点；boundaries 即 n_0=0 < n_1 < … < n_p"""
    points: np.ndarray
    order: np.ndarray
    boundaries: Tuple[int, ...]
    membership: np.ndarray

    @property
    def class_count(self) -> int:
        return len(self.boundaries) - 1

    def class_indices(self, k: int) -> np.ndarray:
        """第 k 类在原始节点列表中的下标"""
        return self.order[self.boundaries[k]:self.boundaries[k + 1]]


def separation_classes(algebra: AlgebraSpec, points) -> SeparationPartition:
    """
    x ~ y 当且仅当代数中的函数在两点取值相同。
    FullHinf 只合并重合点；C+BH∞ 另把 B 的全部零点并为一类。
    """
    x = as_disk_points(points)
    membership = np.full(x.size, -1, dtype=int)
    representatives: List[complex] = []
    zero_class: Optional[int] = None
    for i, z in enumerate(x):
        if not algebra.is_full and algebra.blaschke.has_zero_at(z):
            if zero_class is None:
                zero_class = len(representatives)
                representatives.append(z)
            membership[i] = zero_class
            continue
        for k, r in enumerate(representatives):
            if k != zero_class and abs(z - r) <= SAME_POINT_TOL:
                membership[i] = k
                break
        else:
            membership[i] = len(representatives)
            representatives.append(z)

    order = np.argsort(membership, kind="stable")
    counts = np.bincount(membership, minlength=len(representatives))
    boundaries = tuple(int(b) for b in np.concatenate([[0], np.cumsum(counts)]))
    return SeparationPartition(points=x[order], order=order, boundaries=boundaries, membership=membership)


def _minimal_degree(algebra: AlgebraSpec, partition: SeparationPartition, points: np.ndarray) -> int:
    if algebra.is_full:
        return max(partition.class_count - 1, 0)
    free = sum(1 for k in range(partition.class_count)
               if not algebra.blaschke.has_zero_at(points[partition.class_indices(k)[0]]))
    return max(free - 1, 0)


def separating_idempotents(algebra: AlgebraSpec, partition: SeparationPartition,
                           degree: int) -> List[VectorAnalyticFunction]:
    """e_k(x) = δ_{kl}（x ∈ X_l），取最小二乘意义下系数范数最小的解"""
    basis = AlgebraBasis(algebra, degree)
    x = np.empty_like(partition.points)
    x[partition.order] = partition.points
    values = basis.evaluate(x)
    targets = np.zeros((x.size, partition.class_count), dtype=complex)
    targets[np.arange(x.size), partition.membership] = 1.0
    coefficients, *_ = linalg.lstsq(values, targets)
    residual = float(np.max(np.abs(values @ coefficients - targets)))
    if residual > IDEMPOTENT_TOL:
        raise DegreeTooSmall(f"次数 {degree} 下无法分离 {partition.class_count} 个类，残差 {residual:.3e}")
    return [VectorAnalyticFunction(basis, coefficients[:, k][None, :]) for k in range(partition.class_count)]


@dataclass(frozen=True, eq=False)
class WitnessConstruction:
    idempotents: List[VectorAnalyticFunction]
    class_vectors: np.ndarray
    function: VectorAnalyticFunction
    partition: SeparationPartition


def witness_interpolant(p: TangentialProblem, degree: Optional[int] = None) -> WitnessConstruction:
    """
    F = Σ_k e_k ⊗ ξ_k，每类的 ξ_k = Σ α_j v_j 由类 Gram 矩阵 P 的值域条件解出；不保证范数
    :param p: 插值问题
    :param degree: 基的次数，None 表示分离所需的最小次数
    """
    partition = separation_classes(p.algebra, p.points)
    if degree is None:
        degree = _minimal_degree(p.algebra, partition, p.points)
    idempotents = separating_idempotents(p.algebra, partition, degree)

    class_vectors = np.zeros((partition.class_count, p.m), dtype=complex)
    for k in range(partition.class_count):
        idx = partition.class_indices(k)
        v, w = p.directions[idx], p.targets[idx]
        gram = np.conj(v) @ v.T
        weights, *_ = linalg.lstsq(gram, w)
        residual = float(np.linalg.norm(gram @ weights - w))
        if residual > RANGE_TOL * max(1.0, float(np.linalg.norm(w))):
            raise NoSolutionExists(f"第 {k} 类的目标向量不在 Gram 矩阵值域内，残差 {residual:.3e}")
        class_vectors[k] = v.T @ weights

    basis = idempotents[0].basis
    stacked = np.vstack([e.coefficients for e in idempotents])
    function = VectorAnalyticFunction(basis, class_vectors.T @ stacked)
    residual = float(np.max(constraint_residuals(function, p)))
    if residual > RANGE_TOL:
        logger.warning(f"见证插值残差 {residual:.3e} 偏大")
    return WitnessConstruction(idempotents, class_vectors, function, partition)


def constraint_residuals(f: AnalyticMap, p: TangentialProblem) -> np.ndarray:
    """|Σ_k F_k(x_j)·conj(v_{j,k}) − w_j|"""
    values = f.evaluate(p.points)
    return np.abs(np.sum(values * np.conj(p.directions), axis=1) - p.targets)


def tangential_constraints(p: TangentialProblem, basis: AlgebraBasis) -> AffineConstraints:
    values = basis.evaluate(p.points)
    matrix = (np.conj(p.directions)[:, :, None] * values[:, None, :]).reshape(p.n, p.m * basis.size)
    return AffineConstraints(matrix, p.targets.copy())


@dataclass(frozen=True, eq=False)
class TangentialSolution:
    function: VectorAnalyticFunction
    grid_norm: float
    constraint_residual: float
    degree: int
    level: float
    within_level: bool
    iterations: int
    lower_bound: float


def tangential_solve(p: TangentialProblem, degree: int, grid: DiskGrid, level: Optional[float] = None,
                     tol: float = 1e-6, max_rounds: int = MAX_ROUNDS,
                     bisection_steps: int = BISECTION_STEPS) -> TangentialSolution:
    """
    在次数为 degree 的代数基上，约束 minimax 求网格范数近最优的切向解；
    调用方用 within_level 比较所得范数与 level（α 或 α·c）
    """
    witness_interpolant(p)
    basis = AlgebraBasis(p.algebra, degree)
    values = basis.evaluate(grid.points)
    solution = minimax_affine([values] * p.m, tangential_constraints(p, basis), grid, tol,
                              max_rounds=max_rounds, bisection_steps=bisection_steps)
    function = VectorAnalyticFunction(basis, solution.coefficients)
    residual = float(np.max(constraint_residuals(function, p)))
    target = p.alpha if level is None else level
    logger.info(f"切向求解 degree={degree}: 网格范数 {solution.achieved_level:.8f}，约束残差 {residual:.2e}")
    return TangentialSolution(
        function=function,
        grid_norm=solution.achieved_level,
        constraint_residual=residual,
        degree=degree,
        level=target,
        within_level=solution.achieved_level <= target * (1.0 + 1e-6),
        iterations=solution.iterations,
        lower_bound=solution.lower_bound,
    )


@dataclass(frozen=True, eq=False)
class VerificationReport:
    residuals: np.ndarray
    max_residual: float
    grid_norm: float
    pick_min_eig: float
    pick_psd: bool


def verify_solution(f: AnalyticMap, p: TangentialProblem, grid: DiskGrid, tol: float = 1e-6) -> VerificationReport:
    """插值残差、网格上确界，以及 α = 网格范数时 Pick 矩阵的半正定性（必要性复核）"""
    residuals = constraint_residuals(f, p)
    grid_norm = f.grid_norm(grid)
    entries = pick_entries(p.points, p.directions, p.targets, grid_norm, p.algebra.canonical_kernel())
    verdict = is_psd(HermitianMatrix.symmetrized(entries), tol)
    return VerificationReport(
        residuals=residuals,
        max_residual=float(np.max(residuals)),
        grid_norm=grid_norm,
        pick_min_eig=verdict.min_eig,
        pick_psd=verdict.psd,
    )
