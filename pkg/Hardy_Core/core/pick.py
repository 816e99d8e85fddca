"""
Pick 型矩阵 Q_g 的组装与可行性判定：H∞ 上的单核检验，C+BH∞ 上的核族扫描，
以及带相似常数 c 的缩放单核检验。
"""
import dataclasses
from dataclasses import dataclass, field
from enum import Enum
from typing import List, Optional, Tuple

import numpy as np
from loguru import logger

from Hardy_Core.core.exceptions import InconsistentData, InvalidProblem, KernelMismatch
from Hardy_Core.core.numerics import PSD_TOL, HermitianMatrix, hermitian_eigh, is_psd
from Hardy_Core.core.rkhs import (BlaschkeProduct, CyclicKernel, KernelSpec, ModelVector, SzegoKernel, as_disk_points,
                                  blaschke_eval, constant_projection, sample_model_sphere, szego_kernel, tm_basis)
from Hardy_Core.core.scheduler import SweepScheduler

__all__ = [
    "Verdict", "AlgebraSpec", "TangentialProblem", "PickMatrix", "FeasibilityReport", "pick_entries",
    "build_pick_matrix", "feasible_single", "feasible_family", "scaled_single_kernel_check",
    "check_duplicate_consistency",
]

DUPLICATE_TOL = 1e-14
RANGE_TOL = 1e-8
DEFAULT_SAMPLES = 512
REFINE_STEPS = 50

CONDITIONAL_NOTE = "conditional_on_similarity_bound"
PROPAGATION_NOTE = "similarity_bound_too_small"


class Verdict(str, Enum):
    FEASIBLE = "Feasible"
    INFEASIBLE = "Infeasible"
    UNDETERMINED = "Undetermined"


@dataclass(frozen=True, eq=False)
class AlgebraSpec:
    """FullHinf（blaschke 为空）或 C+BH∞"""
    blaschke: Optional[BlaschkeProduct] = None

    @classmethod
    def full_hinf(cls) -> "AlgebraSpec":
        return cls()

    @classmethod
    def c_plus_b(cls, blaschke: BlaschkeProduct) -> "AlgebraSpec":
        return cls(blaschke)

    @property
    def is_full(self) -> bool:
        return self.blaschke is None

    @property
    def variant(self) -> str:
        return "FullHinf" if self.is_full else "CplusB"

    def describe(self) -> str:
        return self.variant if self.is_full else f"CplusB({self.blaschke.describe()})"

    def canonical_kernel(self) -> KernelSpec:
        """FullHinf 取 Szegő 核；C+BH∞ 取以常函数投影为参数的循环核"""
        if self.is_full:
            return SzegoKernel()
        return CyclicKernel(self.blaschke, constant_projection(self.blaschke))

    def contains(self, other: "AlgebraSpec") -> bool:
        if self.is_full:
            return True
        return not other.is_full and self.blaschke.same_as(other.blaschke)


@dataclass(frozen=True, eq=False)
class TangentialProblem:
    points: np.ndarray
    directions: np.ndarray
    targets: np.ndarray
    alpha: float
    algebra: AlgebraSpec = field(default_factory=AlgebraSpec)

    def __post_init__(self):
        points = as_disk_points(self.points)
        directions = np.asarray(self.directions, dtype=complex)
        if directions.ndim == 1:
            directions = directions[:, None]
        targets = np.atleast_1d(np.asarray(self.targets, dtype=complex))
        n = points.size
        if n < 1:
            raise InvalidProblem("至少需要一个插值节点")
        if directions.shape[0] != n or directions.shape[1] < 1 or targets.size != n:
            raise InvalidProblem(f"节点数 {n}、方向 {directions.shape}、目标值 {targets.size} 不一致")
        if np.any(np.linalg.norm(directions, axis=1) == 0.0):
            raise InvalidProblem("方向向量 v_j 不能为零")
        alpha = float(self.alpha)
        if not alpha > 0.0:
            raise InvalidProblem(f"范数界 α 必须为正: {alpha}")
        object.__setattr__(self, "points", points)
        object.__setattr__(self, "directions", directions)
        object.__setattr__(self, "targets", targets)
        object.__setattr__(self, "alpha", alpha)

    @property
    def n(self) -> int:
        return self.points.size

    @property
    def m(self) -> int:
        return self.directions.shape[1]

    def with_alpha(self, alpha: float) -> "TangentialProblem":
        return dataclasses.replace(self, alpha=alpha)


@dataclass(frozen=True, eq=False)
class PickMatrix:
    matrix: HermitianMatrix
    kernel_tag: str


@dataclass(eq=False)
class FeasibilityReport:
    verdict: Verdict
    worst_min_eig: float
    worst_parameter: Optional[ModelVector] = None
    samples_tested: int = 1
    kernel_tag: str = ""
    guarantee_level: Optional[float] = None
    notes: List[str] = field(default_factory=list)

    @property
    def feasible(self) -> bool:
        return self.verdict is Verdict.FEASIBLE


def pick_entries(points: np.ndarray, directions: np.ndarray, targets: np.ndarray, alpha: float,
                 kernel: KernelSpec) -> np.ndarray:
    """
    [(α²⟨v_j,v_i⟩ − w_i·conj(w_j))·K(x_i,x_j)]，内积对第一个变量线性
    不校验数据，供 corona 与验证环节直接调用
    """
    v = np.asarray(directions, dtype=complex)
    w = np.asarray(targets, dtype=complex)
    gram_v = np.conj(v) @ v.T
    data = alpha ** 2 * gram_v - np.outer(w, np.conj(w))
    return data * kernel.gram(points)


def _check_kernel(p: TangentialProblem, kernel: KernelSpec) -> None:
    if p.algebra.is_full:
        if not isinstance(kernel, SzegoKernel):
            raise KernelMismatch(f"FullHinf 需要 Szegő 核，实际: {kernel.tag}")
    elif not (isinstance(kernel, CyclicKernel) and kernel.blaschke.same_as(p.algebra.blaschke)):
        raise KernelMismatch(f"{p.algebra.describe()} 需要同一 B 的循环核，实际: {kernel.tag}")


def check_duplicate_consistency(p: TangentialProblem) -> None:
    """重合节点上的 (v, w) 数据必须相容：w 位于该组 Gram 矩阵的值域内"""
    seen = np.zeros(p.n, dtype=bool)
    for i in range(p.n):
        if seen[i]:
            continue
        group = np.flatnonzero(np.abs(p.points - p.points[i]) <= DUPLICATE_TOL)
        seen[group] = True
        if group.size < 2:
            continue
        v = p.directions[group]
        w = p.targets[group]
        gram = np.conj(v) @ v.T
        coefficients, *_ = np.linalg.lstsq(gram, w, rcond=None)
        residual = float(np.linalg.norm(gram @ coefficients - w))
        if residual > RANGE_TOL * max(1.0, float(np.linalg.norm(w))):
            raise InconsistentData(f"节点 {p.points[i]} 处的重复数据相互矛盾，残差 {residual:.3e}")


def build_pick_matrix(p: TangentialProblem, kernel: KernelSpec) -> PickMatrix:
    _check_kernel(p, kernel)
    check_duplicate_consistency(p)
    entries = pick_entries(p.points, p.directions, p.targets, p.alpha, kernel)
    return PickMatrix(HermitianMatrix.symmetrized(entries), kernel.tag)


def feasible_single(p: TangentialProblem, kernel: KernelSpec, tol: float = PSD_TOL) -> FeasibilityReport:
    pick = build_pick_matrix(p, kernel)
    verdict = is_psd(pick.matrix, tol)
    logger.debug(f"单核检验 {pick.kernel_tag}: λ_min = {verdict.min_eig:.6e}")
    return FeasibilityReport(
        verdict=Verdict.FEASIBLE if verdict.psd else Verdict.INFEASIBLE,
        worst_min_eig=verdict.min_eig,
        samples_tested=1,
        kernel_tag=pick.kernel_tag,
    )


class _FamilyPick:
    """固定插值数据下 v ↦ Q_v 的快速求值与 λ_min 的梯度"""

    def __init__(self, p: TangentialProblem):
        blaschke = p.algebra.blaschke
        self.data = pick_entries(p.points, p.directions, p.targets, p.alpha, _UnitKernel())
        self.basis_values = tm_basis(blaschke).evaluate(p.points)
        bx = np.asarray(blaschke_eval(blaschke, p.points))
        self.tail = np.outer(bx, np.conj(bx)) * szego_kernel(p.points[:, None], p.points[None, :])

    def matrix(self, c: np.ndarray) -> np.ndarray:
        a = self.basis_values @ c
        q = self.data * (np.outer(a, np.conj(a)) + self.tail)
        return 0.5 * (q + q.conj().T)

    def min_pair(self, c: np.ndarray) -> Tuple[float, np.ndarray]:
        values, vectors = hermitian_eigh(self.matrix(c))
        return float(values[0]), vectors[:, 0]

    def min_eig(self, c: np.ndarray) -> float:
        return self.min_pair(c)[0]

    def gradient(self, c: np.ndarray, u: np.ndarray) -> np.ndarray:
        a = self.basis_values @ c
        y = np.conj(u) * a
        return 2.0 * self.basis_values.conj().T @ (u * (self.data.T @ y))


class _UnitKernel(KernelSpec):
    variant = "Unit"

    def __call__(self, z, w):
        return np.ones(np.broadcast(np.asarray(z), np.asarray(w)).shape, dtype=complex)


def _refine(family: _FamilyPick, start: np.ndarray, steps: int) -> Tuple[np.ndarray, float, int]:
    """球面上对 λ_min(Q_v) 的投影下降，失败时步长减半"""
    c = start / np.linalg.norm(start)
    lam, u = family.min_pair(c)
    step = 0.5
    evaluations = 0
    for _ in range(steps):
        grad = family.gradient(c, u)
        tangent = grad - np.real(np.vdot(c, grad)) * c
        size = float(np.linalg.norm(tangent))
        if size < 1e-14:
            break
        improved = False
        while step > 1e-10:
            trial = c - step * tangent / size
            trial = trial / np.linalg.norm(trial)
            lam_trial, u_trial = family.min_pair(trial)
            evaluations += 1
            if lam_trial < lam:
                c, lam, u = trial, lam_trial, u_trial
                step = min(1.0, 1.5 * step)
                improved = True
                break
            step *= 0.5
        if not improved:
            break
    return c, lam, evaluations


def feasible_family(p: TangentialProblem, samples: int = DEFAULT_SAMPLES, refine: bool = True,
                    tol: float = PSD_TOL, seed: int = 0, refine_steps: int = REFINE_STEPS,
                    scheduler: Optional[SweepScheduler] = None) -> FeasibilityReport:
    """
    C+BH∞ 的核族检验：在模型空间单位球面上扫描 v，取 λ_min(Q_v) 最小者，
    可选地从最坏样本出发做投影下降
    :param p: 插值问题，algebra 必须为 CplusB
    :param samples: 扫描的核个数（第 0 个固定为常函数投影）
    :param refine: 是否做局部下降
    :param tol: 半正定容差
    :param seed: 采样种子
    :return: FeasibilityReport，不可行时 worst_parameter 为见证向量
    """
    if p.algebra.is_full:
        raise KernelMismatch("FullHinf 请使用 feasible_single")
    if samples < 1:
        raise ValueError(f"采样数必须为正: {samples}")
    check_duplicate_consistency(p)
    blaschke = p.algebra.blaschke
    family = _FamilyPick(p)
    vectors = [constant_projection(blaschke)]
    if samples > 1:
        vectors += sample_model_sphere(blaschke, samples - 1, seed)

    scheduler = scheduler or SweepScheduler()
    eigenvalues = np.array(scheduler.map(lambda v: family.min_eig(v.coefficients), vectors))
    worst = int(np.argmin(eigenvalues))
    worst_c, worst_lam = vectors[worst].coefficients, float(eigenvalues[worst])
    logger.info(f"核族扫描 {len(vectors)} 个样本，最坏 λ_min = {worst_lam:.6e}（样本 {worst}）")

    tested = len(vectors)
    if refine:
        refined_c, refined_lam, evaluations = _refine(family, worst_c, refine_steps)
        tested += evaluations
        if refined_lam < worst_lam:
            worst_c, worst_lam = refined_c, refined_lam
            logger.debug(f"局部下降后 λ_min = {worst_lam:.6e}")

    return FeasibilityReport(
        verdict=Verdict.FEASIBLE if worst_lam >= -tol else Verdict.INFEASIBLE,
        worst_min_eig=worst_lam,
        worst_parameter=ModelVector(worst_c).normalized(),
        samples_tested=tested,
        kernel_tag=CyclicKernel(blaschke, ModelVector(worst_c).normalized()).tag,
    )


def scaled_single_kernel_check(p: TangentialProblem, c: float, tol: float = PSD_TOL, samples: int = 0,
                               seed: int = 0, scheduler: Optional[SweepScheduler] = None) -> FeasibilityReport:
    """
    相似常数 c 由调用方给出：用常函数投影对应的单个循环核检验，
    可行时记录保证水平 α·c。samples > 0 时再在 c·α 水平上扫描核族，
    核族条件在该水平仍不成立说明给定的 c 偏小。
    """
    if p.algebra.is_full:
        raise KernelMismatch("缩放单核检验只适用于 C+BH∞")
    if c < 1.0:
        raise ValueError(f"相似常数 c 必须 ≥ 1: {c}")
    report = feasible_single(p, p.algebra.canonical_kernel(), tol)
    if report.feasible:
        report.guarantee_level = p.alpha * c
        report.notes.append(CONDITIONAL_NOTE)
        if samples > 0:
            propagated = feasible_family(p.with_alpha(p.alpha * c), samples, refine=False, tol=tol, seed=seed,
                                         scheduler=scheduler)
            report.samples_tested += propagated.samples_tested
            if not propagated.feasible:
                logger.warning(f"c·α = {p.alpha * c:.6g} 水平上核族条件不成立，给定的 c 不足")
                report.notes.append(PROPAGATION_NOTE)
    return report
