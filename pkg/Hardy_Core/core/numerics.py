"""
数值内核：Hermitian 特征分析、半正定判定、单位圆求积、圆盘网格，
以及带仿射约束的 minimax 求解器。
"""
import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence, Tuple, Union

import numpy as np
from loguru import logger
from scipy import linalg

from Hardy_Core.core.exceptions import InfeasibleConstraints, InvalidMatrix, InvalidRadius, NotConverged

__all__ = [
    "HermitianMatrix", "PsdVerdict", "QuadratureRule", "DiskGrid", "AffineConstraints", "MinimaxSolution",
    "hermitian_eigh", "hermitian_min_eig", "is_psd", "circle_integral", "disk_grid", "minimax_affine",
    "PSD_TOL",
]

HERMITIAN_TOL = 1e-12
PSD_TOL = 1e-8
MAX_ROUNDS = 10000
BISECTION_STEPS = 60
MAX_SWEEPS = 100


@dataclass(frozen=True, eq=False)
class HermitianMatrix:
    entries: np.ndarray

    def __post_init__(self):
        a = np.array(self.entries, dtype=complex)
        if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] < 1:
            raise InvalidMatrix(f"需要非空方阵，实际形状: {a.shape}")
        if not np.all(np.isfinite(a)):
            raise InvalidMatrix("矩阵含有非有限元素")
        scale = max(1.0, float(np.max(np.abs(a))))
        skew = float(np.max(np.abs(a - a.conj().T)))
        if skew > HERMITIAN_TOL * scale:
            raise InvalidMatrix(f"矩阵不是 Hermitian 的，偏差 {skew:.3e}")
        object.__setattr__(self, "entries", a)

    @property
    def order(self) -> int:
        return self.entries.shape[0]

    @classmethod
    def symmetrized(cls, entries: np.ndarray) -> "HermitianMatrix":
        a = np.asarray(entries, dtype=complex)
        return cls(0.5 * (a + a.conj().T))


@dataclass(frozen=True)
class PsdVerdict:
    psd: bool
    min_eig: float

    def __bool__(self) -> bool:
        return self.psd


def _as_hermitian(m: Union[HermitianMatrix, np.ndarray]) -> HermitianMatrix:
    return m if isinstance(m, HermitianMatrix) else HermitianMatrix(m)


def _jacobi(a: np.ndarray, want_vectors: bool) -> Tuple[np.ndarray, Optional[np.ndarray]]:
    """
    循环 Jacobi 旋转。每次旋转先用对角相位把 a[p,q] 变成实数，再做实对称旋转。
    :param a: Hermitian 矩阵（会被复制）
    :param want_vectors: 是否累积特征向量
    :return: (未排序的特征值, 特征向量矩阵或 None)
    """
    a = a.copy()
    n = a.shape[0]
    v = np.eye(n, dtype=complex) if want_vectors else None
    scale = float(np.linalg.norm(a))
    if n == 1 or scale == 0.0:
        return np.real(np.diag(a)).copy(), v

    for sweep in range(MAX_SWEEPS):
        off = float(np.linalg.norm(np.triu(a, 1)))
        if off <= 1e-15 * scale:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                mag = abs(apq)
                if mag < 1e-300:
                    continue
                theta = 0.5 * math.atan2(2.0 * mag, a[q, q].real - a[p, p].real)
                c, s = math.cos(theta), math.sin(theta)
                phase = np.conj(apq / mag)
                rot = np.array([[c, s], [-s * phase, c * phase]], dtype=complex)
                idx = [p, q]
                a[:, idx] = a[:, idx] @ rot
                a[idx, :] = rot.conj().T @ a[idx, :]
                a[p, q] = a[q, p] = 0.0
                if v is not None:
                    v[:, idx] = v[:, idx] @ rot
    else:
        logger.warning(f"Jacobi 在 {MAX_SWEEPS} 轮扫描后仍未完全对角化")
    return np.real(np.diag(a)).copy(), v


def hermitian_eigh(m: Union[HermitianMatrix, np.ndarray]) -> Tuple[np.ndarray, np.ndarray]:
    """
    Hermitian 矩阵的全部特征对，特征值升序
    :return: (特征值, 以列存放的特征向量)
    """
    h = _as_hermitian(m)
    values, vectors = _jacobi(h.entries, want_vectors=True)
    order = np.argsort(values, kind="stable")
    return values[order], vectors[:, order]


def hermitian_min_eig(m: Union[HermitianMatrix, np.ndarray]) -> float:
    h = _as_hermitian(m)
    values, _ = _jacobi(h.entries, want_vectors=False)
    return float(np.min(values))


def is_psd(m: Union[HermitianMatrix, np.ndarray], tol: float = PSD_TOL) -> PsdVerdict:
    if tol < 0:
        raise ValueError(f"容差必须非负: {tol}")
    lam = hermitian_min_eig(m)
    return PsdVerdict(psd=lam >= -tol, min_eig=lam)


@dataclass(frozen=True, eq=False)
class QuadratureRule:
    """单位圆上的等距求积：节点 2πk/N，权重 1/N"""
    node_count: int

    def __post_init__(self):
        n = self.node_count
        if n < 1 or (n & (n - 1)) != 0:
            raise ValueError(f"节点数必须是 2 的幂: {n}")

    @property
    def nodes(self) -> np.ndarray:
        return 2.0 * np.pi * np.arange(self.node_count) / self.node_count

    @property
    def weights(self) -> np.ndarray:
        return np.full(self.node_count, 1.0 / self.node_count)

    @property
    def boundary_points(self) -> np.ndarray:
        return np.exp(1j * self.nodes)


def circle_integral(f: Callable[[np.ndarray], np.ndarray], rule: QuadratureRule) -> complex:
    values = np.asarray(f(rule.boundary_points), dtype=complex)
    return complex(np.sum(values * rule.weights))


@dataclass(frozen=True, eq=False)
class DiskGrid:
    radial_count: int
    angular_count: int
    max_radius: float
    points: np.ndarray

    @property
    def size(self) -> int:
        return int(self.points.size)


def disk_grid(radial: int, angular: int, max_radius: float) -> DiskGrid:
    """
    半径按 Chebyshev 方式向外圈加密（最外圈恰为 max_radius），角度均匀
    :param radial: 半径层数
    :param angular: 每层角度数
    :param max_radius: 最大半径，取值 (0,1)
    """
    if not 0.0 < max_radius < 1.0:
        raise InvalidRadius(f"网格半径必须位于 (0,1): {max_radius}")
    if radial < 1 or angular < 1:
        raise ValueError(f"网格层数与角度数必须为正: {radial}, {angular}")
    radii = max_radius * np.sin(0.5 * np.pi * np.arange(1, radial + 1) / radial)
    angles = 2.0 * np.pi * np.arange(angular) / angular
    points = (radii[:, None] * np.exp(1j * angles)[None, :]).ravel()
    return DiskGrid(radial_count=radial, angular_count=angular, max_radius=max_radius, points=points)


@dataclass(frozen=True, eq=False)
class AffineConstraints:
    """系数向量 vec(c)（按分量优先展开）上的线性约束 L·vec(c) = rhs"""
    matrix: np.ndarray
    rhs: np.ndarray

    @classmethod
    def empty(cls, unknowns: int) -> "AffineConstraints":
        return cls(np.zeros((0, unknowns), dtype=complex), np.zeros(0, dtype=complex))


@dataclass(frozen=True, eq=False)
class MinimaxSolution:
    coefficients: np.ndarray
    achieved_level: float
    iterations: int
    converged: bool
    lower_bound: float = 0.0


def _row_levels(values: np.ndarray, components: int) -> np.ndarray:
    return np.linalg.norm(values.reshape(-1, components), axis=1)


def _clip_rows(values: np.ndarray, components: int, t: float) -> np.ndarray:
    rows = values.reshape(-1, components)
    norms = np.linalg.norm(rows, axis=1)
    factor = np.ones_like(norms)
    big = norms > t
    factor[big] = t / norms[big]
    return (rows * factor[:, None]).ravel()


def _stack_blocks(basis_eval) -> np.ndarray:
    if isinstance(basis_eval, np.ndarray) and basis_eval.ndim == 2:
        return basis_eval[None, :, :].astype(complex)
    blocks = np.stack([np.asarray(b, dtype=complex) for b in basis_eval])
    if blocks.ndim != 3:
        raise ValueError(f"basis_eval 必须是每分量一个 网格×基 矩阵，实际形状: {blocks.shape}")
    return blocks


def minimax_affine(basis_eval: Union[np.ndarray, Sequence[np.ndarray]], constraints: AffineConstraints,
                   grid: DiskGrid, tol: float = 1e-6, max_rounds: int = MAX_ROUNDS,
                   bisection_steps: int = BISECTION_STEPS) -> MinimaxSolution:
    """
    在仿射约束下最小化网格上向量范数的最大值。
    对水平 t 二分，每个水平用仿射集与逐点范数球乘积之间的交替投影判定可行性。
    :param basis_eval: 每个分量一个 (网格点数 × 基大小) 的取值矩阵
    :param constraints: 系数上的仿射约束
    :param grid: 取值所在的网格
    :param tol: 相对网格最优值的精度
    :return: MinimaxSolution
    """
    blocks = _stack_blocks(basis_eval)
    m, g, b = blocks.shape
    if g != grid.size:
        raise ValueError(f"basis_eval 行数 {g} 与网格点数 {grid.size} 不一致")

    mat = np.asarray(constraints.matrix, dtype=complex).reshape(-1, m * b)
    rhs = np.asarray(constraints.rhs, dtype=complex).ravel()
    if mat.shape[0]:
        c0, *_ = linalg.lstsq(mat, rhs)
        residual = float(np.linalg.norm(mat @ c0 - rhs))
        if residual > 1e-8 * max(1.0, float(np.linalg.norm(rhs))):
            raise InfeasibleConstraints(f"约束方程不相容，最小二乘残差 {residual:.3e}")
        null = linalg.null_space(mat)
    else:
        c0 = np.zeros(m * b, dtype=complex)
        null = np.eye(m * b, dtype=complex)

    def evaluate(cvec: np.ndarray) -> np.ndarray:
        return np.einsum("kgj,kj->gk", blocks, cvec.reshape(m, b)).ravel()

    def level(values: np.ndarray) -> float:
        return float(np.max(_row_levels(values, m)))

    y0 = evaluate(c0)
    if null.shape[1] == 0:
        logger.debug("约束唯一确定系数，无需优化")
        return MinimaxSolution(c0.reshape(m, b), level(y0), 0, True, level(y0))

    image = np.einsum("kgj,kjn->gkn", blocks, null.reshape(m, b, -1)).reshape(g * m, -1)
    u, s, vh = linalg.svd(image, full_matrices=False)
    rank = int(np.sum(s > s[0] * 1e-12)) if s.size and s[0] > 0 else 0
    if rank == 0:
        return MinimaxSolution(c0.reshape(m, b), level(y0), 0, True, level(y0))
    q = u[:, :rank]

    def project(z: np.ndarray) -> np.ndarray:
        return y0 + q @ (q.conj().T @ (z - y0))

    best = project(np.zeros_like(y0))
    hi = level(best)
    lo = float(np.sqrt(np.mean(_row_levels(best, m) ** 2)))
    slack = 0.25 * tol
    rounds_total = 0

    for step in range(bisection_steps):
        if hi - lo <= tol:
            break
        t = 0.5 * (lo + hi)
        found, rounds = _level_feasible(best, t, slack, project, level, m, max_rounds)
        rounds_total += rounds
        if found is not None:
            best = found
            hi = level(found)
        else:
            lo = t
        logger.debug(f"minimax 二分第 {step + 1} 步: [{lo:.10f}, {hi:.10f}], 投影轮数 {rounds}")

    coef_null = vh[:rank].conj().T @ ((q.conj().T @ (best - y0)) / s[:rank])
    cvec = c0 + null @ coef_null
    achieved = level(evaluate(cvec))
    converged = hi - lo <= tol
    solution = MinimaxSolution(cvec.reshape(m, b), achieved, rounds_total, converged, lo)
    if not converged:
        raise NotConverged(f"{bisection_steps} 步二分后区间宽度 {hi - lo:.3e} 仍大于 {tol:.1e}", best=solution)
    return solution


def _level_feasible(start: np.ndarray, t: float, slack: float, project, level, components: int,
                    max_rounds: int) -> Tuple[Optional[np.ndarray], int]:
    """交替投影判定水平 t 是否可达；间隙停滞视为不可达"""
    y = start
    reference = None
    for k in range(1, max_rounds + 1):
        z = _clip_rows(y, components, t)
        y = project(z)
        if level(y) <= t + slack:
            return y, k
        if k % 100 == 0:
            gap = float(np.linalg.norm(z - y))
            if reference is not None and gap > 0.999 * reference:
                return None, k
            reference = gap
    return None, max_rounds
