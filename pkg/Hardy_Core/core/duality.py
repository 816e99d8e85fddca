"""
有限截断下的距离公式：d(A,S) = inf ‖A + S‖ 与 sup |⟨(A⊗I)h₁, h₂⟩| 的数值对照，
以及把 M_F⊗I 化为 M_F 的酉约化检查。
"""
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np
from loguru import logger
from numpy.polynomial import polynomial as P
from scipy import linalg, optimize
from scipy.special import logsumexp, softmax

from Hardy_Core.core.exceptions import InvalidProblem, InvalidTruncation
from Hardy_Core.core.numerics import QuadratureRule
from Hardy_Core.core.rkhs import outer_from_modulus
from Hardy_Core.core.scheduler import SweepScheduler
from Hardy_Core.core.solve import AnalyticMap

__all__ = ["TruncatedDistanceProblem", "DistanceReport", "IsometryReport", "distance_primal", "distance_dual",
           "distance_report", "reduction_isometry"]

INDEPENDENCE_TOL = 1e-10
SMOOTHING_LEVELS = (1e-2, 1e-3, 1e-4, 1e-5, 1e-6, 1e-7, 1e-8, 1e-9)
DEFAULT_STARTS = 64
DEFAULT_STEPS = 500
POLISH_SWEEPS = 20


@dataclass(frozen=True, eq=False)
class TruncatedDistanceProblem:
    """A 为 n₂×n₁ 矩阵，S 由线性无关的 n₂×n₁ 矩阵张成，ℓ² 因子截断为 ℂ^r"""
    target: np.ndarray
    subspace: Tuple[np.ndarray, ...] = ()
    r: Optional[int] = None

    def __post_init__(self):
        target = np.atleast_2d(np.asarray(self.target, dtype=complex))
        if target.ndim != 2 or not np.all(np.isfinite(target)):
            raise InvalidProblem(f"目标算子必须是有限的二维矩阵，实际形状: {target.shape}")
        basis = tuple(np.atleast_2d(np.asarray(s, dtype=complex)) for s in self.subspace)
        for s in basis:
            if s.shape != target.shape:
                raise InvalidProblem(f"子空间基矩阵形状 {s.shape} 与目标 {target.shape} 不一致")
        if basis:
            vecs = np.stack([s.ravel() for s in basis])
            gram = np.conj(vecs) @ vecs.T
            scale = float(np.max(np.real(np.diag(gram))))
            if scale == 0.0 or float(np.min(linalg.eigvalsh(gram))) <= INDEPENDENCE_TOL * scale:
                raise InvalidProblem("子空间基矩阵线性相关")
        r = target.shape[1] if self.r is None else int(self.r)
        if r < target.shape[1]:
            raise InvalidTruncation(f"截断 r = {r} 小于 n₁ = {target.shape[1]}")
        object.__setattr__(self, "target", target)
        object.__setattr__(self, "subspace", basis)
        object.__setattr__(self, "r", r)

    @property
    def n1(self) -> int:
        return self.target.shape[1]

    @property
    def n2(self) -> int:
        return self.target.shape[0]

    @property
    def dim(self) -> int:
        return len(self.subspace)

    def combination(self, coefficients: np.ndarray) -> np.ndarray:
        """A + Σ c_k S_k"""
        out = self.target.copy()
        for c, s in zip(coefficients, self.subspace):
            out = out + c * s
        return out


def _to_complex(x: np.ndarray) -> np.ndarray:
    k = x.size // 2
    return x[:k] + 1j * x[k:]


def _smoothed(p: TruncatedDistanceProblem, mu: float):
    """μ·logsumexp(σ/μ) 及其对 (Re c, Im c) 的梯度"""
    def fun(x: np.ndarray) -> Tuple[float, np.ndarray]:
        u, sigma, vh = linalg.svd(p.combination(_to_complex(x)), full_matrices=False)
        weights = softmax(sigma / mu)
        value = mu * logsumexp(sigma / mu)
        # u_i^H S_k v_i 加权求和
        pairs = np.array([np.sum(weights * np.einsum("ij,ij->j", u.conj(), s @ vh.conj().T)) for s in p.subspace])
        return float(value), np.concatenate([np.real(pairs), -np.imag(pairs)])
    return fun


def _objective(p: TruncatedDistanceProblem, x: np.ndarray) -> float:
    return float(linalg.norm(p.combination(_to_complex(x)), 2))


def _primal_minimize(p: TruncatedDistanceProblem, tol: float) -> Tuple[float, np.ndarray]:
    if p.dim == 0:
        return float(linalg.norm(p.target, 2)), np.zeros(0, dtype=complex)

    vecs = np.stack([s.ravel() for s in p.subspace], axis=1)
    start, *_ = linalg.lstsq(vecs, -p.target.ravel())
    x = np.concatenate([np.real(start), np.imag(start)])
    best = _objective(p, x)
    for mu in SMOOTHING_LEVELS:
        result = optimize.minimize(_smoothed(p, mu), x, jac=True, method="BFGS", options={"gtol": 1e-12})
        value = _objective(p, result.x)
        if value < best:
            x, best = result.x, value
        logger.debug(f"原问题平滑 μ={mu:.0e}: ‖A+S‖ = {value:.12f}")

    # 坐标方向的黄金分割精修
    for sweep in range(POLISH_SWEEPS):
        previous = best
        for j in range(x.size):
            width = max(1e-6, 1e-2 * (1.0 + abs(x[j])))
            line = optimize.minimize_scalar(lambda t: _objective(p, x + t * np.eye(x.size)[j]),
                                            bounds=(-width, width), method="bounded",
                                            options={"xatol": 1e-13})
            if line.fun < best:
                x = x + line.x * np.eye(x.size)[j]
                best = float(line.fun)
        if previous - best <= 1e-3 * tol:
            break
    return best, _to_complex(x)


def distance_primal(p: TruncatedDistanceProblem, tol: float = 1e-9) -> float:
    """
    inf_c ‖A + Σ c_k S_k‖：对最大奇异值做 log-sum-exp 平滑并逐级减小 μ，
    最后在真实目标上做坐标精修
    """
    value, _ = _primal_minimize(p, tol)
    return value


class _DualObjective:
    """φ(H) = dist(AH, span{S_k H})，H 为 n₁×r 且 ‖H‖_F = 1"""

    def __init__(self, p: TruncatedDistanceProblem):
        self.p = p

    def value_and_gradient(self, h: np.ndarray) -> Tuple[float, np.ndarray]:
        p = self.p
        ah = p.target @ h
        if p.dim:
            cols = np.stack([(s @ h).ravel() for s in p.subspace], axis=1)
            beta, *_ = linalg.lstsq(cols, ah.ravel())
            residual_op = p.combination(-beta)
        else:
            residual_op = p.target
        residual = residual_op @ h
        phi = float(linalg.norm(residual))
        if phi == 0.0:
            return 0.0, np.zeros_like(h)
        grad = residual_op.conj().T @ residual / phi
        return phi, grad - np.real(np.vdot(h, grad)) * h


def _ascend(objective: _DualObjective, h: np.ndarray, steps: int, tol: float) -> Tuple[float, np.ndarray]:
    """单位球面上的自适应步长梯度上升"""
    h = h / linalg.norm(h)
    phi, grad = objective.value_and_gradient(h)
    step = 0.5
    for _ in range(steps):
        size = float(linalg.norm(grad))
        if size <= tol or step < 1e-14:
            break
        trial = h + step * grad / size
        trial /= linalg.norm(trial)
        phi_trial, grad_trial = objective.value_and_gradient(trial)
        if phi_trial > phi:
            h, phi, grad = trial, phi_trial, grad_trial
            step = min(1.0, 1.5 * step)
        else:
            step *= 0.5
    return phi, h


def distance_dual(p: TruncatedDistanceProblem, tol: float = 1e-9, starts: int = DEFAULT_STARTS,
                  steps: int = DEFAULT_STEPS, seed: int = 0, scheduler: Optional[SweepScheduler] = None) -> float:
    """
    sup |⟨(A⊗I)h₁, h₂⟩|，h₂ 取 (A⊗I)h₁ 在 (S⊗I)h₁ 正交补上的单位投影。
    多起点（每个起点的随机种子由 (seed, 起点序号) 决定）加球面梯度上升，最后精修最优起点
    """
    if starts < 1:
        raise ValueError(f"起点数必须为正: {starts}")
    objective = _DualObjective(p)
    shape = (p.n1, p.r)

    def run(index: int) -> Tuple[float, np.ndarray]:
        rng = np.random.default_rng([seed, index])
        h0 = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
        return _ascend(objective, h0, steps, tol)

    results = (scheduler or SweepScheduler()).map(run, range(starts))
    best = int(np.argmax([phi for phi, _ in results]))
    phi, h = _ascend(objective, results[best][1], 10 * steps, tol * 1e-3)
    logger.debug(f"对偶问题: 最优起点 {best}，φ = {phi:.12f}")
    return phi


@dataclass(frozen=True, eq=False)
class DistanceReport:
    primal: float
    dual: float
    gap: float
    coefficients: np.ndarray


def distance_report(p: TruncatedDistanceProblem, tol: float = 1e-9, starts: int = DEFAULT_STARTS,
                    steps: int = DEFAULT_STEPS, seed: int = 0,
                    scheduler: Optional[SweepScheduler] = None) -> DistanceReport:
    primal, coefficients = _primal_minimize(p, tol)
    dual = distance_dual(p, tol, starts, steps, seed, scheduler)
    gap = primal - dual
    if gap < -tol:
        logger.warning(f"弱对偶被破坏: primal {primal:.12f} < dual {dual:.12f}")
    logger.info(f"距离: primal {primal:.12f}，dual {dual:.12f}，gap {gap:.3e}")
    return DistanceReport(primal=primal, dual=dual, gap=gap, coefficients=coefficients)


@dataclass(frozen=True, eq=False)
class IsometryReport:
    tensor_norm: float
    outer_norm: float
    discrepancy: float


def reduction_isometry(F: AnalyticMap, hs: Sequence, rule: QuadratureRule) -> IsometryReport:
    """
    比较 ‖(M_F⊗I)h‖ 与 ‖M_F g‖，其中 |g|² = Σ|h_i|²。
    后者取 F·g 边界值 FFT 的非负频率部分的 H² 范数
    :param F: m 分量解析函数
    :param hs: 多项式 h_i 的升幂系数
    :param rule: 求积规则
    """
    zeta = rule.boundary_points
    coefficients: List[np.ndarray] = [np.atleast_1d(np.asarray(h, dtype=complex)) for h in hs]
    if not coefficients:
        raise InvalidProblem("h 至少需要一个分量")
    h_values = np.stack([P.polyval(zeta, c) for c in coefficients])
    modulus = np.sum(np.abs(h_values) ** 2, axis=0)
    f_values = F.evaluate(zeta)

    tensor = float(np.sqrt(np.sum(rule.weights * np.sum(np.abs(f_values) ** 2, axis=1) * modulus)))

    g = outer_from_modulus(modulus, rule).boundary_values()
    n = rule.node_count
    spectrum = np.fft.fft(f_values * g[:, None], axis=0) / n
    outer = float(np.sqrt(np.sum(np.abs(spectrum[:n // 2 + 1]) ** 2)))
    return IsometryReport(tensor_norm=tensor, outer_norm=outer, discrepancy=abs(tensor - outer))
