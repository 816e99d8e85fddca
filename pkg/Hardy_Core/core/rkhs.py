"""
圆盘上的解析基元：有限 Blaschke 积、Szegő 核与模型空间核、C+BH∞ 的循环子空间核族、
Takenaka–Malmquist 正交基，以及由边界模构造的外函数。
"""
import math
from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Callable, List, Tuple, Union

import numpy as np
from loguru import logger
from scipy.stats import norm, qmc

from Hardy_Core.core.exceptions import InvalidProblem, InvalidRadius, NotLogIntegrable, NotNormalized, OutsideDisk
from Hardy_Core.core.numerics import QuadratureRule

__all__ = [
    "BlaschkeProduct", "ModelSpaceBasis", "ModelVector", "KernelSpec", "SzegoKernel", "ModelSpaceKernel",
    "CyclicKernel", "OuterFunction", "as_disk_points", "blaschke_eval", "szego_kernel", "model_space_kernel",
    "tm_basis", "cyclic_kernel", "outer_from_modulus", "sample_model_sphere", "constant_projection",
    "kernel_gram", "kernels_independent",
]

ComplexLike = Union[complex, np.ndarray]
UNIT_TOL = 1e-10
OUTER_MAX_RADIUS = 0.995
_CHUNK = 256


def _scalar_or_array(values: np.ndarray, like) -> ComplexLike:
    return complex(values) if np.ndim(like) == 0 else values


def as_disk_points(points) -> np.ndarray:
    z = np.atleast_1d(np.asarray(points, dtype=complex))
    if np.any(np.abs(z) >= 1.0):
        raise OutsideDisk(f"点必须位于开单位圆盘内: {z[np.abs(z) >= 1.0]}")
    return z


@dataclass(frozen=True, eq=False)
class BlaschkeProduct:
    zeros: Tuple[complex, ...]
    unimodular_constant: complex = 1.0 + 0.0j

    def __post_init__(self):
        zeros = tuple(complex(a) for a in self.zeros)
        if not zeros:
            raise InvalidProblem("Blaschke 积的零点列表不能为空")
        as_disk_points(zeros)
        constant = complex(self.unimodular_constant)
        if abs(abs(constant) - 1.0) > 1e-12:
            raise InvalidProblem(f"单模常数的模必须为 1: {constant}")
        object.__setattr__(self, "zeros", zeros)
        object.__setattr__(self, "unimodular_constant", constant)

    @property
    def degree(self) -> int:
        return len(self.zeros)

    def has_zero_at(self, z: complex, tol: float = 1e-12) -> bool:
        return any(abs(z - a) <= tol for a in self.zeros)

    def same_as(self, other: "BlaschkeProduct") -> bool:
        if other.degree != self.degree or abs(other.unimodular_constant - self.unimodular_constant) > 1e-12:
            return False
        return np.allclose(sorted(self.zeros, key=lambda a: (a.real, a.imag)),
                           sorted(other.zeros, key=lambda a: (a.real, a.imag)), rtol=0.0, atol=1e-12)

    def describe(self) -> str:
        zeros = ", ".join(f"{a.real:.6g}{a.imag:+.6g}i" for a in self.zeros)
        return f"B(zeros=[{zeros}])"

    def __call__(self, z: ComplexLike) -> ComplexLike:
        return blaschke_eval(self, z)


def blaschke_eval(b: BlaschkeProduct, z: ComplexLike) -> ComplexLike:
    zz = np.asarray(z, dtype=complex)
    out = np.full(zz.shape, b.unimodular_constant, dtype=complex)
    for a in b.zeros:
        out = out * (zz - a) / (1.0 - np.conj(a) * zz)
    return _scalar_or_array(out, z)


def szego_kernel(z: ComplexLike, w: ComplexLike) -> ComplexLike:
    zz, ww = np.asarray(z, dtype=complex), np.asarray(w, dtype=complex)
    out = 1.0 / (1.0 - zz * np.conj(ww))
    return _scalar_or_array(out, out)


def model_space_kernel(b: BlaschkeProduct, z: ComplexLike, w: ComplexLike) -> ComplexLike:
    zz, ww = np.asarray(z, dtype=complex), np.asarray(w, dtype=complex)
    bz, bw = np.asarray(blaschke_eval(b, zz)), np.asarray(blaschke_eval(b, ww))
    out = (1.0 - bz * np.conj(bw)) / (1.0 - zz * np.conj(ww))
    return _scalar_or_array(out, out)


@dataclass(frozen=True, eq=False)
class ModelSpaceBasis:
    """
    H² ⊖ BH² 的 Takenaka–Malmquist 正交基:
    e_k(z) = sqrt(1-|a_k|²)/(1-conj(a_k)z) · Π_{j<k} (z-a_j)/(1-conj(a_j)z)
    """
    product: BlaschkeProduct

    @property
    def dimension(self) -> int:
        return self.product.degree

    def evaluate(self, z: ComplexLike) -> np.ndarray:
        zz = np.asarray(z, dtype=complex)
        out = np.empty(zz.shape + (self.dimension,), dtype=complex)
        prefix = np.ones(zz.shape, dtype=complex)
        for k, a in enumerate(self.product.zeros):
            denominator = 1.0 - np.conj(a) * zz
            out[..., k] = math.sqrt(1.0 - abs(a) ** 2) / denominator * prefix
            prefix = prefix * (zz - a) / denominator
        return out

    __call__ = evaluate


def tm_basis(b: BlaschkeProduct) -> ModelSpaceBasis:
    return ModelSpaceBasis(b)


@dataclass(frozen=True, eq=False)
class ModelVector:
    coefficients: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "coefficients", np.atleast_1d(np.asarray(self.coefficients, dtype=complex)))

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.coefficients))

    def is_unit(self, tol: float = UNIT_TOL) -> bool:
        return abs(self.norm - 1.0) <= tol

    def normalized(self) -> "ModelVector":
        return ModelVector(self.coefficients / self.norm)

    def evaluate(self, basis: ModelSpaceBasis, z: ComplexLike) -> ComplexLike:
        out = basis.evaluate(z) @ self.coefficients
        return _scalar_or_array(out, z)


class KernelSpec(ABC):
    """圆盘上的正定核，K(z,w) 支持广播"""
    variant: str = ""

    @abstractmethod
    def __call__(self, z: ComplexLike, w: ComplexLike) -> ComplexLike:
        ...

    @property
    def tag(self) -> str:
        return self.variant

    def gram(self, points) -> np.ndarray:
        x = np.atleast_1d(np.asarray(points, dtype=complex))
        return np.asarray(self(x[:, None], x[None, :]), dtype=complex)


class SzegoKernel(KernelSpec):
    variant = "Szego"

    def __call__(self, z, w):
        return szego_kernel(z, w)


class ModelSpaceKernel(KernelSpec):
    variant = "ModelSpace"

    def __init__(self, blaschke: BlaschkeProduct):
        self.blaschke = blaschke

    @property
    def tag(self) -> str:
        return f"ModelSpace({self.blaschke.describe()})"

    def __call__(self, z, w):
        return model_space_kernel(self.blaschke, z, w)


class CyclicKernel(KernelSpec):
    """
    C+BH∞ 的循环子空间核：H_g = ℂv ⊕ BH²，
    K(z,w) = v(z)·conj(v(w)) + B(z)·conj(B(w))·S(z,w)
    """
    variant = "CyclicCplusB"

    def __init__(self, blaschke: BlaschkeProduct, vector: ModelVector):
        if vector.coefficients.size != blaschke.degree:
            raise InvalidProblem(f"模型向量维数 {vector.coefficients.size} 与 B 的次数 {blaschke.degree} 不符")
        if not vector.is_unit():
            raise NotNormalized(f"核参数 v 必须是单位向量，实际范数 {vector.norm:.12g}")
        self.blaschke = blaschke
        self.vector = vector
        self.basis = tm_basis(blaschke)

    @property
    def tag(self) -> str:
        coefficients = ", ".join(f"{c.real:.6g}{c.imag:+.6g}i" for c in self.vector.coefficients)
        return f"CyclicCplusB({self.blaschke.describe()}, v=[{coefficients}])"

    def __call__(self, z, w):
        zz, ww = np.asarray(z, dtype=complex), np.asarray(w, dtype=complex)
        vz = self.basis.evaluate(zz) @ self.vector.coefficients
        vw = self.basis.evaluate(ww) @ self.vector.coefficients
        bz, bw = np.asarray(blaschke_eval(self.blaschke, zz)), np.asarray(blaschke_eval(self.blaschke, ww))
        out = vz * np.conj(vw) + bz * np.conj(bw) / (1.0 - zz * np.conj(ww))
        return _scalar_or_array(out, out)


def cyclic_kernel(b: BlaschkeProduct, v: ModelVector, z: ComplexLike, w: ComplexLike) -> ComplexLike:
    return CyclicKernel(b, v)(z, w)


def kernel_gram(kernel: KernelSpec, points) -> np.ndarray:
    return kernel.gram(points)


def kernels_independent(kernel: KernelSpec, x: complex, y: complex, tol: float = 1e-10) -> bool:
    """k_x 与 k_y 是否线性无关：2×2 Gram 行列式严格为正"""
    kxx = float(np.real(kernel(x, x)))
    kyy = float(np.real(kernel(y, y)))
    kxy = complex(kernel(x, y))
    if kxx <= 0.0 or kyy <= 0.0:
        return False
    return kxx * kyy - abs(kxy) ** 2 > tol * kxx * kyy


def constant_projection(b: BlaschkeProduct) -> ModelVector:
    """常函数 1 在模型空间上的投影，归一化后作为单核检验的参数"""
    e0 = tm_basis(b).evaluate(np.array(0.0 + 0.0j))
    return ModelVector(np.conj(e0)).normalized()


@dataclass(frozen=True, eq=False)
class OuterFunction:
    """
    由边界对数模 log|g| = (1/2)·log p 表示的外函数，内部取值用 Herglotz 求积，
    边界取值用 FFT 共轭函数
    """
    log_modulus: np.ndarray
    rule: QuadratureRule
    max_radius: float = OUTER_MAX_RADIUS

    def __call__(self, z: ComplexLike) -> ComplexLike:
        zz = np.asarray(z, dtype=complex)
        flat = zz.ravel()
        if flat.size and float(np.max(np.abs(flat))) > self.max_radius:
            raise InvalidRadius(f"外函数内部取值半径上限为 {self.max_radius}")
        zeta = self.rule.boundary_points
        weighted = self.log_modulus * self.rule.weights
        herglotz = np.empty(flat.shape, dtype=complex)
        for start in range(0, flat.size, _CHUNK):
            chunk = flat[start:start + _CHUNK, None]
            herglotz[start:start + _CHUNK] = ((zeta + chunk) / (zeta - chunk)) @ weighted
        out = np.exp(herglotz).reshape(zz.shape)
        return _scalar_or_array(out, z)

    def log_coefficients(self) -> np.ndarray:
        """log g 的 Taylor 系数（长度 N，高于 N/2 的项为 0）"""
        n = self.rule.node_count
        spectrum = np.fft.fft(self.log_modulus) / n
        h = np.zeros(n, dtype=complex)
        h[0] = spectrum[0]
        if n > 1:
            h[1:n // 2] = 2.0 * spectrum[1:n // 2]
            h[n // 2] = spectrum[n // 2]
        return h

    def boundary_values(self) -> np.ndarray:
        n = self.rule.node_count
        return np.exp(n * np.fft.ifft(self.log_coefficients()))

    def taylor_coefficients(self, count: int) -> np.ndarray:
        n = self.rule.node_count
        return (np.fft.fft(self.boundary_values()) / n)[:count]


def outer_from_modulus(p: Union[np.ndarray, Callable[[np.ndarray], np.ndarray]], rule: QuadratureRule,
                       max_radius: float = OUTER_MAX_RADIUS) -> OuterFunction:
    """
    构造外函数 g，使 |g|² = p（在求积节点上），g(0) > 0
    :param p: 节点上的采样值，或以角度为参数的函数
    :param rule: 求积规则
    :param max_radius: 内部取值的半径上限
    """
    samples = np.asarray(p(rule.nodes) if callable(p) else p, dtype=float).ravel()
    if samples.size != rule.node_count:
        raise InvalidProblem(f"采样数 {samples.size} 与节点数 {rule.node_count} 不一致")
    if not np.all(np.isfinite(samples)) or np.any(samples <= 0.0):
        raise NotLogIntegrable("边界模采样必须全部为正且有限")
    if not 0.0 < max_radius < 1.0:
        raise InvalidRadius(f"外函数取值半径必须位于 (0,1): {max_radius}")
    logger.debug(f"构造外函数: N={rule.node_count}, min p={samples.min():.3e}")
    return OuterFunction(log_modulus=0.5 * np.log(samples), rule=rule, max_radius=max_radius)


def sample_model_sphere(b: BlaschkeProduct, count: int, seed: int) -> List[ModelVector]:
    """
    模型空间单位球面上的确定性低差异采样：加扰 Sobol 点经正态分位数映射后归一化
    """
    if count < 1:
        raise ValueError(f"采样数必须为正: {count}")
    d = b.degree
    sobol = qmc.Sobol(d=2 * d, scramble=True, seed=np.random.default_rng(seed))
    exponent = max(0, math.ceil(math.log2(count)))
    cube = sobol.random_base2(exponent)[:count]
    gauss = norm.ppf(cube)
    vectors = gauss[:, :d] + 1j * gauss[:, d:]
    vectors /= np.linalg.norm(vectors, axis=1, keepdims=True)
    return [ModelVector(row) for row in vectors]
