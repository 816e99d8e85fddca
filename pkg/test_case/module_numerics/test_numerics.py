import allure
import numpy as np
import pytest
from scipy import linalg

from Hardy_Core.core.exceptions import InfeasibleConstraints, InvalidMatrix, InvalidRadius
from Hardy_Core.core.numerics import (AffineConstraints, HermitianMatrix, QuadratureRule, circle_integral, disk_grid,
                                      hermitian_eigh, hermitian_min_eig, is_psd, minimax_affine)
from Hardy_Core.core.solve import schur_minimal_norm
from Hardy_Core.utils.logUtils.logger import hardy_logger


def random_hermitian(rng: np.random.Generator, n: int) -> np.ndarray:
    a = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return a + a.conj().T


@allure.feature("数值内核")
@allure.story("Hermitian 特征分析")
class TestHermitianEigen:

    @allure.title("最小特征值: 已知矩阵")
    @allure.severity(allure.severity_level.CRITICAL)
    @pytest.mark.parametrize("matrix, expected", [
        (np.eye(3), 1.0),
        (np.array([[1.0, 2.0], [2.0, 1.0]]), -1.0),
        (np.array([[5.0]]), 5.0),
    ])
    def test_min_eig_known(self, matrix, expected):
        with allure.step("Jacobi 计算最小特征值"):
            lam = hermitian_min_eig(matrix)
            hardy_logger.debug(f"λ_min = {lam}")
        assert lam == pytest.approx(expected, abs=1e-12)

    @allure.title("随机 4×4 Hermitian 矩阵与参考特征值一致")
    def test_random_matches_reference(self, rng):
        for _ in range(10):
            a = random_hermitian(rng, 4)
            values, vectors = hermitian_eigh(a)
            with allure.step("与 LAPACK 特征值比较"):
                np.testing.assert_allclose(values, linalg.eigvalsh(a), atol=1e-9)
            with allure.step("检查 A·V = V·Λ 与 V 的酉性"):
                np.testing.assert_allclose(a @ vectors, vectors * values, atol=1e-9)
                np.testing.assert_allclose(vectors.conj().T @ vectors, np.eye(4), atol=1e-10)

    @allure.title("平移等变: λ_min(M + εI) = λ_min(M) + ε")
    @pytest.mark.parametrize("eps", [-3.0, 1e-6, 0.5, 10.0])
    def test_shift_equivariance(self, rng, eps):
        a = random_hermitian(rng, 5)
        assert hermitian_min_eig(a + eps * np.eye(5)) == pytest.approx(hermitian_min_eig(a) + eps, abs=1e-9)

    @allure.title("非 Hermitian 或非方阵被拒绝")
    @pytest.mark.parametrize("entries", [
        np.array([[1.0, 2.0], [3.0, 1.0]]),
        np.ones((2, 3)),
        np.array([[np.nan]]),
    ])
    def test_rejects_invalid(self, entries):
        with pytest.raises(InvalidMatrix):
            HermitianMatrix(entries)


@allure.feature("数值内核")
@allure.story("半正定判定")
class TestIsPsd:

    @allure.title("零矩阵在容差 0 下半正定")
    def test_zero_matrix(self):
        verdict = is_psd(np.zeros((3, 3)), tol=0.0)
        assert verdict.psd and bool(verdict)

    @allure.title("[[1,2],[2,1]] 不半正定，λ_min = −1")
    def test_indefinite(self):
        verdict = is_psd(np.array([[1.0, 2.0], [2.0, 1.0]]), tol=1e-8)
        assert not verdict.psd
        assert verdict.min_eig == pytest.approx(-1.0, abs=1e-12)

    @allure.title("负容差报错")
    def test_negative_tol(self):
        with pytest.raises(ValueError):
            is_psd(np.eye(2), tol=-1.0)

    @allure.title("加上非负对角阵保持半正定")
    def test_monotone_in_diagonal(self, rng):
        for _ in range(20):
            b = rng.standard_normal((4, 3)) + 1j * rng.standard_normal((4, 3))
            m = b @ b.conj().T
            d = np.diag(rng.uniform(0.0, 2.0, 4))
            assert is_psd(m, 1e-8).psd
            assert is_psd(m + d, 1e-8).psd


@allure.feature("数值内核")
@allure.story("圆周求积与网格")
class TestQuadratureAndGrid:

    @allure.title("圆周积分的基本值")
    @pytest.mark.parametrize("f, expected", [
        (lambda z: np.ones_like(z), 1.0),
        (lambda z: z, 0.0),
        (lambda z: np.abs(1.0 + z) ** 2, 2.0),
    ])
    def test_circle_integral_values(self, f, expected):
        assert abs(circle_integral(f, QuadratureRule(256)) - expected) <= 1e-12

    @allure.title("z^k（1 ≤ |k| < N/2）的积分为零")
    def test_characters_vanish(self):
        rule = QuadratureRule(64)
        for k in list(range(1, 32)) + list(range(-31, 0)):
            assert abs(circle_integral(lambda z: z ** k, rule)) <= 1e-12

    @allure.title("求积规则: 权重和为 1，节点严格递增")
    def test_rule_invariants(self):
        rule = QuadratureRule(1024)
        assert rule.weights.sum() == pytest.approx(1.0, abs=1e-14)
        assert np.all(np.diff(rule.nodes) > 0) and rule.nodes[0] == 0.0 and rule.nodes[-1] < 2 * np.pi

    @allure.title("节点数不是 2 的幂时报错")
    @pytest.mark.parametrize("count", [0, 3, 100])
    def test_rule_rejects_count(self, count):
        with pytest.raises(ValueError):
            QuadratureRule(count)

    @allure.title("圆盘网格的点数与半径")
    @pytest.mark.parametrize("radial, angular, radius, size", [
        (2, 4, 0.9, 8),
        (1, 1, 0.5, 1),
        (16, 64, 0.995, 1024),
    ])
    def test_grid_sizes(self, radial, angular, radius, size):
        grid = disk_grid(radial, angular, radius)
        assert grid.size == size
        # 最外圈的模可能比 max_radius 大一个 ulp
        assert np.max(np.abs(grid.points)) <= radius + 1e-12

    @allure.title("网格半径越界报 InvalidRadius")
    @pytest.mark.parametrize("radius", [0.0, 1.0, 1.5])
    def test_grid_bad_radius(self, radius):
        with pytest.raises(InvalidRadius):
            disk_grid(2, 8, radius)


@allure.feature("数值内核")
@allure.story("带仿射约束的 minimax")
class TestMinimax:

    @staticmethod
    def monomials(grid, degree):
        return grid.points[:, None] ** np.arange(degree + 1)

    @allure.title("无约束、基 {1}: 系数为 0，水平为 0")
    def test_unconstrained_constant(self):
        grid = disk_grid(2, 8, 0.9)
        solution = minimax_affine(np.ones((grid.size, 1)), AffineConstraints.empty(1), grid)
        assert np.allclose(solution.coefficients, 0.0)
        assert solution.achieved_level == pytest.approx(0.0, abs=1e-12)

    @allure.title("约束把唯一系数固定为 1: 水平为 1")
    def test_pinned_coefficient(self):
        grid = disk_grid(2, 8, 0.9)
        constraints = AffineConstraints(np.array([[1.0 + 0j]]), np.array([1.0 + 0j]))
        solution = minimax_affine(np.ones((grid.size, 1)), constraints, grid)
        assert solution.achieved_level == pytest.approx(1.0, abs=1e-12)

    @allure.title("两点标量 Nevanlinna–Pick: 网格最优值与 Schur 最优范数一致")
    @allure.severity(allure.severity_level.CRITICAL)
    def test_matches_schur_optimum(self):
        x = np.array([0.0, 0.5])
        w = np.array([0.0, 0.25])
        grid = disk_grid(2, 256, 0.99999)
        with allure.step("约束 f(x_j) = w_j 于基 {1, z, z²}"):
            constraints = AffineConstraints(x[:, None] ** np.arange(3) + 0j, w + 0j)
            solution = minimax_affine(self.monomials(grid, 2), constraints, grid)
        with allure.step("与二分得到的 Schur 最优范数比较"):
            optimum = schur_minimal_norm(x, w)
            hardy_logger.info(f"minimax {solution.achieved_level:.8f}，Schur {optimum:.8f}")
            assert optimum == pytest.approx(0.5, abs=1e-8)
            assert abs(solution.achieved_level - optimum) <= 1e-4

    @allure.title("约束残差 ≤ 1e-7，且基扩大时水平不增")
    def test_residual_and_nested_bases(self, rng):
        grid = disk_grid(4, 64, 0.95)
        x = np.array([0.1 + 0.2j, -0.3, 0.4j])
        w = rng.standard_normal(3) * 0.3 + 1j * rng.standard_normal(3) * 0.3
        levels = []
        for degree in (2, 3, 5):
            constraints = AffineConstraints(x[:, None] ** np.arange(degree + 1), w)
            solution = minimax_affine(self.monomials(grid, degree), constraints, grid)
            residual = np.linalg.norm(constraints.matrix @ solution.coefficients.ravel() - w)
            assert residual <= 1e-7
            levels.append(solution.achieved_level)
        hardy_logger.debug(f"嵌套基的水平: {levels}")
        assert levels[1] <= levels[0] + 1e-5
        assert levels[2] <= levels[1] + 1e-5

    @allure.title("矛盾约束报 InfeasibleConstraints")
    def test_inconsistent_constraints(self):
        grid = disk_grid(2, 8, 0.9)
        constraints = AffineConstraints(np.array([[1.0 + 0j], [1.0 + 0j]]), np.array([0.0 + 0j, 1.0 + 0j]))
        with pytest.raises(InfeasibleConstraints):
            minimax_affine(np.ones((grid.size, 1)), constraints, grid)
