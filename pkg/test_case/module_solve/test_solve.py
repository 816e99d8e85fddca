import allure
import numpy as np
import pytest

from Hardy_Core.core.exceptions import (DegenerateBoundaryData, DegreeTooSmall, DuplicateNodes, Infeasible,
                                        NoSolutionExists)
from Hardy_Core.core.numerics import disk_grid
from Hardy_Core.core.pick import AlgebraSpec, TangentialProblem
from Hardy_Core.core.rkhs import BlaschkeProduct
from Hardy_Core.core.solve import (AlgebraBasis, VectorAnalyticFunction, constraint_residuals, schur_interpolate,
                                   schur_minimal_norm, separating_idempotents, separation_classes,
                                   tangential_constraints, tangential_solve, verify_solution, witness_interpolant)
from Hardy_Core.utils.logUtils.logger import hardy_logger

Z2 = AlgebraSpec.c_plus_b(BlaschkeProduct((0.0, 0.0)))
ZERO_HALF = AlgebraSpec.c_plus_b(BlaschkeProduct((0.0, 0.5)))


def separated_points(rng: np.random.Generator, count: int, radius: float = 0.7, gap: float = 0.1) -> np.ndarray:
    points = []
    while len(points) < count:
        z = radius * np.sqrt(rng.uniform()) * np.exp(2j * np.pi * rng.uniform())
        if all(abs(z - q) >= gap for q in points):
            points.append(z)
    return np.array(points)


def pseudo_hyperbolic(a: complex, b: complex) -> float:
    return abs(a - b) / abs(1.0 - np.conj(b) * a)


@allure.feature("插值求解")
@allure.story("Schur 递推")
class TestSchur:

    @allure.title("单节点零数据给出 f ≡ 0")
    def test_single_zero(self, small_grid):
        f = schur_interpolate([0.0], [0.0], 1.0)
        assert f.grid_norm(small_grid) == 0.0

    @allure.title("x = (0, 1/2), w = (0, 1/2) 给出 f(z) = z")
    def test_identity(self):
        f = schur_interpolate([0.0, 0.5], [0.0, 0.5], 1.0)
        z = np.array([0.1, -0.3j, 0.7 + 0.1j])
        np.testing.assert_allclose(f(z)[:, 0], z, atol=1e-12)

    @allure.title("x = (0, 1/2), w = (0, 1/4): 约束残差与网格范数")
    def test_quarter(self, fine_grid):
        f = schur_interpolate([0.0, 0.5], [0.0, 0.25], 1.0)
        np.testing.assert_allclose(f(np.array([0.0, 0.5]))[:, 0], [0.0, 0.25], atol=1e-8)
        assert f.grid_norm(fine_grid) <= 1.0 + 1e-6

    @allure.title("有理表示的分子分母与递推取值一致")
    def test_rational_coefficients(self, rng):
        x = separated_points(rng, 4)
        f = schur_interpolate(x, 0.5 * np.asarray(BlaschkeProduct((0.2, -0.3j))(x)), 1.0)
        numerator, denominator = f.rational_coefficients()
        z = separated_points(rng, 6, radius=0.95, gap=0.0)
        values = np.polynomial.polynomial.polyval(z, numerator) / np.polynomial.polynomial.polyval(z, denominator)
        np.testing.assert_allclose(values, f(z)[:, 0], atol=1e-10)
        assert f.degree == 3

    @allure.title("重合节点、Pick 不半正定、边界退化数据分别报错")
    def test_errors(self):
        with pytest.raises(DuplicateNodes):
            schur_interpolate([0.3, 0.3], [0.1, 0.1], 1.0)
        with pytest.raises(Infeasible):
            schur_interpolate([0.0, 0.5], [0.0, 0.6], 1.0)
        with allure.step("|w₁| 贴近 α 而其余数据不同（放宽 Pick 容差使其通过检验）"):
            with pytest.raises(DegenerateBoundaryData):
                schur_interpolate([0.0, 0.5], [1.0 - 1e-11, 0.9], 1.0, tol=0.05)

    @allure.title("全部数据位于边界且相同时给出单模常数")
    def test_unimodular_constant(self):
        f = schur_interpolate([0.0, 0.5, -0.4j], [1.0, 1.0, 1.0], 1.0)
        np.testing.assert_allclose(f(np.array([0.2, 0.9j]))[:, 0], 1.0, atol=1e-12)

    @allure.title("50 组随机可行标量问题: 残差 ≤ 1e-8，网格范数 ≤ α(1+1e-6)")
    @allure.severity(allure.severity_level.CRITICAL)
    def test_random_feasible(self, rng, fine_grid):
        for _ in range(50):
            n = int(rng.integers(1, 6))
            x = separated_points(rng, n)
            alpha = float(rng.uniform(0.5, 2.0))
            phi = BlaschkeProduct(tuple(separated_points(rng, 2, radius=0.8, gap=0.0)), np.exp(2j * np.pi * rng.uniform()))
            w = 0.9 * alpha * np.asarray(phi(x))
            f = schur_interpolate(x, w, alpha)
            residual = float(np.max(np.abs(f(x)[:, 0] - w)))
            assert residual <= 1e-8
            assert f.grid_norm(fine_grid) <= alpha * (1.0 + 1e-6)


@allure.feature("插值求解")
@allure.story("最小范数")
class TestMinimalNorm:

    @allure.title("w₁ = 0 时最小范数为 |w₂| / ρ(x₁, x₂)")
    def test_pseudo_hyperbolic_ratio(self, rng):
        for _ in range(10):
            x = separated_points(rng, 2, radius=0.8, gap=0.2)
            w2 = complex(0.6 * rng.uniform() * np.exp(2j * np.pi * rng.uniform()))
            expected = abs(w2) / pseudo_hyperbolic(*x)
            assert schur_minimal_norm(x, [0.0, w2]) == pytest.approx(expected, abs=1e-6)

    @allure.title("一般两点数据: 最小范数满足 |w₁−w₂|·α = ρ_x·|α² − conj(w₂)w₁|")
    def test_general_two_point(self, rng):
        for _ in range(10):
            x = separated_points(rng, 2, radius=0.8, gap=0.2)
            w = 0.5 * rng.uniform(size=2) * np.exp(2j * np.pi * rng.uniform(size=2))
            alpha = schur_minimal_norm(x, w)
            lhs = abs(w[0] - w[1]) * alpha
            rhs = pseudo_hyperbolic(*x) * abs(alpha ** 2 - np.conj(w[1]) * w[0])
            hardy_logger.debug(f"α* = {alpha:.10f}, 两侧差 {lhs - rhs:.3e}")
            assert alpha >= np.max(np.abs(w)) - 1e-12
            assert lhs == pytest.approx(rhs, abs=1e-7)

    @allure.title("零数据的最小范数为 0")
    def test_zero_data(self):
        assert schur_minimal_norm([0.1, 0.2], [0.0, 0.0]) == 0.0


@allure.feature("插值求解")
@allure.story("点分离与幂等元")
class TestSeparation:

    @allure.title("FullHinf 下每个点单独成类，重合点合并")
    def test_full_hinf(self):
        assert separation_classes(AlgebraSpec.full_hinf(), [0.1, 0.2j, -0.3]).class_count == 3
        partition = separation_classes(AlgebraSpec.full_hinf(), [0.2, 0.3, 0.2])
        assert partition.class_count == 2
        np.testing.assert_array_equal(partition.class_indices(0), [0, 2])

    @allure.title("B 的零点合并为一类")
    def test_zeros_merged(self):
        partition = separation_classes(ZERO_HALF, [0.0, 0.5, 0.5j])
        assert partition.class_count == 2
        np.testing.assert_array_equal(partition.class_indices(0), [0, 1])
        np.testing.assert_array_equal(partition.class_indices(1), [2])
        assert separation_classes(Z2, [0.0, 0.5]).class_count == 2

    @allure.title("FullHinf 两点 {0, 1/2}: e₁ = 1 − 2z，e₂ = 2z")
    def test_lagrange_idempotents(self):
        partition = separation_classes(AlgebraSpec.full_hinf(), [0.0, 0.5])
        e1, e2 = separating_idempotents(AlgebraSpec.full_hinf(), partition, 1)
        np.testing.assert_allclose(e1.coefficients, [[1.0, -2.0]], atol=1e-12)
        np.testing.assert_allclose(e2.coefficients, [[0.0, 2.0]], atol=1e-12)
        with pytest.raises(DegreeTooSmall):
            separating_idempotents(AlgebraSpec.full_hinf(), partition, 0)

    @allure.title("C+BH∞ 只有一个类时 e₁ ≡ 1")
    def test_single_class(self):
        partition = separation_classes(ZERO_HALF, [0.0, 0.5])
        (e1,) = separating_idempotents(ZERO_HALF, partition, 0)
        np.testing.assert_allclose(e1(np.array([0.3, -0.6j]))[:, 0], 1.0, atol=1e-12)


@allure.feature("插值求解")
@allure.story("见证插值")
class TestWitness:

    @allure.title("单节点 v = (1,0)、w = 2 给出常值 F = (2,0)")
    def test_constant(self):
        p = TangentialProblem(np.array([0.0]), np.array([[1.0, 0.0]]), np.array([2.0]), 3.0)
        construction = witness_interpolant(p)
        np.testing.assert_allclose(construction.class_vectors, [[2.0, 0.0]], atol=1e-12)
        np.testing.assert_allclose(construction.function(np.array([0.4j]))[0], [2.0, 0.0], atol=1e-12)

    @allure.title("同一类中目标不在 Gram 值域内报 NoSolutionExists")
    @pytest.mark.parametrize("algebra, points", [
        (AlgebraSpec.full_hinf(), [0.3, 0.3]),
        (ZERO_HALF, [0.0, 0.5]),
    ], ids=["重合点", "B 的零点"])
    def test_no_solution(self, algebra, points):
        p = TangentialProblem(np.array(points), np.array([[1.0, 0.0], [1.0, 0.0]]), np.array([0.0, 1.0]), 1.0, algebra)
        with pytest.raises(NoSolutionExists):
            witness_interpolant(p)

    @allure.title("随机单位方向与随机目标: 见证插值满足约束，验证残差 ≤ 1e-8")
    @pytest.mark.parametrize("algebra", [AlgebraSpec.full_hinf(), ZERO_HALF], ids=["FullHinf", "CplusB"])
    def test_random(self, rng, small_grid, algebra):
        for _ in range(10):
            n, m = int(rng.integers(2, 6)), int(rng.integers(1, 4))
            v = rng.standard_normal((n, m)) + 1j * rng.standard_normal((n, m))
            v /= np.linalg.norm(v, axis=1, keepdims=True)
            w = rng.standard_normal(n) + 1j * rng.standard_normal(n)
            p = TangentialProblem(separated_points(rng, n, radius=0.8, gap=0.15), v, w, 1.0, algebra)
            construction = witness_interpolant(p)
            assert np.max(constraint_residuals(construction.function, p)) <= 1e-8
            assert verify_solution(construction.function, p, small_grid).max_residual <= 1e-8


@allure.feature("插值求解")
@allure.story("切向 minimax 求解")
class TestTangentialSolve:

    @allure.title("约束矩阵的形状与取值")
    def test_constraint_layout(self):
        p = TangentialProblem(np.array([0.5]), np.array([[1.0, 2.0j]]), np.array([1.0]), 1.0)
        basis = AlgebraBasis(AlgebraSpec.full_hinf(), 1)
        constraints = tangential_constraints(p, basis)
        np.testing.assert_allclose(constraints.matrix, [[1.0, 0.5, -2.0j, -1.0j]], atol=1e-15)

    @allure.title("单节点 v = (1,0)、w = 1: F ≈ (1,0)，网格范数 1")
    def test_single_node(self, small_grid):
        p = TangentialProblem(np.array([0.0]), np.array([[1.0, 0.0]]), np.array([1.0]), 1.0)
        solution = tangential_solve(p, 2, small_grid)
        assert solution.grid_norm == pytest.approx(1.0, abs=1e-4)
        assert solution.constraint_residual <= 1e-7
        assert solution.within_level

    @allure.title("全部方向为 e₁ 时退化为标量问题，范数与 Schur 最优值一致")
    @pytest.mark.parametrize("w2", [0.25, 0.5j])
    def test_scalar_reduction(self, w2):
        grid = disk_grid(4, 128, 0.9999)
        p = TangentialProblem(np.array([0.0, 0.5]), np.array([[1.0, 0.0], [1.0, 0.0]]), np.array([0.0, w2]), 2.0)
        solution = tangential_solve(p, 3, grid)
        optimum = schur_minimal_norm(p.points, p.targets)
        hardy_logger.info(f"切向解 {solution.grid_norm:.8f}，Schur 最优 {optimum:.8f}")
        assert abs(solution.grid_norm - optimum) <= 1e-3

    @allure.title("C+z²H∞ 实例: 各次数下网格范数都 ≥ 1.9")
    @allure.severity(allure.severity_level.CRITICAL)
    def test_family_instance_sweep(self):
        grid = disk_grid(8, 256, 0.995)
        p = TangentialProblem(np.array([0.0, 0.5]), np.ones((2, 1)), np.array([0.0, 0.5]), 1.0, Z2)
        norms = []
        for degree in (2, 8, 20):
            solution = tangential_solve(p, degree, grid, tol=1e-4)
            assert not solution.within_level
            norms.append(solution.grid_norm)
        hardy_logger.info(f"次数扫描的网格范数: {norms}")
        assert min(norms) >= 1.9

    @allure.title("次数增加时网格范数不增")
    def test_monotone_in_degree(self, small_grid):
        p = TangentialProblem(np.array([0.1, -0.4j, 0.5]), np.array([[1.0, 0.5], [0.0, 1.0], [1.0, -1.0j]]),
                              np.array([0.3, -0.2, 0.1j]), 1.0)
        coarse = tangential_solve(p, 2, small_grid)
        fine = tangential_solve(p, 4, small_grid)
        assert fine.grid_norm <= coarse.grid_norm + 1e-4


@allure.feature("插值求解")
@allure.story("解的验证")
class TestVerify:

    @allure.title("常值 F = (1,0) 对其自身的单节点问题: 残差 0，范数 1，半正定")
    def test_constant(self, small_grid):
        f = VectorAnalyticFunction.constant([1.0, 0.0])
        p = TangentialProblem(np.array([0.0]), np.array([[1.0, 0.0]]), np.array([1.0]), 1.0)
        report = verify_solution(f, p, small_grid)
        assert report.max_residual == 0.0
        assert report.grid_norm == pytest.approx(1.0, abs=1e-15)
        assert report.pick_psd

    @allure.title("Schur 解的验证: 残差 ≤ 1e-8，Pick 矩阵在网格范数处半正定")
    def test_schur_solution(self, fine_grid):
        x, w = np.array([0.0, 0.5]), np.array([0.1, 0.2])
        f = schur_interpolate(x, w, 1.0)
        report = verify_solution(f, TangentialProblem(x, np.ones((2, 1)), w, 1.0), fine_grid)
        assert report.max_residual <= 1e-8
        assert report.pick_psd

    @allure.title("被篡改的 F 报告非零残差")
    def test_corrupted(self, small_grid):
        p = TangentialProblem(np.array([0.0, 0.5]), np.ones((2, 1)), np.array([0.0, 0.25]), 1.0)
        f = schur_interpolate(p.points, p.targets, 1.0)
        good = VectorAnalyticFunction(AlgebraBasis(AlgebraSpec.full_hinf(), 1), [[0.0, 0.5]])
        assert verify_solution(good, p, small_grid).max_residual <= 1e-15
        corrupted = good.scaled(1.1)
        assert verify_solution(corrupted, p, small_grid).max_residual == pytest.approx(0.025, abs=1e-12)
        assert verify_solution(f, p, small_grid).max_residual <= 1e-8
