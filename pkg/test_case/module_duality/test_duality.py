import allure
import numpy as np
import pytest
from numpy.polynomial import polynomial as P

from Hardy_Core.core.duality import (TruncatedDistanceProblem, distance_dual, distance_primal, distance_report,
                                     reduction_isometry)
from Hardy_Core.core.exceptions import InvalidProblem, InvalidTruncation
from Hardy_Core.core.pick import AlgebraSpec
from Hardy_Core.core.scheduler import SweepScheduler
from Hardy_Core.core.solve import AlgebraBasis, VectorAnalyticFunction
from Hardy_Core.utils.logUtils.logger import hardy_logger

DIAG = np.diag([1.0, -1.0])


def random_complex(rng: np.random.Generator, *shape) -> np.ndarray:
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


@allure.feature("距离公式")
@allure.story("原问题与对偶问题")
class TestDistance:

    @allure.title("A 属于 span(S) 时两侧都为 0")
    def test_target_in_span(self, rng):
        s1, s2 = random_complex(rng, 3, 2), random_complex(rng, 3, 2)
        p = TruncatedDistanceProblem(2 * s1 - 1j * s2, (s1, s2))
        assert distance_primal(p) <= 1e-8
        assert distance_dual(p, starts=4) <= 1e-8

    @allure.title("S 为零空间时两侧都等于 ‖A‖")
    def test_empty_subspace(self, rng):
        a = random_complex(rng, 4, 3)
        p = TruncatedDistanceProblem(a)
        norm = float(np.linalg.norm(a, 2))
        assert distance_primal(p) == pytest.approx(norm, abs=1e-12)
        assert distance_dual(p, starts=8) == pytest.approx(norm, abs=1e-8)

    @allure.title("A = diag(1,−1)、S = 单位阵的数乘: 距离为 1")
    @allure.severity(allure.severity_level.CRITICAL)
    def test_diagonal_against_scalars(self):
        p = TruncatedDistanceProblem(DIAG, (np.eye(2),))
        report = distance_report(p, starts=16)
        np.testing.assert_allclose(report.coefficients, [0.0], atol=1e-6)
        assert report.primal == pytest.approx(1.0, abs=1e-6)
        assert report.dual == pytest.approx(1.0, abs=1e-6)

    @allure.title("r 超过 n₁ 时对偶值变化 ≤ 1e-8")
    def test_tensor_stability(self):
        at_n1 = distance_dual(TruncatedDistanceProblem(DIAG, (np.eye(2),), r=2), starts=16)
        beyond = distance_dual(TruncatedDistanceProblem(DIAG, (np.eye(2),), r=3), starts=16)
        assert abs(at_n1 - beyond) <= 1e-8

    @allure.title("随机截断实例: 强对偶 |primal − dual| ≤ 1e-6，弱对偶不被破坏")
    @allure.severity(allure.severity_level.BLOCKER)
    def test_random_strong_duality(self, rng):
        # 8 个实例、每个 32 个起点（缩减规模）
        for index in range(8):
            n1, n2 = int(rng.integers(1, 6)), int(rng.integers(1, 6))
            dim = int(rng.integers(0, min(3, n1 * n2 - 1) + 1))
            p = TruncatedDistanceProblem(random_complex(rng, n2, n1),
                                         tuple(random_complex(rng, n2, n1) for _ in range(dim)))
            report = distance_report(p, starts=32, seed=index)
            hardy_logger.info(f"实例 {index}: n₁={n1}, n₂={n2}, dim={dim}, gap={report.gap:.3e}")
            assert report.dual <= report.primal + 1e-9
            assert report.gap <= 1e-6 * max(1.0, report.primal)

    @allure.title("对偶值与线程数无关")
    def test_dual_deterministic(self, rng):
        p = TruncatedDistanceProblem(random_complex(rng, 3, 3), (random_complex(rng, 3, 3),))
        serial = distance_dual(p, starts=8, seed=5, scheduler=SweepScheduler(1))
        parallel = distance_dual(p, starts=8, seed=5, scheduler=SweepScheduler(4))
        assert serial == parallel

    @allure.title("非法实例")
    def test_rejections(self, rng):
        s = random_complex(rng, 2, 2)
        with pytest.raises(InvalidProblem):
            TruncatedDistanceProblem(DIAG, (s, 2.0 * s))
        with pytest.raises(InvalidProblem):
            TruncatedDistanceProblem(DIAG, (np.eye(3),))
        with pytest.raises(InvalidProblem):
            TruncatedDistanceProblem(DIAG, (np.zeros((2, 2)),))
        with pytest.raises(InvalidTruncation):
            TruncatedDistanceProblem(DIAG, (np.eye(2),), r=1)
        with pytest.raises(ValueError):
            distance_dual(TruncatedDistanceProblem(DIAG), starts=0)


@allure.feature("距离公式")
@allure.story("张量约化的等距性")
class TestReductionIsometry:

    @allure.title("20 组随机 h 与 F: ‖(M_F⊗I)h‖ 与 ‖M_F g‖ 一致（≤ 1e-7）")
    @allure.severity(allure.severity_level.CRITICAL)
    def test_random_tuples(self, rng, quadrature):
        for _ in range(20):
            basis = AlgebraBasis(AlgebraSpec.full_hinf(), int(rng.integers(0, 5)))
            F = VectorAnalyticFunction(basis, random_complex(rng, 3, basis.size))
            hs = [random_complex(rng, int(rng.integers(1, 8))) for _ in range(5)]
            report = reduction_isometry(F, hs, quadrature)
            assert report.discrepancy <= 1e-7
            with allure.step("张量一侧与多项式乘积系数的 ℓ² 范数一致"):
                exact = np.sqrt(sum(np.sum(np.abs(P.polymul(F.coefficients[k], h)) ** 2)
                                    for k in range(3) for h in hs))
                assert report.tensor_norm == pytest.approx(exact, rel=1e-10)

    @allure.title("单个 h ≡ 1 时 g ≡ 1，两侧都等于 ‖F‖_{H²}")
    def test_trivial_tuple(self, quadrature):
        F = VectorAnalyticFunction(AlgebraBasis(AlgebraSpec.full_hinf(), 1), [[1.0, 2.0], [0.0, 1j]])
        report = reduction_isometry(F, [[1.0]], quadrature)
        assert report.tensor_norm == pytest.approx(np.sqrt(6.0), abs=1e-12)
        assert report.outer_norm == pytest.approx(np.sqrt(6.0), abs=1e-12)

    @allure.title("空的 h 被拒绝")
    def test_empty(self, quadrature):
        with pytest.raises(InvalidProblem):
            reduction_isometry(VectorAnalyticFunction.constant([1.0]), [], quadrature)
