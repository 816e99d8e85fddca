import time
from dataclasses import dataclass
from typing import Any, Callable, Dict, Optional, Tuple

import numpy as np
from loguru import logger

from Hardy_Core.core.corona import CoronaProblem, CoronaReport, corona_check, corona_delta_from_grid, corona_solve
from Hardy_Core.core.duality import TruncatedDistanceProblem, distance_report
from Hardy_Core.core.exceptions import (DegenerateBoundaryData, DegreeTooSmall, HardyError,
                                        HypothesisInsufficientAtScale, Infeasible, InfeasibleConstraints,
                                        NoSolutionExists, NotConverged, ProblemFileError)
from Hardy_Core.core.numerics import DiskGrid, disk_grid, hermitian_eigh
from Hardy_Core.core.pick import (FeasibilityReport, build_pick_matrix, feasible_family, feasible_single,
                                  scaled_single_kernel_check)
from Hardy_Core.core.rkhs import as_disk_points
from Hardy_Core.core.scheduler import SweepScheduler
from Hardy_Core.core.solve import (VectorAnalyticFunction, constraint_residuals, schur_interpolate,
                                   tangential_solve, verify_solution)
from Hardy_Core.utils.fileUtils.config_loader import ConfigLoader
from Hardy_Core.utils.fileUtils.problem_file import ProblemFile, encode_function

EXIT_OK = 0
EXIT_NEGATIVE = 1
EXIT_INPUT = 2
EXIT_NOT_CONVERGED = 3

VERIFY_RESIDUAL_TOL = 1e-6

NEGATIVE_OUTCOMES = (Infeasible, InfeasibleConstraints, NoSolutionExists, DegreeTooSmall, DegenerateBoundaryData,
                     HypothesisInsufficientAtScale)

# 各类问题的主容差在配置中的位置，--tol 覆盖的就是它
PRIMARY_TOL = {
    "kernel": "numerics.psd_tol",
    "pick": "numerics.psd_tol",
    "feasible": "numerics.psd_tol",
    "solve": "numerics.minimax.tol",
    "corona": "numerics.minimax.tol",
    "distance": "duality.tol",
    "verify": "numerics.psd_tol",
}


def exit_code_for(exc: BaseException) -> int:
    if isinstance(exc, NotConverged):
        return EXIT_NOT_CONVERGED
    if isinstance(exc, NEGATIVE_OUTCOMES):
        return EXIT_NEGATIVE
    if isinstance(exc, (ProblemFileError, ValueError)):
        return EXIT_INPUT
    raise exc


@dataclass
class ExecutionResult:
    certificate: Dict[str, Any]
    exit_code: int


def _feasibility_evidence(report: FeasibilityReport) -> Dict[str, Any]:
    return {
        "min_eig": report.worst_min_eig,
        "kernel": report.kernel_tag,
        "worst_parameter": report.worst_parameter,
        "samples_tested": report.samples_tested,
        "guarantee_level": report.guarantee_level,
        "notes": list(report.notes),
    }


def _corona_evidence(report: CoronaReport) -> Dict[str, Any]:
    return {
        "min_eig": report.worst_min_eig,
        "worst_point_set": report.worst_point_set,
        "worst_points": report.worst_points,
        "worst_kernel": report.worst_kernel,
        "sets_tested": report.sets_tested,
        "kernels_tested": report.kernels_tested,
        "node_residual": report.node_residual,
        "grid_residual": report.grid_residual,
        "g_norm": report.g_norm,
        "slack": report.slack,
    }


class ProblemExecutor:
    """按问题类型分派到求解模块，生成证书与退出码"""

    def __init__(self, config: ConfigLoader, tol: Optional[float] = None):
        self.config = config
        self.tol = tol
        self.handlers: Dict[str, Callable[[ProblemFile], Tuple[str, Dict[str, Any], int]]] = {
            "kernel": self._run_kernel,
            "pick": self._run_pick,
            "feasible": self._run_feasible,
            "solve": self._run_solve,
            "corona": self._run_corona,
            "distance": self._run_distance,
            "verify": self._run_verify,
        }

    # ---- 配置 ----
    def _cfg(self, key: str) -> Any:
        return self.config.get_value(key)

    def _primary_tol(self, kind: str) -> float:
        return float(self.tol if self.tol is not None else self._cfg(PRIMARY_TOL[kind]))

    def _grid(self) -> DiskGrid:
        return disk_grid(int(self._cfg("grid.radial")), int(self._cfg("grid.angular")),
                         float(self._cfg("grid.max_radius")))

    def _scheduler(self) -> SweepScheduler:
        return SweepScheduler(int(self._cfg("parallel.max_workers")))

    def _config_echo(self, kind: str) -> Dict[str, Any]:
        echo = {
            "tol": self._primary_tol(kind),
            "numerics": self._cfg("numerics"),
            "grid": self._cfg("grid"),
            "sampling": self._cfg("sampling"),
        }
        if kind in ("feasible", "corona"):
            echo["family"] = self._cfg("family")
        if kind in ("solve", "corona"):
            echo["solve"] = self._cfg("solve")
        if kind == "distance":
            echo["duality"] = self._cfg("duality")
        return echo

    # ---- 入口 ----
    def execute(self, problem: ProblemFile) -> ExecutionResult:
        """
        执行一个问题
        :param problem: 已解析的问题文件
        :return: ExecutionResult，证书中总带有 kind、verdict 与配置回显
        """
        self.config.overlay(problem.optional("options", default={}))
        kind = problem.kind
        certificate: Dict[str, Any] = {"version": problem.version, "kind": kind}
        started = time.perf_counter()
        logger.info(f"执行问题 {problem.source}（{kind}）")
        try:
            verdict, evidence, code = self.handlers[kind](problem)
        except (HardyError, ValueError) as e:
            code = exit_code_for(e)
            verdict, evidence = type(e).__name__, self._partial_evidence(e)
            certificate["error"] = str(e)
            logger.error(f"{kind} 失败（退出码 {code}）: {e}")
        certificate["verdict"] = verdict
        certificate["evidence"] = evidence
        certificate["config"] = self._config_echo(kind)
        if self._cfg("certificate.include_timing"):
            certificate["timing"] = {"seconds": time.perf_counter() - started}
        return ExecutionResult(certificate=certificate, exit_code=code)

    @staticmethod
    def _partial_evidence(e: Exception) -> Dict[str, Any]:
        if isinstance(e, HypothesisInsufficientAtScale) and e.report is not None:
            return _corona_evidence(e.report)
        if isinstance(e, NotConverged) and e.best is not None:
            best = e.best
            return {"achieved_level": best.achieved_level, "lower_bound": best.lower_bound,
                    "iterations": best.iterations, "coefficients": best.coefficients}
        return {}

    # ---- 各类问题 ----
    def _run_kernel(self, problem: ProblemFile):
        kernel = problem.kernel_at("kernel")
        evidence: Dict[str, Any] = {"kernel": kernel.tag}
        if problem.has("pairs"):
            pairs = problem.matrix_at("pairs")
            if pairs.shape[1] != 2:
                raise ProblemFileError("pairs 的每一项须为 [z, w]", problem.position(("pairs",)))
            with problem.located("pairs"):
                evidence["values"] = np.asarray(kernel(as_disk_points(pairs[:, 0]), as_disk_points(pairs[:, 1])))
        if problem.has("points"):
            points = problem.vector_at("points")
            with problem.located("points"):
                evidence["gram"] = kernel.gram(as_disk_points(points))
        return "Evaluated", evidence, EXIT_OK

    def _run_pick(self, problem: ProblemFile):
        p = problem.tangential_problem()
        kernel = problem.kernel_at("kernel") if problem.has("kernel") else p.algebra.canonical_kernel()
        pick = build_pick_matrix(p, kernel)
        values, _ = hermitian_eigh(pick.matrix)
        psd = bool(values[0] >= -self._primary_tol("pick"))
        evidence = {"kernel": pick.kernel_tag, "matrix": pick.matrix.entries, "eigenvalues": values,
                    "min_eig": values[0], "psd": psd}
        return "Computed", evidence, EXIT_OK

    def _run_feasible(self, problem: ProblemFile):
        p = problem.tangential_problem()
        tol = self._primary_tol("feasible")
        mode = problem.optional("mode", default="single" if p.algebra.is_full else "family")
        seed = int(self._cfg("sampling.seed"))
        if mode == "single":
            kernel = problem.kernel_at("kernel") if problem.has("kernel") else p.algebra.canonical_kernel()
            report = feasible_single(p, kernel, tol)
        elif mode == "family":
            report = feasible_family(p, int(self._cfg("family.samples")), bool(self._cfg("family.refine")), tol,
                                     seed, int(self._cfg("family.refine_steps")), self._scheduler())
        elif mode == "scaled":
            c = problem.real_at("c")
            with problem.located("c"):
                report = scaled_single_kernel_check(p, c, tol, int(problem.optional("propagate", default=0)),
                                                    seed, self._scheduler())
        else:
            raise ProblemFileError(f"未知的 mode: {mode}（single | family | scaled）", problem.position(("mode",)))
        code = EXIT_OK if report.feasible else EXIT_NEGATIVE
        return report.verdict.value, _feasibility_evidence(report), code

    def _run_solve(self, problem: ProblemFile):
        p = problem.tangential_problem()
        grid = self._grid()
        scalar = p.m == 1 and p.algebra.is_full
        method = problem.optional("method", default="schur" if scalar else "tangential")
        if method == "schur":
            if not scalar:
                raise ProblemFileError("schur 方法只适用于 FullHinf 上的标量问题", problem.position(("method",)))
            f = schur_interpolate(p.points, p.targets / np.conj(p.directions[:, 0]), p.alpha,
                                  tol=self._primary_tol("verify"))
            numerator, denominator = f.rational_coefficients()
            residuals = constraint_residuals(f, p)
            evidence = {"method": "schur", "degree": f.degree, "residuals": residuals,
                        "max_residual": np.max(residuals), "grid_norm": f.grid_norm(grid),
                        "numerator": numerator, "denominator": denominator}
            return "Solved", {**evidence, "solution": encode_function(f)}, EXIT_OK
        if method != "tangential":
            raise ProblemFileError(f"未知的 method: {method}（schur | tangential）", problem.position(("method",)))

        solution = tangential_solve(p, int(self._cfg("solve.degree")), grid, tol=self._primary_tol("solve"),
                                    max_rounds=int(self._cfg("numerics.minimax.max_rounds")),
                                    bisection_steps=int(self._cfg("numerics.minimax.bisection_steps")))
        evidence = {
            "method": "tangential",
            "degree": solution.degree,
            "residuals": constraint_residuals(solution.function, p),
            "max_residual": solution.constraint_residual,
            "grid_norm": solution.grid_norm,
            "lower_bound": solution.lower_bound,
            "level": solution.level,
            "within_level": solution.within_level,
            "iterations": solution.iterations,
            "solution": encode_function(solution.function),
        }
        if solution.within_level:
            return "Solved", evidence, EXIT_OK
        return "AboveLevel", evidence, EXIT_NEGATIVE

    def _run_corona(self, problem: ProblemFile):
        F = problem.function_at("function")
        if not isinstance(F, VectorAnalyticFunction):
            raise ProblemFileError("corona 的 function 须为基系数形式", problem.position(("function",)))
        grid = self._grid()
        delta_raw = problem.require("delta")
        if delta_raw == "grid-min":
            delta = corona_delta_from_grid(F, grid) * float(problem.optional("delta_scale", default=1.0))
        else:
            delta = problem.real_at("delta")
        algebra = problem.algebra_at("algebra") if problem.has("algebra") else F.algebra
        with problem.located("delta"):
            cp = CoronaProblem(F, delta, algebra)

        samples = 0 if algebra.is_full else int(self._cfg("family.samples"))
        seed = int(self._cfg("sampling.seed"))
        psd_tol = float(self._cfg("numerics.psd_tol"))
        mode = problem.optional("mode", default="solve" if problem.has("nodes") else "check")
        if mode == "check":
            sets = problem.point_sets() if problem.has("point_sets") else [problem.vector_at("nodes")]
            with problem.located("point_sets"):
                report = corona_check(cp, sets, samples, psd_tol, seed, self._scheduler())
            evidence = {**_corona_evidence(report), "delta": delta}
            return report.verdict.value, evidence, EXIT_OK if report.passed else EXIT_NEGATIVE
        if mode != "solve":
            raise ProblemFileError(f"未知的 mode: {mode}（check | solve）", problem.position(("mode",)))

        nodes = problem.vector_at("nodes")
        with problem.located("nodes"):
            G, report = corona_solve(cp, nodes, int(self._cfg("solve.degree")), grid, samples,
                                     tol=self._primary_tol("corona"), psd_tol=psd_tol, seed=seed,
                                     max_rounds=int(self._cfg("numerics.minimax.max_rounds")),
                                     bisection_steps=int(self._cfg("numerics.minimax.bisection_steps")))
        evidence = {**_corona_evidence(report), "delta": delta, "solution": encode_function(G)}
        return "Solved", evidence, EXIT_OK

    def _run_distance(self, problem: ProblemFile):
        target = problem.matrix_at("distance", "target")
        raw = problem.optional("distance", "subspace", default=[])
        subspace = tuple(problem.matrix_at("distance", "subspace", i) for i in range(len(raw)))
        r = problem.optional("distance", "r")
        with problem.located("distance"):
            p = TruncatedDistanceProblem(target, subspace, r)
        report = distance_report(p, self._primary_tol("distance"), int(self._cfg("duality.starts")),
                                 int(self._cfg("duality.steps")), int(self._cfg("sampling.seed")),
                                 self._scheduler())
        evidence = {"primal": report.primal, "dual": report.dual, "gap": report.gap,
                    "coefficients": report.coefficients, "r": p.r}
        return "Computed", evidence, EXIT_OK

    def _run_verify(self, problem: ProblemFile):
        p = problem.tangential_problem()
        f = problem.function_at("solution")
        with problem.located("solution"):
            report = verify_solution(f, p, self._grid(), self._primary_tol("verify"))
        evidence = {"residuals": report.residuals, "max_residual": report.max_residual,
                    "grid_norm": report.grid_norm, "pick_min_eig": report.pick_min_eig,
                    "pick_psd": report.pick_psd}
        ok = report.max_residual <= VERIFY_RESIDUAL_TOL and report.pick_psd
        return ("Verified" if ok else "Rejected"), evidence, EXIT_OK if ok else EXIT_NEGATIVE
