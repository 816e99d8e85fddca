import argparse
import sys
from typing import List, Optional

from Hardy_Core.core.exceptions import ProblemFileError
from Hardy_Core.core.executor import EXIT_INPUT, ProblemExecutor
from Hardy_Core.core.reporter import FORMATS, CertificateReporter
from Hardy_Core.utils.fileUtils.config_loader import ConfigLoader
from Hardy_Core.utils.fileUtils.problem_file import KINDS, load_problem
from Hardy_Core.utils.logUtils.logger import hardy_logger

# 命令行参数与配置键的对应关系
FLAG_KEYS = {
    "grid_radial": "grid.radial",
    "grid_angular": "grid.angular",
    "grid_radius": "grid.max_radius",
    "degree": "solve.degree",
    "samples": "family.samples",
    "seed": "sampling.seed",
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hardy-interp",
                                     description="读取问题文件，求解切向插值 / corona / 距离问题并输出证书")
    parser.add_argument("command", choices=KINDS, help="子命令")
    parser.add_argument("problem_path", help="YAML 问题文件路径")
    parser.add_argument("--tol", type=float, help="该子命令的主容差")
    parser.add_argument("--grid-radial", type=int, help="网格径向层数")
    parser.add_argument("--grid-angular", type=int, help="网格每层角度数")
    parser.add_argument("--grid-radius", type=float, help="网格最大半径")
    parser.add_argument("--degree", type=int, help="解的基次数")
    parser.add_argument("--samples", type=int, help="核族采样数")
    parser.add_argument("--seed", type=int, help="随机种子")
    parser.add_argument("--output", choices=FORMATS, default="json", help="证书格式")
    parser.add_argument("--config", help="配置文件路径（可选）")
    parser.add_argument("--log-level", help="日志级别，覆盖配置中的 logging.level")
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)

    config = ConfigLoader(args.config)
    hardy_logger.configure(config, level=args.log_level)
    reporter = CertificateReporter(args.output)

    try:
        problem = load_problem(args.problem_path, kind=args.command)
    except ProblemFileError as e:
        hardy_logger.error(f"问题文件无效: {e}")
        reporter.write({"kind": args.command, "verdict": "ProblemFileError", "error": str(e), "evidence": {}})
        return EXIT_INPUT

    # 命令行参数优先于问题文件中的 options
    config.overlay(problem.optional("options", default={}))
    problem.payload.pop("options", None)
    for flag, key in FLAG_KEYS.items():
        value = getattr(args, flag)
        if value is not None:
            config.update_config(key, value)

    result = ProblemExecutor(config, tol=args.tol).execute(problem)
    reporter.write(result.certificate)
    return result.exit_code


if __name__ == "__main__":
    sys.exit(main())
