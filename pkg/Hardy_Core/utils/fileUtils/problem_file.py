"""
问题文件（YAML，version: 1）的读取与校验，以及证书中解的编码。
复数写作数字或 [re, im] 数对；所有解析与前置条件错误都带上 "行:列" 位置。
"""
import contextlib
import os
from dataclasses import dataclass, field
from typing import Any, Dict, Iterator, List, Optional, Tuple, Union

import numpy as np
import yaml

from Hardy_Core.core.exceptions import ProblemFileError
from Hardy_Core.core.pick import AlgebraSpec, TangentialProblem
from Hardy_Core.core.rkhs import (BlaschkeProduct, CyclicKernel, KernelSpec, ModelSpaceKernel, ModelVector,
                                  SzegoKernel, constant_projection)
from Hardy_Core.core.solve import AlgebraBasis, AnalyticMap, SchurInterpolant, VectorAnalyticFunction

SUPPORTED_VERSIONS = (1,)
KINDS = ("kernel", "pick", "feasible", "solve", "corona", "distance", "verify")

Path = Tuple[Union[str, int], ...]


def _mark(node: yaml.Node) -> str:
    return f"{node.start_mark.line + 1}:{node.start_mark.column + 1}"


def _collect_marks(node: yaml.Node, path: Path, marks: Dict[Path, str]) -> None:
    marks[path] = _mark(node)
    if isinstance(node, yaml.MappingNode):
        for key_node, value_node in node.value:
            _collect_marks(value_node, path + (key_node.value,), marks)
    elif isinstance(node, yaml.SequenceNode):
        for index, item in enumerate(node.value):
            _collect_marks(item, path + (index,), marks)


def parse_text(text: str) -> Tuple[Any, Dict[Path, str]]:
    """解析 YAML 文本，返回数据与每个节点的位置"""
    loader = yaml.SafeLoader(text)
    try:
        node = loader.get_single_node()
        if node is None:
            raise ProblemFileError("问题文件为空", "1:1")
        data = loader.construct_document(node)
    except yaml.MarkedYAMLError as e:
        mark = e.problem_mark or e.context_mark
        position = f"{mark.line + 1}:{mark.column + 1}" if mark else None
        raise ProblemFileError(f"YAML 语法错误: {e.problem or e}", position) from e
    finally:
        loader.dispose()
    marks: Dict[Path, str] = {}
    _collect_marks(node, (), marks)
    return data, marks


@dataclass
class ProblemFile:
    version: int
    kind: str
    payload: Dict[str, Any]
    marks: Dict[Path, str] = field(default_factory=dict)
    source: str = "<string>"

    # ---- 位置与取值 ----
    def position(self, path: Path) -> Optional[str]:
        """最近的已存在祖先节点的位置"""
        for cut in range(len(path), -1, -1):
            if path[:cut] in self.marks:
                return self.marks[path[:cut]]
        return None

    def has(self, *path) -> bool:
        return self._lookup(path) is not _MISSING

    def _lookup(self, path: Path) -> Any:
        value: Any = self.payload
        for key in path:
            try:
                value = value[key]
            except (KeyError, IndexError, TypeError):
                return _MISSING
        return value

    def require(self, *path) -> Any:
        value = self._lookup(path)
        if value is _MISSING:
            raise ProblemFileError(f"缺少字段 {'.'.join(str(p) for p in path)}", self.position(path))
        return value

    def optional(self, *path, default: Any = None) -> Any:
        value = self._lookup(path)
        return default if value is _MISSING or value is None else value

    @contextlib.contextmanager
    def located(self, *path) -> Iterator[None]:
        """把块内的输入校验错误改写为带位置的 ProblemFileError"""
        try:
            yield
        except ProblemFileError:
            raise
        except (ValueError, TypeError) as e:
            raise ProblemFileError(str(e), self.position(path)) from e

    # ---- 数值解码 ----
    def complex_at(self, *path) -> complex:
        return _complex(self.require(*path), self, path)

    def vector_at(self, *path) -> np.ndarray:
        raw = self.require(*path)
        if not isinstance(raw, list):
            raise ProblemFileError("此处需要复数列表", self.position(path))
        return np.array([_complex(item, self, path + (i,)) for i, item in enumerate(raw)], dtype=complex)

    def matrix_at(self, *path) -> np.ndarray:
        raw = self.require(*path)
        if not isinstance(raw, list) or not raw:
            raise ProblemFileError("此处需要非空矩阵（行的列表）", self.position(path))
        rows = [self.vector_at(*path, i) for i in range(len(raw))]
        if len({row.size for row in rows}) != 1:
            raise ProblemFileError("矩阵各行长度不一致", self.position(path))
        return np.stack(rows)

    def real_at(self, *path) -> float:
        raw = self.require(*path)
        if isinstance(raw, bool) or not isinstance(raw, (int, float)):
            raise ProblemFileError(f"此处需要实数，实际: {raw!r}", self.position(path))
        return float(raw)

    # ---- 领域对象 ----
    def blaschke_at(self, *path) -> BlaschkeProduct:
        zeros = self.vector_at(*path, "zeros")
        constant = self.complex_at(*path, "constant") if self.has(*path, "constant") else 1.0 + 0.0j
        with self.located(*path):
            return BlaschkeProduct(tuple(zeros), constant)

    def algebra_at(self, *path) -> AlgebraSpec:
        raw = self._lookup(path)
        if raw is _MISSING or raw is None or raw == "FullHinf":
            return AlgebraSpec.full_hinf()
        if isinstance(raw, dict) and "blaschke" in raw:
            return AlgebraSpec.c_plus_b(self.blaschke_at(*path, "blaschke"))
        raise ProblemFileError("algebra 须为 FullHinf 或 {blaschke: {zeros: [...]}}", self.position(path))

    def tangential_problem(self, section: str = "problem") -> TangentialProblem:
        points = self.vector_at(section, "points")
        targets = self.vector_at(section, "targets")
        if self.has(section, "directions"):
            directions = self.matrix_at(section, "directions")
        else:
            directions = np.ones((points.size, 1), dtype=complex)
        alpha = self.real_at(section, "alpha")
        algebra = self.algebra_at(section, "algebra")
        with self.located(section):
            return TangentialProblem(points, directions, targets, alpha, algebra)

    def kernel_at(self, *path) -> KernelSpec:
        variant = self.require(*path, "type")
        if variant == "szego":
            return SzegoKernel()
        blaschke = self.blaschke_at(*path, "blaschke")
        if variant == "model":
            return ModelSpaceKernel(blaschke)
        if variant == "cyclic":
            if self.has(*path, "vector"):
                vector = ModelVector(self.vector_at(*path, "vector"))
            else:
                vector = constant_projection(blaschke)
            with self.located(*path, "vector"):
                return CyclicKernel(blaschke, vector)
        raise ProblemFileError(f"未知的核类型: {variant}（szego | model | cyclic）", self.position(path + ("type",)))

    def function_at(self, *path) -> AnalyticMap:
        """基系数形式的 VectorAnalyticFunction，或 schur 链形式的 SchurInterpolant"""
        if self.has(*path, "schur"):
            chain = path + ("schur",)
            nodes = self.vector_at(*chain, "nodes") if self.optional(*chain, "nodes") else np.zeros(0, complex)
            gammas = self.vector_at(*chain, "gammas") if self.optional(*chain, "gammas") else np.zeros(0, complex)
            if nodes.size != gammas.size:
                raise ProblemFileError("schur 链的 nodes 与 gammas 长度不一致", self.position(chain))
            return SchurInterpolant(self.real_at(*chain, "alpha"), nodes, gammas, self.complex_at(*chain, "terminal"))
        algebra = self.algebra_at(*path, "algebra")
        degree = self.require(*path, "degree")
        if isinstance(degree, bool) or not isinstance(degree, int):
            raise ProblemFileError(f"degree 必须为整数: {degree!r}", self.position(path + ("degree",)))
        coefficients = self.matrix_at(*path, "coefficients")
        with self.located(*path):
            return VectorAnalyticFunction(AlgebraBasis(algebra, degree), coefficients)

    def point_sets(self) -> List[np.ndarray]:
        raw = self.require("point_sets")
        if not isinstance(raw, list) or not raw:
            raise ProblemFileError("point_sets 须为非空的点集列表", self.position(("point_sets",)))
        return [self.vector_at("point_sets", i) for i in range(len(raw))]


class _Missing:
    pass


_MISSING = _Missing()


def _complex(raw: Any, problem: ProblemFile, path: Path) -> complex:
    if isinstance(raw, bool):
        raise ProblemFileError(f"此处需要复数，实际: {raw!r}", problem.position(path))
    if isinstance(raw, (int, float)):
        return complex(float(raw), 0.0)
    if (isinstance(raw, list) and len(raw) == 2
            and all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in raw)):
        return complex(float(raw[0]), float(raw[1]))
    raise ProblemFileError(f"复数须写作数字或 [re, im]，实际: {raw!r}", problem.position(path))


def parse_problem(text: str, source: str = "<string>", kind: Optional[str] = None) -> ProblemFile:
    """
    解析问题文件文本
    :param text: YAML 文本
    :param source: 来源（用于日志）
    :param kind: 命令行子命令；文件中的 kind 缺省时取此值，给出时必须一致
    """
    data, marks = parse_text(text)
    if not isinstance(data, dict):
        raise ProblemFileError("问题文件顶层必须是映射", marks.get(()))
    version = data.get("version")
    if version not in SUPPORTED_VERSIONS:
        raise ProblemFileError(f"不支持的版本: {version!r}", marks.get(("version",), marks.get(())))
    file_kind = data.get("kind", kind)
    if file_kind not in KINDS:
        raise ProblemFileError(f"未知的问题类型: {file_kind!r}", marks.get(("kind",), marks.get(())))
    if kind is not None and file_kind != kind:
        raise ProblemFileError(f"子命令 {kind} 与文件中的 kind: {file_kind} 不一致", marks.get(("kind",)))
    options = data.get("options", {})
    if options is not None and not isinstance(options, dict):
        raise ProblemFileError("options 必须是映射", marks.get(("options",)))
    return ProblemFile(version=version, kind=file_kind, payload=data, marks=marks, source=source)


def load_problem(path: str, kind: Optional[str] = None) -> ProblemFile:
    if not os.path.exists(path):
        raise ProblemFileError(f"问题文件不存在: {path}")
    with open(path, "r", encoding="utf-8") as f:
        return parse_problem(f.read(), source=path, kind=kind)


# ---- 证书中的编码 ----
def encode_complex(z: complex) -> List[float]:
    z = complex(z)
    return [float(z.real), float(z.imag)]


def encode_vector(values) -> List[List[float]]:
    return [encode_complex(z) for z in np.ravel(values)]


def encode_matrix(values) -> List[List[List[float]]]:
    return [encode_vector(row) for row in np.atleast_2d(values)]


def encode_algebra(algebra: AlgebraSpec) -> Union[str, Dict[str, Any]]:
    if algebra.is_full:
        return "FullHinf"
    b = algebra.blaschke
    return {"blaschke": {"zeros": encode_vector(b.zeros), "constant": encode_complex(b.unimodular_constant)}}


def encode_function(f: AnalyticMap) -> Dict[str, Any]:
    """与 function_at 可读的格式一致，verify 可直接使用"""
    if isinstance(f, SchurInterpolant):
        return {"schur": {"alpha": f.alpha, "nodes": encode_vector(f.nodes), "gammas": encode_vector(f.gammas),
                          "terminal": encode_complex(f.terminal)}}
    return {"algebra": encode_algebra(f.basis.algebra), "degree": f.basis.degree,
            "coefficients": encode_matrix(f.coefficients)}
