import json
import math
import sys
from enum import Enum
from typing import Any, Dict, Optional, TextIO

import numpy as np
from loguru import logger

from Hardy_Core.core.rkhs import ModelVector

FORMATS = ("json", "text")


def to_jsonable(value: Any) -> Any:
    """把证书中的 numpy 数值、复数、枚举等转换成 JSON 可表示的值；复数写作 [re, im]"""
    if isinstance(value, dict):
        return {str(k): to_jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return [to_jsonable(v) for v in value.tolist()]
    if isinstance(value, Enum):
        return value.value
    if isinstance(value, ModelVector):
        return to_jsonable(value.coefficients)
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (complex, np.complexfloating)):
        return [_finite(float(value.real)), _finite(float(value.imag))]
    if isinstance(value, (float, np.floating)):
        return _finite(float(value))
    return value


def _finite(x: float) -> Any:
    # JSON 不允许 NaN/Infinity
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return x


class CertificateReporter:
    """证书渲染：完整拼装后一次性写出"""

    def __init__(self, output_format: str = "json"):
        if output_format not in FORMATS:
            raise ValueError(f"未知的输出格式: {output_format}")
        self.output_format = output_format

    def render(self, certificate: Dict[str, Any]) -> str:
        data = to_jsonable(certificate)
        if self.output_format == "json":
            return json.dumps(data, sort_keys=True, indent=2, ensure_ascii=False) + "\n"
        return self._render_text(data)

    @staticmethod
    def _render_text(data: Dict[str, Any]) -> str:
        lines = [f"kind: {data.get('kind')}", f"verdict: {data.get('verdict')}"]
        if "error" in data:
            lines.append(f"error: {data['error']}")
        for key, value in sorted(data.get("evidence", {}).items()):
            if isinstance(value, list) and len(value) > 8:
                value = f"[{len(value)} 项]"
            lines.append(f"  {key}: {value}")
        return "\n".join(lines) + "\n"

    def write(self, certificate: Dict[str, Any], stream: Optional[TextIO] = None) -> str:
        """
        输出证书
        :param certificate: 证书字典
        :param stream: 输出流，默认标准输出
        :return: 写出的文本
        """
        text = self.render(certificate)
        out = stream or sys.stdout
        out.write(text)
        out.flush()
        logger.debug(f"证书已写出（{self.output_format}，{len(text)} 字符）")
        return text
