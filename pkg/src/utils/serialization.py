"""
序列化工具 - 用于将训练报告、配置和数组转换为JSON可序列化格式
"""

import dataclasses
import json
import math
from pathlib import Path
from typing import Any, Dict

import numpy as np
from pydantic import BaseModel


def to_serializable(obj: Any) -> Any:
    """递归地将对象转换为JSON可序列化格式"""
    if isinstance(obj, BaseModel):
        return to_serializable(obj.model_dump())
    elif dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return to_serializable(dataclasses.asdict(obj))
    elif isinstance(obj, np.ndarray):
        return to_serializable(obj.tolist())
    elif isinstance(obj, np.generic):
        return to_serializable(obj.item())
    elif isinstance(obj, float):
        # JSON has no NaN/Inf; diverged trials are recorded as null
        return obj if math.isfinite(obj) else None
    elif isinstance(obj, (int, bool, str, type(None))):
        return obj
    elif isinstance(obj, Path):
        return str(obj)
    elif isinstance(obj, (list, tuple)):
        return [to_serializable(item) for item in obj]
    elif isinstance(obj, dict):
        return {str(key): to_serializable(value) for key, value in obj.items()}
    else:
        return str(obj)  # 回退到字符串表示


def dumps(obj: Any, indent: int | None = None) -> str:
    """Deterministic JSON text: sorted keys, no locale-dependent formatting."""
    return json.dumps(to_serializable(obj), sort_keys=True, indent=indent,
                      ensure_ascii=False)


def write_json(path: str | Path, obj: Any) -> None:
    Path(path).write_text(dumps(obj, indent=2) + "\n", encoding="utf-8")


def write_json_lines(path: str | Path, rows: list[Dict[str, Any]] | list[Any]) -> None:
    text = "".join(dumps(row) + "\n" for row in rows)
    Path(path).write_text(text, encoding="utf-8")


def read_json(path: str | Path) -> Any:
    return json.loads(Path(path).read_text(encoding="utf-8"))
