"""JSON and plain-text rendering shared by the CLI.

Floats are written with 17 significant digits in both formats, so a text
report and its JSON twin carry the same numbers.
"""

from __future__ import annotations

import json
import math
from importlib import resources
from typing import Any


def format_number(value: float) -> str:
    if not math.isfinite(value):
        raise ValueError(f"cannot serialize non-finite number {value!r}")
    text = format(value, ".17g")
    if all(ch not in text for ch in ".en"):
        text += ".0"
    return text


def _emit(obj: Any, indent: int, level: int) -> str:
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if obj is None:
        return "null"
    if isinstance(obj, bool):
        return "true" if obj else "false"
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, float):
        return format_number(obj)
    if isinstance(obj, str):
        return json.dumps(obj, ensure_ascii=False)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {_emit(v, indent, level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        items = [pad + _emit(v, indent, level + 1) for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    if hasattr(obj, "item"):  # numpy scalar
        return _emit(obj.item(), indent, level)
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps(obj: Any, indent: int = 2) -> str:
    return _emit(obj, indent, 0) + "\n"


def flatten(obj: Any, prefix: str = "") -> list[tuple[str, Any]]:
    """Leaf (path, value) pairs in document order."""
    if isinstance(obj, dict):
        out = []
        for key, value in obj.items():
            out.extend(flatten(value, f"{prefix}.{key}" if prefix else str(key)))
        return out
    if isinstance(obj, (list, tuple)):
        out = []
        for i, value in enumerate(obj):
            out.extend(flatten(value, f"{prefix}[{i}]"))
        return out
    return [(prefix, obj)]


def format_value(value: Any) -> str:
    if value is None:
        return "-"
    if isinstance(value, bool):
        return "yes" if value else "no"
    if isinstance(value, float):
        return format_number(value)
    return str(value)


def render_text(title: str, report: dict[str, Any]) -> str:
    lines = [title, "=" * len(title)]
    leaves = flatten(report)
    width = max((len(path) for path, _ in leaves), default=0)
    for path, value in leaves:
        lines.append(f"{path.ljust(width)}  {format_value(value)}")
    return "\n".join(lines) + "\n"


def load_schema(name: str) -> dict[str, Any]:
    """Published JSON schema for a CLI report (``analyze``, ``optimize``, ``noneq``)."""
    text = resources.files("bellstat").joinpath("schemas", f"{name}.schema.json").read_text("utf-8")
    return json.loads(text)
