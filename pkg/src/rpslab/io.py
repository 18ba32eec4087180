"""Binary field files (RPSF1) and deterministic CSV/JSON writers."""

from __future__ import annotations

import json
import math
import struct
from pathlib import Path
from typing import Any, Iterable, Sequence

import numpy as np

from .errors import InvalidInput
from .spectral import Field, Grid

MAGIC = b"RPSF"
VERSION = 1
_HEADER = struct.Struct("<4sIQdB")
_SPACE_FLAG = {"physical": 0, "frequency": 1}
_FLAG_SPACE = {v: k for k, v in _SPACE_FLAG.items()}


def encode_field(f: Field) -> bytes:
    head = _HEADER.pack(MAGIC, VERSION, f.grid.size, f.grid.half_width, _SPACE_FLAG[f.space])
    return head + np.ascontiguousarray(f.values, dtype="<c16").tobytes()


def decode_field(data: bytes) -> Field:
    if len(data) < _HEADER.size:
        raise InvalidInput("truncated RPSF header")
    magic, version, k, half_width, flag = _HEADER.unpack_from(data)
    if magic != MAGIC:
        raise InvalidInput(f"bad magic {magic!r}")
    if version != VERSION:
        raise InvalidInput(f"unsupported RPSF version {version}")
    if flag not in _FLAG_SPACE:
        raise InvalidInput(f"bad space flag {flag}")
    body = data[_HEADER.size:]
    if len(body) != 16 * k:
        raise InvalidInput(f"expected {16 * k} payload bytes, got {len(body)}")
    values = np.frombuffer(body, dtype="<c16").astype(np.complex128)
    return Field(Grid(half_width, k), values, _FLAG_SPACE[flag])


def write_field(path, f: Field) -> Path:
    path = Path(path)
    path.write_bytes(encode_field(f))
    return path


def read_field(path) -> Field:
    return decode_field(Path(path).read_bytes())


def fmt_float(x: float) -> str:
    """17-significant-digit rendering used by every text artifact."""
    x = float(x)
    if math.isnan(x):
        return "NaN"
    if math.isinf(x):
        return "Infinity" if x > 0 else "-Infinity"
    return format(x, ".17g")


def _cell(v: Any) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return fmt_float(v)
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return str(v)


def write_csv(path, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> Path:
    path = Path(path)
    lines = [",".join(header)]
    lines += [",".join(_cell(v) for v in row) for row in rows]
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def dumps(obj: Any, indent: int = 2, _level: int = 0) -> str:
    """JSON text with floats fixed at 17 significant digits and sorted keys."""
    pad = " " * (indent * (_level + 1))
    end = " " * (indent * _level)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [
            f"{pad}{json.dumps(str(k))}: {dumps(v, indent, _level + 1)}"
            for k, v in sorted(obj.items(), key=lambda kv: str(kv[0]))
        ]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        items = [pad + dumps(v, indent, _level + 1) for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    if isinstance(obj, np.ndarray):
        return dumps(obj.tolist(), indent, _level)
    if obj is None or isinstance(obj, (bool, np.bool_)):
        return json.dumps(None if obj is None else bool(obj))
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return fmt_float(obj)
    return json.dumps(str(obj))


def write_json(path, obj: Any) -> Path:
    path = Path(path)
    path.write_text(dumps(obj) + "\n", encoding="utf-8")
    return path
