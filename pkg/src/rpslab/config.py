"""Sectioned key = value experiment configuration with a typed schema.

Every key is parsed and type-checked at load time, so a malformed file is
rejected before any computation starts. ``dumps`` renders the typed values
canonically, which makes load -> save -> load an identity.
"""

from __future__ import annotations

import configparser
import io
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable

from .errors import InvalidInput

COMMANDS = ("solve", "oracle", "verify", "probe")
NONE_WORDS = ("", "none", "null")


def _float(v: str) -> float:
    return float(v)


def _int(v: str) -> int:
    f = float(v)
    if not f.is_integer():
        raise ValueError(f"{v!r} is not an integer")
    return int(f)


def _bool(v: str) -> bool:
    low = v.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"{v!r} is not a boolean")


def _opt(conv: Callable[[str], Any]) -> Callable[[str], Any]:
    def parse(v: str):
        return None if v.strip().lower() in NONE_WORDS else conv(v)

    parse.__name__ = f"optional {conv.__name__.strip('_')}"
    return parse


def _list(conv: Callable[[str], Any]) -> Callable[[str], tuple]:
    def parse(v: str):
        parts = [p.strip() for p in v.replace(";", ",").split(",")]
        return tuple(conv(p) for p in parts if p)

    parse.__name__ = f"list of {conv.__name__.strip('_')}"
    return parse


def _str(v: str) -> str:
    return v.strip()


FLOAT, INT, BOOL, STR = _float, _int, _bool, _str
OPT_FLOAT = _opt(_float)
FLOATS, INTS, STRS = _list(_float), _list(_int), _list(_str)

# section -> key -> (parser, default)
SCHEMA: dict[str, dict[str, tuple[Callable[[str], Any], Any]]] = {
    "run": {"command": (STR, None), "seed": (INT, 20240611), "out": (STR, "out")},
    "grid": {"half_width": (FLOAT, 20.0), "size": (INT, 4096)},
    "potential": {
        "kind": (STR, "zero"),
        "eps": (FLOAT, 0.1),
        "mass": (FLOAT, 1.0),
        "value": (FLOAT, 0.0),
        "M": (FLOAT, 32.0),
        "N": (FLOAT, 64.0),
        "r": (FLOAT, 2.0),
        "gamma": (FLOAT, 0.5),
        "delta0": (FLOAT, 0.0),
    },
    "data": {"kind": (STR, "gaussian"), "width": (FLOAT, 1.0), "center": (FLOAT, 0.0), "k0": (FLOAT, 0.0)},
    "evolution": {
        "dt": (FLOAT, 1e-3),
        "t_final": (FLOAT, 0.1),
        "lam": (FLOAT, 0.0),
        "p": (FLOAT, 0.0),
        "snapshot_stride": (INT, 10),
        "nonlinear": (BOOL, False),
        "norm_orders": (FLOATS, (1.0,)),
        "decay_tol": (OPT_FLOAT, 1e-8),
        "save_snapshots": (BOOL, False),
    },
    "oracle": {
        "kind": (STR, "B"),
        "ladder": (FLOATS, ()),
        "r": (FLOAT, 2.0),
        "s": (FLOAT, 2.25),
        "n": (FLOAT, 64.0),
        "tolerance": (FLOAT, 0.15),
    },
    "probe": {
        "family": (STR, "delta_eps"),
        "s_list": (FLOATS, (1.4, 1.6)),
        "ladder": (FLOATS, ()),
        "ratio_threshold": (FLOAT, 3.0),
        "half_width": (FLOAT, 40.0),
        "size": (INT, 2**14),
        "t_final": (FLOAT, 0.5),
        "dt": (OPT_FLOAT, None),
        "dt_max": (FLOAT, 1e-3),
        "dt_factor": (FLOAT, 0.15),
        "mass": (FLOAT, 1.0),
        "decay_tol": (OPT_FLOAT, 1e-3),
        "r": (FLOAT, 2.0),
        "n": (FLOAT, 64.0),
        "expect_bounded": (FLOATS, ()),
        "expect_growing": (FLOATS, ()),
        "jump_tolerance": (OPT_FLOAT, None),
    },
    "verify": {"checks": (STRS, ("all",))},
}

CHECK_PREFIX = "check."


def _render(v: Any) -> str:
    if v is None:
        return "none"
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, tuple):
        return ", ".join(_render(x) for x in v)
    return str(v)


@dataclass
class ExperimentConfig:
    """Typed sections. ``sections[name][key]`` holds parsed values, defaults filled in."""

    sections: dict[str, dict[str, Any]] = field(default_factory=dict)
    path: Path | None = None

    @property
    def command(self) -> str:
        return self.sections["run"]["command"]

    def section(self, name: str) -> dict[str, Any]:
        if name in self.sections:
            return self.sections[name]
        if name in SCHEMA:
            return {k: d for k, (_, d) in SCHEMA[name].items()}
        raise InvalidInput(f"no section [{name}]")

    def check_params(self, name: str) -> dict[str, Any]:
        return self.sections.get(CHECK_PREFIX + name, {})

    def dumps(self) -> str:
        out = []
        for name in sorted(self.sections, key=lambda n: (n != "run", n)):
            out.append(f"[{name}]")
            for k in sorted(self.sections[name]):
                out.append(f"{k} = {_render(self.sections[name][k])}")
            out.append("")
        return "\n".join(out)

    def save(self, path) -> Path:
        path = Path(path)
        path.write_text(self.dumps(), encoding="utf-8")
        return path

    def __eq__(self, other) -> bool:
        return isinstance(other, ExperimentConfig) and self.sections == other.sections


def _check_schema(name: str):
    """Schema of a ``[check.<name>]`` section, taken from the check registry."""
    from .checks import REGISTRY

    check = name[len(CHECK_PREFIX):]
    if check not in REGISTRY:
        raise InvalidInput(f"unknown check section [{name}]")
    return REGISTRY[check].params


def loads(text: str, path: Path | None = None) -> ExperimentConfig:
    parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
    parser.optionxform = str  # keep M and N distinct from m and n
    try:
        parser.read_file(io.StringIO(text))
    except configparser.Error as exc:
        raise InvalidInput(f"malformed config: {exc}") from exc
    sections: dict[str, dict[str, Any]] = {}
    for name in parser.sections():
        if name.startswith(CHECK_PREFIX):
            schema = _check_schema(name)
        elif name in SCHEMA:
            schema = SCHEMA[name]
        else:
            raise InvalidInput(f"unknown section [{name}]")
        values = {k: d for k, (_, d) in schema.items()}
        for key, raw in parser.items(name):
            if key not in schema:
                raise InvalidInput(f"unknown key {key!r} in [{name}]")
            conv = schema[key][0]
            try:
                values[key] = conv(raw)
            except (TypeError, ValueError) as exc:
                raise InvalidInput(f"[{name}] {key} = {raw!r}: expected {conv.__name__.strip('_')} ({exc})") from exc
        sections[name] = values
    if "run" not in sections or sections["run"]["command"] is None:
        raise InvalidInput("config needs [run] command = solve|oracle|verify|probe")
    if sections["run"]["command"] not in COMMANDS:
        raise InvalidInput(f"unknown command {sections['run']['command']!r}")
    return ExperimentConfig(sections, path)


def load(path) -> ExperimentConfig:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise InvalidInput(f"cannot read config {path}: {exc}") from exc
    return loads(text, path)
