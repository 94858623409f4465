"""``key = value`` run configuration files."""

from __future__ import annotations

import re
from dataclasses import dataclass
from pathlib import Path

from .scheme import STARTUPS, Params

REQUIRED = ("epsilon", "nu", "lambda", "tau", "n_cells", "t_end")
OPTIONAL = ("init_case", "seed", "output_dir", "diag_every", "snapshot_every", "startup")
INIT_CASES = ("default_smooth", "equilibrium", "random", "from_snapshot")

_INIT_RE = re.compile(r"^(\w+)\s*(?:\((.*)\))?$")


class ConfigError(ValueError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


@dataclass(frozen=True)
class RunConfig:
    params: Params
    init_case: str = "default_smooth"
    seed: int = 0
    snapshot_path: Path | None = None
    output_dir: Path = Path("output")
    diag_every: int = 1
    snapshot_every: int = 0
    startup: str = "copy_level"


def _number(key: str, raw: str, line: int, kind=float):
    try:
        value = kind(raw)
    except ValueError:
        raise ConfigError(f"{key}: malformed number {raw!r}", line) from None
    return value


def parse_config(text: str) -> RunConfig:
    """Parse and validate a configuration document.

    Blank lines and ``#`` comments are ignored.  Unknown and duplicate keys
    are errors.
    """
    entries: dict[str, tuple[str, int]] = {}
    for lineno, raw_line in enumerate(text.splitlines(), start=1):
        line = raw_line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"expected 'key = value', got {raw_line.strip()!r}", lineno)
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in REQUIRED and key not in OPTIONAL:
            raise ConfigError(f"unknown key {key!r}", lineno)
        if key in entries:
            raise ConfigError(f"duplicate key {key!r} (first set on line {entries[key][1]})", lineno)
        entries[key] = (value, lineno)

    missing = [k for k in REQUIRED if k not in entries]
    if missing:
        raise ConfigError(f"missing required key(s): {', '.join(missing)}")

    values = {}
    for key in ("epsilon", "nu", "lambda", "tau", "t_end"):
        raw, lineno = entries[key]
        v = _number(key, raw, lineno)
        if not v > 0 or v == float("inf"):
            raise ConfigError(f"{key} must be a positive finite number, got {raw}", lineno)
        values[key] = v
    raw, lineno = entries["n_cells"]
    n = _number("n_cells", raw, lineno, int)
    if n < 2:
        raise ConfigError(f"n_cells must be >= 2, got {n}", lineno)

    params = Params(values["epsilon"], values["nu"], values["lambda"], values["tau"], n, values["t_end"])
    kwargs: dict = {}

    if "seed" in entries:
        raw, lineno = entries["seed"]
        kwargs["seed"] = _number("seed", raw, lineno, int)
    if "init_case" in entries:
        raw, lineno = entries["init_case"]
        m = _INIT_RE.match(raw)
        if not m or m.group(1) not in INIT_CASES:
            raise ConfigError(f"init_case must be one of {', '.join(INIT_CASES)}, got {raw!r}", lineno)
        case, arg = m.group(1), m.group(2)
        if case == "random" and arg:
            if "seed" in kwargs:
                raise ConfigError("seed given both in init_case and as a key", lineno)
            kwargs["seed"] = _number("init_case seed", arg.strip(), lineno, int)
        elif case == "from_snapshot":
            if not arg or not arg.strip():
                raise ConfigError("from_snapshot needs a path: from_snapshot(<path>)", lineno)
            kwargs["snapshot_path"] = Path(arg.strip())
        elif arg:
            raise ConfigError(f"init_case {case} takes no argument", lineno)
        kwargs["init_case"] = case
    if "output_dir" in entries:
        kwargs["output_dir"] = Path(entries["output_dir"][0])
    for key, lowest in (("diag_every", 1), ("snapshot_every", 0)):
        if key in entries:
            raw, lineno = entries[key]
            v = _number(key, raw, lineno, int)
            if v < lowest:
                raise ConfigError(f"{key} must be >= {lowest}, got {v}", lineno)
            kwargs[key] = v
    if "startup" in entries:
        raw, lineno = entries["startup"]
        if raw not in STARTUPS:
            raise ConfigError(f"startup must be one of {', '.join(STARTUPS)}, got {raw!r}", lineno)
        kwargs["startup"] = raw
    return RunConfig(params=params, **kwargs)


def load_config(path) -> RunConfig:
    return parse_config(Path(path).read_text())
