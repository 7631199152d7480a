"""TSPLIB ATSP reading/writing, the known-optima registry and random instances.

Vertices are 0-indexed everywhere inside the package; TSPLIB files and the
CLI use 1-based numbering.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from importlib import resources
from pathlib import Path

import numpy as np

__all__ = [
    "AtspInstance",
    "TsplibFormatError",
    "RegistryFormatError",
    "parse_tsplib_atsp",
    "read_tsplib_atsp",
    "write_tsplib_atsp",
    "load_optima_registry",
    "read_optima_registry",
    "default_optima_registry",
    "generate_random_instance",
]


class TsplibFormatError(ValueError):
    """Raised for malformed or unsupported TSPLIB input."""


class RegistryFormatError(ValueError):
    """Raised for malformed optima registry input."""


@dataclass(frozen=True, eq=False)
class AtspInstance:
    """Complete digraph with non-negative integer arc costs.

    The diagonal of ``cost`` is stored as zero and is never read as an arc
    cost; whatever sentinel the source file carried is discarded.
    """

    name: str
    cost: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        cost = np.array(self.cost, dtype=np.int64, copy=True)
        if cost.ndim != 2 or cost.shape[0] != cost.shape[1]:
            raise ValueError("cost matrix must be square")
        if cost.shape[0] < 2:
            raise ValueError("an instance needs at least 2 vertices")
        np.fill_diagonal(cost, 0)
        if (cost < 0).any():
            raise ValueError("negative weight")
        cost.flags.writeable = False
        object.__setattr__(self, "cost", cost)

    @property
    def n(self) -> int:
        return self.cost.shape[0]

    @cached_property
    def arc_cost_sum(self) -> int:
        return int(self.cost.sum())

    @cached_property
    def c_aver(self) -> Fraction:
        """Exact mean of the n(n-1) off-diagonal costs."""
        n = self.n
        return Fraction(self.arc_cost_sum, n * (n - 1))

    @cached_property
    def rows(self) -> list[list[int]]:
        # plain lists are much faster than numpy scalars in Python loops
        return self.cost.tolist()

    def c(self, i: int, j: int) -> int:
        if i == j:
            raise ValueError(f"loop arc ({i}, {i}) is forbidden")
        return self.rows[i][j]


_HEADER_RE = re.compile(r"^\s*([A-Z_]+)\s*:\s*(.*?)\s*$")
_KNOWN_KEYS = {
    "NAME",
    "TYPE",
    "COMMENT",
    "DIMENSION",
    "CAPACITY",
    "EDGE_WEIGHT_TYPE",
    "EDGE_WEIGHT_FORMAT",
    "EDGE_DATA_FORMAT",
    "NODE_COORD_TYPE",
    "DISPLAY_DATA_TYPE",
}


def parse_tsplib_atsp(text: str, name: str | None = None) -> AtspInstance:
    """Parse an explicit FULL_MATRIX ATSP file given as a string."""
    headers: dict[str, str] = {}
    tokens: list[str] | None = None
    lines = text.splitlines()
    i = 0
    while i < len(lines):
        line = lines[i].strip()
        i += 1
        if not line:
            continue
        if line == "EOF":
            break
        if line.startswith("EDGE_WEIGHT_SECTION"):
            if tokens is not None:
                raise TsplibFormatError("duplicate header key EDGE_WEIGHT_SECTION")
            rest = line[len("EDGE_WEIGHT_SECTION"):].lstrip(" :")
            tokens = rest.split()
            # weights run until EOF or the next keyword line
            while i < len(lines) and not lines[i].lstrip()[:1].isalpha():
                tokens.extend(lines[i].split())
                i += 1
            continue
        m = _HEADER_RE.match(line)
        if m is None:
            raise TsplibFormatError(f"unrecognised line: {line!r}")
        k, v = m.group(1), m.group(2)
        if k in headers:
            raise TsplibFormatError(f"duplicate header key {k}")
        if k not in _KNOWN_KEYS:
            raise TsplibFormatError(f"unsupported header key {k}")
        headers[k] = v

    for required in ("TYPE", "DIMENSION", "EDGE_WEIGHT_TYPE", "EDGE_WEIGHT_FORMAT"):
        if required not in headers:
            raise TsplibFormatError(f"missing header key {required}")
    if tokens is None:
        raise TsplibFormatError("missing header key EDGE_WEIGHT_SECTION")
    if headers["TYPE"].split()[0].upper() != "ATSP":
        raise TsplibFormatError(f"unsupported TYPE {headers['TYPE']}")
    if headers["EDGE_WEIGHT_TYPE"].upper() != "EXPLICIT":
        raise TsplibFormatError(f"unsupported EDGE_WEIGHT_TYPE {headers['EDGE_WEIGHT_TYPE']}")
    if headers["EDGE_WEIGHT_FORMAT"].upper() != "FULL_MATRIX":
        raise TsplibFormatError(
            f"unsupported weight format {headers['EDGE_WEIGHT_FORMAT']}"
        )
    try:
        n = int(headers["DIMENSION"])
    except ValueError:
        raise TsplibFormatError(f"bad DIMENSION {headers['DIMENSION']!r}") from None
    if n < 2:
        raise TsplibFormatError("DIMENSION must be at least 2")
    if len(tokens) != n * n:
        raise TsplibFormatError(
            f"token count mismatch: expected {n * n}, found {len(tokens)}"
        )
    try:
        values = np.array([int(t) for t in tokens], dtype=np.int64).reshape(n, n)
    except ValueError:
        # some files write integral weights as floats
        try:
            floats = np.array([float(t) for t in tokens]).reshape(n, n)
        except ValueError:
            raise TsplibFormatError("non-numeric edge weight") from None
        if not np.all(floats == np.round(floats)):
            raise TsplibFormatError("non-integral edge weight") from None
        values = floats.astype(np.int64)
    off = ~np.eye(n, dtype=bool)
    if (values[off] < 0).any():
        raise TsplibFormatError("negative weight")
    return AtspInstance(name or headers.get("NAME", "unnamed"), values)


def read_tsplib_atsp(path: str | Path) -> AtspInstance:
    path = Path(path)
    text = path.read_text(encoding="utf-8", errors="replace")
    inst = parse_tsplib_atsp(text)
    if inst.name == "unnamed":
        inst = AtspInstance(path.name.split(".")[0], inst.cost)
    return inst


def write_tsplib_atsp(instance: AtspInstance, diagonal: int = 9999) -> str:
    n = instance.n
    out = [
        f"NAME: {instance.name}",
        "TYPE: ATSP",
        f"DIMENSION: {n}",
        "EDGE_WEIGHT_TYPE: EXPLICIT",
        "EDGE_WEIGHT_FORMAT: FULL_MATRIX",
        "EDGE_WEIGHT_SECTION",
    ]
    for i, row in enumerate(instance.rows):
        out.append(" ".join(str(diagonal if j == i else w) for j, w in enumerate(row)))
    out.append("EOF")
    return "\n".join(out) + "\n"


def load_optima_registry(text: str) -> dict[str, int]:
    """Parse ``name optimum`` lines; ``#`` starts a comment line."""
    registry: dict[str, int] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if len(parts) != 2:
            raise RegistryFormatError(f"line {lineno}: malformed line {raw!r}")
        name, value = parts
        try:
            opt = int(value)
        except ValueError:
            raise RegistryFormatError(f"line {lineno}: malformed optimum {value!r}") from None
        if opt <= 0:
            raise RegistryFormatError(f"line {lineno}: non-positive optimum for {name}")
        if name in registry:
            raise RegistryFormatError(f"line {lineno}: duplicate name {name}")
        registry[name] = opt
    return registry


def read_optima_registry(path: str | Path) -> dict[str, int]:
    return load_optima_registry(Path(path).read_text(encoding="utf-8"))


def default_optima_registry() -> dict[str, int]:
    """Published optima of the TSPLIB ATSP instances, bundled with the package."""
    text = resources.files("odecga").joinpath("data/atsp_optima.txt").read_text("utf-8")
    return load_optima_registry(text)


def generate_random_instance(n: int, seed: int, name: str | None = None) -> AtspInstance:
    """Off-diagonal costs uniform on [1, 100], deterministic for a seed."""
    if n < 3:
        raise ValueError(f"random instances need n >= 3, got {n}")
    rng = np.random.default_rng(seed)
    cost = rng.integers(1, 101, size=(n, n), dtype=np.int64)
    return AtspInstance(name or f"rand{n}_{seed}", cost)
