"""Environment descriptions (`EnvSpec`) and their JSON file form."""

from __future__ import annotations

import json
import re
from dataclasses import asdict, dataclass, replace
from pathlib import Path

KINDS = ("blind_craftsman", "dungeon_quest", "diamond_mine")
GEOMETRIES = ("grid", "continuous")
DEFAULT_MAX_STEPS = {"grid": 200, "continuous": 500}
SPEC_VERSION = 1


class SpecError(ValueError):
    pass


@dataclass(frozen=True)
class EnvSpec:
    """What to build: task kind, geometry and seed.

    ``width``/``height`` are cells for grids and centimetres for the
    continuous arena.  ``max_steps=0`` selects the geometry default.
    """

    kind: str
    geometry: str = "grid"
    width: float = 7
    height: float = 7
    obstacles: bool = False
    seed: int = 0
    max_steps: int = 0
    obstacle_density: float = 0.15

    def __post_init__(self):
        if self.kind not in KINDS:
            raise SpecError(f"unknown kind {self.kind!r}; expected one of {KINDS}")
        if self.geometry not in GEOMETRIES:
            raise SpecError(f"unknown geometry {self.geometry!r}")
        if self.geometry == "grid":
            if int(self.width) != self.width or int(self.height) != self.height:
                raise SpecError("grid dimensions must be integers")
            if self.width < 5 or self.height < 5:
                raise SpecError("grid dimensions must be at least 5")
        elif not (self.width > 0 and self.height > 0):
            raise SpecError("continuous dimensions must be positive")
        if self.obstacles and self.geometry != "grid":
            raise SpecError("obstacles are only supported on grids")
        if self.max_steps < 0:
            raise SpecError("max_steps must be positive")
        if not 0 <= self.obstacle_density <= 1:
            raise SpecError("obstacle_density must lie in [0, 1]")

    @property
    def steps_cap(self) -> int:
        return self.max_steps or DEFAULT_MAX_STEPS[self.geometry]

    @property
    def cells(self) -> int:
        return int(self.width) * int(self.height)

    def with_seed(self, seed: int) -> "EnvSpec":
        return replace(self, seed=seed)

    def to_dict(self) -> dict:
        return {"version": SPEC_VERSION, **asdict(self)}

    @classmethod
    def from_dict(cls, data: dict) -> "EnvSpec":
        data = dict(data)
        version = data.pop("version", SPEC_VERSION)
        if version != SPEC_VERSION:
            raise SpecError(f"unsupported spec version {version}")
        unknown = set(data) - set(cls.__dataclass_fields__)
        if unknown:
            raise SpecError(f"unknown spec fields: {sorted(unknown)}")
        return cls(**data)


_GEOM = re.compile(r"^(grid|cont|continuous):(\d+(?:\.\d+)?)x(\d+(?:\.\d+)?)$")


def parse_geometry(text: str) -> tuple[str, float, float]:
    """``grid:7x7`` or ``cont:7x7`` -> (geometry, width, height)."""
    m = _GEOM.match(text.strip())
    if not m:
        raise SpecError(f"bad geometry {text!r}; expected grid:WxH or cont:WxH")
    geom = "grid" if m.group(1) == "grid" else "continuous"
    w, h = float(m.group(2)), float(m.group(3))
    if geom == "grid":
        w, h = int(w), int(h)
    return geom, w, h


def save_spec(spec: EnvSpec, path: str | Path) -> None:
    Path(path).write_text(json.dumps(spec.to_dict(), indent=2, sort_keys=True) + "\n")


def load_spec(path: str | Path) -> EnvSpec:
    return EnvSpec.from_dict(json.loads(Path(path).read_text()))
