"""Scene model: tiny triangle meshes the simulator pretends to explore.

Scene files are JSON ``{"name": ..., "models": [{"name": ...,
"vertices": [[x,y,z], ...], "triangles": [[i,j,k], ...]}]}``. Three
sample scenes ship with the package: an inclined ramp, a cone-shaped
vent and a stepped terrace.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass
from importlib import resources

from ..errors import InvalidInput, NotFound

BUNDLED_SCENES = ("ramp", "terrace", "vent_cone")


@dataclass(frozen=True)
class Model:
    name: str
    vertices: tuple
    triangles: tuple


@dataclass(frozen=True)
class Scene:
    name: str
    models: tuple


def _validate_scene(obj) -> Scene:
    if not isinstance(obj, dict) or set(obj) != {"name", "models"}:
        raise InvalidInput("scene must be {name, models}")
    name = obj["name"]
    if not isinstance(name, str) or not name:
        raise InvalidInput("scene name must be a non-empty string")
    if not isinstance(obj["models"], list) or not obj["models"]:
        raise InvalidInput("scene needs at least one model")
    models = []
    for raw in obj["models"]:
        if not isinstance(raw, dict) or set(raw) != {"name", "vertices", "triangles"}:
            raise InvalidInput("model must be {name, vertices, triangles}")
        vertices = []
        for vertex in raw["vertices"]:
            if not isinstance(vertex, list) or len(vertex) != 3:
                raise InvalidInput("vertex must be [x, y, z]")
            point = tuple(float(c) for c in vertex)
            if not all(math.isfinite(c) for c in point):
                raise InvalidInput(f"vertex has non-finite coordinate: {vertex!r}")
            vertices.append(point)
        triangles = []
        for tri in raw["triangles"]:
            if not isinstance(tri, list) or len(tri) != 3:
                raise InvalidInput("triangle must be [i, j, k]")
            idx = tuple(int(i) for i in tri)
            if any(i < 0 or i >= len(vertices) for i in idx):
                raise InvalidInput(f"triangle index out of range: {tri!r}")
            triangles.append(idx)
        models.append(
            Model(name=str(raw["name"]), vertices=tuple(vertices), triangles=tuple(triangles))
        )
    return Scene(name=name, models=tuple(models))


def load_scene_file(path: str) -> Scene:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            obj = json.load(fh)
    except FileNotFoundError:
        raise NotFound(f"no scene file at {path}") from None
    except ValueError as exc:
        raise InvalidInput(f"scene file {path} is not valid JSON: {exc}") from None
    return _validate_scene(obj)


def load_scene(name_or_path: str) -> Scene:
    """Load a bundled scene by name, or any scene file by path."""
    if os.path.isfile(name_or_path):
        return load_scene_file(name_or_path)
    if name_or_path in BUNDLED_SCENES:
        data = resources.files("labbook.vftsim").joinpath(f"scenes/{name_or_path}.json")
        return _validate_scene(json.loads(data.read_text(encoding="utf-8")))
    raise NotFound(f"unknown scene: {name_or_path!r} (bundled: {', '.join(BUNDLED_SCENES)})")
