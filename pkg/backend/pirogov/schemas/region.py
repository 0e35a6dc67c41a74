"""
Region JSON schema.

{"dim": d, "geometry": "free" | {"torus": n},
 "vertices": [[x1, ..., xd], ...] | {"box": [[lo1, hi1], ...]}}
"""

import json
from pathlib import Path
from typing import List, Literal, Union

from pydantic import BaseModel, Field, ValidationError, model_validator

from pirogov.core.exceptions import GeometryError
from pirogov.models.lattice import Region


class TorusGeometry(BaseModel):
    """Torus geometry of side n."""

    torus: int = Field(..., ge=1, description="Side n of the torus")


class BoxVertices(BaseModel):
    """Inclusive integer box shorthand."""

    box: List[List[int]] = Field(..., min_length=1, description="[[lo1, hi1], ...] per axis")

    @model_validator(mode="after")
    def _check_bounds(self) -> "BoxVertices":
        for axis in self.box:
            if len(axis) != 2:
                raise ValueError("every box axis needs exactly [lo, hi]")
        return self


class RegionSpec(BaseModel):
    """Schema for a region file."""

    dim: int = Field(..., ge=1, description="Lattice dimension d")
    geometry: Union[Literal["free"], TorusGeometry] = Field("free", description="free or {\"torus\": n}")
    vertices: Union[List[List[int]], BoxVertices] = Field(..., description="Point list or box shorthand")

    @model_validator(mode="after")
    def _check_dimension(self) -> "RegionSpec":
        if isinstance(self.vertices, BoxVertices):
            if len(self.vertices.box) != self.dim:
                raise ValueError(f"box has {len(self.vertices.box)} axes, expected {self.dim}")
        elif any(len(p) != self.dim for p in self.vertices):
            raise ValueError(f"every vertex needs {self.dim} coordinates")
        return self

    @property
    def torus(self):
        return None if self.geometry == "free" else self.geometry.torus

    def to_region(self) -> Region:
        if isinstance(self.vertices, BoxVertices):
            return Region.from_bounds(self.vertices.box, self.torus)
        return Region(self.dim, frozenset(tuple(p) for p in self.vertices), self.torus)

    @classmethod
    def from_region(cls, region: Region) -> "RegionSpec":
        geometry = "free" if region.torus is None else TorusGeometry(torus=region.torus)
        return cls(dim=region.dim, geometry=geometry, vertices=[list(p) for p in region.sorted_vertices])


def parse_region(payload: Union[str, dict]) -> Region:
    """
    Build a Region from JSON text or an already decoded document.

    Raises:
        GeometryError: If the document does not match the schema or the points are invalid
    """
    try:
        data = json.loads(payload) if isinstance(payload, str) else payload
        return RegionSpec.model_validate(data).to_region()
    except (ValidationError, ValueError) as exc:
        raise GeometryError(f"invalid region JSON: {exc}") from exc


def load_region(path: Union[str, Path]) -> Region:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise GeometryError(f"cannot read region file {path}: {exc}") from exc
    return parse_region(text)
