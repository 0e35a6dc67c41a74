"""
Run configuration shared by the count, sample and oracle commands.

This module validates the parameter convention of each model and resolves
the contour activity z from the physical parameter.
"""

import math
from pathlib import Path
from typing import Any, Dict, Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

MODELS = ("hardcore-polymer", "ising-polymer", "potts-contour", "hardcore-contour")
CONTOUR_MODELS = ("potts-contour", "hardcore-contour")


class RunConfig(BaseModel):
    """
    Schema for one run of the command-line surface.

    Parameter convention per model:
        hardcore-polymer: z
        ising-polymer: z and beta
        potts-contour: z or beta (z = e^-beta)
        hardcore-contour: z or lambda (z = 1/lambda)
    """

    model_config = ConfigDict(populate_by_name=True, extra="forbid")

    command: Literal["count", "sample", "oracle"] = Field(..., description="CLI verb")
    model: Literal["hardcore-polymer", "ising-polymer", "potts-contour", "hardcore-contour"]
    q: Optional[int] = Field(None, ge=2, description="Number of Potts colours")
    dim: int = Field(2, ge=1, description="Lattice dimension for torus runs")

    geometry: Literal["free", "torus"] = Field("free", description="free region or torus")
    region_file: Optional[Path] = Field(None, description="Region JSON file")
    region: Optional[Dict[str, Any]] = Field(None, description="Inline region JSON document")
    n: Optional[int] = Field(None, ge=1, description="Torus side")
    boundary: Optional[str] = Field(None, description="Ground state of the padded boundary")

    z: Optional[float] = Field(None, description="Activity")
    beta: Optional[float] = Field(None, description="Inverse temperature")
    lam: Optional[float] = Field(None, alias="lambda", description="Hard-core fugacity")
    delta: Optional[float] = Field(None, gt=0, description="Zero-free radius override")
    epsilon: Optional[float] = Field(None, gt=0, description="Relative error or TV target")
    m: Optional[int] = Field(None, ge=1, description="Truncation order override")

    seed: int = Field(0, ge=0, description="Random seed")
    samples: int = Field(1, ge=1, description="Number of draws")
    backend: Literal["exact", "float"] = Field("exact", description="Coefficient format of series in artifacts")
    exact: bool = Field(False, description="Use exact samplers (verification scale)")

    engine: Optional[Literal["auto", "cluster", "newton"]] = None
    cluster_method: Optional[Literal["growth", "trees"]] = None
    force: bool = False
    threads: Optional[int] = Field(None, ge=0)
    exact_big: bool = False
    floor_constant: Optional[float] = Field(None, gt=0)
    output: Optional[Path] = None

    @field_validator("boundary")
    @classmethod
    def _lower_boundary(cls, value: Optional[str]) -> Optional[str]:
        return value.lower() if isinstance(value, str) else value

    @model_validator(mode="after")
    def _check_convention(self) -> "RunConfig":
        given = {name for name in ("z", "beta", "lam") if getattr(self, name) is not None}
        label = {"z": "z", "beta": "beta", "lam": "lambda"}
        if self.model == "hardcore-polymer":
            allowed = [{"z"}]
        elif self.model == "ising-polymer":
            allowed = [{"z", "beta"}]
        elif self.model == "potts-contour":
            allowed = [{"z"}, {"beta"}]
        else:
            allowed = [{"z"}, {"lam"}]
        if given not in allowed:
            wanted = " or ".join("+".join(label[p] for p in sorted(option)) for option in allowed)
            have = ", ".join(label[p] for p in sorted(given)) or "nothing"
            raise ValueError(f"{self.model} needs exactly {wanted}, got {have}")

        if self.model == "potts-contour" and self.q is None:
            raise ValueError("potts-contour needs q")
        if self.model != "potts-contour" and self.q is not None:
            raise ValueError("q only applies to potts-contour")
        if self.beta is not None and self.beta <= 0 and self.model == "potts-contour":
            raise ValueError("beta must be positive")
        if self.lam is not None and self.lam <= 0:
            raise ValueError("lambda must be positive")

        if self.geometry == "torus":
            if self.n is None:
                raise ValueError("torus geometry needs n")
            if self.region_file is not None or self.region is not None:
                raise ValueError("torus geometry takes n, not a region")
        else:
            if (self.region_file is None) == (self.region is None):
                raise ValueError("free geometry needs exactly one region (file or inline)")
            if self.n is not None:
                raise ValueError("n only applies to torus geometry")

        if self.command == "count" and self.epsilon is None:
            raise ValueError("count needs epsilon")
        if self.command == "sample" and self.epsilon is None and not self.exact:
            raise ValueError("sample needs epsilon unless exact sampling is requested")
        return self

    @property
    def is_contour_model(self) -> bool:
        return self.model in CONTOUR_MODELS

    @property
    def activity(self) -> float:
        """Resolved z."""
        if self.z is not None:
            return self.z
        if self.model == "potts-contour":
            return math.exp(-self.beta)
        return 1.0 / self.lam

    def resolved(self) -> Dict[str, Any]:
        """Canonical JSON form embedded in every artifact (paths as strings, z resolved)."""
        data = self.model_dump(mode="json", by_alias=True, exclude_none=True)
        data["z_resolved"] = self.activity
        return data
