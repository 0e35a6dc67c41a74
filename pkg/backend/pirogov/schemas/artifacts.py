"""
Artifact schemas.

Every artifact carries "v": 1, the resolved run configuration and a
version string. Nothing time-dependent is written, so the same
configuration always produces byte-identical output.
"""

from typing import Any, Dict, List, Optional, Union

from pydantic import BaseModel, ConfigDict, Field

SCHEMA_VERSION = 1

Number = Union[float, str, None]


class ArtifactBase(BaseModel):
    """Fields shared by every artifact."""

    model_config = ConfigDict(extra="forbid")

    v: int = Field(SCHEMA_VERSION, description="Schema version")
    version: str = Field(..., description="git-describe style version of the code")
    config: Dict[str, Any] = Field(..., description="Resolved run configuration")


class CountArtifact(ArtifactBase):
    """Schema for the count command (and oracle, with exact set)."""

    exact: bool = Field(False, description="True for brute-force oracle output")
    model: str = Field(..., description="Model instance name")
    z: float = Field(..., description="Activity")
    m: Optional[int] = Field(None, description="Truncation order")
    epsilon: Optional[float] = Field(None, description="Relative error target")
    zero_free_radius_assumed: Optional[float] = Field(None, description="delta used by the error bound")
    forced: bool = Field(False, description="True when |z| >= delta was overridden")
    engine: Optional[str] = Field(None, description="Log engine that produced the coefficients")
    log_coeffs: Optional[List[Number]] = Field(None, description="Coefficients of log Z, orders 0..m")
    approx_Z: Optional[float] = Field(None, description="exp(T_m(z))")

    polynomial: Optional[List[Number]] = Field(None, description="Exact polynomial coefficients")
    Z: Number = Field(None, description="Exact value at z (oracle)")
    ising_counts: Optional[List[List[int]]] = Field(
        None, description="Ising oracle: exact [2|S|, boundary size, number of sets] rows behind the float polynomial"
    )
    ground: Optional[str] = Field(None, description="Boundary ground state")
    prefactor_exponent: Optional[int] = Field(None, description="k in the prefactor z^-k")
    spin_Z: Optional[float] = Field(None, description="Approximate spin partition function z^-k * Z^ground")

    dropped_big_term: Optional[bool] = Field(None, description="Torus: large-contour term omitted")
    big_term_exact: Optional[float] = Field(None, description="Torus: exact Z^big at z when requested")
    per_ground: Optional[Dict[str, float]] = Field(None, description="Torus: exp(T_m) per ground state")
    floor: Optional[float] = Field(None, description="Torus: admissible epsilon floor")


class SampleHeader(ArtifactBase):
    """First line of a sample stream."""

    kind: str = Field("header")
    exact: bool = False
    model: str
    samples: int


class SampleLine(BaseModel):
    """One draw of a sample stream."""

    model_config = ConfigDict(extra="forbid")

    kind: str = Field("sample")
    index: int = Field(..., ge=0)
    spins: Dict[str, Any] = Field(..., description="\"x,y\" -> spin")
    ground: Optional[str] = None
    polymers: Optional[List[Dict[str, Any]]] = None
    provenance: str = Field(..., description="sha256 of the drawn polymer or contour ids")


class SuiteResult(BaseModel):
    """Outcome of one verification suite."""

    name: str
    passed: bool
    checks: int = 0
    failures: List[str] = Field(default_factory=list)
    details: Dict[str, Any] = Field(default_factory=dict)


class VerifyReport(BaseModel):
    """Schema for the verify command."""

    model_config = ConfigDict(extra="forbid")

    v: int = SCHEMA_VERSION
    version: str
    suites: List[SuiteResult]

    @property
    def passed(self) -> bool:
        return all(s.passed for s in self.suites)
