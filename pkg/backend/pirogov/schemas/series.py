"""
Series JSON schema: {"order": m, "coeffs": ["num/den", ...] | [float, ...]}.
"""

from fractions import Fraction
from typing import List, Union

from pydantic import BaseModel, Field, model_validator

from pirogov.models.series import EXACT, FLOAT, TruncatedSeries


class SeriesPayload(BaseModel):
    """Schema for a truncated series."""

    order: int = Field(..., ge=0, description="Truncation order m")
    coeffs: List[Union[str, float]] = Field(..., description="c_0..c_m, rational strings or floats")

    @model_validator(mode="after")
    def _check_length(self) -> "SeriesPayload":
        if len(self.coeffs) != self.order + 1:
            raise ValueError(f"expected {self.order + 1} coefficients, got {len(self.coeffs)}")
        kinds = {isinstance(c, str) for c in self.coeffs}
        if len(kinds) > 1:
            raise ValueError("coefficients mix rational strings and floats")
        return self

    @property
    def backend(self) -> str:
        return EXACT if self.coeffs and isinstance(self.coeffs[0], str) else FLOAT

    @classmethod
    def from_series(cls, series: TruncatedSeries) -> "SeriesPayload":
        if series.backend == EXACT:
            coeffs = [format_fraction(c) for c in series.coeffs]
        else:
            coeffs = [float(c.real if isinstance(c, complex) else c) for c in series.coeffs]
        return cls(order=series.order, coeffs=coeffs)

    def to_series(self) -> TruncatedSeries:
        if self.backend == EXACT:
            return TruncatedSeries(self.order, tuple(Fraction(c) for c in self.coeffs), EXACT)
        return TruncatedSeries(self.order, tuple(float(c) for c in self.coeffs), FLOAT)


def format_fraction(value) -> str:
    value = Fraction(value)
    return str(value.numerator) if value.denominator == 1 else f"{value.numerator}/{value.denominator}"
