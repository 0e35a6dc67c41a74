"""
Unit tests for the run configuration and region schemas.
"""

import json
import math

import pytest
from pydantic import ValidationError

from pirogov.core.exceptions import GeometryError
from pirogov.schemas.artifacts import CountArtifact
from pirogov.schemas.region import RegionSpec, load_region, parse_region
from pirogov.schemas.run_config import RunConfig
from pirogov.tests.fixtures.sample_data import (
    box_region_document,
    invalid_region_documents,
    point_list_region_document,
)


def run_config(**overrides):
    data = {"command": "count", "model": "hardcore-polymer", "z": 0.01, "epsilon": 0.1, "region": box_region_document(2, 2)}
    data.update(overrides)
    return RunConfig(**data)


class TestRunConfig:
    """Test suite for the per-model parameter convention."""

    def test_valid_hardcore_polymer(self):
        """Test a minimal valid count configuration."""
        config = run_config()

        assert config.activity == 0.01
        assert not config.is_contour_model

    def test_potts_beta_resolves_z(self):
        """Test z = e^(-beta) for the Potts contour model."""
        config = run_config(model="potts-contour", q=2, z=None, beta=3.0)

        assert config.activity == pytest.approx(math.exp(-3.0))
        assert config.resolved()["z_resolved"] == pytest.approx(math.exp(-3.0))

    def test_lambda_alias(self):
        """Test that lambda is accepted by alias and resolves z = 1/lambda."""
        config = RunConfig.model_validate(
            {"command": "oracle", "model": "hardcore-contour", "lambda": 40.0, "region": box_region_document(6, 6)}
        )

        assert config.activity == pytest.approx(0.025)
        assert config.resolved()["lambda"] == 40.0

    @pytest.mark.parametrize(
        "overrides",
        [
            {"z": None},
            {"beta": 1.0},
            {"model": "ising-polymer"},
            {"model": "potts-contour", "q": 2, "beta": 1.0},
            {"model": "potts-contour"},
            {"q": 3},
            {"model": "hardcore-contour", "z": None, "lam": -2.0},
        ],
    )
    def test_convention_violations(self, overrides):
        """Test that every model rejects parameters outside its convention."""
        with pytest.raises(ValidationError):
            run_config(**overrides)

    def test_geometry_rules(self):
        """Test that torus runs need n and free runs need exactly one region."""
        with pytest.raises(ValidationError):
            run_config(geometry="torus")
        with pytest.raises(ValidationError):
            run_config(region=None)
        with pytest.raises(ValidationError):
            run_config(n=4)

        config = run_config(model="potts-contour", q=2, geometry="torus", n=6, region=None)
        assert config.n == 6

    def test_count_needs_epsilon(self):
        """Test that count refuses to run without epsilon."""
        with pytest.raises(ValidationError):
            run_config(epsilon=None)

    def test_sample_needs_epsilon_unless_exact(self):
        """Test the epsilon rule for sampling."""
        with pytest.raises(ValidationError):
            run_config(command="sample", epsilon=None)

        assert run_config(command="sample", epsilon=None, exact=True).exact

    def test_boundary_lowercased(self):
        """Test that boundary names are case-insensitive."""
        assert run_config(model="potts-contour", q=2, boundary="Blue").boundary == "blue"

    def test_unknown_fields_rejected(self):
        """Test that extra keys are refused."""
        with pytest.raises(ValidationError):
            run_config(temperature=1.0)


class TestRegionSchema:
    """Test suite for region JSON documents."""

    def test_box_shorthand(self):
        """Test that the inclusive box shorthand expands to every point."""
        region = parse_region(box_region_document(3, 2))

        assert len(region) == 6
        assert not region.is_torus

    def test_point_list_from_text(self):
        """Test parsing JSON text with an explicit point list."""
        region = parse_region(json.dumps(point_list_region_document()))

        assert region.sorted_vertices == ((0, 0), (0, 1), (1, 0), (1, 1))

    def test_torus_geometry(self):
        """Test that {"torus": n} becomes torus geometry."""
        region = parse_region({"dim": 2, "geometry": {"torus": 4}, "vertices": [[0, 0], [3, 3]]})

        assert region.torus == 4

    @pytest.mark.parametrize("document", invalid_region_documents())
    def test_invalid_documents(self, document):
        """Test that malformed documents raise GeometryError."""
        with pytest.raises(GeometryError):
            parse_region(document)

    def test_malformed_json_text(self):
        """Test that unparsable text raises GeometryError."""
        with pytest.raises(GeometryError):
            parse_region("{dim: 2")

    def test_load_region(self, tmp_path):
        """Test reading a region file and the missing-file error."""
        path = tmp_path / "region.json"
        path.write_text(json.dumps(box_region_document(5, 5)))

        assert len(load_region(path)) == 25
        with pytest.raises(GeometryError):
            load_region(tmp_path / "missing.json")

    def test_from_region(self, box5):
        """Test that a Region is written back as a point-list document."""
        spec = RegionSpec.from_region(box5)

        assert spec.to_region() == box5


class TestArtifacts:
    """Test suite for artifact schemas."""

    def test_count_artifact_defaults(self):
        """Test the schema version and that unknown fields are refused."""
        artifact = CountArtifact(version="0.1.0", config={}, model="hardcore-polymer", z=0.01)

        assert artifact.v == 1
        assert not artifact.exact
        with pytest.raises(ValidationError):
            CountArtifact(version="0.1.0", config={}, model="x", z=0.1, colour="red")
