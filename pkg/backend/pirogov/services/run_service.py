"""
Run service for the count, sample and oracle commands.

Turns a validated RunConfig into models, dispatches to the counting,
sampling or oracle services and renders artifacts. Artifacts are JSON
with sorted keys and no timestamps, so a fixed configuration always
produces byte-identical output.
"""

import hashlib
import json
import logging
import math
import os
import subprocess
from contextlib import contextmanager
from fractions import Fraction
from functools import lru_cache
from pathlib import Path
from typing import Any, Iterator, List, Optional, Union

from pydantic import BaseModel

from pirogov import __version__
from pirogov.core.config import clear_settings_cache
from pirogov.core.exceptions import ConfigurationError
from pirogov.core.rng import RandomStream
from pirogov.models.contour import ContourModel, hardcore_contour_model, potts_contour_model
from pirogov.models.lattice import Region
from pirogov.models.polymer import PolymerModel, hardcore_polymer_model, ising_polymer_model
from pirogov.models.series import EXACT, TruncatedSeries, poly_from_log
from pirogov.schemas.artifacts import CountArtifact, SampleHeader, SampleLine
from pirogov.schemas.region import load_region, parse_region
from pirogov.schemas.run_config import RunConfig
from pirogov.schemas.series import format_fraction
from pirogov.services.cluster_expansion import approx_Z
from pirogov.services.contour_service import approx_contour_Z
from pirogov.services.oracle_service import (
    brute_Z_contour_region,
    brute_ising_counts,
    brute_Z_hardcore,
    brute_Z_torus,
    evaluate_ising_counts,
    ising_count_rows,
)
from pirogov.services.sampling_service import PolymerSampler, SpinSampler, TorusSampler
from pirogov.services.torus_service import torus_approx_Z, torus_region, torus_Z_big_exact

logger = logging.getLogger(__name__)

AnyModel = Union[PolymerModel, ContourModel]

# spin of vertices outside every polymer
POLYMER_BACKGROUND = {"hardcore-polymer": 0, "ising-polymer": -1}


@lru_cache()
def version_string() -> str:
    """``git describe`` of the working tree, or the package version outside a checkout."""
    try:
        described = subprocess.run(
            ["git", "describe", "--tags", "--always", "--dirty"],
            cwd=Path(__file__).resolve().parent,
            capture_output=True,
            text=True,
            timeout=5,
            check=True,
        ).stdout.strip()
    except (OSError, subprocess.SubprocessError):
        described = ""
    return described or f"v{__version__}"


def point_key(point: Any) -> str:
    """Artifact key of a vertex: "x,y" for lattice points, str() otherwise."""
    if isinstance(point, tuple):
        return ",".join(str(c) for c in point)
    return str(point)


def exact_scalar(value: float) -> Fraction:
    """The decimal value the user typed, as a rational."""
    return Fraction(repr(float(value)))


def series_coefficients(series: TruncatedSeries, backend: str) -> List[Any]:
    if series.backend == EXACT and backend == "exact":
        return [format_fraction(c) for c in series.coeffs]
    return [float(c.real if isinstance(c, complex) else c) for c in series.coeffs]


@contextmanager
def run_overrides(config: RunConfig) -> Iterator[None]:
    """
    Apply per-run engine settings for the duration of one run.

    The variables are restored on exit, so an override never leaks into a
    later run in the same process.
    """
    overrides = {
        "PIROGOV_CLUSTER_METHOD": config.cluster_method,
        "PIROGOV_THREADS": None if config.threads is None else str(config.threads),
    }
    saved = {name: os.environ.get(name) for name, value in overrides.items() if value is not None}
    for name in saved:
        os.environ[name] = overrides[name]
    clear_settings_cache()
    try:
        yield
    finally:
        for name, previous in saved.items():
            if previous is None:
                os.environ.pop(name, None)
            else:
                os.environ[name] = previous
        clear_settings_cache()


def dump_document(document: BaseModel, indent: Optional[int] = 2) -> str:
    payload = document.model_dump(mode="json", exclude_none=True)
    return json.dumps(payload, sort_keys=True, indent=indent, allow_nan=True)


class RunService:
    """
    Executes one RunConfig.

    Args:
        config: Validated run configuration
    """

    def __init__(self, config: RunConfig):
        self.config = config
        self.logger = logger
        self.region = self._region()
        self.model = self._model()
        self.ground = self._ground()

    # ---- construction -------------------------------------------------------

    def _region(self) -> Region:
        config = self.config
        if config.geometry == "torus":
            return Region.full_torus(config.n, config.dim)
        if config.region is not None:
            return parse_region(config.region)
        return load_region(config.region_file)

    def _model(self) -> AnyModel:
        config = self.config
        if config.model == "hardcore-polymer":
            return hardcore_polymer_model(self.region, config.delta)
        if config.model == "ising-polymer":
            return ising_polymer_model(self.region, config.beta, config.delta)
        dim = self.region.dim
        if config.model == "potts-contour":
            model = potts_contour_model(config.q, dim, config.delta)
        else:
            model = hardcore_contour_model(dim, config.delta)
        if self.region.is_torus:
            torus_region(model, self.region.torus)
        else:
            model.validate_geometry(self.region)
        return model

    def _ground(self):
        if not self.config.is_contour_model:
            if self.config.boundary is not None:
                raise ConfigurationError("boundary only applies to contour models")
            return None
        value = self.config.boundary if self.config.boundary is not None else self.model.ground_states[0]
        return self.model.parse_ground(value)

    @property
    def z(self) -> float:
        return self.config.activity

    def _base(self) -> dict:
        return {"version": version_string(), "config": self.config.resolved()}

    # ---- count --------------------------------------------------------------

    def count(self) -> CountArtifact:
        """Approximate counting artifact for the configured model and geometry."""
        config = self.config
        if not config.is_contour_model:
            result = approx_Z(self.model, self.z, config.epsilon, config.force, config.engine, config.m)
            return CountArtifact(
                **self._base(),
                model=self.model.name,
                z=self.z,
                m=result.m_used,
                epsilon=config.epsilon,
                zero_free_radius_assumed=self.model.delta,
                forced=result.forced,
                engine=result.log_coeffs.engine,
                log_coeffs=series_coefficients(result.log_coeffs.series, config.backend),
                approx_Z=float(result.value),
            )
        if self.region.is_torus:
            return self._count_torus()
        return self._count_contour()

    def _count_contour(self) -> CountArtifact:
        config = self.config
        result = approx_contour_Z(
            self.model, self.region, self.ground, self.z, config.epsilon, config.force, config.engine, config.m
        )
        exponent = self.model.prefactor_exponent(self.region, self.ground)
        spin_Z = None
        if self.z > 0:
            log_value = -exponent * math.log(self.z) + math.log(result.value)
            spin_Z = math.exp(log_value) if log_value < 709 else math.inf
        return CountArtifact(
            **self._base(),
            model=self.model.name,
            z=self.z,
            m=result.m_used,
            epsilon=config.epsilon,
            zero_free_radius_assumed=self.model.delta,
            forced=result.forced,
            engine=result.log_coeffs.engine,
            log_coeffs=series_coefficients(result.log_coeffs.series, config.backend),
            approx_Z=float(result.value),
            polynomial=series_coefficients(poly_from_log(result.log_coeffs.series), config.backend),
            ground=self.model.ground_name(self.ground),
            prefactor_exponent=exponent,
            spin_Z=spin_Z,
        )

    def _count_torus(self) -> CountArtifact:
        config = self.config
        result = torus_approx_Z(
            self.model,
            self.region.torus,
            self.z,
            config.epsilon,
            config.force,
            config.engine,
            config.floor_constant,
            config.exact_big,
            config.threads,
        )
        first = next(iter(result.per_ground.values()))
        return CountArtifact(
            **self._base(),
            model=self.model.name,
            z=self.z,
            m=result.extras["m"],
            epsilon=config.epsilon,
            zero_free_radius_assumed=self.model.delta,
            forced=result.extras["forced"],
            engine=first.log_coeffs.engine,
            log_coeffs=series_coefficients(first.log_coeffs.series, config.backend),
            approx_Z=float(result.value),
            dropped_big_term=result.dropped_big_term,
            big_term_exact=result.big_term_exact,
            per_ground={name: float(r.value) for name, r in result.per_ground.items()},
            floor=result.floor,
        )

    # ---- oracle ---------------------------------------------------------------

    def oracle(self) -> CountArtifact:
        """Brute-force artifact with the same shape as ``count``, tagged exact."""
        config = self.config
        base = dict(self._base(), exact=True, model=self.model.name, z=self.z)
        if config.model == "hardcore-polymer":
            polynomial = brute_Z_hardcore(self.region.to_graph())
            value = format_fraction(polynomial.evaluate(exact_scalar(self.z)))
            return CountArtifact(**base, polynomial=series_coefficients(polynomial, "exact"), Z=value)
        if config.model == "ising-polymer":
            graph = self.region.to_graph()
            counts = brute_ising_counts(graph)
            polynomial = evaluate_ising_counts(counts, config.beta, 2 * graph.number_of_nodes())
            return CountArtifact(
                **base,
                polynomial=series_coefficients(polynomial, "float"),
                Z=float(polynomial.evaluate(self.z)),
                ising_counts=ising_count_rows(counts),
            )
        if self.region.is_torus:
            polynomial = brute_Z_torus(self.model, self.region.torus)
            big = torus_Z_big_exact(self.model, self.region.torus)
            return CountArtifact(
                **base,
                polynomial=series_coefficients(polynomial, "exact"),
                Z=format_fraction(polynomial.evaluate(exact_scalar(self.z))),
                dropped_big_term=False,
                big_term_exact=float(big.evaluate(exact_scalar(self.z))),
            )
        polynomial = brute_Z_contour_region(self.model, self.region, self.ground)
        return CountArtifact(
            **base,
            polynomial=series_coefficients(polynomial, "exact"),
            Z=format_fraction(polynomial.evaluate(exact_scalar(self.z))),
            ground=self.model.ground_name(self.ground),
            prefactor_exponent=self.model.prefactor_exponent(self.region, self.ground),
        )

    # ---- sample ---------------------------------------------------------------

    def sample_documents(self) -> Iterator[BaseModel]:
        """Header followed by one SampleLine per draw."""
        config = self.config
        yield SampleHeader(**self._base(), exact=config.exact, model=self.model.name, samples=config.samples)
        root = RandomStream(config.seed)
        if not config.is_contour_model:
            yield from self._sample_polymers(root)
        elif self.region.is_torus:
            yield from self._sample_torus(root)
        else:
            yield from self._sample_spins(root)

    def _sample_polymers(self, root: RandomStream) -> Iterator[SampleLine]:
        config = self.config
        sampler = PolymerSampler(self.model, self.z, config.epsilon, config.exact, config.engine)
        background = POLYMER_BACKGROUND[self.model.name]
        for index in range(config.samples):
            polymers = sampler.draw(root.child(index))
            spins = {point_key(v): background for v in self.model.vertices}
            for polymer in polymers:
                for vertex, spin in zip(polymer.support, polymer.spins):
                    spins[point_key(vertex)] = spin
            keys = [[[point_key(v) for v in p.support], list(p.spins)] for p in polymers]
            digest = hashlib.sha256(json.dumps(keys, sort_keys=True).encode("utf-8")).hexdigest()
            yield SampleLine(
                index=index,
                spins=spins,
                polymers=[{"support": [point_key(v) for v in p.support], "spins": list(p.spins)} for p in polymers],
                provenance=digest,
            )

    def _sample_spins(self, root: RandomStream) -> Iterator[SampleLine]:
        config = self.config
        sampler = SpinSampler(self.model, self.region, self.ground, self.z, config.epsilon, config.exact, config.engine)
        for index in range(config.samples):
            sample = sampler.draw(root.child(index))
            yield SampleLine(
                index=index,
                spins={point_key(p): s for p, s in sorted(sample.assignment.items())},
                ground=self.model.ground_name(sample.ground),
                provenance=sample.digest(),
            )

    def _sample_torus(self, root: RandomStream) -> Iterator[SampleLine]:
        config = self.config
        sampler = TorusSampler(
            self.model, self.region.torus, self.z, config.epsilon, config.exact, config.engine, config.floor_constant
        )
        for index in range(config.samples):
            drawn = sampler.draw(root.child(index))
            yield SampleLine(
                index=index,
                spins={point_key(p): s for p, s in sorted(drawn.spins.assignment.items())},
                ground=self.model.ground_name(drawn.ground),
                provenance=drawn.spins.digest(),
            )

    # ---- rendering ------------------------------------------------------------

    def render(self) -> str:
        """Artifact text: one JSON document for count/oracle, JSON Lines for sample."""
        with run_overrides(self.config):
            if self.config.command == "count":
                return dump_document(self.count()) + "\n"
            if self.config.command == "oracle":
                return dump_document(self.oracle()) + "\n"
            return "".join(dump_document(doc, indent=None) + "\n" for doc in self.sample_documents())

    def run(self) -> str:
        text = self.render()
        if self.config.output is not None:
            Path(self.config.output).write_text(text, encoding="utf-8")
            self.logger.info("wrote %s artifact to %s", self.config.command, self.config.output)
        return text
