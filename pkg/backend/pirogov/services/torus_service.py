"""
Contours on the torus T^d_n.

Small contours (connected support, diameter < n/2) have an exterior and
embed into Z^d; everything else collapses into at most one large contour
per configuration. Z(T_n, z) = Z^big + sum over ground states of Z^phi,
where Z^phi runs over mutually external small type-phi contours. The
approximation drops Z^big and says so in its result.
"""

import logging
import math
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, FrozenSet, List, Optional, Tuple

from pirogov.core.config import get_settings
from pirogov.core.exceptions import ConfigurationError, GeometryError, PirogovError, RegimeError
from pirogov.core.parallel import ordered_map
from pirogov.models.cluster import ApproxResult, LogZCoefficients, PolymerSystem
from pirogov.models.contour import LARGE, SMALL, Contour, ContourModel, Ground
from pirogov.models.lattice import Point, Region, enumerate_connected_sets
from pirogov.models.series import EXACT, TruncatedSeries, poly_from_log
from pirogov.services.cluster_expansion import check_regime, exp_of, log_partition, truncation_order
from pirogov.services.contour_service import ContourWeightTable, contours_on_support, halo

logger = logging.getLogger(__name__)

MIN_SIDE = 4


def torus_region(model: ContourModel, n: int) -> Region:
    """
    The full torus T^d_n for ``model``.

    Raises:
        GeometryError: If n < 4, or n is odd for the hard-core model
    """
    if n < MIN_SIDE:
        raise GeometryError(f"torus side {n} is too small for the contour taxonomy (need n >= {MIN_SIDE})")
    region = Region.full_torus(n, model.dim)
    model.validate_geometry(region)
    return region


def is_small_support(region: Region, points) -> bool:
    return 2 * region.diameter(points) < region.torus


# ---------------------------------------------------------------------------
# listing and classification
# ---------------------------------------------------------------------------

def candidate_small_supports(region: Region, max_size: Optional[int] = None) -> List[FrozenSet[Point]]:
    """
    Connected torus supports of diameter < n/2, each once.

    Supports are grown from their smallest point, and a point joins only if
    it stays within distance < n/2 of every point already chosen. Without
    ``max_size``, or above it, the size is bounded by the (n-1)//2 + 1 window
    every small support fits in.
    """
    n, dim = region.torus, region.dim
    window = ((n - 1) // 2 + 1) ** dim
    max_size = window if max_size is None else min(max_size, window)

    def stays_small(chosen: List[Point], candidate: Point) -> bool:
        return all(2 * region.dinf(candidate, x) < n for x in chosen)

    found: List[FrozenSet[Point]] = []
    for root in region.sorted_vertices:
        found.extend(
            enumerate_connected_sets(
                root, region.king_neighbors, max_size, allowed=lambda p, r=root: p > r, admissible=stays_small
            )
        )
    return sorted(found, key=lambda s: (len(s), sorted(s)))


def list_small_contours(
    model: ContourModel, n: int, ground: Ground, max_size: Optional[int] = None
) -> List[Contour]:
    """Small type-ground contours on T^d_n, canonical order."""
    region = torus_region(model, n)
    contours: Dict[Tuple, Contour] = {}
    for support in candidate_small_supports(region, max_size):
        if len(support) < 3 ** model.dim:
            continue
        for contour in contours_on_support(model, region, ground, support, SMALL):
            contours.setdefault(contour.key, contour)
    listing = sorted(contours.values(), key=Contour.sort_key)
    logger.debug("%s: %d small contours of type %s on T_%d", model.name, len(listing), ground, n)
    return listing


@dataclass
class TorusDecomposition:
    """Contours of one torus configuration: small ones, at most one large one, and the exterior ground state."""

    small: List[Contour]
    large: Optional[Contour]
    exterior: Optional[Ground]

    @property
    def contours(self) -> List[Contour]:
        return self.small + ([self.large] if self.large is not None else [])


def classify_configuration(model: ContourModel, region: Region, config) -> TorusDecomposition:
    """
    Split a torus configuration's incorrect set into small and large contours.

    Raises:
        PirogovError: If a component fails to form a contour or the small
            contours disagree on the exterior ground state
    """
    incorrect = model.incorrect_points(region, config)
    parts = region._flood(incorrect)
    small_parts = [p for p in parts if is_small_support(region, p)]
    large_parts = [p for p in parts if not is_small_support(region, p)]

    small = []
    for part in small_parts:
        contour = model.analyse(region, part, {x: config[x] for x in part}, SMALL)
        if contour is None:
            raise PirogovError(f"small incorrect component at {min(part)} does not form a contour")
        small.append(contour)
    small.sort(key=Contour.sort_key)

    large = None
    if large_parts:
        support = frozenset().union(*large_parts)
        large = model.analyse(region, support, {x: config[x] for x in support}, LARGE)
        if large is None:
            raise PirogovError("large incorrect components do not form a contour")
        return TorusDecomposition(small, large, None)

    if not small:
        grounds = [g for g in model.ground_states if all(config[x] == model.ground_spin(g, x) for x in region.vertices)]
        return TorusDecomposition([], None, grounds[0] if grounds else None)
    outer = [c for c in small if not any(c is not o and c.support <= o.cov for o in small)]
    types = {c.type for c in outer}
    if len(types) != 1:
        raise PirogovError(f"outer small contours disagree on the exterior: {sorted(map(str, types))}")
    return TorusDecomposition(small, None, types.pop())


def decomposition_sums(model: ContourModel, n: int, order: Optional[int] = None) -> Dict[object, TruncatedSeries]:
    """
    Exact split of Z(T_n, z) by brute force over every configuration.

    Returns:
        Dict: {"big": Z^big} plus one entry per ground state holding the
        matching-set sum of configurations with that exterior
    """
    from pirogov.services.oracle_service import all_configurations

    region = torus_region(model, n)
    order = model.degree_bound * len(region) if order is None else order
    counts: Dict[object, Dict[int, int]] = {"big": {}}
    counts.update({g: {} for g in model.ground_states})
    for config in all_configurations(model, region):
        decomposition = classify_configuration(model, region, config)
        energy = sum(c.surface_energy for c in decomposition.contours)
        bucket = counts["big"] if decomposition.large is not None else counts[decomposition.exterior]
        bucket[energy] = bucket.get(energy, 0) + 1
    return {
        key: TruncatedSeries(order, tuple(Fraction(c.get(k, 0)) for k in range(order + 1)), EXACT)
        for key, c in counts.items()
    }


def torus_Z_big_exact(model: ContourModel, n: int, order: Optional[int] = None) -> TruncatedSeries:
    """Z^big(T_n, z) exactly, by brute force over spin configurations."""
    return decomposition_sums(model, n, order)["big"]


# ---------------------------------------------------------------------------
# embedding and small-contour counting
# ---------------------------------------------------------------------------

def unwrap(region: Region, anchor: Point, point: Point) -> Point:
    """Representative of ``point`` in Z^d nearest to ``anchor``."""
    n = region.torus
    half = n // 2
    return tuple(a + ((x - a + half) % n) - half for a, x in zip(anchor, point))


def embed_interior(region: Region, contour: Contour, interior: FrozenSet[Point]) -> Region:
    """Free region in Z^d isometric to an interior component of a small contour."""
    anchor = min(contour.support)
    return Region(region.dim, frozenset(unwrap(region, anchor, p) for p in interior))


class SmallContourTable:
    """
    Outer weights of small torus contours.

    Interiors are embedded into Z^d and their partition functions come from
    free-geometry weight tables, memoised by translated interior and label.
    """

    def __init__(self, model: ContourModel, n: int, order: int, engine: Optional[str] = None):
        self.model = model
        self.n = n
        self.region = torus_region(model, n)
        self.order = order
        self.engine = engine
        self.logger = logger
        reach = int(math.floor(order / model.rho + 1e-9))
        self.contours: Dict[Ground, List[Contour]] = {
            g: [c for c in list_small_contours(model, n, g, reach) if c.surface_energy <= order]
            for g in model.ground_states
        }
        self._interiors: Dict[Tuple, TruncatedSeries] = {}
        self._tables: Dict[Tuple, ContourWeightTable] = {}
        self.weights: Dict[Tuple, TruncatedSeries] = {}

    def interior_table(self, interior: Region) -> Tuple[ContourWeightTable, Point]:
        canonical, shift = interior.canonical()
        key = (canonical.vertices,)
        table = self._tables.get(key)
        if table is None:
            table = ContourWeightTable(self.model, canonical, self.order, engine=self.engine).build()
            self._tables[key] = table
        return table, shift

    def interior_polynomial(self, contour: Contour, interior: FrozenSet[Point], label: Ground) -> TruncatedSeries:
        embedded = embed_interior(self.region, contour, interior)
        table, shift = self.interior_table(embedded)
        # unwrapping preserves coordinates mod n, only the canonical shift moves the ground pattern
        ground = self.model.translate_ground(label, shift)
        return table.interior_polynomial(table.region.vertices, ground)

    def outer_weight(self, contour: Contour) -> TruncatedSeries:
        cached = self.weights.get(contour.key)
        if cached is not None:
            return cached
        weight = TruncatedSeries.monomial(contour.surface_energy, self.order, 1, EXACT)
        for interior, label in zip(contour.interiors, contour.labels):
            weight = weight * self.interior_polynomial(contour, interior, label)
        self.weights[contour.key] = weight
        return weight

    def members(self, points: FrozenSet[Point], ground: Ground) -> List[Contour]:
        """Every small type-ground contour; small contours always fit the full torus."""
        return list(self.contours[ground])

    def cov_halo(self, contour: Contour) -> FrozenSet[Point]:
        return halo(self.region, contour.cov)

    def system(self, ground: Ground, members: Optional[List[Contour]] = None) -> PolymerSystem:
        members = self.contours[ground] if members is None else members
        return PolymerSystem.build(
            items=members,
            keys=[c.key for c in members],
            orders=[c.surface_energy for c in members],
            weights=[self.outer_weight(c) for c in members],
            footprint=lambda c: c.cov,
            reach=self.cov_halo,
            order=self.order,
            backend=EXACT,
        )


def torus_Z_small(
    model: ContourModel, n: int, ground: Ground, m: int, engine: Optional[str] = None
) -> LogZCoefficients:
    """Log-coefficients 1..m of Z^ground(T_n, z) over mutually external small contours."""
    if m < 1:
        raise ConfigurationError("m must be at least 1")
    table = SmallContourTable(model, n, m, engine)
    return log_partition(table.system(ground), engine)


def torus_polynomial_small(model: ContourModel, n: int, ground: Ground, m: Optional[int] = None) -> TruncatedSeries:
    m = m if m is not None else model.degree_bound * n ** model.dim
    return poly_from_log(torus_Z_small(model, n, ground, m).series)


# ---------------------------------------------------------------------------
# approximation
# ---------------------------------------------------------------------------

@dataclass
class TorusApproxResult:
    """Sum over ground states of exp(T_m); the large-contour term is never included."""

    value: float
    per_ground: Dict[str, ApproxResult]
    epsilon: float
    floor: float
    dropped_big_term: bool = True
    big_term_exact: Optional[float] = None
    extras: Dict[str, object] = field(default_factory=dict)


def admissible_floor(n: int, floor_constant: Optional[float] = None) -> float:
    constant = floor_constant if floor_constant is not None else get_settings().torus_floor_constant
    return math.exp(-constant * n)


def torus_approx_Z(
    model: ContourModel,
    n: int,
    z: float,
    epsilon: float,
    force: bool = False,
    engine: Optional[str] = None,
    floor_constant: Optional[float] = None,
    exact_big: bool = False,
    threads: Optional[int] = None,
) -> TorusApproxResult:
    """
    epsilon-relative approximation of Z(T_n, z) with Z^big dropped.

    Raises:
        RegimeError: If z >= delta (without force) or epsilon is below e^(-c n)
    """
    if epsilon <= 0:
        raise ConfigurationError("epsilon must be positive")
    torus_region(model, n)
    floor = admissible_floor(n, floor_constant)
    if epsilon < floor:
        raise RegimeError(f"epsilon {epsilon} is below the admissible floor e^(-c n) = {floor:.6g}")
    started = time.perf_counter()
    forced = check_regime(abs(z), model.delta, force)
    degree = model.degree_bound * n ** model.dim
    m = degree if forced else truncation_order(degree, abs(z), model.delta, epsilon)

    def per_ground(ground: Ground) -> ApproxResult:
        coefficients = torus_Z_small(model, n, ground, m, engine)
        value = exp_of(coefficients.series.evaluate(z))
        return ApproxResult(value, m, coefficients, z, epsilon, model.delta, forced)

    results = ordered_map(per_ground, model.ground_states, threads)
    total = sum(float(r.value) for r in results)
    big = float(torus_Z_big_exact(model, n).evaluate(z)) if exact_big else None
    logger.info(
        "torus_approx_Z %s n=%d: m=%d in %.3fs (large-contour term dropped)",
        model.name, n, m, time.perf_counter() - started,
    )
    return TorusApproxResult(
        value=total,
        per_ground={model.ground_name(g): r for g, r in zip(model.ground_states, results)},
        epsilon=epsilon,
        floor=floor,
        big_term_exact=big,
        extras={"m": m, "degree_bound": degree, "forced": forced},
    )
