"""
Contour listing, outer-contour weights and the contour-model FPTAS.

ContourWeightTable lists every contour of a free region for all ground
states, computes outer weights in increasing |cov| order and memoises
interior partition functions keyed by translated interior, translated
ground state and order. The outer-contour partition function then goes
through the same cluster pipeline as polymer models, with mutual
externality as the incompatibility relation.
"""

import logging
import math
import time
from dataclasses import dataclass, field
from itertools import product
from typing import Dict, FrozenSet, Iterable, List, Optional, Tuple

from pirogov.core.config import Settings, get_settings
from pirogov.core.exceptions import CapExceededError, ConfigurationError, GeometryError, InductionOrderError
from pirogov.models.cluster import ApproxResult, LogZCoefficients, PolymerSystem
from pirogov.models.contour import Contour, ContourModel, Ground
from pirogov.models.lattice import Point, Region, bounding_box, enumerate_connected_sets
from pirogov.models.polymer import KPCertificate
from pirogov.models.series import EXACT, TruncatedSeries, poly_from_log
from pirogov.services.cluster_expansion import (
    check_regime,
    choose_engine,
    cluster_log_series,
    exp_of,
    log_partition,
    partition_polynomial,
    truncation_order,
)

logger = logging.getLogger(__name__)

CONFIGURATIONS = "configurations"
SUPPORTS = "supports"


# ---------------------------------------------------------------------------
# geometry helpers
# ---------------------------------------------------------------------------

def halo(geometry: Region, points: Iterable[Point]) -> FrozenSet[Point]:
    """Closed d-infinity neighbourhood of radius 1."""
    found = set()
    for x in points:
        found.update(geometry.ball(x, 1))
    return frozenset(found)


def mutually_external(geometry: Region, a: Contour, b: Contour) -> bool:
    """True iff the covs are at d-infinity distance > 1 (never true for a contour and itself)."""
    return not (halo(geometry, a.cov) & b.cov)


def fits_inside(geometry: Region, contour: Contour, points: FrozenSet[Point]) -> bool:
    """True iff d-infinity(support, complement of ``points``) > 1."""
    return all(y in points for x in contour.support for y in geometry.ball(x, 1))


# ---------------------------------------------------------------------------
# listing
# ---------------------------------------------------------------------------

def configuration_count(model: ContourModel, region: Region) -> int:
    """Upper bound on |Omega^ground_region| (spins on the free points)."""
    return len(model.spin_set) ** model.count_padded_free(region)


def choose_strategy(
    model: ContourModel, region: Region, strategy: Optional[str] = None, settings: Optional[Settings] = None
) -> str:
    settings = settings or get_settings()
    strategy = strategy or settings.contour_enumeration
    if strategy not in ("auto", CONFIGURATIONS, SUPPORTS):
        raise ConfigurationError(f"unknown contour enumeration strategy {strategy!r}")
    feasible = region.is_c_connected() and configuration_count(model, region) <= settings.configuration_cap
    if strategy == CONFIGURATIONS and not region.is_c_connected():
        raise ConfigurationError("configuration enumeration needs a region with connected complement")
    if strategy == "auto":
        return CONFIGURATIONS if feasible else SUPPORTS
    return strategy


def contours_by_configurations(model: ContourModel, region: Region, ground: Ground) -> List[Contour]:
    """
    Every contour appearing in some configuration of Omega^ground_region.

    Each type-ground contour is realised by filling its exterior and
    interiors with their ground states, so this lists C^ground exactly;
    contours of other types nested inside are collected as well.

    Raises:
        CapExceededError: If the configuration count exceeds configuration_cap
    """
    settings = get_settings()
    count = configuration_count(model, region)
    if count > settings.configuration_cap:
        raise CapExceededError(f"{count} padded configurations exceed the cap {settings.configuration_cap}")
    found: Dict[Tuple, Contour] = {}
    for config in model.padded_configurations(region, ground):
        for contour in model.contours_of_config(region, ground, config, check=False):
            found.setdefault(contour.key, contour)
    return sorted(found.values(), key=Contour.sort_key)


def _label_fillings(model: ContourModel, collars: List[List[Point]], labels: Tuple[Ground, ...]) -> Optional[Dict[Point, object]]:
    forced: Dict[Point, object] = {}
    for collar, label in zip(collars, labels):
        for point in collar:
            spin = model.ground_spin(label, point)
            if forced.setdefault(point, spin) != spin:
                return None
    return forced


def exterior_index(region: Region, parts: List[FrozenSet[Point]], exterior: str) -> Optional[int]:
    """Index of A_0 among complement components: 0 for free geometry, the unique wide one for small torus contours."""
    if exterior == "free":
        return 0
    wide = [i for i, part in enumerate(parts) if region.diameter(part) * 2 >= region.torus]
    return wide[0] if len(wide) == 1 else None


def contours_on_support(
    model: ContourModel, region: Region, ground: Ground, support: FrozenSet[Point], exterior: str = "free"
) -> List[Contour]:
    """Valid type-ground contours on one support: labels force the collar spins, the rest is enumerated."""
    parts = region.components(support)
    outer = exterior_index(region, parts, exterior)
    if outer is None:
        return []
    owner = {point: index for index, part in enumerate(parts) for point in part}
    collar_sets: Dict[int, set] = {}
    for point in support:
        for y in region.king_neighbors(point):
            if y not in support:
                collar_sets.setdefault(owner[y], set()).add(point)
    indices = sorted(collar_sets)
    collars = [sorted(collar_sets[i]) for i in indices]
    if outer not in collar_sets:
        return []
    inner_choices = [model.ground_states if i != outer else (ground,) for i in indices]

    found: Dict[Tuple, Contour] = {}
    for labels in product(*inner_choices):
        forced = _label_fillings(model, collars, labels)
        if forced is None:
            continue
        free = sorted(p for p in support if p not in forced)
        for spins in _spin_assignments(model, region, free, forced):
            contour = model.analyse(region, support, spins, exterior)
            if contour is not None and contour.type == ground:
                found.setdefault(contour.key, contour)
    return list(found.values())


def _spin_assignments(model: ContourModel, region: Region, free: List[Point], assigned: Dict[Point, object]):
    if not free:
        yield dict(assigned)
        return
    point = free[0]
    for spin in model.spin_set:
        if model.spin_allowed(point, spin, assigned, region):
            assigned[point] = spin
            yield from _spin_assignments(model, region, free[1:], assigned)
            del assigned[point]


def contours_by_supports(model: ContourModel, region: Region, ground: Ground, max_size: int) -> List[Contour]:
    """Type-ground contours with at most ``max_size`` support points, one support at a time."""
    allowed = frozenset(x for x in region.vertices if region.has_clearance(x, 1))
    found: Dict[Tuple, Contour] = {}
    for root in sorted(allowed):
        subsets = enumerate_connected_sets(
            root, region.king_neighbors, max_size, allowed=lambda p, r=root: p in allowed and p > r
        )
        for support in subsets:
            if len(support) < 3 ** model.dim:
                continue
            for contour in contours_on_support(model, region, ground, support):
                found.setdefault(contour.key, contour)
    return sorted(found.values(), key=Contour.sort_key)


def list_contours(
    model: ContourModel,
    region: Region,
    ground: Ground,
    max_size: int,
    strategy: Optional[str] = None,
) -> List[Contour]:
    """
    All valid type-ground contours in a free region with |support| <= max_size.

    Args:
        model: Contour model
        region: Free region Lambda
        ground: Contour type
        max_size: Support size bound m
        strategy: "configurations", "supports" or "auto"

    Returns:
        List[Contour]: Canonical (size, id) order, no duplicates
    """
    model.validate_geometry(region)
    if region.is_torus:
        raise GeometryError("use the torus service for contours on T^d_n")
    if max_size < 3 ** model.dim:
        return []
    chosen = choose_strategy(model, region, strategy)
    if chosen == CONFIGURATIONS:
        listing = [
            c for c in contours_by_configurations(model, region, ground)
            if c.type == ground and c.size <= max_size
        ]
    else:
        listing = contours_by_supports(model, region, ground, max_size)
    logger.debug("%s: %d contours of type %s (strategy %s)", model.name, len(listing), ground, chosen)
    return listing


def not_mutually_external(
    model: ContourModel, region: Region, ground: Ground, contour: Contour, max_size: int
) -> List[Contour]:
    """Type-ground contours with |support| <= max_size whose cov comes within distance 1 of ``contour``'s."""
    return [c for c in list_contours(model, region, ground, max_size) if not mutually_external(region, contour, c)]


# ---------------------------------------------------------------------------
# outer weights
# ---------------------------------------------------------------------------

class ContourWeightTable:
    """
    Outer-contour weights of a free region, computed inductively.

    Args:
        model: Contour model
        region: Free region Lambda
        order: Truncation order m of every weight
        strategy: Contour enumeration strategy
        max_size: Support size bound (defaults to what order m can reach)
        engine: Log engine for interior partition functions
    """

    def __init__(
        self,
        model: ContourModel,
        region: Region,
        order: int,
        strategy: Optional[str] = None,
        max_size: Optional[int] = None,
        engine: Optional[str] = None,
    ):
        if order < 0:
            raise ConfigurationError("order must be non-negative")
        model.validate_geometry(region)
        self.model = model
        self.region = region
        self.order = order
        self.engine = engine
        self.logger = logger
        reach = int(math.floor(order / model.rho + 1e-9))
        size_cap = min(len(region), reach) if max_size is None else max_size
        self.contours: Dict[Ground, List[Contour]] = {
            g: [c for c in list_contours(model, region, g, size_cap, strategy) if c.surface_energy <= order]
            for g in model.ground_states
        }
        self.weights: Dict[Tuple, TruncatedSeries] = {}
        self._interiors: Dict[Tuple, TruncatedSeries] = {}
        self._halos: Dict[Tuple, FrozenSet[Point]] = {}

    @property
    def ordered(self) -> List[Contour]:
        """Every listed contour in induction order: (|cov|, id)."""
        everything = [c for listing in self.contours.values() for c in listing]
        return sorted(everything, key=lambda c: (len(c.cov), c.key))

    def build(self) -> "ContourWeightTable":
        started = time.perf_counter()
        for contour in self.ordered:
            if contour.key not in self.weights:
                self.weights[contour.key] = self._outer_weight(contour)
        self.logger.debug(
            "%s: %d outer weights, %d interior functions in %.3fs",
            self.model.name, len(self.weights), len(self._interiors), time.perf_counter() - started,
        )
        return self

    def cov_halo(self, contour: Contour) -> FrozenSet[Point]:
        found = self._halos.get(contour.key)
        if found is None:
            found = halo(self.region, contour.cov)
            self._halos[contour.key] = found
        return found

    def outer_weight(self, contour: Contour) -> TruncatedSeries:
        """
        w^ext(gamma) = z^||gamma|| * prod over interior components of Z^label(A).

        Raises:
            InductionOrderError: If a contour inside an interior has no weight yet
        """
        cached = self.weights.get(contour.key)
        if cached is not None:
            return cached
        weight = self._outer_weight(contour)
        self.weights[contour.key] = weight
        return weight

    def _outer_weight(self, contour: Contour) -> TruncatedSeries:
        if contour.surface_energy > self.order:
            return TruncatedSeries.zero(self.order, EXACT)
        weight = TruncatedSeries.monomial(contour.surface_energy, self.order, 1, EXACT)
        for interior, label in zip(contour.interiors, contour.labels):
            weight = weight * self.interior_polynomial(interior, label)
        return weight

    def members(self, points: FrozenSet[Point], ground: Ground) -> List[Contour]:
        """Type-ground contours lying in ``points`` with clearance 1."""
        return [c for c in self.contours[ground] if c.cov <= points and fits_inside(self.region, c, points)]

    def system(self, points: FrozenSet[Point], ground: Ground, members: Optional[List[Contour]] = None) -> PolymerSystem:
        """Outer-contour polymer system on ``points``: footprint cov, reach its 1-neighbourhood."""
        members = self.members(points, ground) if members is None else members
        weights = []
        for contour in members:
            weight = self.weights.get(contour.key)
            if weight is None:
                raise InductionOrderError(f"outer weight of contour at {min(contour.support)} requested out of order")
            weights.append(weight)
        return PolymerSystem.build(
            items=members,
            keys=[c.key for c in members],
            orders=[max(w.lowest_order(), 1) for w in weights],
            weights=weights,
            footprint=lambda c: c.cov,
            reach=self.cov_halo,
            order=self.order,
            backend=EXACT,
        )

    def _interior_key(self, points: FrozenSet[Point], ground: Ground) -> Tuple:
        lows, _ = bounding_box(points)
        shift = tuple(-c for c in lows)
        moved = frozenset(tuple(a + b for a, b in zip(p, shift)) for p in points)
        return (moved, self.model.translate_ground(ground, shift), self.order)

    def interior_polynomial(self, points: FrozenSet[Point], ground: Ground) -> TruncatedSeries:
        """Z^ground(points) up to order m, memoised by translated interior."""
        if not points:
            return TruncatedSeries.one(self.order, EXACT)
        key = self._interior_key(points, ground)
        cached = self._interiors.get(key)
        if cached is not None:
            return cached
        system = self.system(points, ground)
        polynomial = system_polynomial(system, self.engine)
        self._interiors[key] = polynomial
        return polynomial

    def log_partition(self, points: FrozenSet[Point], ground: Ground) -> LogZCoefficients:
        return log_partition(self.system(points, ground), self.engine)


def system_polynomial(system: PolymerSystem, engine: Optional[str] = None) -> TruncatedSeries:
    """Z(S, z) up to the system order through the selected engine."""
    if not len(system):
        return TruncatedSeries.one(system.order, system.backend)
    if choose_engine(system, engine) == "cluster":
        return poly_from_log(cluster_log_series(system).series)
    return partition_polynomial(system)


def weight_table(
    model: ContourModel, region: Region, order: int, strategy: Optional[str] = None, engine: Optional[str] = None
) -> ContourWeightTable:
    return ContourWeightTable(model, region, order, strategy=strategy, engine=engine).build()


def outer_weight(model: ContourModel, region: Region, ground: Ground, contour: Contour, m: int) -> TruncatedSeries:
    """Outer weight of ``contour`` up to order m, building the interior weights first."""
    if contour.type != ground:
        raise ConfigurationError(f"contour has type {contour.type}, not {ground}")
    return weight_table(model, region, m).outer_weight(contour)


# ---------------------------------------------------------------------------
# counting
# ---------------------------------------------------------------------------

def contour_Z(
    model: ContourModel,
    region: Region,
    ground: Ground,
    m: int,
    engine: Optional[str] = None,
    strategy: Optional[str] = None,
) -> LogZCoefficients:
    """Log-coefficients 1..m of Z^ground(region, z) over mutually external outer contours."""
    if m < 1:
        raise ConfigurationError("m must be at least 1")
    model.parse_ground(ground)
    table = weight_table(model, region, m, strategy, engine)
    return table.log_partition(region.vertices, ground)


def contour_polynomial(
    model: ContourModel, region: Region, ground: Ground, m: Optional[int] = None, engine: Optional[str] = None
) -> TruncatedSeries:
    """Z^ground(region, z) as an exact polynomial up to order m (default: full degree C|Lambda|)."""
    m = m if m is not None else model.degree_bound * len(region)
    return poly_from_log(contour_Z(model, region, ground, m, engine).series)


def approx_contour_Z(
    model: ContourModel,
    region: Region,
    ground: Ground,
    z: float,
    epsilon: float,
    force: bool = False,
    engine: Optional[str] = None,
    m_override: Optional[int] = None,
) -> ApproxResult:
    """
    epsilon-relative approximation of Z^ground(region, z) with N = C|Lambda|.

    Raises:
        RegimeError: If |z| >= model.delta and force is False
    """
    if epsilon <= 0:
        raise ConfigurationError("epsilon must be positive")
    started = time.perf_counter()
    degree = model.degree_bound * len(region)
    forced = check_regime(abs(z), model.delta, force)
    if m_override is not None:
        m = m_override
    elif forced:
        m = degree
    else:
        m = truncation_order(degree, abs(z), model.delta, epsilon)
    coefficients = contour_Z(model, region, ground, m, engine)
    value = exp_of(coefficients.series.evaluate(z))
    logger.info(
        "approx_contour_Z %s/%s: m=%d engine=%s in %.3fs",
        model.name, model.ground_name(ground), m, coefficients.engine, time.perf_counter() - started,
    )
    return ApproxResult(value, m, coefficients, z, epsilon, model.delta, forced, {"degree_bound": degree})


@dataclass
class SpinPartitionResult:
    """Spin partition function z^(-k) * Z^ground(region, z), with its logarithm."""

    value: float
    log_value: float
    prefactor_exponent: int
    z: float
    parameter: float
    contour: ApproxResult
    extras: Dict[str, object] = field(default_factory=dict)


def spin_Z_from_contours(
    model: ContourModel,
    region: Region,
    ground: Ground,
    parameter: float,
    epsilon: float,
    force: bool = False,
    engine: Optional[str] = None,
) -> SpinPartitionResult:
    """
    Spin partition function from the contour approximation and the instance prefactor.

    Args:
        parameter: beta for Potts, lambda for hard-core
    """
    z = model.z_from_parameter(parameter)
    approx = approx_contour_Z(model, region, ground, z, epsilon, force, engine)
    exponent = model.prefactor_exponent(region, ground)
    log_value = -exponent * math.log(z) + math.log(approx.value)
    try:
        value = math.exp(log_value)
    except OverflowError:
        value = math.inf
    return SpinPartitionResult(value, log_value, exponent, z, parameter, approx)


# ---------------------------------------------------------------------------
# polymer representation
# ---------------------------------------------------------------------------

def polymer_representation_weight(table: ContourWeightTable, contour: Contour) -> TruncatedSeries:
    """w^type(gamma) = w^ext(gamma) / prod over interior components of Z^type(A)."""
    weight = table.outer_weight(contour)
    for interior in contour.interiors:
        weight = weight * table.interior_polynomial(interior, contour.type).inverse()
    return weight


def polymer_representation_system(table: ContourWeightTable, ground: Ground) -> PolymerSystem:
    """All type-ground contours of the table with support-distance compatibility."""
    region = table.region
    members = table.contours[ground]
    weights = [polymer_representation_weight(table, c) for c in members]
    return PolymerSystem.build(
        items=members,
        keys=[c.key for c in members],
        orders=[max(w.lowest_order(), 1) for w in weights],
        weights=weights,
        footprint=lambda c: c.support,
        reach=lambda c: halo(region, c.support),
        order=table.order,
        backend=EXACT,
    )


def contour_kp_certificate(table: ContourWeightTable, ground: Ground, z: float, max_size: Optional[int] = None) -> KPCertificate:
    """
    Truncated Kotecky-Preiss check on polymer-representation weights.

    For every listed type-ground contour, sums |w(gamma', z)| e^|support'|
    over contours within support distance 1 and compares with |support|.
    """
    members = [c for c in table.contours[ground] if max_size is None or c.size <= max_size]
    values = {c.key: abs(float(polymer_representation_weight(table, c).evaluate(z))) for c in members}
    margins: Dict[Tuple, float] = {}
    for contour in members:
        reach = halo(table.region, contour.support)
        total = sum(values[o.key] * math.exp(o.size) for o in members if reach & o.support)
        margins[contour.key] = contour.size - total
    worst = min(margins.values(), default=0.0)
    return KPCertificate(
        holds_truncated=worst >= -get_settings().float_tolerance,
        worst_margin=worst,
        margins=margins,
        truncated_at=max_size or max((c.size for c in members), default=0),
    )
