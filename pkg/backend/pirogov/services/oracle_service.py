"""
Brute-force oracles.

Exact partition functions and distributions by exhaustive enumeration,
used as ground truth by the test suites and the ``oracle`` command. All
polynomials are exact (integer or rational coefficients); the Ising
oracle returns exact counts indexed by (z power, boundary size) and only
turns them into a float series on request.

Results can be cached on disk (``PIROGOV_CACHE_DIR``) keyed by the sha256
of the canonical JSON of the request.
"""

import hashlib
import json
import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from pathlib import Path
from typing import Any, Callable, Dict, Hashable, Iterable, List, Mapping, Optional, Sequence, Tuple

import networkx as nx

from pirogov.core.config import get_settings
from pirogov.core.exceptions import BoundaryConditionError, CapExceededError, ConfigurationError
from pirogov.core.parallel import ordered_map
from pirogov.models.contour import Contour, ContourModel, Ground
from pirogov.models.lattice import Point, Region
from pirogov.models.polymer import Polymer, PolymerModel
from pirogov.models.series import EXACT, FLOAT, TruncatedSeries

logger = logging.getLogger(__name__)


# ---------------------------------------------------------------------------
# disk cache
# ---------------------------------------------------------------------------

class OracleCache:
    """
    JSON files under ``cache_dir`` keyed by a content hash of the request.

    Args:
        cache_dir: Directory for cache files (None disables caching)
    """

    def __init__(self, cache_dir: Optional[Path] = None):
        self.cache_dir = Path(cache_dir) if cache_dir is not None else None
        self.logger = logger

    @classmethod
    def from_settings(cls) -> "OracleCache":
        return cls(get_settings().cache_dir)

    @property
    def enabled(self) -> bool:
        return self.cache_dir is not None

    @staticmethod
    def digest(kind: str, payload: Mapping[str, Any]) -> str:
        text = json.dumps({"kind": kind, "payload": payload}, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(text.encode("utf-8")).hexdigest()

    def _path(self, kind: str, payload: Mapping[str, Any]) -> Path:
        return self.cache_dir / f"{kind}-{self.digest(kind, payload)}.json"

    def get(self, kind: str, payload: Mapping[str, Any]) -> Optional[Any]:
        if not self.enabled:
            return None
        path = self._path(kind, payload)
        if not path.exists():
            return None
        try:
            return json.loads(path.read_text())["result"]
        except (OSError, ValueError, KeyError) as exc:
            self.logger.warning("ignoring unreadable oracle cache file %s: %s", path, exc)
            return None

    def put(self, kind: str, payload: Mapping[str, Any], result: Any) -> None:
        if not self.enabled:
            return
        self.cache_dir.mkdir(parents=True, exist_ok=True)
        path = self._path(kind, payload)
        path.write_text(json.dumps({"kind": kind, "payload": payload, "result": result}, sort_keys=True))

    def series(self, kind: str, payload: Mapping[str, Any], compute: Callable[[], TruncatedSeries]) -> TruncatedSeries:
        """Exact series through the cache (coefficients stored as fraction strings)."""
        stored = self.get(kind, payload)
        if stored is not None:
            return TruncatedSeries.from_coefficients([Fraction(c) for c in stored], len(stored) - 1, EXACT)
        result = compute()
        self.put(kind, payload, [str(c) for c in result.coeffs])
        return result


def _check_cap(states: int, what: str) -> None:
    cap = get_settings().oracle_state_cap
    if states > cap:
        raise CapExceededError(f"{what}: {states} states exceed the oracle cap {cap}")


def _graph_payload(graph: nx.Graph) -> Dict[str, Any]:
    nodes = sorted(graph.nodes, key=repr)
    index = {v: i for i, v in enumerate(nodes)}
    return {"n": len(nodes), "edges": sorted(sorted((index[u], index[v])) for u, v in graph.edges)}


def _region_payload(region: Region) -> Dict[str, Any]:
    return {"dim": region.dim, "torus": region.torus, "points": [list(p) for p in region.sorted_vertices]}


def _series_from_counts(counts: Mapping[int, int], order: int) -> TruncatedSeries:
    if counts and max(counts) > order:
        raise ConfigurationError(f"oracle polynomial has degree {max(counts)} above order {order}")
    coeffs = [Fraction(counts.get(k, 0)) for k in range(order + 1)]
    return TruncatedSeries(order, tuple(coeffs), EXACT)


# ---------------------------------------------------------------------------
# partition functions
# ---------------------------------------------------------------------------

def independent_set_counts(graph: nx.Graph) -> Dict[int, int]:
    """Number of independent sets of each size."""
    nodes = sorted(graph.nodes, key=repr)
    index = {v: i for i, v in enumerate(nodes)}
    masks = [0] * len(nodes)
    for u, v in graph.edges:
        masks[index[u]] |= 1 << index[v]
        masks[index[v]] |= 1 << index[u]
    counts: Dict[int, int] = {}

    def extend(start: int, blocked: int, size: int) -> None:
        counts[size] = counts.get(size, 0) + 1
        for i in range(start, len(nodes)):
            if not blocked >> i & 1:
                extend(i + 1, blocked | masks[i] | (1 << i), size + 1)

    extend(0, 0, 0)
    return counts


def brute_Z_hardcore(graph: nx.Graph, order: Optional[int] = None) -> TruncatedSeries:
    """
    Independence polynomial of ``graph``.

    Raises:
        CapExceededError: If 2^|V| exceeds the oracle state cap
    """
    n = graph.number_of_nodes()
    _check_cap(2 ** n, "hard-core oracle")
    order = n if order is None else order
    cache = OracleCache.from_settings()
    payload = {**_graph_payload(graph), "order": order}
    return cache.series("hardcore", payload, lambda: _series_from_counts(independent_set_counts(graph), order))


def brute_ising_counts(graph: nx.Graph) -> Dict[Tuple[int, int], int]:
    """Exact counts {(2|S|, |edge boundary of S|): number of vertex sets S}."""
    nodes = sorted(graph.nodes, key=repr)
    _check_cap(2 ** len(nodes), "Ising oracle")
    counts: Dict[Tuple[int, int], int] = {}
    for bits in product((0, 1), repeat=len(nodes)):
        chosen = {v for v, b in zip(nodes, bits) if b}
        boundary = sum(1 for u, v in graph.edges if (u in chosen) != (v in chosen))
        key = (2 * len(chosen), boundary)
        counts[key] = counts.get(key, 0) + 1
    return counts


def ising_count_rows(counts: Dict[Tuple[int, int], int]) -> List[List[int]]:
    """The exact Ising count table as sorted [2|S|, boundary, count] rows."""
    return [[power, boundary, count] for (power, boundary), count in sorted(counts.items())]


def evaluate_ising_counts(
    counts: Dict[Tuple[int, int], int], beta: float, order: int
) -> TruncatedSeries:
    """Float series sum over rows of count * exp(-2 beta boundary) z^power, truncated at ``order``."""
    coeffs = [0.0] * (order + 1)
    for (power, boundary), count in sorted(counts.items()):
        if power <= order:
            coeffs[power] += count * math.exp(-2.0 * beta * boundary)
    return TruncatedSeries(order, tuple(coeffs), FLOAT)


def brute_Z_ising(graph: nx.Graph, beta: float, order: Optional[int] = None) -> TruncatedSeries:
    """
    Ising-with-field polynomial sum_S z^(2|S|) exp(-2 beta |boundary S|).

    The enumeration is exact and lives in ``brute_ising_counts``; only the
    factors exp(-2 beta k) are floats, so the returned series is FLOAT and
    comparisons against it use a relative tolerance.
    """
    order = 2 * graph.number_of_nodes() if order is None else order
    return evaluate_ising_counts(brute_ising_counts(graph), beta, order)


def _padded_free_points(region: Region) -> Tuple[List[Point], List[Point]]:
    fixed = [x for x in region.sorted_vertices if not region.has_clearance(x, 2)]
    free = [x for x in region.sorted_vertices if region.has_clearance(x, 2)]
    return fixed, free


def brute_Z_potts(
    region: Region, q: int, boundary: Optional[int] = None, order: Optional[int] = None, threads: Optional[int] = None
) -> TruncatedSeries:
    """
    sum over configurations of z^(number of disagreeing edges of E(region)).

    With a boundary colour only the points at distance > 2 from the
    complement are free; without one every point is free.
    """
    if q < 2:
        raise ConfigurationError("Potts oracle needs q >= 2")
    if boundary is not None and not 0 <= boundary < q:
        raise BoundaryConditionError(f"boundary colour {boundary} outside 0..{q - 1}")
    if boundary is None:
        fixed, free = [], list(region.sorted_vertices)
    else:
        fixed, free = _padded_free_points(region)
    _check_cap(q ** len(free), "Potts oracle")
    edges = region.edges
    order = len(edges) if order is None else order

    def block(first: int) -> Dict[int, int]:
        counts: Dict[int, int] = {}
        spins = {x: boundary for x in fixed}
        rest = free[1:]
        if free:
            spins[free[0]] = first
        for values in product(range(q), repeat=len(rest)):
            spins.update(zip(rest, values))
            energy = sum(1 for x, y in edges if spins[x] != spins[y])
            counts[energy] = counts.get(energy, 0) + 1
        return counts

    def compute() -> TruncatedSeries:
        blocks = ordered_map(block, range(q) if free else [0], threads)
        total: Dict[int, int] = {}
        for counts in blocks:
            for energy, count in counts.items():
                total[energy] = total.get(energy, 0) + count
        return _series_from_counts(total, order)

    payload = {**_region_payload(region), "q": q, "boundary": boundary, "order": order}
    return OracleCache.from_settings().series("potts", payload, compute)


def brute_Z_hardcore_region(region: Region, boundary: str = "even", order: Optional[int] = None) -> TruncatedSeries:
    """
    sum over padded independent sets I of z^(|region^boundary| - |I|).

    Points at distance <= 2 from the complement follow the boundary
    sublattice pattern; independent sets are enumerated over the rest.
    """
    if boundary not in ("even", "odd"):
        raise BoundaryConditionError(f"unknown hard-core boundary {boundary!r}")
    parity = 0 if boundary == "even" else 1
    fixed, free = _padded_free_points(region)
    _check_cap(2 ** len(free), "hard-core region oracle")
    occupied = {x for x in fixed if sum(x) % 2 == parity}
    target = sum(1 for x in region.vertices if sum(x) % 2 == parity)
    order = len(region) if order is None else order

    graph = nx.Graph()
    blocked = set()
    for x in free:
        graph.add_node(x)
        if any(y in occupied for y in region.lattice_neighbors(x)):
            blocked.add(x)
    for x in free:
        for y in region.lattice_neighbors(x):
            if y in graph:
                graph.add_edge(x, y)
    graph.remove_nodes_from(blocked)

    def compute() -> TruncatedSeries:
        counts: Dict[int, int] = {}
        for size, count in independent_set_counts(graph).items():
            energy = target - len(occupied) - size
            if energy < 0:
                raise ConfigurationError("padded independent set larger than the boundary sublattice")
            counts[energy] = counts.get(energy, 0) + count
        return _series_from_counts(counts, order)

    payload = {**_region_payload(region), "boundary": boundary, "order": order}
    return OracleCache.from_settings().series("hardcore-region", payload, compute)


def all_configurations(model: ContourModel, region: Region, ground: Optional[Ground] = None) -> Iterable[Dict[Point, Any]]:
    """Every admissible configuration (padded by ``ground`` on free regions, unrestricted on the torus)."""
    if region.is_torus:
        ground = model.ground_states[0]
    states = len(model.spin_set) ** model.count_padded_free(region)
    _check_cap(states, f"{model.name} configurations")
    return model.padded_configurations(region, ground)


def brute_Z_torus(model: ContourModel, n: int, order: Optional[int] = None) -> TruncatedSeries:
    """Z(T_n, z) = sum over all torus configurations of z^energy."""
    region = Region.full_torus(n, model.dim)
    model.validate_geometry(region)
    order = model.degree_bound * len(region) if order is None else order
    counts: Dict[int, int] = {}
    for config in all_configurations(model, region):
        energy = model.configuration_energy(region, model.ground_states[0], config)
        counts[energy] = counts.get(energy, 0) + 1
    return _series_from_counts(counts, order)


def brute_Z_contour_region(
    model: ContourModel, region: Region, ground: Ground, order: Optional[int] = None
) -> TruncatedSeries:
    """Model-generic oracle: sum over Omega^ground_region of z^energy."""
    order = model.degree_bound * len(region) if order is None else order
    counts: Dict[int, int] = {}
    for config in all_configurations(model, region, ground):
        energy = model.configuration_energy(region, ground, config)
        counts[energy] = counts.get(energy, 0) + 1
    return _series_from_counts(counts, order)


def brute_contour_decomposition(
    model: ContourModel, region: Region, ground: Optional[Ground] = None
) -> List[Tuple[Dict[Point, Any], Any]]:
    """
    Every configuration with its contour decomposition.

    Free regions give the contour list of each padded configuration; on the
    torus each entry holds the small/large classification instead.
    """
    decompositions = []
    if region.is_torus:
        from pirogov.services.torus_service import classify_configuration

        for config in all_configurations(model, region):
            decompositions.append((config, classify_configuration(model, region, config)))
        return decompositions
    for config in all_configurations(model, region, ground):
        decompositions.append((config, model.contours_of_config(region, ground, config, check=False)))
    return decompositions


def brute_matching_sets(model: ContourModel, n: int, ground: Ground, order: Optional[int] = None) -> TruncatedSeries:
    """
    Z^ground(T_n, z) by direct enumeration of mutually external small contour families.

    Each family contributes the product of its outer weights; interior
    factors come from the free-geometry contour polynomial of the embedded
    interior.
    """
    from pirogov.services.contour_service import contour_polynomial, mutually_external
    from pirogov.services.torus_service import embed_interior, list_small_contours, torus_region

    region = torus_region(model, n)
    order = model.degree_bound * len(region) if order is None else order
    contours = list_small_contours(model, n, ground)

    weights = []
    for contour in contours:
        weight = TruncatedSeries.monomial(contour.surface_energy, order, 1, EXACT)
        for interior, label in zip(contour.interiors, contour.labels):
            canonical, shift = embed_interior(region, contour, interior).canonical()
            weight = weight * contour_polynomial(model, canonical, model.translate_ground(label, shift), order)
        weights.append(weight)

    total = [TruncatedSeries.zero(order, EXACT)]

    def extend(start: int, chosen: List[int], acc: TruncatedSeries) -> None:
        total[0] = total[0] + acc
        for i in range(start, len(contours)):
            if all(mutually_external(region, contours[i], contours[j]) for j in chosen):
                extend(i + 1, chosen + [i], acc * weights[i])

    extend(0, [], TruncatedSeries.one(order, EXACT))
    return total[0]


# ---------------------------------------------------------------------------
# exact distributions
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ExactDistribution:
    """
    Outcomes with exact rational probabilities summing to 1.

    Raises:
        ConfigurationError: If the probabilities do not sum to exactly 1
    """

    outcomes: Tuple[Tuple[Hashable, Fraction], ...]

    def __post_init__(self):
        total = sum((p for _, p in self.outcomes), Fraction(0))
        if total != 1:
            raise ConfigurationError(f"exact distribution sums to {total}, not 1")

    @classmethod
    def from_weights(cls, weights: Mapping[Hashable, Fraction]) -> "ExactDistribution":
        total = sum(weights.values(), Fraction(0))
        if total <= 0:
            raise ConfigurationError("exact distribution needs positive total weight")
        ordered = sorted(weights.items(), key=lambda item: repr(item[0]))
        return cls(tuple((key, Fraction(w) / total) for key, w in ordered if w))

    def as_dict(self) -> Dict[Hashable, Fraction]:
        return dict(self.outcomes)

    def probability(self, key: Hashable) -> Fraction:
        return self.as_dict().get(key, Fraction(0))

    def __len__(self) -> int:
        return len(self.outcomes)


def _exact(z) -> Fraction:
    return z if isinstance(z, Fraction) else Fraction(z)


def compatible_families(items: Sequence[Any], incompatible: Callable[[int, int], bool]) -> Iterable[Tuple[int, ...]]:
    """Index tuples of pairwise compatible items, the empty family first."""
    def extend(start: int, chosen: List[int]):
        yield tuple(chosen)
        for i in range(start, len(items)):
            if all(not incompatible(i, j) for j in chosen):
                chosen.append(i)
                yield from extend(i + 1, chosen)
                chosen.pop()

    yield from extend(0, [])


def polymer_family_key(polymers: Iterable[Polymer]) -> Tuple:
    return tuple(sorted(p.key for p in polymers))


def exact_polymer_distribution(model: PolymerModel, z) -> ExactDistribution:
    """mu_G over compatible polymer families with exact weights at rational z."""
    z = _exact(z)
    polymers = model.list_polymers(model.size)
    _check_cap(2 ** model.size, "polymer family oracle")
    weights: Dict[Hashable, Fraction] = {}
    for family in compatible_families(polymers, lambda i, j: not model.compatible(polymers[i], polymers[j])):
        value = Fraction(1)
        for i in family:
            value *= _exact(model.weight_value(polymers[i], z))
        weights[polymer_family_key(polymers[i] for i in family)] = value
    return ExactDistribution.from_weights(weights)


def configuration_key(region: Region, config: Mapping[Point, Any]) -> Tuple:
    return tuple(config[x] for x in region.sorted_vertices)


def exact_gibbs_distribution(model: ContourModel, region: Region, ground: Optional[Ground], z) -> ExactDistribution:
    """Gibbs law over admissible configurations with weight z^energy, keyed by spin tuple."""
    z = _exact(z)
    weights: Dict[Hashable, Fraction] = {}
    reference = ground if ground is not None else model.ground_states[0]
    for config in all_configurations(model, region, ground):
        weights[configuration_key(region, config)] = z ** model.configuration_energy(region, reference, config)
    return ExactDistribution.from_weights(weights)


def contour_family_key(contours: Iterable[Contour]) -> Tuple:
    return tuple(sorted(c.key for c in contours))


def exact_outer_contour_distribution(table, ground: Ground, z) -> ExactDistribution:
    """
    mu^ground over mutually external outer-contour families of a weight table.

    Args:
        table: A built ContourWeightTable at full degree
        ground: Exterior ground state
        z: Activity (converted to an exact rational)
    """
    from pirogov.services.contour_service import mutually_external

    z = _exact(z)
    members = table.members(table.region.vertices, ground)
    values = [table.outer_weight(c).evaluate(z) for c in members]
    weights: Dict[Hashable, Fraction] = {}
    families = compatible_families(
        members, lambda i, j: not mutually_external(table.region, members[i], members[j])
    )
    for family in families:
        value = Fraction(1)
        for i in family:
            value *= values[i]
        weights[contour_family_key(members[i] for i in family)] = value
    return ExactDistribution.from_weights(weights)


# ---------------------------------------------------------------------------
# total variation
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TVResult:
    """Empirical TV distance with a k-sigma multinomial confidence radius."""

    distance: float
    radius: float
    samples: int

    def within(self, epsilon: float) -> bool:
        return self.distance <= epsilon + self.radius


def tv_distance(exact: ExactDistribution, counts: Mapping[Hashable, int], sigmas: float = 4.0) -> TVResult:
    """
    TV distance between an exact law and empirical counts.

    The radius is (sigmas/2) * sum_k sqrt(p_k (1 - p_k) / N).
    """
    total = sum(counts.values())
    if total <= 0:
        raise ConfigurationError("tv_distance needs at least one sample")
    probabilities = exact.as_dict()
    keys = set(probabilities) | set(counts)
    distance = 0.5 * sum(abs(float(probabilities.get(k, 0)) - counts.get(k, 0) / total) for k in keys)
    radius = 0.5 * sigmas * sum(math.sqrt(float(p) * (1 - float(p)) / total) for p in probabilities.values())
    return TVResult(distance, radius, total)
