"""
Cluster expansion and truncated-Taylor counting.

Two engines produce the log-partition coefficients of a PolymerSystem:

- ``cluster``: sums phi(H)/prod(mult!) * prod w over clusters of total
  order <= m. Clusters come either from connected item sets of the
  incompatibility graph ("growth") or from labelled rooted trees
  ("trees"); both give the same multisets.
- ``newton``: enumerates compatible families of total order <= m to get
  the polynomial coefficients e_k and converts them with the Newton
  identities.

``auto`` estimates the cluster count and falls back to ``newton`` when
the cluster route would be too large.
"""

import cmath
import logging
import math
import time
from fractions import Fraction
from math import factorial
from typing import Dict, Iterator, List, Optional, Sequence, Set, Tuple

from pirogov.core.config import Settings, get_settings
from pirogov.core.exceptions import ConfigurationError, RegimeError
from pirogov.core.parallel import ordered_map
from pirogov.models.cluster import ApproxResult, Cluster, LogZCoefficients, PolymerSystem
from pirogov.models.lattice import enumerate_connected_sets
from pirogov.models.polymer import Polymer, PolymerFilter, PolymerModel
from pirogov.models.series import EXACT, TruncatedSeries, log_from_poly, mul
from pirogov.services.ursell import ursell_of_multiplicities

logger = logging.getLogger(__name__)


# ---------------------------------------------------------------------------
# systems
# ---------------------------------------------------------------------------

def polymer_system(model: PolymerModel, order: int) -> PolymerSystem:
    """Polymers whose lowest weight order is at most ``order``, with graph-distance incompatibility."""
    if order < 0:
        raise ConfigurationError("order must be non-negative")
    max_size = int(math.floor(order / model.rho + 1e-9))
    polymers = model.list_polymers(max_size)
    return PolymerSystem.build(
        items=polymers,
        keys=[p.key for p in polymers],
        orders=[model.min_order(p) for p in polymers],
        weights=[model.weight(p, order) for p in polymers],
        footprint=lambda p: p.support,
        reach=lambda p: model.closed_neighborhood(p.support),
        order=order,
        backend=model.backend,
    )


# ---------------------------------------------------------------------------
# cluster enumeration
# ---------------------------------------------------------------------------

def _multiplicity_vectors(orders: Sequence[int], budget: int) -> Iterator[Tuple[int, ...]]:
    """Vectors s >= 1 with sum s_i * orders_i <= budget."""
    base = sum(orders)
    if base > budget:
        return

    def extend(position: int, spent: int, prefix: List[int]):
        if position == len(orders):
            yield tuple(prefix)
            return
        extra = 0
        while spent + extra * orders[position] <= budget:
            prefix.append(1 + extra)
            yield from extend(position + 1, spent + extra * orders[position], prefix)
            prefix.pop()
            extra += 1

    yield from extend(0, base, [])


def _make_cluster(system: PolymerSystem, types: Sequence[int], mults: Sequence[int], memo: Dict) -> Optional[Cluster]:
    def incompatible(a: int, b: int) -> bool:
        return system.incompatible(types[a], types[b])

    value = ursell_of_multiplicities(mults, incompatible, memo)
    if value == 0:
        return None
    denominator = 1
    for mult in mults:
        denominator *= factorial(mult)
    return Cluster(
        members=tuple(zip(types, mults)),
        keys=tuple(system.keys[i] for i in types),
        ursell=value,
        mult_factor=Fraction(1, denominator),
        total_order=sum(system.orders[i] * s for i, s in zip(types, mults)),
    )


def _clusters_from_root(system: PolymerSystem, root: int) -> List[Cluster]:
    found: List[Cluster] = []
    sets = enumerate_connected_sets(
        root,
        lambda i: sorted(system.neighbors[i]),
        system.order,
        cost=lambda i: system.orders[i],
        allowed=lambda i: i > root,
    )
    for item_set in sets:
        types = sorted(item_set)
        memo: Dict[Tuple[int, ...], int] = {}
        for mults in _multiplicity_vectors([system.orders[i] for i in types], system.order):
            cluster = _make_cluster(system, types, mults, memo)
            if cluster is not None:
                found.append(cluster)
    return found


def rooted_trees(vertex_count: int) -> Iterator[List[int]]:
    """
    Rooted unlabeled trees as level sequences (root at level 1), by the
    Beyer-Hedetniemi successor rule.
    """
    if vertex_count < 1:
        return
    levels = list(range(1, vertex_count + 1))
    while True:
        yield list(levels)
        p = max((i for i in range(vertex_count) if levels[i] > 2), default=None)
        if p is None:
            return
        q = max(i for i in range(p) if levels[i] == levels[p] - 1)
        for i in range(p, vertex_count):
            levels[i] = levels[i - (p - q)]


def _parents(levels: List[int]) -> List[int]:
    parents = [-1]
    for i in range(1, len(levels)):
        parents.append(max(j for j in range(i) if levels[j] == levels[i] - 1))
    return parents


def _clusters_by_trees(system: PolymerSystem) -> List[Cluster]:
    if not len(system):
        return []
    max_vertices = system.order // system.min_order
    seen: Set[Tuple[int, ...]] = set()
    for k in range(1, max_vertices + 1):
        for levels in rooted_trees(k):
            parents = _parents(levels)
            labels: List[int] = []

            def label(position: int, spent: int):
                if position == k:
                    seen.add(tuple(sorted(labels)))
                    return
                if position == 0:
                    choices = range(len(system))
                else:
                    anchor = labels[parents[position]]
                    choices = sorted(system.neighbors[anchor] | {anchor})
                for item in choices:
                    if spent + system.orders[item] <= system.order:
                        labels.append(item)
                        label(position + 1, spent + system.orders[item])
                        labels.pop()

            label(0, 0)

    clusters = []
    for multiset in sorted(seen):
        types = sorted(set(multiset))
        mults = [multiset.count(i) for i in types]
        cluster = _make_cluster(system, types, mults, {})
        if cluster is not None:
            clusters.append(cluster)
    return clusters


def enumerate_system_clusters(
    system: PolymerSystem, method: Optional[str] = None, threads: Optional[int] = None
) -> List[Cluster]:
    """Every cluster of the system with total order <= system.order, canonical order."""
    method = method or get_settings().cluster_method
    if method == "trees":
        clusters = _clusters_by_trees(system)
    elif method == "growth":
        per_root = ordered_map(lambda root: _clusters_from_root(system, root), range(len(system)), threads)
        clusters = [cluster for batch in per_root for cluster in batch]
    else:
        raise ConfigurationError(f"unknown cluster method {method!r}")
    return sorted(clusters, key=lambda c: c.members)


def enumerate_clusters(model: PolymerModel, order_cap: int, method: Optional[str] = None) -> Iterator[Cluster]:
    """Clusters of a polymer model with sum of lowest weight orders <= order_cap."""
    if order_cap < 1:
        raise ConfigurationError("order cap must be at least 1")
    return iter(enumerate_system_clusters(polymer_system(model, order_cap), method))


# ---------------------------------------------------------------------------
# engines
# ---------------------------------------------------------------------------

def _cluster_series(system: PolymerSystem, cluster: Cluster, powers: Dict[Tuple[int, int], TruncatedSeries]) -> TruncatedSeries:
    term = TruncatedSeries.one(system.order, system.backend)
    for index, mult in cluster.members:
        key = (index, mult)
        if key not in powers:
            powers[key] = system.weights[index].power(mult)
        term = mul(term, powers[key])
    factor = cluster.mult_factor * cluster.ursell
    return term.scale(factor if system.backend == EXACT else float(factor))


def cluster_log_series(system: PolymerSystem, method: Optional[str] = None, threads: Optional[int] = None) -> LogZCoefficients:
    clusters = enumerate_system_clusters(system, method, threads)
    powers: Dict[Tuple[int, int], TruncatedSeries] = {}
    total = TruncatedSeries.zero(system.order, system.backend)
    for cluster in clusters:
        total = total + _cluster_series(system, cluster, powers)
    return LogZCoefficients(total, "cluster", len(clusters), len(system))


def partition_polynomial(system: PolymerSystem) -> TruncatedSeries:
    """Z(S, z) up to order m by enumerating compatible families."""
    masks = [sum(1 << j for j in system.neighbors[i]) | (1 << i) for i in range(len(system))]
    total = [TruncatedSeries.zero(system.order, system.backend)]

    def extend(start: int, blocked: int, spent: int, acc: TruncatedSeries):
        total[0] = total[0] + acc
        for i in range(start, len(system)):
            if blocked >> i & 1 or spent + system.orders[i] > system.order:
                continue
            extend(i + 1, blocked | masks[i], spent + system.orders[i], mul(acc, system.weights[i]))

    extend(0, 0, 0, TruncatedSeries.one(system.order, system.backend))
    return total[0]


def newton_log_series(system: PolymerSystem) -> LogZCoefficients:
    return LogZCoefficients(log_from_poly(partition_polynomial(system)), "newton", None, len(system))


def estimated_cluster_count(system: PolymerSystem) -> float:
    if not len(system):
        return 0.0
    depth = system.order // system.min_order
    return len(system) * float(system.max_neighbors + 1) ** max(depth - 1, 0)


def choose_engine(system: PolymerSystem, engine: Optional[str] = None, settings: Optional[Settings] = None) -> str:
    settings = settings or get_settings()
    engine = engine or settings.log_engine
    if engine not in ("auto", "cluster", "newton"):
        raise ConfigurationError(f"unknown log engine {engine!r}")
    if engine != "auto":
        return engine
    return "cluster" if estimated_cluster_count(system) <= settings.cluster_work_limit else "newton"


def log_partition(
    system: PolymerSystem,
    engine: Optional[str] = None,
    method: Optional[str] = None,
    threads: Optional[int] = None,
) -> LogZCoefficients:
    """Log-partition coefficients of a system through the selected engine."""
    if not len(system):
        return LogZCoefficients(TruncatedSeries.zero(system.order, system.backend), "empty", 0, 0)
    chosen = choose_engine(system, engine)
    if chosen == "cluster":
        return cluster_log_series(system, method, threads)
    return newton_log_series(system)


def logZ_coefficients(model: PolymerModel, m: int, engine: Optional[str] = None, method: Optional[str] = None) -> LogZCoefficients:
    """Coefficients 1..m of log Z(G, z) for a polymer model."""
    if m < 1:
        raise ConfigurationError("m must be at least 1")
    return log_partition(polymer_system(model, m), engine, method)


def logZ_subfamily(
    model: PolymerModel, polymer_filter: PolymerFilter, m: int, engine: Optional[str] = None
) -> LogZCoefficients:
    """Same pipeline as logZ_coefficients, restricted to polymers passing ``polymer_filter``."""
    return logZ_coefficients(model.restrict(polymer_filter), m, engine)


# ---------------------------------------------------------------------------
# truncated Taylor approximation
# ---------------------------------------------------------------------------

def truncation_order(degree_bound: int, z_abs: float, delta: float, epsilon: float) -> int:
    """m = ceil(log(N/eps) / (1 - |z|/delta)), at least 1."""
    if epsilon <= 0:
        raise ConfigurationError("epsilon must be positive")
    if z_abs >= delta:
        raise RegimeError(f"|z| = {z_abs} is not below the zero-free radius {delta}")
    ratio = math.log(max(degree_bound, 1) / epsilon)
    return max(1, math.ceil(ratio / (1.0 - z_abs / delta) - 1e-12))


def check_regime(z_abs: float, delta: float, force: bool) -> bool:
    """Returns True when the run proceeds outside the certified disc."""
    if z_abs < delta:
        return False
    if not force:
        raise RegimeError(f"|z| = {z_abs} is not below the zero-free radius {delta}; use force to override")
    logger.warning("|z| = %s >= delta = %s: computing without an error guarantee", z_abs, delta)
    return True


def exp_of(value):
    return cmath.exp(value) if isinstance(value, complex) else math.exp(float(value))


def approx_Z(
    model: PolymerModel,
    z,
    epsilon: float,
    force: bool = False,
    engine: Optional[str] = None,
    m_override: Optional[int] = None,
) -> ApproxResult:
    """
    epsilon-relative approximation of Z(G, z) as exp(T_m(G, z)).

    Args:
        model: Polymer model
        z: Activity with |z| < model.delta
        epsilon: Relative error target
        force: Compute at full degree even when |z| >= delta
        engine: Log engine override
        m_override: Explicit truncation order

    Raises:
        RegimeError: If |z| >= delta and force is False
    """
    if epsilon <= 0:
        raise ConfigurationError("epsilon must be positive")
    started = time.perf_counter()
    forced = check_regime(abs(z), model.delta, force)
    if m_override is not None:
        m = m_override
    elif forced:
        m = model.degree_of_partition_function
    else:
        m = truncation_order(model.degree_of_partition_function, abs(z), model.delta, epsilon)

    coefficients = logZ_coefficients(model, m, engine)
    value = exp_of(coefficients.series.evaluate(z))
    logger.info(
        "approx_Z %s: m=%d engine=%s in %.3fs",
        model.name, m, coefficients.engine, time.perf_counter() - started,
    )
    return ApproxResult(value, m, coefficients, z, epsilon, model.delta, forced)
