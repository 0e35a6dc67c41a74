"""
Abstract polymer models and the built-in instances.

Provides the Polymer value, the PolymerModel interface (membership,
weights, decay constant rho, degree bound C, zero-free radius delta) and
two instances: the hard-core model at low fugacity and the Ising model
with an external field.
"""

import copy
import logging
import math
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, FrozenSet, Hashable, Iterable, List, Optional, Tuple, Union

import networkx as nx

from pirogov.core.exceptions import ConfigurationError
from pirogov.models.lattice import Region, graph_connected_subsets
from pirogov.models.series import EXACT, FLOAT, TruncatedSeries

logger = logging.getLogger(__name__)

Vertex = Hashable
PolymerFilter = Callable[["Polymer"], bool]


@dataclass(frozen=True)
class Polymer:
    """
    A connected support with a spin on each vertex.

    The canonical id is (support, spins) with the support sorted, so equal
    polymers compare and hash equal.
    """

    support: Tuple[Vertex, ...]
    spins: Tuple[Any, ...]

    def __post_init__(self):
        order = sorted(range(len(self.support)), key=lambda i: self.support[i])
        object.__setattr__(self, "support", tuple(self.support[i] for i in order))
        object.__setattr__(self, "spins", tuple(self.spins[i] for i in order))

    @property
    def key(self) -> Tuple:
        return (self.support, self.spins)

    @property
    def size(self) -> int:
        return len(self.support)

    @property
    def vertex_set(self) -> FrozenSet[Vertex]:
        return frozenset(self.support)

    def sort_key(self) -> Tuple:
        return (self.size, self.key)


@dataclass
class KPCertificate:
    """
    Truncated Kotecky-Preiss check: a heuristic certificate, not a proof.

    margins maps each polymer id to |support| minus its truncated KP sum.
    """

    holds_truncated: bool
    worst_margin: float
    margins: Dict[Tuple, float] = field(default_factory=dict)
    truncated_at: int = 0


class PolymerModel(ABC):
    """
    Abstract base class for polymer models on a bounded-degree host graph.

    Args:
        host: Host graph, or a Region (nearest-neighbour graph)
        delta: Zero-free radius assumed by the counting pipeline
        polymer_filter: Optional membership restriction (sub-family)
    """

    rho: float = 1.0
    degree_bound: int = 1
    backend: str = EXACT

    def __init__(self, host: Union[nx.Graph, Region], delta: float, polymer_filter: Optional[PolymerFilter] = None):
        self.region: Optional[Region] = host if isinstance(host, Region) else None
        self.host: nx.Graph = host.to_graph() if isinstance(host, Region) else host
        if self.host.number_of_nodes() == 0:
            raise ConfigurationError("polymer host graph is empty")
        if delta <= 0:
            raise ConfigurationError("delta must be positive")
        self.delta = float(delta)
        self.vertices: Tuple[Vertex, ...] = tuple(sorted(self.host.nodes))
        self.adjacency: Dict[Vertex, Tuple[Vertex, ...]] = {
            v: tuple(sorted(self.host.neighbors(v))) for v in self.vertices
        }
        self.polymer_filter = polymer_filter
        self._listing_cache: Dict[int, List[Polymer]] = {}
        self.logger = logger

    @property
    @abstractmethod
    def name(self) -> str:
        """Return the instance name used in artifacts."""
        pass

    @property
    @abstractmethod
    def spin_set(self) -> Tuple[Any, ...]:
        """Return the spin set Omega."""
        pass

    @abstractmethod
    def polymers_on_support(self, support: Tuple[Vertex, ...]) -> List[Polymer]:
        """Return the valid polymers on a connected support (may be empty)."""
        pass

    @abstractmethod
    def weight(self, polymer: Polymer, order: int) -> TruncatedSeries:
        """Return w(polymer, z) truncated at ``order``."""
        pass

    @abstractmethod
    def weight_value(self, polymer: Polymer, z) -> Any:
        """Return w(polymer, z) at a point."""
        pass

    # ---- derived quantities ------------------------------------------------

    @property
    def max_degree(self) -> int:
        return max((len(n) for n in self.adjacency.values()), default=0)

    @property
    def size(self) -> int:
        return len(self.vertices)

    @property
    def degree_of_partition_function(self) -> int:
        """Upper bound N = C |G| on the degree of Z(G, z)."""
        return self.degree_bound * self.size

    def min_order(self, polymer: Polymer) -> int:
        return math.ceil(self.rho * polymer.size - 1e-12)

    def accepts(self, polymer: Polymer) -> bool:
        return self.polymer_filter is None or self.polymer_filter(polymer)

    def restrict(self, polymer_filter: PolymerFilter) -> "PolymerModel":
        """Sub-family view: same host and weights, membership narrowed by ``polymer_filter``."""
        restricted = copy.copy(self)
        previous = self.polymer_filter
        if previous is None:
            restricted.polymer_filter = polymer_filter
        else:
            restricted.polymer_filter = lambda p: previous(p) and polymer_filter(p)
        restricted._listing_cache = {}
        return restricted

    # ---- operations ---------------------------------------------------------

    def closed_neighborhood(self, vertices: Iterable[Vertex]) -> FrozenSet[Vertex]:
        found = set()
        for v in vertices:
            found.add(v)
            found.update(self.adjacency[v])
        return frozenset(found)

    def compatible(self, a: Polymer, b: Polymer) -> bool:
        """True iff the supports are at graph distance greater than 1."""
        return not (self.closed_neighborhood(a.support) & b.vertex_set)

    def list_polymers(self, max_size: int) -> List[Polymer]:
        """Every valid polymer with at most ``max_size`` vertices, sorted by (size, id)."""
        if max_size < 1:
            return []
        cached = self._listing_cache.get(max_size)
        if cached is not None:
            return cached

        found: Dict[Tuple, Polymer] = {}
        for root in self.vertices:
            subsets = graph_connected_subsets(self.host, root, max_size, allowed=lambda v, r=root: v > r)
            for support in subsets:
                for polymer in self.polymers_on_support(tuple(sorted(support))):
                    if self.accepts(polymer):
                        found[polymer.key] = polymer
        listing = sorted(found.values(), key=Polymer.sort_key)
        self._listing_cache[max_size] = listing
        self.logger.debug("%s: %d polymers of size <= %d", self.name, len(listing), max_size)
        return listing

    def incompatible_with(self, polymer: Polymer, max_size: int) -> List[Polymer]:
        """Polymers of size <= max_size at distance <= 1 from ``polymer`` (itself included)."""
        return [p for p in self.list_polymers(max_size) if not self.compatible(polymer, p)]

    def kp_certificate(self, z: float, max_size: int) -> KPCertificate:
        """
        Evaluate the Kotecky-Preiss sum restricted to polymers of size <= max_size.

        Args:
            z: Positive activity
            max_size: Truncation size m

        Returns:
            KPCertificate: Truncated verdict with per-polymer margins
        """
        if z < 0:
            raise ConfigurationError("KP certificate needs z >= 0")
        margins: Dict[Tuple, float] = {}
        for polymer in self.list_polymers(max_size):
            total = sum(
                abs(complex(self.weight_value(other, z))) * math.exp(other.size)
                for other in self.incompatible_with(polymer, max_size)
            )
            margins[polymer.key] = polymer.size - total
        worst = min(margins.values(), default=0.0)
        return KPCertificate(
            holds_truncated=worst >= -1e-12,
            worst_margin=worst,
            margins=margins,
            truncated_at=max_size,
        )


class HardcorePolymerModel(PolymerModel):
    """
    Hard-core model at low fugacity: polymers are single occupied vertices
    with weight z, so Z(G, z) is the independence polynomial of G.
    """

    rho = 1.0
    degree_bound = 1
    backend = EXACT

    def __init__(self, host: Union[nx.Graph, Region], delta_override: Optional[float] = None):
        graph = host.to_graph() if isinstance(host, Region) else host
        degree = max((d for _, d in graph.degree), default=0)
        delta = delta_override if delta_override is not None else 1.0 / (math.e * (degree + 1))
        super().__init__(host, delta)

    @property
    def name(self) -> str:
        return "hardcore-polymer"

    @property
    def spin_set(self) -> Tuple[int, ...]:
        return (1,)

    def polymers_on_support(self, support: Tuple[Vertex, ...]) -> List[Polymer]:
        if len(support) != 1:
            return []
        return [Polymer(support, (1,))]

    def weight(self, polymer: Polymer, order: int) -> TruncatedSeries:
        return TruncatedSeries.monomial(1, order, 1, EXACT)

    def weight_value(self, polymer: Polymer, z):
        return z


class IsingPolymerModel(PolymerModel):
    """
    Ising model with external field: polymers are connected sets of +1 spins
    with weight z^(2|S|) exp(-2 beta |edge boundary of S|).
    """

    rho = 2.0
    degree_bound = 2
    backend = FLOAT

    def __init__(self, host: Union[nx.Graph, Region], beta: float, delta_override: Optional[float] = None):
        if beta <= 0:
            raise ConfigurationError("Ising coupling beta must be positive")
        self.beta = float(beta)
        super().__init__(host, delta_override if delta_override is not None else 1.0)

    @property
    def name(self) -> str:
        return "ising-polymer"

    @property
    def spin_set(self) -> Tuple[int, ...]:
        return (1,)

    def edge_boundary(self, vertices: Iterable[Vertex]) -> int:
        inside = set(vertices)
        return sum(1 for v in inside for u in self.adjacency[v] if u not in inside)

    def polymers_on_support(self, support: Tuple[Vertex, ...]) -> List[Polymer]:
        return [Polymer(support, (1,) * len(support))]

    def weight(self, polymer: Polymer, order: int) -> TruncatedSeries:
        factor = math.exp(-2.0 * self.beta * self.edge_boundary(polymer.support))
        return TruncatedSeries.monomial(2 * polymer.size, order, factor, FLOAT)

    def weight_value(self, polymer: Polymer, z):
        return z ** (2 * polymer.size) * math.exp(-2.0 * self.beta * self.edge_boundary(polymer.support))


def hardcore_polymer_model(host: Union[nx.Graph, Region], delta_override: Optional[float] = None) -> HardcorePolymerModel:
    return HardcorePolymerModel(host, delta_override)


def ising_polymer_model(
    host: Union[nx.Graph, Region], beta: float, delta_override: Optional[float] = None
) -> IsingPolymerModel:
    return IsingPolymerModel(host, beta, delta_override)
