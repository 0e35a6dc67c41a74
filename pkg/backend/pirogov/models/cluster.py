"""
Clusters and the generic polymer system the expansion engines consume.

A PolymerSystem is a finite list of objects (polymers or outer contours)
with weights, lowest weight orders and an incompatibility relation. The
relation is given through footprints: a is incompatible with b iff the
reach of a meets the footprint of b.
"""

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Callable, Dict, FrozenSet, Hashable, Iterable, List, Optional, Sequence, Tuple

import networkx as nx

from pirogov.models.series import TruncatedSeries


@dataclass(frozen=True)
class PolymerSystem:
    """
    Canonically ordered items with weights and incompatibility neighbourhoods.

    Args:
        items: The polymers or contours, canonical order
        keys: Canonical ids aligned with items
        orders: Lowest weight order of each item (all >= 1)
        weights: Weight series truncated at ``order``
        neighbors: Indices incompatible with each item, itself excluded
        order: Truncation order m
        backend: Series backend shared by every weight
    """

    items: Tuple[Any, ...]
    keys: Tuple[Hashable, ...]
    orders: Tuple[int, ...]
    weights: Tuple[TruncatedSeries, ...]
    neighbors: Tuple[FrozenSet[int], ...]
    order: int
    backend: str

    @classmethod
    def build(
        cls,
        items: Sequence[Any],
        keys: Sequence[Hashable],
        orders: Sequence[int],
        weights: Sequence[TruncatedSeries],
        footprint: Callable[[Any], Iterable[Hashable]],
        reach: Callable[[Any], Iterable[Hashable]],
        order: int,
        backend: str,
    ) -> "PolymerSystem":
        """Assemble a system, dropping items whose weight vanishes up to ``order``."""
        kept = [i for i in range(len(items)) if orders[i] <= order and not weights[i].is_zero()]
        items = [items[i] for i in kept]
        keys = [keys[i] for i in kept]
        orders = [orders[i] for i in kept]
        weights = [weights[i] for i in kept]

        occupants: Dict[Hashable, List[int]] = {}
        for index, item in enumerate(items):
            for point in footprint(item):
                occupants.setdefault(point, []).append(index)

        neighbors = []
        for index, item in enumerate(items):
            found = set()
            for point in reach(item):
                found.update(occupants.get(point, ()))
            found.discard(index)
            neighbors.append(frozenset(found))

        return cls(tuple(items), tuple(keys), tuple(orders), tuple(weights), tuple(neighbors), order, backend)

    def __len__(self) -> int:
        return len(self.items)

    def incompatible(self, i: int, j: int) -> bool:
        return i == j or j in self.neighbors[i]

    @property
    def min_order(self) -> int:
        return min(self.orders, default=self.order + 1)

    @property
    def max_neighbors(self) -> int:
        return max((len(n) for n in self.neighbors), default=0)


@dataclass(frozen=True)
class Cluster:
    """
    Multiset of system items with a connected incompatibility graph.

    members holds (item index, multiplicity) pairs sorted by index; ursell
    is phi(H) of the occurrence graph and mult_factor is 1/prod(mult!).
    """

    members: Tuple[Tuple[int, int], ...]
    keys: Tuple[Hashable, ...]
    ursell: int
    mult_factor: Fraction
    total_order: int

    @property
    def size(self) -> int:
        return sum(mult for _, mult in self.members)

    def occurrences(self) -> List[int]:
        return [index for index, mult in self.members for _ in range(mult)]

    def incompatibility_graph(self, system: PolymerSystem) -> nx.Graph:
        """One node per occurrence; copies of one item are always adjacent."""
        occ = self.occurrences()
        graph = nx.Graph()
        graph.add_nodes_from(range(len(occ)))
        for a in range(len(occ)):
            for b in range(a + 1, len(occ)):
                if system.incompatible(occ[a], occ[b]):
                    graph.add_edge(a, b)
        return graph


@dataclass
class LogZCoefficients:
    """Log-partition coefficients 1..m plus how they were obtained."""

    series: TruncatedSeries
    engine: str
    cluster_count: Optional[int] = None
    polymer_count: int = 0

    @property
    def order(self) -> int:
        return self.series.order

    def coefficient(self, k: int):
        return self.series.coefficient(k)


@dataclass
class ApproxResult:
    """Outcome of a truncated-Taylor approximation."""

    value: Any
    m_used: int
    log_coeffs: LogZCoefficients
    z: Any
    epsilon: float
    delta: float
    forced: bool = False
    extras: Dict[str, Any] = field(default_factory=dict)
