"""
Ursell function evaluation.

phi(H) is the signed count of spanning connected edge sets of H, which
equals (-1)^(k-1) T_H(1, 0) for the Tutte polynomial T_H. Small graphs
are handled by direct edge-subset enumeration, larger ones by memoised
deletion-contraction. Clusters with repeated items use a recursion over
multiplicity vectors instead of building H at all.
"""

import logging
from math import comb
from typing import Callable, Dict, FrozenSet, Hashable, List, Optional, Sequence, Tuple

import networkx as nx

from pirogov.core.config import Settings, get_settings
from pirogov.core.exceptions import CapExceededError, DisconnectedGraphError

logger = logging.getLogger(__name__)

Edge = FrozenSet[Hashable]

DIRECT_VERTEX_LIMIT = 8


def ursell(graph: nx.Graph, settings: Optional[Settings] = None) -> int:
    """
    Ursell function phi(H) of a connected graph.

    Args:
        graph: Connected simple graph H
        settings: Caps and direct-enumeration threshold

    Returns:
        int: phi(H)

    Raises:
        DisconnectedGraphError: If H is empty or disconnected
        CapExceededError: If H has more vertices than the configured cap
    """
    settings = settings or get_settings()
    n = graph.number_of_nodes()
    if n == 0 or not nx.is_connected(graph):
        raise DisconnectedGraphError("Ursell function requested for a disconnected graph")
    if n > settings.ursell_vertex_cap:
        raise CapExceededError(f"Ursell graph has {n} vertices, cap is {settings.ursell_vertex_cap}")
    if n <= DIRECT_VERTEX_LIMIT and graph.number_of_edges() <= settings.ursell_direct_edge_cap:
        return ursell_direct(graph)
    return ursell_deletion_contraction(graph)


def ursell_direct(graph: nx.Graph) -> int:
    """Sum of (-1)^|E| over spanning connected edge subsets, by enumeration."""
    nodes = sorted(graph.nodes, key=repr)
    index = {v: i for i, v in enumerate(nodes)}
    n = len(nodes)
    edges = [(index[u], index[v]) for u, v in graph.edges]
    full = (1 << n) - 1
    total = 0
    for mask in range(1 << len(edges)):
        adjacency = [0] * n
        bits = 0
        for e, (u, v) in enumerate(edges):
            if mask >> e & 1:
                adjacency[u] |= 1 << v
                adjacency[v] |= 1 << u
                bits += 1
        reached = 1
        frontier = 1
        while frontier:
            low = frontier & -frontier
            frontier ^= low
            fresh = adjacency[low.bit_length() - 1] & ~reached
            reached |= fresh
            frontier |= fresh
        if reached == full:
            total += -1 if bits & 1 else 1
    return total


def tutte_one_zero(graph: nx.Graph) -> int:
    """T_H(1, 0) of a connected simple graph by deletion-contraction."""
    vertices = frozenset(graph.nodes)
    edges = frozenset(frozenset((u, v)) for u, v in graph.edges if u != v)
    memo: Dict[Tuple[FrozenSet, FrozenSet], int] = {}
    return _tutte(vertices, edges, memo)


def _is_bridge(edge: Edge, edges: FrozenSet[Edge]) -> bool:
    u, v = tuple(edge)
    adjacency: Dict[Hashable, List[Hashable]] = {}
    for other in edges:
        if other == edge:
            continue
        a, b = tuple(other)
        adjacency.setdefault(a, []).append(b)
        adjacency.setdefault(b, []).append(a)
    seen = {u}
    stack = [u]
    while stack:
        x = stack.pop()
        for y in adjacency.get(x, ()):
            if y == v:
                return False
            if y not in seen:
                seen.add(y)
                stack.append(y)
    return True


def _contract(edge: Edge, vertices: FrozenSet, edges: FrozenSet[Edge]) -> Tuple[FrozenSet, FrozenSet[Edge]]:
    keep, gone = sorted(edge, key=repr)
    merged = set()
    for other in edges:
        if other == edge:
            continue
        renamed = frozenset(keep if x == gone else x for x in other)
        # parallel copies collapse: T(1,0) is unchanged by removing a parallel edge
        if len(renamed) == 2:
            merged.add(renamed)
    return vertices - {gone}, frozenset(merged)


def _tutte(vertices: FrozenSet, edges: FrozenSet[Edge], memo: Dict) -> int:
    if not edges:
        return 1
    key = (vertices, edges)
    cached = memo.get(key)
    if cached is not None:
        return cached
    edge = min(edges, key=lambda e: sorted(map(repr, e)))
    contracted = _tutte(*_contract(edge, vertices, edges), memo)
    if _is_bridge(edge, edges):
        result = contracted
    else:
        result = _tutte(vertices, edges - {edge}, memo) + contracted
    memo[key] = result
    return result


def ursell_deletion_contraction(graph: nx.Graph) -> int:
    return (-1) ** (graph.number_of_nodes() - 1) * tutte_one_zero(graph)


def ursell_of_multiplicities(
    multiplicities: Sequence[int],
    incompatible: Callable[[int, int], bool],
    memo: Optional[Dict[Tuple[int, ...], int]] = None,
) -> int:
    """
    phi of the occurrence graph of a multiset given as a multiplicity vector.

    Uses phi(s) = f(s) - sum_t C(s_j-1, t_j-1) prod_{i != j} C(s_i, t_i) phi(t) f(s-t),
    where j is the first occupied type, t ranges over vectors below s that
    still contain type j, and f is the indicator of a set of distinct,
    pairwise compatible types.

    Args:
        multiplicities: Occurrence count per type
        incompatible: Relation between distinct type indices
        memo: Optional shared cache for vectors over the same types
    """
    memo = {} if memo is None else memo
    types = len(multiplicities)

    def independent(vector: Tuple[int, ...]) -> bool:
        chosen = [i for i in range(types) if vector[i]]
        if any(vector[i] > 1 for i in chosen):
            return False
        return all(not incompatible(a, b) for x, a in enumerate(chosen) for b in chosen[x + 1:])

    def phi(s: Tuple[int, ...]) -> int:
        cached = memo.get(s)
        if cached is not None:
            return cached
        occupied = [i for i in range(types) if s[i]]
        j = occupied[0]
        total = 1 if independent(s) else 0
        # s - t = u ranges over non-empty independent 0/1 vectors with u_j <= s_j - 1
        candidates = [i for i in occupied if i != j or s[j] >= 2]
        for size in range(1, len(candidates) + 1):
            for chosen in _independent_subsets(candidates, size, incompatible):
                t = list(s)
                for i in chosen:
                    t[i] -= 1
                coefficient = comb(s[j] - 1, t[j] - 1)
                for i in occupied:
                    if i != j:
                        coefficient *= comb(s[i], t[i])
                total -= coefficient * phi(tuple(t))
        memo[s] = total
        return total

    vector = tuple(int(v) for v in multiplicities)
    if not any(vector):
        raise DisconnectedGraphError("empty multiset has no Ursell value")
    return phi(vector)


def _independent_subsets(candidates: List[int], size: int, incompatible: Callable[[int, int], bool]):
    def extend(start: int, chosen: List[int]):
        if len(chosen) == size:
            yield tuple(chosen)
            return
        for x in range(start, len(candidates)):
            c = candidates[x]
            if all(not incompatible(c, other) for other in chosen):
                chosen.append(c)
                yield from extend(x + 1, chosen)
                chosen.pop()

    yield from extend(0, [])
