"""
Lattice geometry for finite regions of Z^d and the torus T^d_n.

Points are integer tuples ordered lexicographically; that order is the
canonical order used for every enumeration downstream. Distances are
d-infinity (Chebyshev) distances, wrapped per coordinate on the torus.
"""

from dataclasses import dataclass
from functools import cached_property, lru_cache
from itertools import product
from typing import Callable, Dict, FrozenSet, Iterable, Iterator, List, Optional, Sequence, Set, Tuple

import networkx as nx

from pirogov.core.exceptions import GeometryError

Point = Tuple[int, ...]


@lru_cache(maxsize=None)
def king_offsets(dim: int) -> Tuple[Point, ...]:
    """Offsets of the 3^d - 1 points at d-infinity distance 1."""
    return tuple(o for o in product((-1, 0, 1), repeat=dim) if any(o))


@lru_cache(maxsize=None)
def ball_offsets(dim: int, radius: int) -> Tuple[Point, ...]:
    return tuple(product(range(-radius, radius + 1), repeat=dim))


@lru_cache(maxsize=None)
def axis_offsets(dim: int) -> Tuple[Point, ...]:
    """Offsets of the 2d nearest neighbours."""
    offsets = []
    for axis in range(dim):
        for sign in (-1, 1):
            offsets.append(tuple(sign if i == axis else 0 for i in range(dim)))
    return tuple(offsets)


def add(x: Point, y: Point) -> Point:
    return tuple(a + b for a, b in zip(x, y))


def bounding_box(points: Iterable[Point]) -> Tuple[Point, Point]:
    """Inclusive lower and upper corners of a non-empty point set."""
    pts = list(points)
    if not pts:
        raise GeometryError("bounding box of an empty point set")
    dim = len(pts[0])
    lows = tuple(min(p[i] for p in pts) for i in range(dim))
    highs = tuple(max(p[i] for p in pts) for i in range(dim))
    return lows, highs


def box_points(lows: Point, highs: Point) -> List[Point]:
    return list(product(*(range(lo, hi + 1) for lo, hi in zip(lows, highs))))


def enumerate_connected_sets(
    root,
    neighbors: Callable[[object], Sequence],
    budget: float,
    cost: Optional[Callable[[object], float]] = None,
    allowed: Optional[Callable[[object], bool]] = None,
    admissible: Optional[Callable[[List, object], bool]] = None,
) -> Iterator[FrozenSet]:
    """
    Enumerate connected vertex sets containing ``root`` with total cost <= budget.

    Extension-set enumeration: a vertex enters the extension set only when
    it is adjacent to the newest vertex and to nothing already in or next
    to the current set, and a vertex popped from the extension set is never
    offered again in that branch. Each connected set is produced exactly
    once.

    Args:
        root: Vertex every produced set contains
        neighbors: Adjacency function returning comparable vertices
        budget: Maximum total cost of a produced set
        cost: Vertex cost (defaults to 1 per vertex)
        allowed: Predicate restricting which vertices may join
        admissible: Predicate on (current set, candidate vertex); must be
            monotone, i.e. once it fails for a set it fails for every superset

    Yields:
        FrozenSet: Each connected set exactly once
    """
    cost = cost or (lambda _v: 1)
    if cost(root) > budget:
        return

    def extend(subset: List, extension: List, closed: Set, spent: float) -> Iterator[FrozenSet]:
        yield frozenset(subset)
        remaining = list(extension)
        while remaining:
            w = remaining.pop(0)
            w_cost = cost(w)
            if spent + w_cost > budget or (admissible is not None and not admissible(subset, w)):
                continue
            w_neighbors = neighbors(w)
            fresh = [u for u in w_neighbors if u not in closed and (allowed is None or allowed(u))]
            yield from extend(
                subset + [w],
                sorted(remaining + fresh),
                closed | set(w_neighbors),
                spent + w_cost,
            )

    root_neighbors = neighbors(root)
    start = sorted(u for u in root_neighbors if u != root and (allowed is None or allowed(u)))
    yield from extend([root], start, {root} | set(root_neighbors), cost(root))


@dataclass(frozen=True)
class Region:
    """
    A finite set of lattice points with free or torus geometry.

    Args:
        dim: Lattice dimension d
        vertices: Points of the region
        torus: Side n of the torus, or None for free geometry in Z^d

    Raises:
        GeometryError: If a point has the wrong dimension or lies outside the torus
    """

    dim: int
    vertices: FrozenSet[Point]
    torus: Optional[int] = None

    def __post_init__(self):
        if self.dim < 1:
            raise GeometryError("dimension must be positive")
        if self.torus is not None and self.torus < 1:
            raise GeometryError("torus side must be positive")
        object.__setattr__(self, "vertices", frozenset(tuple(int(c) for c in p) for p in self.vertices))
        for point in self.vertices:
            self._check_point(point)

    # ---- construction -------------------------------------------------

    @classmethod
    def box(cls, shape: Sequence[int]) -> "Region":
        """The box {0..s_1-1} x ... x {0..s_d-1} with free geometry."""
        return cls(len(shape), frozenset(product(*(range(s) for s in shape))))

    @classmethod
    def from_bounds(cls, bounds: Sequence[Sequence[int]], torus: Optional[int] = None) -> "Region":
        """Inclusive integer box given as [[lo1, hi1], ...]."""
        lows = tuple(int(b[0]) for b in bounds)
        highs = tuple(int(b[1]) for b in bounds)
        if any(lo > hi for lo, hi in zip(lows, highs)):
            raise GeometryError(f"empty box {bounds}")
        return cls(len(bounds), frozenset(box_points(lows, highs)), torus)

    @classmethod
    def full_torus(cls, n: int, dim: int) -> "Region":
        return cls(dim, frozenset(product(range(n), repeat=dim)), n)

    # ---- basic queries -------------------------------------------------

    @property
    def is_torus(self) -> bool:
        return self.torus is not None

    @cached_property
    def sorted_vertices(self) -> Tuple[Point, ...]:
        return tuple(sorted(self.vertices))

    def __len__(self) -> int:
        return len(self.vertices)

    def __contains__(self, point) -> bool:
        return point in self.vertices

    def _check_point(self, point: Point) -> None:
        if len(point) != self.dim:
            raise GeometryError(f"point {point} does not have dimension {self.dim}")
        if self.torus is not None and any(c < 0 or c >= self.torus for c in point):
            raise GeometryError(f"point {point} outside the torus of side {self.torus}")

    def wrap(self, point: Point) -> Point:
        if self.torus is None:
            return point
        n = self.torus
        return tuple(c % n for c in point)

    def dinf(self, x: Point, y: Point) -> int:
        """d-infinity distance, wrapped per coordinate on the torus."""
        if self.torus is None:
            return max(abs(a - b) for a, b in zip(x, y))
        self._check_point(x)
        self._check_point(y)
        n = self.torus
        return max(min(abs(a - b), n - abs(a - b)) for a, b in zip(x, y))

    def set_distance(self, a: Iterable[Point], b: Iterable[Point]) -> int:
        b = list(b)
        return min(self.dinf(x, y) for x in a for y in b)

    def diameter(self, points: Iterable[Point]) -> int:
        pts = list(points)
        return max((self.dinf(x, y) for i, x in enumerate(pts) for y in pts[i:]), default=0)

    @cached_property
    def _king_cache(self) -> Dict[Point, Tuple[Point, ...]]:
        return {}

    def king_neighbors(self, x: Point) -> Tuple[Point, ...]:
        """Ambient points at d-infinity distance exactly 1 (not restricted to the region)."""
        found = self._king_cache.get(x)
        if found is None:
            found = tuple(sorted({self.wrap(add(x, o)) for o in king_offsets(self.dim)} - {x}))
            self._king_cache[x] = found
        return found

    def ball(self, x: Point, radius: int = 1) -> List[Point]:
        """Ambient points within d-infinity distance ``radius`` of x."""
        return sorted({self.wrap(add(x, o)) for o in ball_offsets(self.dim, radius)})

    def lattice_neighbors(self, x: Point) -> List[Point]:
        """Ambient nearest neighbours (graph distance 1 in Z^d or on the torus)."""
        return sorted({self.wrap(add(x, o)) for o in axis_offsets(self.dim)} - {x})

    def has_clearance(self, x: Point, radius: int) -> bool:
        """True iff d-infinity(x, complement) > radius, i.e. the radius-ball stays inside."""
        return all(y in self.vertices for y in self.ball(x, radius))

    # ---- lattice structure ---------------------------------------------

    @cached_property
    def edges(self) -> Tuple[Tuple[Point, Point], ...]:
        """Nearest-neighbour edges with both endpoints in the region, canonical order."""
        found = set()
        for x in self.vertices:
            for y in self.lattice_neighbors(x):
                if y in self.vertices:
                    found.add((min(x, y), max(x, y)))
        return tuple(sorted(found))

    def to_graph(self) -> nx.Graph:
        """Host graph on the region's vertices with nearest-neighbour edges."""
        graph = nx.Graph()
        graph.add_nodes_from(self.sorted_vertices)
        graph.add_edges_from(self.edges)
        return graph

    def parity(self, x: Point) -> int:
        return sum(x) % 2

    def translate(self, vector: Point) -> "Region":
        return Region(self.dim, frozenset(self.wrap(add(p, vector)) for p in self.vertices), self.torus)

    def canonical(self) -> Tuple["Region", Point]:
        """Translate a free region so its lower corner is the origin; returns (region, shift)."""
        if self.is_torus or not self.vertices:
            return self, tuple(0 for _ in range(self.dim))
        lows, _ = bounding_box(self.vertices)
        shift = tuple(-c for c in lows)
        return self.translate(shift), shift

    # ---- components and connectivity ------------------------------------

    def components(self, excluded: Iterable[Point]) -> List[FrozenSet[Point]]:
        """
        Maximal d-infinity connected components of the ambient space minus ``excluded``.

        Under free geometry the ambient space is Z^d: the computation runs in
        the bounding box of ``excluded`` inflated by 2 and the first returned
        component is the infinite one A_0, represented by its in-box cells.
        Under torus geometry the ambient space is the whole torus and the
        components come out in canonical order of their least point.
        """
        removed = frozenset(excluded)
        if self.torus is not None:
            for point in removed:
                self._check_point(point)
            cells = [p for p in product(range(self.torus), repeat=self.dim) if p not in removed]
            return sorted(self._flood(cells), key=min)

        if not removed:
            return [frozenset()]
        lows, highs = bounding_box(removed)
        lows = tuple(c - 2 for c in lows)
        highs = tuple(c + 2 for c in highs)
        cells = [p for p in box_points(lows, highs) if p not in removed]
        parts = self._flood(cells)

        def on_border(p: Point) -> bool:
            return any(c == lo or c == hi for c, lo, hi in zip(p, lows, highs))

        outer = [part for part in parts if any(on_border(p) for p in part)]
        inner = sorted((part for part in parts if not any(on_border(p) for p in part)), key=min)
        return [frozenset().union(*outer)] + inner

    def _flood(self, cells: List[Point]) -> List[FrozenSet[Point]]:
        pending = set(cells)
        parts = []
        for start in sorted(cells):
            if start not in pending:
                continue
            pending.discard(start)
            part = {start}
            stack = [start]
            while stack:
                x = stack.pop()
                for y in self.king_neighbors(x):
                    if y in pending:
                        pending.discard(y)
                        part.add(y)
                        stack.append(y)
            parts.append(frozenset(part))
        return parts

    def interior_boundary(self) -> FrozenSet[Point]:
        """Points of the region at d-infinity distance 1 from its complement."""
        return frozenset(
            x for x in self.vertices if any(y not in self.vertices for y in self.king_neighbors(x))
        )

    def is_connected_set(self, points: Iterable[Point]) -> bool:
        pts = list(points)
        return bool(pts) and len(self._flood(pts)) == 1

    def is_c_connected(self) -> bool:
        """True iff the complement of a free region is d-infinity connected."""
        if self.torus is not None or not self.vertices:
            return True
        return len(self.components(self.vertices)) == 1

    def connected_subsets(
        self,
        root: Point,
        max_size: int,
        allowed: Optional[Callable[[Point], bool]] = None,
    ) -> Iterator[FrozenSet[Point]]:
        """
        Every d-infinity connected subset of the region containing ``root``
        with at most ``max_size`` points, each exactly once.
        """
        if root not in self.vertices:
            raise GeometryError(f"root {root} is not in the region")
        if max_size < 1:
            return iter(())
        inside: Callable[[Point], bool] = self.vertices.__contains__
        if allowed is not None:
            inside = lambda p: p in self.vertices and allowed(p)  # noqa: E731
        return enumerate_connected_sets(root, self.king_neighbors, max_size, allowed=inside)


def dinf(region: Region, x: Point, y: Point) -> int:
    return region.dinf(x, y)


def components(region: Region, excluded: Iterable[Point]) -> List[FrozenSet[Point]]:
    return region.components(excluded)


def interior_boundary(region: Region) -> FrozenSet[Point]:
    return region.interior_boundary()


def connected_subsets(region: Region, root: Point, max_size: int) -> Iterator[FrozenSet[Point]]:
    return region.connected_subsets(root, max_size)


def graph_connected_subsets(graph: nx.Graph, root, max_size: int, allowed=None) -> Iterator[FrozenSet]:
    """Connected vertex subsets of an arbitrary host graph containing ``root``."""
    adjacency: Dict = {v: sorted(graph.neighbors(v)) for v in graph.nodes}
    return enumerate_connected_sets(root, adjacency.__getitem__, max_size, allowed=allowed)
