"""
Self-reducible samplers.

Vertices are processed in lexicographic order. At step t the sampler
either adds one object (polymer or outer contour) whose footprint
contains the current vertex, is disjoint from the processed vertices and
is compatible with everything chosen so far, or adds nothing. Each option
is scored by its weight times the partition function of the family that
remains afterwards; scores are renormalised by their sum.

Exact samplers compute those partition functions by brute force over
compatible families (rational arithmetic for rational weights);
approximate samplers use exp(T_m) from the cluster pipeline.
"""

import hashlib
import json
import logging
import math
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Dict, FrozenSet, Iterable, List, Optional, Sequence, Tuple

from pirogov.core.exceptions import ConfigurationError, PirogovError, RegimeError
from pirogov.core.rng import RandomStream
from pirogov.models.cluster import PolymerSystem
from pirogov.models.contour import Contour, ContourModel, Ground
from pirogov.models.lattice import Point, Region
from pirogov.models.polymer import Polymer, PolymerModel
from pirogov.models.series import EXACT
from pirogov.services.cluster_expansion import exp_of, log_partition, truncation_order
from pirogov.services.contour_service import ContourWeightTable
from pirogov.services.torus_service import SmallContourTable, admissible_floor, embed_interior, torus_region

logger = logging.getLogger(__name__)

Option = Optional[int]


def _exact(value):
    return value if isinstance(value, Fraction) else Fraction(value)


class SelfReducingSampler(ABC):
    """
    Shared step logic of the polymer and contour samplers.

    Args:
        footprints: Vertex set of each item (support or cov)
        neighbors: Indices incompatible with each item
        weights: Weight of each item at z
        order: Vertex processing order
        exact: Use brute-force partition functions and exact probabilities
    """

    def __init__(
        self,
        footprints: Sequence[FrozenSet],
        neighbors: Sequence[FrozenSet[int]],
        weights: Sequence[Any],
        order: Sequence,
        exact: bool,
    ):
        self.footprints = list(footprints)
        self.neighbors = list(neighbors)
        self.weights = list(weights)
        self.order = list(order)
        self.position = {v: t for t, v in enumerate(self.order)}
        self.exact = exact
        self.rational = all(isinstance(w, (int, Fraction)) for w in self.weights)
        self.first_vertex = [min(self.position[v] for v in fp) for fp in self.footprints]
        self._families: Dict[Tuple[FrozenSet[int], int], FrozenSet[int]] = {}
        self._partitions: Dict[FrozenSet[int], Any] = {}
        self._steps: Dict[Tuple[FrozenSet[int], int], List[Tuple[Option, Any]]] = {}
        self.logger = logger
        if any(_is_negative(w) for w in self.weights):
            raise ConfigurationError("sampling needs non-negative weights")

    # ---- families -------------------------------------------------------------

    def family(self, chosen: FrozenSet[int], processed: int) -> FrozenSet[int]:
        """Items compatible with ``chosen`` whose footprint avoids the first ``processed`` vertices."""
        key = (chosen, processed)
        found = self._families.get(key)
        if found is None:
            blocked = set(chosen)
            for i in chosen:
                blocked.update(self.neighbors[i])
            found = frozenset(
                i for i in range(len(self.footprints))
                if i not in blocked and self.first_vertex[i] >= processed
            )
            self._families[key] = found
        return found

    def partition(self, indices: FrozenSet[int]):
        found = self._partitions.get(indices)
        if found is None:
            found = self._family_sum(indices) if self.exact else self.approximate_partition(indices)
            self._partitions[indices] = found
        return found

    def _family_sum(self, indices: FrozenSet[int]):
        items = sorted(indices)
        total = [Fraction(0) if self.rational else 0.0]

        def extend(start: int, blocked: set, value) -> None:
            total[0] += value
            for position in range(start, len(items)):
                i = items[position]
                if i not in blocked:
                    extend(position + 1, blocked | self.neighbors[i] | {i}, value * self.weights[i])

        extend(0, set(), Fraction(1) if self.rational else 1.0)
        return total[0]

    @abstractmethod
    def approximate_partition(self, indices: FrozenSet[int]):
        """exp(T_m(z)) for the subfamily ``indices``."""
        pass

    # ---- steps ----------------------------------------------------------------

    def step_distribution(self, chosen: FrozenSet[int], t: int) -> List[Tuple[Option, Any]]:
        """Options at step t (None means "add nothing") with their normalised probabilities."""
        key = (chosen, t)
        cached = self._steps.get(key)
        if cached is not None:
            return cached
        current = self.family(chosen, t)
        candidates = sorted(i for i in current if self.first_vertex[i] == t)
        if not candidates:
            distribution = [(None, Fraction(1) if self.exact else 1.0)]
        else:
            scores: List[Tuple[Option, Any]] = [(None, self.partition(self.family(chosen, t + 1)))]
            for i in candidates:
                scores.append((i, self.weights[i] * self.partition(self.family(chosen | {i}, t + 1))))
            total = sum(s for _, s in scores)
            distribution = [(option, score / total) for option, score in scores]
        self._steps[key] = distribution
        return distribution

    def sample(self, stream: RandomStream) -> List[int]:
        """Run one pass; step t reads uniform t of ``stream``."""
        uniforms = stream.uniforms(max(len(self.order), 1))
        chosen: FrozenSet[int] = frozenset()
        for t in range(len(self.order)):
            distribution = self.step_distribution(chosen, t)
            if len(distribution) == 1:
                continue
            pick = _select(distribution, float(uniforms[t]), self.exact)
            if pick is not None:
                if self.first_vertex[pick] != t:
                    raise PirogovError(f"item {pick} proposed away from its first vertex")
                chosen = chosen | {pick}
        return sorted(chosen)

    def path_probability(self, chosen: Iterable[int]) -> Any:
        """Product of step probabilities of the unique path producing ``chosen``."""
        target = frozenset(chosen)
        by_vertex = {self.first_vertex[i]: i for i in target}
        if len(by_vertex) != len(target):
            return Fraction(0) if self.exact else 0.0
        state: FrozenSet[int] = frozenset()
        probability = Fraction(1) if self.exact else 1.0
        for t in range(len(self.order)):
            wanted = by_vertex.get(t)
            options = dict(self.step_distribution(state, t))
            if wanted not in options:
                return Fraction(0) if self.exact else 0.0
            probability *= options[wanted]
            if wanted is not None:
                state = state | {wanted}
        return probability

    def fundamental_identity_holds(self, chosen: FrozenSet[int], t: int) -> bool:
        """Z(F(G,S)) = Z(F(G,S+x)) + sum over x-candidates of w * Z(F(G+g, S+x)), exactly."""
        current = self.family(chosen, t)
        total = self._family_sum(self.family(chosen, t + 1))
        for i in sorted(i for i in current if self.first_vertex[i] == t):
            total += self.weights[i] * self._family_sum(self.family(chosen | {i}, t + 1))
        lhs = self._family_sum(current)
        if isinstance(lhs, Fraction):
            return lhs == total
        return math.isclose(lhs, total, rel_tol=1e-12, abs_tol=1e-15)


def _is_negative(value) -> bool:
    try:
        return value < 0
    except TypeError:
        return False


def _select(distribution: List[Tuple[Option, Any]], u: float, exact: bool) -> Option:
    threshold = Fraction(u) if exact else u
    cumulative = Fraction(0) if exact else 0.0
    for option, probability in distribution:
        cumulative += probability
        if threshold < cumulative:
            return option
    return distribution[-1][0]


# ---------------------------------------------------------------------------
# polymers
# ---------------------------------------------------------------------------

def polymer_size_bound(model: PolymerModel, z: float, epsilon: float) -> int:
    """ceil(log(2 C |G| / eps) / (rho (1 - z/delta)))."""
    ratio = math.log(2 * model.degree_of_partition_function / epsilon)
    return max(1, math.ceil(ratio / (model.rho * (1.0 - z / model.delta)) - 1e-12))


def step_epsilon(epsilon: float, n: int) -> float:
    """Per-step relative accuracy eps^2 / (9 n^2)."""
    return epsilon ** 2 / (9 * n ** 2)


class PolymerSampler(SelfReducingSampler):
    """
    Polymer sampler for mu_G, exact or epsilon-approximate.

    Args:
        model: Polymer model
        z: Activity (exact: z >= 0; approximate: 0 < z < delta)
        epsilon: Total-variation target (approximate sampler only)
        exact: Brute-force partition functions with exact probabilities
        engine: Log engine for the approximate sampler

    Raises:
        RegimeError: If z is outside the admissible range
    """

    def __init__(self, model: PolymerModel, z, epsilon: Optional[float] = None, exact: bool = False, engine: Optional[str] = None):
        if exact:
            if z < 0:
                raise RegimeError("exact polymer sampling needs z >= 0")
            z = _exact(z) if model.backend == "exact" else z
            max_size = model.size
            self.truncation = model.degree_of_partition_function
        else:
            if epsilon is None or epsilon <= 0:
                raise ConfigurationError("approximate sampling needs epsilon > 0")
            if not 0 < z < model.delta:
                raise RegimeError(f"approximate sampling needs 0 < z < delta = {model.delta}")
            max_size = min(model.size, polymer_size_bound(model, z, epsilon))
            self.truncation = truncation_order(
                model.degree_of_partition_function, z, model.delta, step_epsilon(epsilon, model.size)
            )
        self.model = model
        self.z = z
        self.engine = engine
        self.polymers = model.list_polymers(max_size)
        index = {}
        for i, polymer in enumerate(self.polymers):
            for v in polymer.support:
                index.setdefault(v, []).append(i)
        neighbors = []
        for i, polymer in enumerate(self.polymers):
            found = set()
            for v in model.closed_neighborhood(polymer.support):
                found.update(index.get(v, ()))
            found.discard(i)
            neighbors.append(frozenset(found))
        weights = [model.weight_value(p, z) for p in self.polymers]
        super().__init__([p.vertex_set for p in self.polymers], neighbors, weights, model.vertices, exact)

    def approximate_partition(self, indices: FrozenSet[int]):
        members = [self.polymers[i] for i in sorted(indices)]
        system = PolymerSystem.build(
            items=members,
            keys=[p.key for p in members],
            orders=[self.model.min_order(p) for p in members],
            weights=[self.model.weight(p, self.truncation) for p in members],
            footprint=lambda p: p.support,
            reach=lambda p: self.model.closed_neighborhood(p.support),
            order=self.truncation,
            backend=self.model.backend,
        )
        return exp_of(log_partition(system, self.engine).series.evaluate(self.z))

    def draw(self, stream: RandomStream) -> List[Polymer]:
        return [self.polymers[i] for i in self.sample(stream)]

    def index_of(self, polymers: Iterable[Polymer]) -> List[int]:
        lookup = {p.key: i for i, p in enumerate(self.polymers)}
        return [lookup[p.key] for p in polymers]


def sample_polymers_exact(model: PolymerModel, z, stream: RandomStream) -> List[Polymer]:
    """Exact draw from mu_G."""
    return PolymerSampler(model, z, exact=True).draw(stream)


def sample_polymers(model: PolymerModel, z: float, epsilon: float, stream: RandomStream, engine: Optional[str] = None) -> List[Polymer]:
    """Draw within total variation epsilon of mu_G."""
    return PolymerSampler(model, z, epsilon, engine=engine).draw(stream)


def exact_step_distribution(model: PolymerModel, z, chosen: Iterable[Polymer], t: int) -> List[Tuple[Optional[Polymer], Fraction]]:
    """Exact conditional law of step t given the polymers chosen before it."""
    sampler = PolymerSampler(model, z, exact=True)
    state = frozenset(sampler.index_of(chosen))
    return [
        (None if option is None else sampler.polymers[option], probability)
        for option, probability in sampler.step_distribution(state, t)
    ]


def path_probability(model: PolymerModel, z, family: Iterable[Polymer]) -> Fraction:
    """Probability that the exact sampler returns exactly ``family``."""
    sampler = PolymerSampler(model, z, exact=True)
    return sampler.path_probability(sampler.index_of(family))


# ---------------------------------------------------------------------------
# contours
# ---------------------------------------------------------------------------

class ContourSampler(SelfReducingSampler):
    """
    Outer-contour sampler for mu^ground on a domain of a weight table.

    Candidates at vertex x are type-ground contours with x the first vertex
    of their cov, cov disjoint from the processed vertices, mutually
    external with the contours already chosen.
    """

    def __init__(self, table, points: FrozenSet[Point], ground: Ground, z, exact: bool = False, engine: Optional[str] = None):
        self.table = table
        self.ground = ground
        self.z = _exact(z) if exact else z
        self.engine = engine
        self.contours: List[Contour] = table.members(points, ground)
        weights = [table.outer_weight(c).evaluate(self.z) for c in self.contours]
        if not exact:
            weights = [float(w) for w in weights]
        super().__init__([c.cov for c in self.contours], self._neighbors(self.contours), weights, sorted(points), exact)

    def _system(self, members: List[Contour]) -> PolymerSystem:
        return PolymerSystem.build(
            items=members,
            keys=[c.key for c in members],
            orders=[c.surface_energy for c in members],
            weights=[self.table.outer_weight(c) for c in members],
            footprint=lambda c: c.cov,
            reach=self.table.cov_halo,
            order=self.table.order,
            backend=EXACT,
        )

    def _neighbors(self, members: List[Contour]) -> Tuple[FrozenSet[int], ...]:
        occupants: Dict[Point, List[int]] = {}
        for i, contour in enumerate(members):
            for point in contour.cov:
                occupants.setdefault(point, []).append(i)
        neighbors = []
        for i, contour in enumerate(members):
            found = set()
            for point in self.table.cov_halo(contour):
                found.update(occupants.get(point, ()))
            found.discard(i)
            neighbors.append(frozenset(found))
        return tuple(neighbors)

    def approximate_partition(self, indices: FrozenSet[int]):
        members = [self.contours[i] for i in sorted(indices)]
        system = self._system(members)
        return exp_of(log_partition(system, self.engine).series.evaluate(self.z))

    def draw(self, stream: RandomStream) -> List[Contour]:
        return [self.contours[i] for i in self.sample(stream)]


def _regime(model: ContourModel, z: float) -> None:
    if not 0 < z < model.delta:
        raise RegimeError(f"contour sampling needs 0 < z < delta = {model.delta}, got z = {z}")


def contour_table_for_sampling(
    model: ContourModel, region: Region, z: float, epsilon: Optional[float], exact: bool, engine: Optional[str] = None
) -> ContourWeightTable:
    """Weight table at full degree (exact) or at the order the per-call budget needs."""
    degree = model.degree_bound * len(region)
    if exact:
        return ContourWeightTable(model, region, degree, engine=engine).build()
    if epsilon is None or epsilon <= 0:
        raise ConfigurationError("approximate sampling needs epsilon > 0")
    per_call = epsilon / len(region)
    order = truncation_order(degree, z, model.delta, step_epsilon(per_call, len(region)))
    return ContourWeightTable(model, region, order, engine=engine).build()


def sample_contours(
    model: ContourModel,
    region: Region,
    ground: Ground,
    z: float,
    epsilon: Optional[float],
    stream: RandomStream,
    exact: bool = False,
    engine: Optional[str] = None,
) -> List[Contour]:
    """Mutually external type-ground outer contours drawn from (approximately) mu^ground_region."""
    if exact:
        if z < 0:
            raise RegimeError("exact contour sampling needs z >= 0")
    else:
        _regime(model, z)
    table = contour_table_for_sampling(model, region, z, epsilon, exact, engine)
    return ContourSampler(table, region.vertices, ground, z, exact, engine).draw(stream)


# ---------------------------------------------------------------------------
# spins
# ---------------------------------------------------------------------------

@dataclass
class SpinSample:
    """
    A full configuration and the contour sets drawn at each recursive call.

    levels holds (ground state, drawn outer contours) per call, in call order.
    """

    assignment: Dict[Point, Any]
    ground: Ground
    levels: List[Tuple[Ground, Tuple[Contour, ...]]] = field(default_factory=list)

    @property
    def contours(self) -> List[Contour]:
        found = [c for _, drawn in self.levels for c in drawn]
        return sorted(found, key=Contour.sort_key)

    def digest(self) -> str:
        """sha256 of the canonical JSON of every drawn contour id."""
        keys = [[[list(p), s] for p, s in c.key] for c in self.contours]
        return hashlib.sha256(json.dumps(keys, sort_keys=True, default=str).encode("utf-8")).hexdigest()


class SpinSampler:
    """
    Recursive spin sampler on a free region with a padded boundary.

    Outer contours are drawn on the region, exteriors take the ground
    pattern, supports take the contour spins, and every labelled interior
    is sampled again with its label as boundary condition. Samplers per
    (interior, label) are reused across draws.

    Args:
        model: Contour model
        region: Free region
        ground: Boundary ground state
        z: Contour activity
        epsilon: Total-variation target, split uniformly as epsilon/|region| per call
        exact: Exact probabilities (verification scale)
    """

    def __init__(
        self,
        model: ContourModel,
        region: Region,
        ground: Ground,
        z: float,
        epsilon: Optional[float] = None,
        exact: bool = False,
        engine: Optional[str] = None,
    ):
        if exact:
            if z < 0:
                raise RegimeError("exact spin sampling needs z >= 0")
        else:
            _regime(model, z)
        self.model = model
        self.region = region
        self.ground = model.parse_ground(ground)
        self.z = z
        self.exact = exact
        self.engine = engine
        self.table = contour_table_for_sampling(model, region, z, epsilon, exact, engine)
        self._samplers: Dict[Tuple[FrozenSet[Point], Ground], ContourSampler] = {}
        self.logger = logger

    def sampler(self, points: FrozenSet[Point], ground: Ground) -> ContourSampler:
        key = (points, ground)
        found = self._samplers.get(key)
        if found is None:
            found = ContourSampler(self.table, points, ground, self.z, self.exact, self.engine)
            self._samplers[key] = found
        return found

    def draw(self, stream: RandomStream) -> SpinSample:
        sample = SpinSample(self.model.ground_configuration(self.region, self.ground), self.ground)
        self._fill(self.region.vertices, self.ground, stream, sample)
        return sample

    def _fill(self, points: FrozenSet[Point], ground: Ground, stream: RandomStream, sample: SpinSample) -> None:
        drawn = self.sampler(points, ground).draw(stream.child(0))
        sample.levels.append((ground, tuple(drawn)))
        for x in points:
            sample.assignment[x] = self.model.ground_spin(ground, x)
        calls = 0
        for contour in drawn:
            sample.assignment.update(contour.spin_map)
            for interior, label in zip(contour.interiors, contour.labels):
                calls += 1
                self._fill(interior, label, stream.child(calls), sample)


def sample_spins(
    model: ContourModel,
    region: Region,
    ground: Ground,
    parameter: float,
    epsilon: float,
    stream: RandomStream,
    exact: bool = False,
) -> SpinSample:
    """Spin configuration from the recursive contour sampler; ``parameter`` is beta or lambda."""
    z = model.z_from_parameter(parameter)
    return SpinSampler(model, region, ground, z, epsilon, exact).draw(stream)


# ---------------------------------------------------------------------------
# torus
# ---------------------------------------------------------------------------

@dataclass
class TorusSample:
    """Ground state chosen for the exterior, its outer small contours and the reconstructed spins."""

    ground: Ground
    outer: List[Contour]
    spins: SpinSample


class TorusSampler:
    """
    Matching-contour sampler on T^d_n.

    Picks a ground state with probability proportional to the approximate
    (or exact) Z^ground, draws outer small contours, then fills every
    interior through a free-geometry spin sampler on its Z^d embedding.
    """

    def __init__(
        self,
        model: ContourModel,
        n: int,
        z: float,
        epsilon: Optional[float],
        exact: bool = False,
        engine: Optional[str] = None,
        floor_constant: Optional[float] = None,
    ):
        self.region = torus_region(model, n)
        floor = admissible_floor(n, floor_constant)
        if epsilon is None and not exact:
            raise ConfigurationError("approximate torus sampling needs epsilon")
        if epsilon is not None and epsilon < floor:
            raise RegimeError(f"epsilon {epsilon} is below the admissible floor e^(-c n) = {floor:.6g}")
        if exact:
            if z < 0:
                raise RegimeError("exact torus sampling needs z >= 0")
        else:
            _regime(model, z)
        self.model = model
        self.n = n
        self.z = z
        self.epsilon = epsilon
        self.exact = exact
        self.engine = engine
        degree = model.degree_bound * len(self.region)
        order = degree if exact else truncation_order(
            degree, z, model.delta, step_epsilon(epsilon / (2 * len(self.region)), len(self.region))
        )
        self.table = SmallContourTable(model, n, order, engine)
        self.samplers = {
            g: ContourSampler(self.table, self.region.vertices, g, z, exact, engine) for g in model.ground_states
        }
        self.ground_law = self._ground_law()
        self._interiors: Dict[Tuple, SpinSampler] = {}

    def _ground_law(self) -> List[Tuple[Ground, Any]]:
        masses = []
        for g in self.model.ground_states:
            sampler = self.samplers[g]
            masses.append((g, sampler.partition(frozenset(range(len(sampler.contours))))))
        total = sum(m for _, m in masses)
        return [(g, m / total) for g, m in masses]

    def _interior_sampler(self, embedded: Region, label: Ground) -> Tuple[SpinSampler, Point]:
        canonical, shift = embedded.canonical()
        ground = self.model.translate_ground(label, shift)
        key = (canonical.vertices, ground)
        found = self._interiors.get(key)
        if found is None:
            found = SpinSampler(self.model, canonical, ground, self.z, self.epsilon, self.exact, self.engine)
            self._interiors[key] = found
        return found, shift

    def draw(self, stream: RandomStream) -> TorusSample:
        law = [(i, p) for i, (_, p) in enumerate(self.ground_law)]
        index = _select(law, stream.child(0).uniform(0), self.exact)
        ground = self.ground_law[index][0]
        outer = self.samplers[ground].draw(stream.child(1))

        sample = SpinSample(self.model.ground_configuration(self.region, ground), ground, [(ground, tuple(outer))])
        calls = 1
        for contour in outer:
            sample.assignment.update(contour.spin_map)
            for interior, label in zip(contour.interiors, contour.labels):
                calls += 1
                embedded = embed_interior(self.region, contour, interior)
                sampler, shift = self._interior_sampler(embedded, label)
                inner = sampler.draw(stream.child(calls))
                back = tuple(-c for c in shift)
                for point, spin in inner.assignment.items():
                    sample.assignment[self.region.wrap(tuple(p + b for p, b in zip(point, back)))] = spin
                for level_ground, drawn in inner.levels:
                    sample.levels.append((level_ground, drawn))
        return TorusSample(ground, outer, sample)


def torus_sample(
    model: ContourModel,
    n: int,
    z: float,
    epsilon: float,
    stream: RandomStream,
    exact: bool = False,
    floor_constant: Optional[float] = None,
) -> TorusSample:
    """Approximate draw of a matching contour set on T^d_n with its spin configuration."""
    return TorusSampler(model, n, z, epsilon, exact, floor_constant=floor_constant).draw(stream)
