"""
Pirogov-Sinai contour models on regions of Z^d and the torus.

A contour is a d-infinity connected set of incorrect vertices with their
spins. Removing the support splits the ambient space into components; each
is labelled by the ground state its collar (support vertices next to it)
agrees with. The label of the unbounded component is the contour's type.

ContourModel keeps validity generic: a model only supplies its ground
states, the ground spin pattern, the surface energy and any hard
constraint on spins. Potts and hard-core instances are provided.
"""

import logging
import math
from abc import ABC, abstractmethod
from dataclasses import dataclass
from functools import cached_property
from typing import Any, Callable, Dict, FrozenSet, Hashable, Iterator, List, Mapping, Optional, Tuple

from pirogov.core.config import get_settings
from pirogov.core.exceptions import BoundaryConditionError, ConfigurationError, GeometryError, PirogovError
from pirogov.models.lattice import Point, Region, add

logger = logging.getLogger(__name__)

Ground = Hashable
Spin = Any
SpinLookup = Callable[[Point], Spin]

COLOR_NAMES = ("red", "blue", "green", "yellow", "purple", "orange", "cyan", "magenta")

REGION = "region"
SMALL = "small"
LARGE = "large"


@dataclass(frozen=True)
class Contour:
    """
    Support, spins, labelled interior components and surface energy.

    interiors are the bounded complement components A_1..A_t; the exterior
    A_0 is implicit. exterior_label is the type (None for large torus
    contours, which have no exterior).
    """

    support: FrozenSet[Point]
    spins: Tuple[Tuple[Point, Spin], ...]
    interiors: Tuple[FrozenSet[Point], ...]
    labels: Tuple[Ground, ...]
    exterior_label: Optional[Ground]
    surface_energy: int
    kind: str = REGION

    @property
    def key(self) -> Tuple:
        return self.spins

    @property
    def type(self) -> Optional[Ground]:
        return self.exterior_label

    @property
    def size(self) -> int:
        return len(self.support)

    @cached_property
    def spin_map(self) -> Dict[Point, Spin]:
        return dict(self.spins)

    @cached_property
    def cov(self) -> FrozenSet[Point]:
        return self.support.union(*self.interiors)

    def interior_with_label(self, label: Ground) -> FrozenSet[Point]:
        """int_label: union of the interior components carrying ``label``."""
        return frozenset().union(*(a for a, lab in zip(self.interiors, self.labels) if lab == label))

    def sort_key(self) -> Tuple:
        return (self.size, self.key)


class ContourModel(ABC):
    """
    Abstract base class for contour models with a symmetric ground-state set.

    Args:
        dim: Lattice dimension (at least 2)
        delta: Zero-free radius assumed by the counting pipeline
    """

    degree_bound: int = 1

    def __init__(self, dim: int, delta: float):
        if dim < 2:
            raise ConfigurationError("contour models need dimension d >= 2")
        if delta <= 0:
            raise ConfigurationError("delta must be positive")
        self.dim = dim
        self.delta = float(delta)
        self.rho = 1.0 / (2 * 3 ** dim)
        self.logger = logger

    @property
    @abstractmethod
    def name(self) -> str:
        """Return the instance name used in artifacts."""
        pass

    @property
    @abstractmethod
    def spin_set(self) -> Tuple[Spin, ...]:
        """Return the spin set Omega."""
        pass

    @property
    @abstractmethod
    def ground_states(self) -> Tuple[Ground, ...]:
        """Return the ground-state set Xi."""
        pass

    @abstractmethod
    def ground_spin(self, ground: Ground, point: Point) -> Spin:
        """Spin of ``point`` in the ground configuration ``ground``."""
        pass

    @abstractmethod
    def surface_energy(self, support: FrozenSet[Point], spin_of: SpinLookup, geometry: Region) -> Optional[int]:
        """Integer surface energy, or None when the candidate cannot be a contour."""
        pass

    @abstractmethod
    def prefactor_exponent(self, region: Region, ground: Ground) -> int:
        """k such that the spin partition function equals z^(-k) Z^ground(region, z)."""
        pass

    @abstractmethod
    def configuration_energy(self, region: Region, ground: Ground, config: Mapping[Point, Spin]) -> int:
        """Exponent of z carried by a configuration: z^energy is its weight in Z^ground(region, z)."""
        pass

    @abstractmethod
    def z_from_parameter(self, parameter: float) -> float:
        """Map the physical parameter (beta or lambda) to the contour activity z."""
        pass

    def spin_allowed(self, point: Point, spin: Spin, assigned: Mapping[Point, Spin], geometry: Region) -> bool:
        """Hard constraint hook used while building configurations."""
        return True

    def constraints_hold(self, support: FrozenSet[Point], spin_of: SpinLookup, geometry: Region) -> bool:
        return True

    def translate_ground(self, ground: Ground, vector: Point) -> Ground:
        return ground

    def parse_ground(self, value: Any) -> Ground:
        if value in self.ground_states:
            return value
        raise BoundaryConditionError(f"unknown ground state {value!r} for {self.name}")

    def ground_name(self, ground: Ground) -> str:
        return str(ground)

    def validate_geometry(self, region: Region) -> None:
        if region.dim != self.dim:
            raise GeometryError(f"{self.name} has dimension {self.dim}, region has {region.dim}")

    def peierls_holds(self, contour: Contour) -> bool:
        """ceil(rho |support|) <= ||gamma|| <= C |support|."""
        lower = math.ceil(self.rho * contour.size - 1e-12)
        return lower <= contour.surface_energy <= self.degree_bound * contour.size

    # ---- local correctness --------------------------------------------------

    def is_correct(self, point: Point, spin_of: SpinLookup, geometry: Region, domain: Optional[FrozenSet[Point]] = None) -> bool:
        """True iff the ball of radius 1 around ``point`` (within ``domain``) agrees with some ground state."""
        ball = [y for y in geometry.ball(point, 1) if domain is None or y in domain]
        return any(all(spin_of(y) == self.ground_spin(g, y) for y in ball) for g in self.ground_states)

    def label_of(self, collar: List[Point], spin_of: SpinLookup) -> Optional[Ground]:
        matches = [g for g in self.ground_states if all(spin_of(c) == self.ground_spin(g, c) for c in collar)]
        return matches[0] if len(matches) == 1 else None

    # ---- contour construction -----------------------------------------------

    def analyse(
        self,
        geometry: Region,
        support: FrozenSet[Point],
        spins: Mapping[Point, Spin],
        exterior: str = "free",
    ) -> Optional[Contour]:
        """
        Build a contour from a candidate support and spins, or return None.

        Checks collar consistency of every complement component, that every
        support vertex is incorrect, the model constraints and the surface
        energy. ``exterior`` selects how A_0 is found: "free" (unbounded
        component), "small" (the unique component of diameter >= n/2 on the
        torus) or "large" (no exterior).
        """
        parts = geometry.components(support)
        if exterior == "free":
            outer_index: Optional[int] = 0
        elif exterior == "small":
            wide = [i for i, part in enumerate(parts) if geometry.diameter(part) * 2 >= geometry.torus]
            if len(wide) != 1:
                return None
            outer_index = wide[0]
        else:
            outer_index = None

        owner: Dict[Point, int] = {}
        for index, part in enumerate(parts):
            for point in part:
                owner[point] = index

        collars: Dict[int, List[Point]] = {}
        for point in sorted(support):
            for y in geometry.king_neighbors(point):
                if y not in support:
                    collars.setdefault(owner[y], []).append(point)

        lookup = lambda x: spins[x]  # noqa: E731
        labels: Dict[int, Ground] = {}
        for index, collar in collars.items():
            label = self.label_of(sorted(set(collar)), lookup)
            if label is None:
                return None
            labels[index] = label
        if outer_index is not None and outer_index not in labels:
            return None

        def spin_of(x: Point) -> Spin:
            if x in support:
                return spins[x]
            return self.ground_spin(labels[owner[x]], x)

        for point in support:
            if self.is_correct(point, spin_of, geometry):
                return None
        if not self.constraints_hold(support, spin_of, geometry):
            return None
        energy = self.surface_energy(support, spin_of, geometry)
        if energy is None or energy < 1:
            return None

        inner = [i for i in range(len(parts)) if i != outer_index]
        inner.sort(key=lambda i: min(parts[i]))
        kind = {"free": REGION, "small": SMALL}.get(exterior, LARGE)
        return Contour(
            support=frozenset(support),
            spins=tuple(sorted((p, spins[p]) for p in support)),
            interiors=tuple(parts[i] for i in inner),
            labels=tuple(labels[i] for i in inner),
            exterior_label=labels[outer_index] if outer_index is not None else None,
            surface_energy=energy,
            kind=kind,
        )

    def is_valid_contour(
        self, region: Region, ground: Optional[Ground], support, spins: Mapping[Point, Spin]
    ) -> Optional[Contour]:
        """
        Validity predicate for a contour of type ``ground`` in a free region.

        Returns None when the support is not d-infinity connected, comes
        within distance 1 of the complement, or fails the model conditions.
        """
        support = frozenset(support)
        if not support or not region.is_connected_set(support):
            return None
        if not all(region.has_clearance(p, 1) for p in support):
            return None
        if set(spins) != set(support) or any(spins[p] not in self.spin_set for p in support):
            return None
        contour = self.analyse(region, support, spins, "free")
        if contour is None or (ground is not None and contour.type != ground):
            return None
        return contour

    # ---- configurations -----------------------------------------------------

    def padded_points(self, region: Region) -> List[Point]:
        """Points at d-infinity distance <= 2 from the complement (fixed by the boundary condition)."""
        return [x for x in region.sorted_vertices if not region.has_clearance(x, 2)]

    def ground_configuration(self, region: Region, ground: Ground) -> Dict[Point, Spin]:
        return {x: self.ground_spin(ground, x) for x in region.sorted_vertices}

    def padded_configurations(self, region: Region, ground: Ground) -> Iterator[Dict[Point, Spin]]:
        """Every configuration in Omega^ground_region, by backtracking over the free points."""
        assigned = {x: self.ground_spin(ground, x) for x in self.padded_points(region)}
        free = [x for x in region.sorted_vertices if x not in assigned]
        yield from self._assign(region, free, 0, assigned)

    def _assign(self, region: Region, free: List[Point], position: int, assigned: Dict[Point, Spin]):
        if position == len(free):
            yield dict(assigned)
            return
        point = free[position]
        for spin in self.spin_set:
            if self.spin_allowed(point, spin, assigned, region):
                assigned[point] = spin
                yield from self._assign(region, free, position + 1, assigned)
                del assigned[point]

    def count_padded_free(self, region: Region) -> int:
        return len(region) - len(self.padded_points(region))

    def check_configuration(self, region: Region, ground: Ground, config: Mapping[Point, Spin]) -> None:
        """
        Raises:
            BoundaryConditionError: If ``config`` is not in Omega^ground_region
        """
        if set(config) != set(region.vertices):
            raise BoundaryConditionError("configuration must assign every point of the region")
        for x in self.padded_points(region):
            if config[x] != self.ground_spin(ground, x):
                raise BoundaryConditionError(f"point {x} violates the padded {self.ground_name(ground)} boundary")
        for x in region.sorted_vertices:
            if config[x] not in self.spin_set:
                raise BoundaryConditionError(f"spin {config[x]!r} at {x} is not in the spin set")
        if not self.configuration_admissible(region, config):
            raise BoundaryConditionError("configuration violates the model's hard constraint")

    def configuration_admissible(self, region: Region, config: Mapping[Point, Spin]) -> bool:
        return True

    def incorrect_points(self, region: Region, config: Mapping[Point, Spin]) -> List[Point]:
        lookup = config.__getitem__
        return [x for x in region.sorted_vertices if not self.is_correct(x, lookup, region, region.vertices)]

    def contours_of_config(
        self, region: Region, ground: Optional[Ground], config: Mapping[Point, Spin], check: bool = True
    ) -> List[Contour]:
        """
        Decompose a padded free-region configuration into its contours.

        Raises:
            BoundaryConditionError: If the configuration violates the boundary condition
        """
        if check:
            self.check_configuration(region, ground, config)
        incorrect = self.incorrect_points(region, config)
        contours = []
        for part in region._flood(incorrect):
            contour = self.analyse(region, part, {x: config[x] for x in part}, "free")
            if contour is None:
                raise PirogovError(f"incorrect component at {min(part)} does not form a contour")
            contours.append(contour)
        return sorted(contours, key=Contour.sort_key)

    def configuration_from_contours(
        self, region: Region, ground: Ground, contours: List[Contour]
    ) -> Dict[Point, Spin]:
        """Rebuild the configuration of a matching contour set (outer contours first)."""
        config = self.ground_configuration(region, ground)
        for contour in sorted(contours, key=lambda c: (-len(c.cov), c.key)):
            for interior, label in zip(contour.interiors, contour.labels):
                for x in interior:
                    if x in config:
                        config[x] = self.ground_spin(label, x)
            config.update(contour.spin_map)
        return config

    # ---- symmetry ---------------------------------------------------------------

    def translate(self, contour: Contour, vector: Point) -> Contour:
        """Translate a free-geometry contour; labels follow the ground-state translation."""
        move = lambda points: frozenset(add(p, vector) for p in points)  # noqa: E731
        label = lambda g: None if g is None else self.translate_ground(g, vector)  # noqa: E731
        return Contour(
            support=move(contour.support),
            spins=tuple(sorted((add(p, vector), s) for p, s in contour.spins)),
            interiors=tuple(move(a) for a in contour.interiors),
            labels=tuple(label(g) for g in contour.labels),
            exterior_label=label(contour.exterior_label),
            surface_energy=contour.surface_energy,
            kind=contour.kind,
        )


class PottsContourModel(ContourModel):
    """
    Ferromagnetic q-state Potts model at low temperature.

    Ground states are the q monochromatic configurations; the surface
    energy counts bichromatic nearest-neighbour edges inside the support,
    and z = exp(-beta).
    """

    def __init__(self, q: int, dim: int = 2, delta_override: Optional[float] = None):
        if q < 2:
            raise ConfigurationError("Potts model needs q >= 2")
        self.q = q
        delta = delta_override if delta_override is not None else get_settings().potts_contour_delta
        super().__init__(dim, delta)
        self.degree_bound = 2 * dim

    @property
    def name(self) -> str:
        return "potts-contour"

    @property
    def spin_set(self) -> Tuple[int, ...]:
        return tuple(range(self.q))

    @property
    def ground_states(self) -> Tuple[int, ...]:
        return tuple(range(self.q))

    def ground_spin(self, ground: int, point: Point) -> int:
        return ground

    def is_correct(self, point, spin_of, geometry, domain=None) -> bool:
        first = spin_of(point)
        return all(spin_of(y) == first for y in geometry.ball(point, 1) if domain is None or y in domain)

    def surface_energy(self, support, spin_of, geometry) -> int:
        energy = 0
        for x in support:
            for y in geometry.lattice_neighbors(x):
                if y in support and x < y and spin_of(x) != spin_of(y):
                    energy += 1
        return energy

    def prefactor_exponent(self, region: Region, ground: int) -> int:
        return len(region.edges)

    def configuration_energy(self, region: Region, ground: int, config) -> int:
        return sum(1 for x, y in region.edges if config[x] != config[y])

    def z_from_parameter(self, parameter: float) -> float:
        if parameter <= 0:
            raise ConfigurationError("inverse temperature beta must be positive")
        return math.exp(-parameter)

    def parse_ground(self, value: Any) -> int:
        if isinstance(value, str) and value in COLOR_NAMES[: self.q]:
            return COLOR_NAMES.index(value)
        try:
            color = int(value)
        except (TypeError, ValueError):
            raise BoundaryConditionError(f"unknown Potts boundary colour {value!r}")
        if not 0 <= color < self.q:
            raise BoundaryConditionError(f"Potts boundary colour {color} outside 0..{self.q - 1}")
        return color

    def ground_name(self, ground: int) -> str:
        return COLOR_NAMES[ground] if ground < len(COLOR_NAMES) else str(ground)


class HardcoreContourModel(ContourModel):
    """
    Hard-core model on Z^d at high fugacity.

    Ground states are the even and odd sublattice occupations; spins are
    occupation numbers. The surface energy is
    (1/4d) * sum over unoccupied support vertices of (2d - occupied neighbours),
    and z = 1/lambda.
    """

    EVEN = "even"
    ODD = "odd"

    def __init__(self, dim: int = 2, delta_override: Optional[float] = None):
        delta = delta_override if delta_override is not None else get_settings().hardcore_contour_delta
        super().__init__(dim, delta)
        self.degree_bound = 1

    @property
    def name(self) -> str:
        return "hardcore-contour"

    @property
    def spin_set(self) -> Tuple[int, ...]:
        return (0, 1)

    @property
    def ground_states(self) -> Tuple[str, ...]:
        return (self.EVEN, self.ODD)

    def ground_spin(self, ground: str, point: Point) -> int:
        parity = sum(point) % 2
        return 1 if parity == (0 if ground == self.EVEN else 1) else 0

    def validate_geometry(self, region: Region) -> None:
        super().validate_geometry(region)
        if region.is_torus and region.torus % 2:
            raise GeometryError("hard-core torus models need an even side n")

    def _occupied_neighbour(self, point: Point, lookup: Callable[[Point], Optional[int]], geometry: Region) -> bool:
        return any(lookup(y) == 1 for y in geometry.lattice_neighbors(point))

    def spin_allowed(self, point, spin, assigned, geometry) -> bool:
        if spin == 0:
            return True
        return not self._occupied_neighbour(point, lambda y: assigned.get(y) if y in geometry else None, geometry)

    def configuration_admissible(self, region, config) -> bool:
        return all(
            not (config[x] == 1 and self._occupied_neighbour(x, lambda y: config.get(y), region))
            for x in region.sorted_vertices
        )

    def constraints_hold(self, support, spin_of, geometry) -> bool:
        return all(
            not (spin_of(x) == 1 and self._occupied_neighbour(x, spin_of, geometry)) for x in support
        )

    def surface_energy(self, support, spin_of, geometry) -> Optional[int]:
        total = 0
        for x in support:
            if spin_of(x) == 0:
                total += 2 * self.dim - sum(spin_of(y) for y in geometry.lattice_neighbors(x))
        if total % (4 * self.dim):
            self.logger.debug("non-integral hard-core energy %d/%d", total, 4 * self.dim)
            return None
        return total // (4 * self.dim)

    def prefactor_exponent(self, region: Region, ground: str) -> int:
        wanted = 0 if ground == self.EVEN else 1
        return sum(1 for x in region.vertices if sum(x) % 2 == wanted)

    def configuration_energy(self, region: Region, ground: str, config) -> int:
        return self.prefactor_exponent(region, ground) - sum(config[x] for x in region.vertices)

    def z_from_parameter(self, parameter: float) -> float:
        if parameter <= 0:
            raise ConfigurationError("fugacity lambda must be positive")
        return 1.0 / parameter

    def translate_ground(self, ground: str, vector: Point) -> str:
        if sum(vector) % 2 == 0:
            return ground
        return self.ODD if ground == self.EVEN else self.EVEN


def potts_contour_model(q: int, dim: int = 2, delta_override: Optional[float] = None) -> PottsContourModel:
    return PottsContourModel(q, dim, delta_override)


def hardcore_contour_model(dim: int = 2, delta_override: Optional[float] = None) -> HardcoreContourModel:
    return HardcoreContourModel(dim, delta_override)
