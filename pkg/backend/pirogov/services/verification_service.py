"""
Verification suites behind the ``verify`` command.

Each suite runs a desk-scale version of one acceptance check against the
brute-force oracles and reports how many checks ran and which failed.
The full-size versions live in the integration tests.
"""

import logging
import math
import time
from collections import Counter
from fractions import Fraction
from typing import Callable, Dict, List, Optional, Sequence

import networkx as nx
import numpy as np

from pirogov.core.exceptions import ConfigurationError
from pirogov.core.rng import RandomStream
from pirogov.models.contour import hardcore_contour_model, potts_contour_model
from pirogov.models.lattice import Region
from pirogov.models.polymer import hardcore_polymer_model, ising_polymer_model
from pirogov.models.series import EXACT, TruncatedSeries, log_from_poly, poly_from_log
from pirogov.schemas.artifacts import SuiteResult, VerifyReport
from pirogov.services.cluster_expansion import approx_Z, logZ_coefficients
from pirogov.services.contour_service import contour_polynomial
from pirogov.services.oracle_service import (
    brute_matching_sets,
    brute_Z_contour_region,
    brute_Z_hardcore,
    brute_Z_ising,
    brute_Z_torus,
    configuration_key,
    exact_gibbs_distribution,
    exact_polymer_distribution,
    polymer_family_key,
    tv_distance,
)
from pirogov.services.run_service import version_string
from pirogov.services.sampling_service import PolymerSampler, SpinSampler
from pirogov.services.torus_service import torus_polynomial_small, torus_Z_big_exact
from pirogov.services.ursell import ursell, ursell_deletion_contraction, ursell_direct

logger = logging.getLogger(__name__)

SUITE_NAMES = ("ursell", "newton", "polymer", "fptas", "contour", "sampler", "spins", "torus", "kp")


class SuiteRecorder:
    """Collects checks of one suite."""

    def __init__(self, name: str):
        self.name = name
        self.checks = 0
        self.failures: List[str] = []
        self.details: Dict[str, object] = {}

    def check(self, condition: bool, message: str) -> None:
        self.checks += 1
        if not condition:
            self.failures.append(message)

    def result(self) -> SuiteResult:
        return SuiteResult(
            name=self.name,
            passed=not self.failures,
            checks=self.checks,
            failures=self.failures,
            details=self.details,
        )


def random_connected_graph(rng: np.random.Generator, max_vertices: int, p: float = 0.35, max_edges: int = 16) -> nx.Graph:
    while True:
        n = int(rng.integers(1, max_vertices + 1))
        graph = nx.gnp_random_graph(n, p, seed=int(rng.integers(2 ** 31)))
        if nx.is_connected(graph) and graph.number_of_edges() <= max_edges:
            return graph


def random_unit_polynomial(rng: np.random.Generator, max_degree: int) -> TruncatedSeries:
    degree = int(rng.integers(1, max_degree + 1))
    coeffs = [Fraction(1)] + [
        Fraction(int(rng.integers(-9, 10)), int(rng.integers(1, 7))) for _ in range(degree)
    ]
    return TruncatedSeries(degree, tuple(coeffs), EXACT)


class VerificationService:
    """
    Runs verification suites by name.

    Args:
        seed: Seed for random corpora and sampler streams
        draws: Draws per empirical sampler check
    """

    def __init__(self, seed: int = 0, draws: int = 4000):
        self.seed = seed
        self.draws = draws
        self.logger = logger
        self.suites: Dict[str, Callable[[SuiteRecorder], None]] = {
            "ursell": self.suite_ursell,
            "newton": self.suite_newton,
            "polymer": self.suite_polymer,
            "fptas": self.suite_fptas,
            "contour": self.suite_contour,
            "sampler": self.suite_sampler,
            "spins": self.suite_spins,
            "torus": self.suite_torus,
            "kp": self.suite_kp,
        }

    def run(self, names: Sequence[str]) -> VerifyReport:
        """
        Run the named suites ("all" expands to every suite).

        Raises:
            ConfigurationError: If a suite name is unknown
        """
        selected: List[str] = []
        for name in names:
            if name == "all":
                selected.extend(SUITE_NAMES)
            elif name in self.suites:
                selected.append(name)
            else:
                raise ConfigurationError(f"unknown suite {name!r}; choose from {', '.join(SUITE_NAMES)} or all")
        results = []
        for name in dict.fromkeys(selected):
            recorder = SuiteRecorder(name)
            started = time.perf_counter()
            self.suites[name](recorder)
            self.logger.info("suite %s: %d checks, %d failures in %.2fs",
                             name, recorder.checks, len(recorder.failures), time.perf_counter() - started)
            results.append(recorder.result())
        return VerifyReport(version=version_string(), suites=results)

    def _rng(self, offset: int) -> np.random.Generator:
        return np.random.default_rng([self.seed, offset])

    # ---- suites ------------------------------------------------------------------

    def suite_ursell(self, rec: SuiteRecorder) -> None:
        golden = {
            "K1": (nx.complete_graph(1), 1),
            "K2": (nx.complete_graph(2), -1),
            "P3": (nx.path_graph(3), 1),
            "K3": (nx.complete_graph(3), 2),
        }
        for name, (graph, expected) in golden.items():
            value = ursell(graph)
            rec.check(value == expected, f"phi({name}) = {value}, expected {expected}")
        rng = self._rng(1)
        for index in range(200):
            graph = random_connected_graph(rng, 7)
            direct, contracted = ursell_direct(graph), ursell_deletion_contraction(graph)
            rec.check(direct == contracted, f"random graph {index}: direct {direct} != deletion-contraction {contracted}")

    def suite_newton(self, rec: SuiteRecorder) -> None:
        rng = self._rng(2)
        for index in range(500):
            polynomial = random_unit_polynomial(rng, 10)
            rec.check(poly_from_log(log_from_poly(polynomial)) == polynomial, f"round trip failed on polynomial {index}")

    def suite_polymer(self, rec: SuiteRecorder) -> None:
        grid = Region.box((3, 4))
        model = hardcore_polymer_model(grid)
        exact = brute_Z_hardcore(grid.to_graph())
        full = logZ_coefficients(model, model.degree_of_partition_function, "newton").series
        rec.check(poly_from_log(full) == exact, "3x4 hard-core: newton coefficients do not rebuild the independence polynomial")

        small = Region.box((2, 3))
        clustered = logZ_coefficients(hardcore_polymer_model(small), 6, "cluster").series
        reference = log_from_poly(brute_Z_hardcore(small.to_graph())).truncate(6)
        rec.check(clustered == reference, "2x3 hard-core: cluster engine disagrees with the oracle up to order 6")

        for beta in (0.5, 1.0, 2.0):
            ising = ising_polymer_model(small, beta)
            series = logZ_coefficients(ising, ising.degree_of_partition_function, "newton").series
            oracle = log_from_poly(brute_Z_ising(small.to_graph(), beta))
            rec.check(series.close_to(oracle, rel_tol=1e-9), f"2x3 Ising beta={beta}: log coefficients disagree")

    def suite_fptas(self, rec: SuiteRecorder) -> None:
        grid = Region.box((4, 4))
        model = hardcore_polymer_model(grid)
        z = 0.5 / (math.e * 5)
        exact = float(brute_Z_hardcore(grid.to_graph()).evaluate(Fraction(z)))
        for epsilon in (1e-1, 1e-2, 1e-3):
            result = approx_Z(model, z, epsilon)
            ratio = math.log(result.value / exact)
            rec.details[f"log_ratio_{epsilon:g}"] = ratio
            rec.check(abs(ratio) <= epsilon, f"epsilon={epsilon:g}: |log(approx/exact)| = {abs(ratio):.3g}")

    def suite_contour(self, rec: SuiteRecorder) -> None:
        box = Region.box((6, 6))
        for q in (2, 3):
            model = potts_contour_model(q)
            for ground in model.ground_states:
                same = contour_polynomial(model, box, ground) == brute_Z_contour_region(model, box, ground)
                rec.check(same, f"Potts q={q} 6x6 ground {model.ground_name(ground)}: contour polynomial != oracle")
        model = potts_contour_model(2)
        for config in model.padded_configurations(box, 0):
            contours = model.contours_of_config(box, 0, config)
            rebuilt = model.configuration_from_contours(box, 0, contours)
            rec.check(rebuilt == config, "Potts q=2 6x6: contours do not rebuild their configuration")
        hardcore = hardcore_contour_model()
        box8 = Region.box((8, 8))
        same = contour_polynomial(hardcore, box8, "even") == brute_Z_contour_region(hardcore, box8, "even")
        rec.check(same, "hard-core 8x8 even: contour polynomial != oracle")

    def suite_sampler(self, rec: SuiteRecorder) -> None:
        hosts = {
            "K1": nx.path_graph(1),
            "K2": nx.complete_graph(2),
            "P3": nx.path_graph(3),
            "C4": nx.cycle_graph(4),
            "grid2x3": Region.box((2, 3)).to_graph(),
        }
        z = Fraction(1, 2)
        for name, graph in hosts.items():
            model = hardcore_polymer_model(graph)
            sampler = PolymerSampler(model, z, exact=True)
            by_key = {p.key: i for i, p in enumerate(sampler.polymers)}
            for key, probability in exact_polymer_distribution(model, z).outcomes:
                path = sampler.path_probability(by_key[k] for k in key)
                rec.check(path == probability, f"{name}: path probability {path} != {probability}")
            for chosen, t in _reachable_states(sampler):
                rec.check(sampler.fundamental_identity_holds(chosen, t), f"{name}: identity fails at step {t}")

        model = hardcore_polymer_model(nx.path_graph(3))
        epsilon = 0.05
        sampler = PolymerSampler(model, 0.1, epsilon)
        root = RandomStream(self.seed)
        counts = Counter(polymer_family_key(sampler.draw(root.child(i))) for i in range(self.draws))
        tv = tv_distance(exact_polymer_distribution(model, Fraction(1, 10)), counts)
        rec.details["approx_tv"] = tv.distance
        rec.check(tv.within(epsilon), f"P3 approximate sampler: TV {tv.distance:.4f} > {epsilon} + {tv.radius:.4f}")

    def suite_spins(self, rec: SuiteRecorder) -> None:
        model = potts_contour_model(2)
        box = Region.box((5, 5))
        z = Fraction(1, 2)
        sampler = SpinSampler(model, box, 0, z, exact=True)
        root = RandomStream(self.seed)
        counts: Counter = Counter()
        for i in range(self.draws):
            sample = sampler.draw(root.child(i))
            counts[configuration_key(box, sample.assignment)] += 1
            extracted = model.contours_of_config(box, 0, sample.assignment)
            if i < 200:
                rec.check(
                    sorted(c.key for c in extracted) == sorted(c.key for c in sample.contours),
                    f"draw {i}: re-extracted contours differ from provenance",
                )
        tv = tv_distance(exact_gibbs_distribution(model, box, 0, z), counts)
        rec.details["tv"] = tv.distance
        rec.check(tv.within(0.0), f"Potts 5x5 exact spin sampler: TV {tv.distance:.4f} > radius {tv.radius:.4f}")

    def suite_torus(self, rec: SuiteRecorder) -> None:
        for model in (hardcore_contour_model(), potts_contour_model(2)):
            total = brute_Z_torus(model, 4)
            pieces = torus_Z_big_exact(model, 4)
            for ground in model.ground_states:
                pieces = pieces + torus_polynomial_small(model, 4, ground)
            rec.check(pieces == total, f"{model.name} n=4: Z != Z^big + sum of Z^ground")
        model = potts_contour_model(2)
        for ground in model.ground_states:
            small = torus_polynomial_small(model, 6, ground)
            rec.check(small == brute_matching_sets(model, 6, ground), f"Potts n=6 ground {ground}: small-contour sum mismatch")

    def suite_kp(self, rec: SuiteRecorder) -> None:
        host = Region.full_torus(4, 2)
        model = hardcore_polymer_model(host)
        degree = model.max_degree
        at_boundary = model.kp_certificate(1.0 / (math.e * (degree + 1)), 1)
        rec.check(at_boundary.holds_truncated, "KP fails at z = 1/(e(D+1))")
        rec.check(abs(at_boundary.worst_margin) <= 1e-12, f"singleton margin {at_boundary.worst_margin:.3g} is not ~0")
        beyond = model.kp_certificate(1.5 / (math.e * (degree + 1)), 1)
        rec.check(not beyond.holds_truncated, "KP holds at z = 1.5/(e(D+1))")


def _reachable_states(sampler: PolymerSampler, limit: Optional[int] = 2000):
    """Every (chosen, t) reachable with positive probability, breadth first."""
    frontier = {frozenset()}
    states = []
    for t in range(len(sampler.order)):
        following = set()
        for chosen in frontier:
            states.append((chosen, t))
            for option, probability in sampler.step_distribution(chosen, t):
                if probability > 0:
                    following.add(chosen if option is None else chosen | {option})
        frontier = following
        if limit is not None and len(states) > limit:
            break
    return states
