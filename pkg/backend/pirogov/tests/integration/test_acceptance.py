"""
End-to-end checks of counting and sampling against the brute-force oracles.

These run at full size and take minutes; select them with ``-m integration``.
"""

import itertools
import math
from collections import Counter
from fractions import Fraction

import networkx as nx
import numpy as np
import pytest

from pirogov.core.rng import RandomStream
from pirogov.models.contour import hardcore_contour_model, potts_contour_model
from pirogov.models.lattice import Region
from pirogov.models.polymer import hardcore_polymer_model, ising_polymer_model
from pirogov.models.series import log_from_poly, poly_from_log
from pirogov.services.cluster_expansion import approx_Z, logZ_coefficients, truncation_order
from pirogov.services.contour_service import contour_polynomial
from pirogov.services.oracle_service import (
    brute_Z_contour_region,
    brute_Z_hardcore,
    brute_Z_ising,
    brute_Z_potts,
    brute_Z_torus,
    configuration_key,
    exact_gibbs_distribution,
    exact_polymer_distribution,
    polymer_family_key,
    tv_distance,
)
from pirogov.services.sampling_service import PolymerSampler, SpinSampler
from pirogov.services.torus_service import (
    decomposition_sums,
    torus_approx_Z,
    torus_polynomial_small,
    torus_Z_big_exact,
)
from pirogov.services.ursell import ursell, ursell_deletion_contraction, ursell_direct
from pirogov.services.verification_service import random_connected_graph, random_unit_polynomial

pytestmark = [pytest.mark.integration, pytest.mark.slow]

DRAWS = 100_000


def connected_induced_subgraphs(graph: nx.Graph):
    nodes = sorted(graph.nodes)
    for size in range(1, len(nodes) + 1):
        for chosen in itertools.combinations(nodes, size):
            sub = graph.subgraph(chosen)
            if nx.is_connected(sub):
                yield sub.copy()


class TestUrsellSuite:
    """Golden values and agreement of both evaluation routes."""

    def test_goldens(self):
        """Test phi on K1, K2, P3 and K3."""
        assert ursell(nx.complete_graph(1)) == 1
        assert ursell(nx.complete_graph(2)) == -1
        assert ursell(nx.path_graph(3)) == 1
        assert ursell(nx.complete_graph(3)) == 2

    def test_random_graphs(self):
        """Test deletion-contraction against edge-subset enumeration on 200 random graphs."""
        rng = np.random.default_rng(2024)

        for _ in range(200):
            graph = random_connected_graph(rng, 7)
            assert ursell_direct(graph) == ursell_deletion_contraction(graph)


class TestNewtonRoundTrip:
    """Exact log/exp round trip."""

    def test_random_polynomials(self):
        """Test poly_from_log(log_from_poly(P)) == P on 500 random unit polynomials."""
        rng = np.random.default_rng(7)

        for _ in range(500):
            polynomial = random_unit_polynomial(rng, 10)
            assert poly_from_log(log_from_poly(polynomial)) == polynomial


class TestPolymerExpansion:
    """Full-order log-coefficients against the independence and Ising oracles."""

    def test_grid_subgraphs(self):
        """Test every connected induced subgraph of the 3x4 grid."""
        grid = Region.box((3, 4)).to_graph()

        for sub in connected_induced_subgraphs(grid):
            model = hardcore_polymer_model(sub)
            series = logZ_coefficients(model, model.degree_of_partition_function, "newton").series
            assert poly_from_log(series) == brute_Z_hardcore(sub)

    def test_random_bounded_degree_graphs(self):
        """Test 50 random graphs of at most 10 vertices."""
        rng = np.random.default_rng(11)

        for _ in range(50):
            graph = random_connected_graph(rng, 10, p=0.3, max_edges=20)
            model = hardcore_polymer_model(graph)
            series = logZ_coefficients(model, model.degree_of_partition_function, "newton").series
            assert poly_from_log(series) == brute_Z_hardcore(graph)

    def test_cluster_engine_small_hosts(self):
        """Test the cluster engine up to order 6 on hosts of at most 6 vertices."""
        rng = np.random.default_rng(5)

        for _ in range(20):
            graph = random_connected_graph(rng, 6)
            model = hardcore_polymer_model(graph)
            order = min(6, graph.number_of_nodes())
            clustered = logZ_coefficients(model, order, "cluster").series
            assert clustered == log_from_poly(brute_Z_hardcore(graph)).truncate(order)

    @pytest.mark.parametrize("beta", [0.5, 1.0, 2.0])
    def test_ising(self, beta):
        """Test Ising log-coefficients within 1e-9 relative."""
        for graph in (Region.box((2, 3)).to_graph(), nx.cycle_graph(5), nx.star_graph(4)):
            model = ising_polymer_model(graph, beta)
            series = logZ_coefficients(model, model.degree_of_partition_function, "newton").series
            assert series.close_to(log_from_poly(brute_Z_ising(graph, beta)), rel_tol=1e-9)


class TestFPTAS:
    """The truncated Taylor error bound on the 4x4 grid."""

    @pytest.mark.parametrize("epsilon", [1e-1, 1e-2, 1e-3])
    def test_error_bound(self, epsilon):
        """Test |log(approx/exact)| <= epsilon at z = 0.5/(5e)."""
        grid = Region.box((4, 4))
        model = hardcore_polymer_model(grid)
        z = 0.5 / (5 * math.e)
        exact = float(brute_Z_hardcore(grid.to_graph()).evaluate(Fraction(z)))

        result = approx_Z(model, z, epsilon)

        assert result.m_used == truncation_order(16, z, model.delta, epsilon)
        assert abs(math.log(result.value / exact)) <= epsilon


class TestContourCounting:
    """Contour polynomials against spin enumeration on padded boxes."""

    @pytest.mark.parametrize("q", [2, 3])
    @pytest.mark.parametrize("side", [6, 7])
    def test_potts(self, q, side):
        """Test Z^ground(box) == brute-force Potts polynomial for every boundary colour."""
        box = Region.box((side, side))
        model = potts_contour_model(q)
        order = model.degree_bound * len(box)

        for ground in model.ground_states:
            assert contour_polynomial(model, box, ground) == brute_Z_potts(box, q, ground, order)

    def test_hardcore_8x8(self):
        """Test the hard-core contour polynomial with even boundary."""
        model = hardcore_contour_model()
        box = Region.box((8, 8))

        assert contour_polynomial(model, box, "even") == brute_Z_contour_region(model, box, "even")

    @pytest.mark.parametrize(
        "model,ground,side", [(hardcore_contour_model(), "even", 7), (potts_contour_model(3), 0, 6)]
    )
    def test_energy_is_sum_of_contour_energies(self, model, ground, side):
        """Test that each padded configuration's energy splits over its contours."""
        box = Region.box((side, side))

        for config in model.padded_configurations(box, ground):
            contours = model.contours_of_config(box, ground, config)
            assert sum(c.surface_energy for c in contours) == model.configuration_energy(box, ground, config)
            assert model.configuration_from_contours(box, ground, contours) == config


class TestSamplerLaws:
    """Exact and approximate polymer samplers against mu_G."""

    def test_exact_path_probabilities(self):
        """Test step-probability products against mu_G on random hosts of at most 6 vertices."""
        rng = np.random.default_rng(3)
        hosts = [nx.path_graph(1), nx.complete_graph(2), nx.path_graph(3), nx.cycle_graph(4)]
        hosts += [random_connected_graph(rng, 6) for _ in range(10)]
        z = Fraction(1, 2)

        for graph in hosts:
            model = hardcore_polymer_model(graph)
            sampler = PolymerSampler(model, z, exact=True)
            by_key = {p.key: i for i, p in enumerate(sampler.polymers)}
            for key, probability in exact_polymer_distribution(model, z).outcomes:
                assert sampler.path_probability([by_key[k] for k in key]) == probability

    @pytest.mark.parametrize("graph", [nx.path_graph(3), nx.cycle_graph(4)])
    def test_approximate_tv(self, graph):
        """Test empirical TV <= 0.05 + 4 sigma at 10^5 draws."""
        model = hardcore_polymer_model(graph)
        epsilon = 0.05
        sampler = PolymerSampler(model, 0.1, epsilon)
        root = RandomStream(1)

        counts = Counter(polymer_family_key(sampler.draw(root.child(i))) for i in range(DRAWS))
        tv = tv_distance(exact_polymer_distribution(model, Fraction(1, 10)), counts)

        assert tv.within(epsilon)


class TestSpinSampler:
    """Approximate spin sampler on a padded 6x6 box."""

    def test_tv_and_provenance(self):
        """Test TV to the Gibbs law and that contours re-extract to the provenance."""
        model = potts_contour_model(2)
        box = Region.box((6, 6))
        z = 0.02
        epsilon = 0.05
        sampler = SpinSampler(model, box, 0, z, epsilon)
        root = RandomStream(0)

        counts: Counter = Counter()
        for i in range(DRAWS):
            sample = sampler.draw(root.child(i))
            counts[configuration_key(box, sample.assignment)] += 1
            if i < 1000:
                extracted = model.contours_of_config(box, 0, sample.assignment)
                assert sorted(c.key for c in extracted) == sorted(c.key for c in sample.contours)
        tv = tv_distance(exact_gibbs_distribution(model, box, 0, Fraction(z)), counts)

        assert tv.within(epsilon)


class TestTorusDecomposition:
    """Z = Z^big + sum of Z^ground on T_4."""

    @pytest.mark.parametrize("model", [hardcore_contour_model(), potts_contour_model(2)])
    def test_exact_split(self, model):
        """Test the split and the matching-set sums as exact polynomial identities."""
        sums = decomposition_sums(model, 4)
        total = sums["big"]
        for ground in model.ground_states:
            small = torus_polynomial_small(model, 4, ground)
            assert small == sums[ground]
            total = total + small

        assert total == brute_Z_torus(model, 4)

    @pytest.mark.parametrize("model", [hardcore_contour_model(), potts_contour_model(2)])
    def test_approximation_up_to_big_term(self, model):
        """Test torus_approx_Z against brute force once the exact large-contour ratio is allowed for."""
        z = 0.01
        epsilon = 0.05

        result = torus_approx_Z(model, 4, z, epsilon, floor_constant=1.0, exact_big=True)
        exact = float(brute_Z_torus(model, 4).evaluate(Fraction(z)))

        assert result.dropped_big_term
        assert result.big_term_exact == pytest.approx(float(torus_Z_big_exact(model, 4).evaluate(Fraction(z))))
        slack = math.log(1 + result.big_term_exact / result.value)
        assert abs(math.log(result.value / exact)) <= epsilon + slack


class TestKPBoundary:
    """Truncated KP check on the 4-regular torus host."""

    def test_boundary(self):
        """Test equality at z = 1/(5e) and failure at 1.5/(5e)."""
        model = hardcore_polymer_model(Region.full_torus(4, 2))

        at_boundary = model.kp_certificate(1 / (5 * math.e), 1)
        beyond = model.kp_certificate(1.5 / (5 * math.e), 1)

        assert at_boundary.holds_truncated
        assert abs(at_boundary.worst_margin) <= 1e-12
        assert not beyond.holds_truncated
