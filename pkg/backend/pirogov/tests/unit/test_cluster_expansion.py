"""
Unit tests for cluster enumeration, the log engines and the truncated
Taylor approximation.
"""

import math
from fractions import Fraction

import networkx as nx
import pytest

from pirogov.core.config import Settings
from pirogov.core.exceptions import ConfigurationError, RegimeError
from pirogov.models.lattice import Region
from pirogov.models.polymer import hardcore_polymer_model, ising_polymer_model
from pirogov.models.series import TruncatedSeries, log_from_poly
from pirogov.services.cluster_expansion import (
    approx_Z,
    check_regime,
    choose_engine,
    cluster_log_series,
    enumerate_clusters,
    enumerate_system_clusters,
    log_partition,
    logZ_coefficients,
    logZ_subfamily,
    newton_log_series,
    partition_polynomial,
    polymer_system,
    rooted_trees,
    truncation_order,
)
from pirogov.services.oracle_service import brute_Z_hardcore, brute_Z_ising
from pirogov.tests.fixtures.sample_data import independence_goldens


class TestPolymerSystem:
    """Test suite for polymer systems built from models."""

    def test_neighbours_follow_compatibility(self):
        """Test that incompatibility is graph distance <= 1, self excluded."""
        system = polymer_system(hardcore_polymer_model(nx.path_graph(3)), 3)

        assert len(system) == 3
        assert system.neighbors[0] == frozenset({1})
        assert system.neighbors[1] == frozenset({0, 2})
        assert system.incompatible(0, 0)
        assert not system.incompatible(0, 2)

    def test_order_limits_polymer_size(self):
        """Test that Ising polymers above the order are dropped (rho = 2)."""
        system = polymer_system(ising_polymer_model(nx.path_graph(3), 1.0), 4)

        assert max(len(p.support) for p in system.items) == 2


class TestClusterEnumeration:
    """Test suite for cluster enumeration."""

    def test_single_vertex_clusters(self):
        """Test that one polymer gives clusters of multiplicity k with phi(K_k)/k!."""
        clusters = list(enumerate_clusters(hardcore_polymer_model(nx.path_graph(1)), 3))

        assert [(c.members, c.ursell, c.mult_factor) for c in clusters] == [
            (((0, 1),), 1, Fraction(1)),
            (((0, 2),), -1, Fraction(1, 2)),
            (((0, 3),), 2, Fraction(1, 6)),
        ]

    def test_growth_and_trees_agree(self):
        """Test that both enumeration methods produce the same clusters."""
        system = polymer_system(hardcore_polymer_model(Region.box((2, 3))), 5)

        growth = enumerate_system_clusters(system, "growth")
        trees = enumerate_system_clusters(system, "trees")

        assert [(c.members, c.ursell) for c in growth] == [(c.members, c.ursell) for c in trees]

    def test_clusters_are_connected(self):
        """Test that every cluster has a connected incompatibility graph."""
        system = polymer_system(hardcore_polymer_model(nx.cycle_graph(4)), 4)

        for cluster in enumerate_system_clusters(system):
            assert nx.is_connected(cluster.incompatibility_graph(system))
            assert cluster.total_order <= 4

    def test_unknown_method_rejected(self):
        """Test that an unknown cluster method is a configuration error."""
        system = polymer_system(hardcore_polymer_model(nx.path_graph(2)), 2)

        with pytest.raises(ConfigurationError):
            enumerate_system_clusters(system, "random")

    def test_order_cap_must_be_positive(self):
        """Test that order_cap < 1 is rejected."""
        with pytest.raises(ConfigurationError):
            enumerate_clusters(hardcore_polymer_model(nx.path_graph(2)), 0)

    @pytest.mark.parametrize("size,count", [(1, 1), (2, 1), (3, 2), (4, 4), (5, 9), (6, 20)])
    def test_rooted_tree_counts(self, size, count):
        """Test the number of rooted unlabelled trees per size."""
        assert len(list(rooted_trees(size))) == count


class TestLogEngines:
    """Test suite for the cluster and Newton engines."""

    @pytest.mark.parametrize("name,graph,coeffs", independence_goldens())
    def test_partition_polynomial_matches_golden(self, name, graph, coeffs):
        """Test compatible-family enumeration against known independence polynomials."""
        order = len(coeffs) - 1
        system = polymer_system(hardcore_polymer_model(graph), order)

        assert partition_polynomial(system) == TruncatedSeries.from_coefficients(
            [Fraction(c) for c in coeffs], order
        )

    @pytest.mark.parametrize("name,graph,coeffs", independence_goldens())
    def test_engines_agree_exactly(self, name, graph, coeffs):
        """Test that cluster and Newton engines give identical rational coefficients."""
        system = polymer_system(hardcore_polymer_model(graph), 5)

        assert cluster_log_series(system).series == newton_log_series(system).series

    def test_ising_engines_agree(self):
        """Test cluster vs Newton on the float backend."""
        model = ising_polymer_model(nx.path_graph(3), 0.7)
        system = polymer_system(model, 6)

        assert cluster_log_series(system).series.close_to(newton_log_series(system).series, rel_tol=1e-10)

    def test_full_order_rebuilds_oracle(self):
        """Test that full-order coefficients exponentiate to the independence polynomial."""
        graph = nx.cycle_graph(5)
        model = hardcore_polymer_model(graph)

        series = logZ_coefficients(model, model.degree_of_partition_function, "newton").series

        assert series == log_from_poly(brute_Z_hardcore(graph))

    def test_ising_log_matches_oracle(self):
        """Test Ising log-coefficients against the brute-force polynomial."""
        graph = nx.path_graph(4)
        model = ising_polymer_model(graph, 1.0)

        series = logZ_coefficients(model, 8, "cluster").series

        assert series.close_to(log_from_poly(brute_Z_ising(graph, 1.0)), rel_tol=1e-9)

    def test_subfamily(self):
        """Test that a sub-family of one vertex gives log(1 + z)."""
        model = hardcore_polymer_model(nx.path_graph(3))

        series = logZ_subfamily(model, lambda p: p.support == (0,), 3).series

        assert series == log_from_poly(TruncatedSeries.from_coefficients([1, 1], 3))

    def test_empty_system(self):
        """Test that an empty system has a zero log-partition function."""
        model = hardcore_polymer_model(nx.path_graph(2)).restrict(lambda p: False)

        result = log_partition(polymer_system(model, 3))

        assert result.engine == "empty"
        assert result.series.is_zero()

    def test_m_must_be_positive(self):
        """Test that m < 1 is rejected."""
        with pytest.raises(ConfigurationError):
            logZ_coefficients(hardcore_polymer_model(nx.path_graph(2)), 0)


class TestEngineSelection:
    """Test suite for the auto engine choice."""

    def test_auto_prefers_cluster_when_small(self):
        """Test that a tiny system uses the cluster engine."""
        system = polymer_system(hardcore_polymer_model(nx.path_graph(3)), 3)

        assert choose_engine(system, "auto", Settings()) == "cluster"

    def test_auto_falls_back_to_newton(self):
        """Test that the work limit switches auto to newton."""
        system = polymer_system(hardcore_polymer_model(Region.box((3, 3))), 6)

        assert choose_engine(system, "auto", Settings(cluster_work_limit=1)) == "newton"

    def test_explicit_engine_wins(self):
        """Test that an explicit engine is returned unchanged."""
        system = polymer_system(hardcore_polymer_model(nx.path_graph(3)), 3)

        assert choose_engine(system, "newton") == "newton"

    def test_unknown_engine_rejected(self):
        """Test that an unknown engine name is rejected."""
        system = polymer_system(hardcore_polymer_model(nx.path_graph(3)), 3)

        with pytest.raises(ConfigurationError):
            choose_engine(system, "quantum")


class TestTruncatedTaylor:
    """Test suite for the truncation order and approx_Z."""

    def test_truncation_order_formula(self):
        """Test m = ceil(log(N/eps) / (1 - |z|/delta))."""
        assert truncation_order(16, 0.05, 0.1, 0.01) == math.ceil(math.log(1600) / 0.5)

    def test_truncation_order_outside_disc(self):
        """Test that |z| >= delta is refused."""
        with pytest.raises(RegimeError):
            truncation_order(16, 0.1, 0.1, 0.01)

    def test_check_regime(self):
        """Test refusal without force and a warning path with force."""
        assert check_regime(0.01, 0.1, False) is False
        assert check_regime(0.2, 0.1, True) is True
        with pytest.raises(RegimeError):
            check_regime(0.2, 0.1, False)

    def test_approx_within_epsilon(self):
        """Test that approx_Z lands within e^(+-eps) of the oracle on a small grid."""
        grid = Region.box((3, 3))
        model = hardcore_polymer_model(grid)
        z = 0.05
        exact = float(brute_Z_hardcore(grid.to_graph()).evaluate(Fraction(z)))

        result = approx_Z(model, z, 0.01)

        assert abs(math.log(result.value / exact)) <= 0.01
        assert result.m_used == truncation_order(model.degree_of_partition_function, z, model.delta, 0.01)
        assert not result.forced

    def test_forced_run_uses_full_degree(self):
        """Test that force computes at m = C|G| and flags the artifact."""
        graph = nx.path_graph(3)
        model = hardcore_polymer_model(graph)
        z = 0.9

        result = approx_Z(model, z, 0.1, force=True)

        assert result.forced
        assert result.m_used == 3
        assert result.log_coeffs.order == 3

    def test_refuses_outside_disc(self):
        """Test that approx_Z raises RegimeError for |z| >= delta without force."""
        with pytest.raises(RegimeError):
            approx_Z(hardcore_polymer_model(nx.path_graph(3)), 0.9, 0.1)

    def test_m_override(self):
        """Test that an explicit m is honoured."""
        result = approx_Z(hardcore_polymer_model(nx.path_graph(3)), 0.01, 0.1, m_override=2)

        assert result.m_used == 2
        assert result.log_coeffs.order == 2

    def test_epsilon_must_be_positive(self):
        """Test that epsilon <= 0 is rejected."""
        with pytest.raises(ConfigurationError):
            approx_Z(hardcore_polymer_model(nx.path_graph(3)), 0.01, 0.0)
