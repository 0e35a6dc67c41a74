"""
Unit tests for polymer models.
"""

import math

import networkx as nx
import pytest

from pirogov.core.exceptions import ConfigurationError
from pirogov.models.lattice import Region
from pirogov.models.polymer import Polymer, hardcore_polymer_model, ising_polymer_model
from pirogov.models.series import EXACT, FLOAT


class TestPolymer:
    """Test suite for the Polymer value."""

    def test_support_is_sorted_with_spins(self):
        """Test that the canonical id sorts the support and carries spins along."""
        polymer = Polymer((3, 1, 2), ("c", "a", "b"))

        assert polymer.support == (1, 2, 3)
        assert polymer.spins == ("a", "b", "c")

    def test_equal_polymers_hash_equal(self):
        """Test that equal ids compare and hash equal."""
        assert Polymer((2, 1), (1, 1)) == Polymer((1, 2), (1, 1))
        assert len({Polymer((2, 1), (1, 1)), Polymer((1, 2), (1, 1))}) == 1


class TestHardcorePolymerModel:
    """Test suite for the low-fugacity hard-core model."""

    def test_default_delta(self):
        """Test that delta defaults to 1/(e(D+1))."""
        model = hardcore_polymer_model(nx.cycle_graph(5))

        assert model.delta == pytest.approx(1 / (math.e * 3))
        assert model.rho == 1.0
        assert model.degree_bound == 1

    def test_polymers_are_singletons(self):
        """Test that polymers are single vertices with weight z."""
        model = hardcore_polymer_model(nx.path_graph(3))

        polymers = model.list_polymers(3)

        assert [p.support for p in polymers] == [(0,), (1,), (2,)]
        assert model.weight(polymers[0], 2).coeffs == (0, 1, 0)
        assert model.backend == EXACT

    def test_compatibility_is_graph_distance(self):
        """Test that adjacent singletons are incompatible and distant ones compatible."""
        model = hardcore_polymer_model(nx.path_graph(3))
        a, b, c = model.list_polymers(1)

        assert not model.compatible(a, b)
        assert model.compatible(a, c)
        assert [p.support for p in model.incompatible_with(b, 1)] == [(0,), (1,), (2,)]

    def test_region_host(self):
        """Test that a Region host becomes its nearest-neighbour graph."""
        model = hardcore_polymer_model(Region.box((2, 2)))

        assert model.size == 4
        assert model.max_degree == 2
        assert model.degree_of_partition_function == 4

    def test_empty_host_rejected(self):
        """Test that an empty host graph is rejected."""
        with pytest.raises(ConfigurationError):
            hardcore_polymer_model(nx.Graph())

    def test_restrict_narrows_membership(self):
        """Test that a sub-family view keeps only accepted polymers."""
        model = hardcore_polymer_model(nx.path_graph(4))

        restricted = model.restrict(lambda p: p.support[0] % 2 == 0)

        assert [p.support for p in restricted.list_polymers(1)] == [(0,), (2,)]
        assert len(model.list_polymers(1)) == 4


class TestIsingPolymerModel:
    """Test suite for the Ising model with external field."""

    def test_polymers_are_connected_sets(self):
        """Test that every connected vertex set of P3 is a polymer."""
        model = ising_polymer_model(nx.path_graph(3), beta=1.0)

        supports = [p.support for p in model.list_polymers(3)]

        assert supports == [(0,), (1,), (2,), (0, 1), (1, 2), (0, 1, 2)]

    def test_weight_uses_edge_boundary(self):
        """Test that w = z^(2|S|) exp(-2 beta |boundary S|)."""
        model = ising_polymer_model(nx.path_graph(3), beta=0.5)
        middle = Polymer((1,), (1,))

        assert model.edge_boundary(middle.support) == 2
        assert model.weight_value(middle, 0.3) == pytest.approx(0.09 * math.exp(-2.0))
        series = model.weight(middle, 3)
        assert series.backend == FLOAT
        assert series.coeffs[2] == pytest.approx(math.exp(-2.0))

    def test_min_order_is_twice_size(self):
        """Test the decay constant rho = 2."""
        model = ising_polymer_model(nx.path_graph(3), beta=1.0)

        assert model.min_order(Polymer((0, 1), (1, 1))) == 4

    def test_beta_must_be_positive(self):
        """Test that beta <= 0 is rejected."""
        with pytest.raises(ConfigurationError):
            ising_polymer_model(nx.path_graph(2), beta=0.0)


class TestKPCertificate:
    """Test suite for the truncated Kotecky-Preiss check."""

    def test_boundary_activity_has_zero_margin(self):
        """Test that singletons on a 4-regular host have margin 0 at z = 1/(5e)."""
        model = hardcore_polymer_model(Region.full_torus(4, 2))

        certificate = model.kp_certificate(1 / (5 * math.e), 1)

        assert certificate.holds_truncated
        assert abs(certificate.worst_margin) <= 1e-12
        assert certificate.truncated_at == 1
        assert len(certificate.margins) == 16

    def test_fails_above_boundary(self):
        """Test that the check fails at z = 1.5/(5e)."""
        model = hardcore_polymer_model(Region.full_torus(4, 2))

        assert not model.kp_certificate(1.5 / (5 * math.e), 1).holds_truncated

    def test_negative_activity_rejected(self):
        """Test that the certificate needs z >= 0."""
        with pytest.raises(ConfigurationError):
            hardcore_polymer_model(nx.path_graph(2)).kp_certificate(-0.1, 1)
