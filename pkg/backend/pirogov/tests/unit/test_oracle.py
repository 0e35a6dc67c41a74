"""
Unit tests for the brute-force oracles, exact distributions and TV distance.
"""

from fractions import Fraction

import networkx as nx
import pytest

from pirogov.core.config import clear_settings_cache
from pirogov.core.exceptions import BoundaryConditionError, CapExceededError, ConfigurationError
from pirogov.models.contour import potts_contour_model
from pirogov.models.lattice import Region
from pirogov.models.polymer import hardcore_polymer_model
from pirogov.models.series import TruncatedSeries
from pirogov.services.oracle_service import (
    ExactDistribution,
    OracleCache,
    brute_Z_contour_region,
    brute_Z_hardcore,
    brute_Z_hardcore_region,
    brute_Z_ising,
    brute_Z_potts,
    brute_ising_counts,
    brute_matching_sets,
    compatible_families,
    evaluate_ising_counts,
    exact_gibbs_distribution,
    exact_polymer_distribution,
    ising_count_rows,
    tv_distance,
)
from pirogov.services.torus_service import torus_polynomial_small


class TestPartitionOracles:
    """Test suite for exhaustive partition functions."""

    def test_hardcore_edge(self):
        """Test Z(K2) = 1 + 2z."""
        assert brute_Z_hardcore(nx.path_graph(2)) == TruncatedSeries.from_coefficients([1, 2, 0], 2)

    def test_hardcore_square(self):
        """Test Z(C4) = 1 + 4z + 2z^2."""
        assert brute_Z_hardcore(nx.cycle_graph(4)) == TruncatedSeries.from_coefficients([1, 4, 2, 0, 0], 4)

    def test_ising_single_edge(self):
        """Test Z = 1 + 2 z^2 e^(-2 beta) + z^4 on one edge."""
        series = brute_Z_ising(nx.path_graph(2), 0.5)

        assert series.coeffs[0] == pytest.approx(1.0)
        assert series.coeffs[2] == pytest.approx(2 * 0.36787944117144233)
        assert series.coeffs[4] == pytest.approx(1.0)

    def test_ising_counts_are_integers(self):
        """Test that the Ising enumeration is an exact integer table behind the float series."""
        counts = brute_ising_counts(nx.path_graph(2))

        assert counts == {(0, 0): 1, (2, 1): 2, (4, 0): 1}
        assert ising_count_rows(counts) == [[0, 0, 1], [2, 1, 2], [4, 0, 1]]
        assert all(isinstance(n, int) for n in counts.values())

    def test_ising_counts_on_square(self):
        """Test the boundary counts of the 4-cycle: 16 sets split by cut size."""
        counts = brute_ising_counts(nx.cycle_graph(4))

        assert sum(counts.values()) == 16
        assert counts[(4, 4)] == 2
        assert counts[(4, 2)] == 4
        assert counts[(2, 2)] == 4

    def test_ising_series_evaluates_the_count_table(self):
        """Test that the float series is the count table evaluated at beta."""
        graph = nx.path_graph(3)
        counts = brute_ising_counts(graph)

        assert evaluate_ising_counts(counts, 0.5, 6).coeffs == brute_Z_ising(graph, 0.5).coeffs

    def test_potts_free_pair(self):
        """Test that two free q = 2 spins on one edge give 2 + 2z."""
        series = brute_Z_potts(Region.box((1, 2)), 2)

        assert series == TruncatedSeries.from_coefficients([2, 2], 1)

    def test_potts_padded_box(self, box5):
        """Test that the padded 5x5 box gives 1 + z^4 over its 40 edges."""
        series = brute_Z_potts(box5, 2, boundary=0)

        assert series.order == 40
        assert series == TruncatedSeries.from_coefficients([1, 0, 0, 0, 1], 40)
        assert series == brute_Z_contour_region(potts_contour_model(2), box5, 0)

    def test_potts_bad_boundary(self, box5):
        """Test that a boundary colour outside 0..q-1 is rejected."""
        with pytest.raises(BoundaryConditionError):
            brute_Z_potts(box5, 2, boundary=3)

    def test_hardcore_region_matches_generic(self, box6):
        """Test the padded hard-core oracle against the model-generic one."""
        from pirogov.models.contour import hardcore_contour_model

        assert brute_Z_hardcore_region(box6, "even") == brute_Z_contour_region(hardcore_contour_model(), box6, "even")

    def test_hardcore_region_bad_boundary(self, box6):
        """Test that only even and odd are boundaries."""
        with pytest.raises(BoundaryConditionError):
            brute_Z_hardcore_region(box6, "diagonal")

    def test_cap_exceeded(self, monkeypatch):
        """Test that enumerations above PIROGOV_ORACLE_STATE_CAP are refused."""
        monkeypatch.setenv("PIROGOV_ORACLE_STATE_CAP", "8")
        clear_settings_cache()

        with pytest.raises(CapExceededError):
            brute_Z_hardcore(nx.path_graph(4))

    def test_matching_sets_on_t6(self):
        """Test that direct family enumeration agrees with the cluster route on T_6."""
        model = potts_contour_model(2)

        direct = brute_matching_sets(model, 6, 0, 8)

        assert direct == torus_polynomial_small(model, 6, 0, 8)
        assert direct == TruncatedSeries.from_coefficients([1, 0, 0, 0, 36], 8)


class TestExactDistributions:
    """Test suite for exact laws."""

    def test_from_weights_normalises(self):
        """Test that weights are divided by their total and zeros dropped."""
        law = ExactDistribution.from_weights({"a": Fraction(1), "b": Fraction(3), "c": Fraction(0)})

        assert law.as_dict() == {"a": Fraction(1, 4), "b": Fraction(3, 4)}
        assert law.probability("c") == 0
        assert len(law) == 2

    def test_unnormalised_outcomes_rejected(self):
        """Test that probabilities must sum to exactly 1."""
        with pytest.raises(ConfigurationError):
            ExactDistribution((("a", Fraction(1, 2)),))

    def test_compatible_families_of_path(self):
        """Test that P3 has five independent sets, the empty one first."""
        edges = {(0, 1), (1, 0), (1, 2), (2, 1)}

        families = list(compatible_families([0, 1, 2], lambda i, j: (i, j) in edges))

        assert families[0] == ()
        assert sorted(families) == [(), (0,), (0, 2), (1,), (2,)]

    def test_polymer_law_on_edge(self):
        """Test mu_G on K2 at z = 1: three families with 1/3 each."""
        law = exact_polymer_distribution(hardcore_polymer_model(nx.path_graph(2)), 1)

        assert sorted(law.as_dict().values()) == [Fraction(1, 3)] * 3

    def test_gibbs_law_on_padded_box(self, box5):
        """Test that the single free spin flips with probability z^4/(1+z^4)."""
        law = exact_gibbs_distribution(potts_contour_model(2), box5, 0, Fraction(1, 2))

        assert sorted(law.as_dict().values()) == [Fraction(1, 17), Fraction(16, 17)]


class TestTotalVariation:
    """Test suite for empirical TV distance."""

    def test_identical(self):
        """Test that matching frequencies give distance 0."""
        law = ExactDistribution.from_weights({"a": Fraction(1), "b": Fraction(1)})

        assert tv_distance(law, {"a": 50, "b": 50}).distance == pytest.approx(0.0)

    def test_disjoint_support(self):
        """Test that disjoint supports give distance 1."""
        law = ExactDistribution.from_weights({"a": Fraction(1)})

        result = tv_distance(law, {"b": 10})

        assert result.distance == pytest.approx(1.0)
        assert result.radius == pytest.approx(0.0)

    def test_skewed_counts(self):
        """Test (1/2, 1/2) against counts (600, 400)."""
        law = ExactDistribution.from_weights({"a": Fraction(1), "b": Fraction(1)})

        result = tv_distance(law, {"a": 600, "b": 400})

        assert result.distance == pytest.approx(0.1)
        assert result.samples == 1000
        assert result.radius == pytest.approx(0.5 * 4 * 2 * (0.25 / 1000) ** 0.5)
        assert result.within(0.1)

    def test_needs_samples(self):
        """Test that an empty count table is rejected."""
        law = ExactDistribution.from_weights({"a": Fraction(1)})

        with pytest.raises(ConfigurationError):
            tv_distance(law, {})


class TestOracleCache:
    """Test suite for the disk cache."""

    def test_disabled_without_directory(self):
        """Test that no cache directory means no caching."""
        cache = OracleCache()

        assert not cache.enabled
        assert cache.get("hardcore", {"n": 1}) is None

    def test_round_trip(self, tmp_path):
        """Test that stored results are read back by the same request."""
        cache = OracleCache(tmp_path / "cache")

        cache.put("hardcore", {"n": 2}, ["1", "2"])

        assert cache.get("hardcore", {"n": 2}) == ["1", "2"]
        assert cache.get("hardcore", {"n": 3}) is None

    def test_series_computed_once(self, tmp_path, mocker):
        """Test that a cached series is not recomputed."""
        cache = OracleCache(tmp_path)
        value = TruncatedSeries.from_coefficients([Fraction(1), Fraction(1, 2)], 1)
        compute = mocker.Mock(return_value=value)

        first = cache.series("demo", {"k": 1}, compute)
        second = cache.series("demo", {"k": 1}, compute)

        assert first == second == value
        compute.assert_called_once()

    def test_digest_ignores_key_order(self):
        """Test that the digest is over canonical JSON."""
        assert OracleCache.digest("x", {"a": 1, "b": 2}) == OracleCache.digest("x", {"b": 2, "a": 1})

    def test_unreadable_file_ignored(self, tmp_path):
        """Test that a corrupt cache file is treated as a miss."""
        cache = OracleCache(tmp_path)
        cache.put("demo", {"k": 1}, [1])
        next(tmp_path.glob("demo-*.json")).write_text("{not json")

        assert cache.get("demo", {"k": 1}) is None

    def test_settings_directory_used(self, monkeypatch, tmp_path):
        """Test that PIROGOV_CACHE_DIR enables the cache for the oracles."""
        monkeypatch.setenv("PIROGOV_CACHE_DIR", str(tmp_path / "oracle"))
        clear_settings_cache()

        brute_Z_hardcore(nx.path_graph(3))

        assert OracleCache.from_settings().enabled
        assert len(list((tmp_path / "oracle").glob("hardcore-*.json"))) == 1
