"""
Unit tests for truncated power series and the Newton identities.
"""

from fractions import Fraction

import pytest

from pirogov.core.exceptions import BackendMismatchError, OrderMismatchError, SeriesError
from pirogov.models.series import (
    EXACT,
    FLOAT,
    TruncatedSeries,
    log_from_poly,
    poly_from_log,
    product,
)
from pirogov.schemas.series import SeriesPayload, format_fraction


def exact(*coeffs):
    return TruncatedSeries(len(coeffs) - 1, tuple(Fraction(c) for c in coeffs), EXACT)


class TestTruncatedSeries:
    """Test suite for series arithmetic."""

    def test_coefficient_count_must_match_order(self):
        """Test that order m needs exactly m+1 coefficients."""
        with pytest.raises(SeriesError):
            TruncatedSeries(2, (1, 2), EXACT)

    def test_exact_backend_rejects_floats(self):
        """Test that the exact backend refuses float coefficients."""
        with pytest.raises(SeriesError):
            TruncatedSeries(1, (1, 0.5), EXACT)

    def test_multiplication_truncates(self):
        """Test that (1 + z)^2 truncated at order 1 is 1 + 2z."""
        one_plus_z = exact(1, 1)

        assert one_plus_z * one_plus_z == exact(1, 2)

    def test_power_and_product_agree(self):
        """Test that power(3) equals a three-fold product."""
        s = exact(1, 1, 0, 0)

        assert s.power(3) == product([s, s, s], 3) == exact(1, 3, 3, 1)

    def test_inverse(self):
        """Test that 1/(1 - z) = 1 + z + z^2 + ..."""
        assert exact(1, -1, 0, 0).inverse() == exact(1, 1, 1, 1)

    def test_inverse_needs_constant_term(self):
        """Test that a series without constant term has no inverse."""
        with pytest.raises(SeriesError):
            exact(0, 1).inverse()

    def test_mixed_backends_rejected(self):
        """Test that exact and float series cannot be combined."""
        with pytest.raises(BackendMismatchError):
            exact(1, 1) + exact(1, 1).to_float()

    def test_mixed_orders_rejected(self):
        """Test that series of different orders cannot be combined."""
        with pytest.raises(OrderMismatchError):
            exact(1, 1) * exact(1, 1, 1)

    def test_evaluate_exact(self):
        """Test Horner evaluation at a rational point."""
        assert exact(1, 3, 1).evaluate(Fraction(1, 2)) == Fraction(11, 4)

    def test_from_coefficients_pads_and_truncates(self):
        """Test zero padding and truncation of a known polynomial."""
        assert TruncatedSeries.from_coefficients([1, 2], 3) == exact(1, 2, 0, 0)
        assert TruncatedSeries.from_coefficients([1, 2, 3, 4], 1) == exact(1, 2)

    def test_lowest_order(self):
        """Test the index of the first non-zero coefficient."""
        assert exact(0, 0, 5).lowest_order() == 2
        assert TruncatedSeries.zero(3).lowest_order() == 4

    def test_truncate_cannot_extend(self):
        """Test that truncation only shortens."""
        with pytest.raises(OrderMismatchError):
            exact(1, 1).truncate(3)

    def test_close_to_float(self):
        """Test relative closeness of float series."""
        a = TruncatedSeries(1, (1.0, 2.0), FLOAT)
        b = TruncatedSeries(1, (1.0, 2.0 + 1e-12), FLOAT)

        assert a.close_to(b)
        assert not a.close_to(TruncatedSeries(1, (1.0, 2.1), FLOAT))


class TestNewtonIdentities:
    """Test suite for log_from_poly and poly_from_log."""

    def test_log_of_one_plus_z(self):
        """Test that log(1 + z) = z - z^2/2 + z^3/3."""
        assert log_from_poly(exact(1, 1, 0, 0)) == exact(0, 1, Fraction(-1, 2), Fraction(1, 3))

    def test_log_of_independence_polynomial_of_k2(self):
        """Test that log(1 + 2z) = 2z - 2z^2 + 8z^3/3."""
        assert log_from_poly(exact(1, 2, 0, 0)) == exact(0, 2, -2, Fraction(8, 3))

    def test_round_trip_exact(self):
        """Test that exponentiating the log gives back the polynomial exactly."""
        polynomial = exact(1, Fraction(3, 2), -4, Fraction(2, 7), 9, 0, Fraction(-1, 3))

        assert poly_from_log(log_from_poly(polynomial)) == polynomial

    def test_round_trip_float(self):
        """Test the round trip on the float backend within tolerance."""
        polynomial = TruncatedSeries(3, (1.0, 0.3, -0.2, 0.05), FLOAT)

        assert poly_from_log(log_from_poly(polynomial)).close_to(polynomial, rel_tol=1e-12)

    def test_log_needs_unit_constant(self):
        """Test that log_from_poly requires e_0 = 1."""
        with pytest.raises(SeriesError):
            log_from_poly(exact(2, 1))

    def test_exp_needs_zero_constant(self):
        """Test that poly_from_log requires p_0 = 0."""
        with pytest.raises(SeriesError):
            poly_from_log(exact(1, 1))


class TestSeriesPayload:
    """Test suite for the series JSON schema."""

    def test_exact_payload_uses_rational_strings(self):
        """Test that exact coefficients are written as num/den strings."""
        payload = SeriesPayload.from_series(exact(1, Fraction(-1, 2), 3))

        assert payload.coeffs == ["1", "-1/2", "3"]
        assert payload.to_series() == exact(1, Fraction(-1, 2), 3)

    def test_mixed_coefficients_rejected(self):
        """Test that rational strings and floats cannot be mixed."""
        with pytest.raises(ValueError):
            SeriesPayload(order=1, coeffs=["1", 0.5])

    def test_length_must_match_order(self):
        """Test that the payload length follows the order."""
        with pytest.raises(ValueError):
            SeriesPayload(order=2, coeffs=["1"])

    def test_format_fraction(self):
        """Test integer and proper fraction formatting."""
        assert format_fraction(Fraction(4, 2)) == "2"
        assert format_fraction(Fraction(-3, 9)) == "-1/3"
