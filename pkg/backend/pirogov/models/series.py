"""
Truncated power series in z.

A TruncatedSeries holds c_0..c_m with an explicit truncation order m and
a backend tag: "exact" (Fraction coefficients) or "float". Arithmetic
between series of different orders or backends is rejected.

The Newton identities connect a polynomial Z = sum e_k z^k (e_0 = 1) with
its logarithm log Z = sum p_k z^k through k e_k = sum_{j=1..k} j p_j e_{k-j},
which follows from Z' = Z (log Z)'.
"""

from dataclasses import dataclass
from fractions import Fraction
from numbers import Number
from typing import Iterable, List, Sequence, Tuple, Union

from pirogov.core.exceptions import BackendMismatchError, OrderMismatchError, SeriesError

EXACT = "exact"
FLOAT = "float"

Scalar = Union[Fraction, float, complex, int]


def _coerce(value, backend: str):
    if backend == EXACT:
        if isinstance(value, Fraction):
            return value
        if isinstance(value, int):
            return Fraction(value)
        if isinstance(value, str):
            return Fraction(value)
        raise SeriesError(f"exact backend needs rational coefficients, got {value!r}")
    if isinstance(value, complex):
        return value
    return float(value)


@dataclass(frozen=True)
class TruncatedSeries:
    """
    Coefficients c_0..c_m of a formal power series truncated at order m.

    Args:
        order: Truncation order m
        coeffs: Exactly m+1 coefficients
        backend: "exact" or "float"
        tolerance: Comparison tolerance for the float backend

    Raises:
        SeriesError: If the coefficient count does not match the order
    """

    order: int
    coeffs: Tuple[Scalar, ...]
    backend: str = EXACT
    tolerance: float = 1e-12

    def __post_init__(self):
        if self.order < 0:
            raise SeriesError("order must be non-negative")
        if self.backend not in (EXACT, FLOAT):
            raise SeriesError(f"unknown backend {self.backend!r}")
        coeffs = tuple(_coerce(c, self.backend) for c in self.coeffs)
        if len(coeffs) != self.order + 1:
            raise SeriesError(f"order {self.order} needs {self.order + 1} coefficients, got {len(coeffs)}")
        object.__setattr__(self, "coeffs", coeffs)

    # ---- constructors ----------------------------------------------------

    @classmethod
    def zero(cls, order: int, backend: str = EXACT) -> "TruncatedSeries":
        return cls(order, (0,) * (order + 1), backend)

    @classmethod
    def one(cls, order: int, backend: str = EXACT) -> "TruncatedSeries":
        return cls.monomial(0, order, 1, backend)

    @classmethod
    def monomial(cls, power: int, order: int, coefficient: Scalar = 1, backend: str = EXACT) -> "TruncatedSeries":
        """coefficient * z^power truncated at ``order`` (zero series when power > order)."""
        coeffs = [0] * (order + 1)
        if 0 <= power <= order:
            coeffs[power] = coefficient
        return cls(order, tuple(coeffs), backend)

    @classmethod
    def from_coefficients(cls, values: Sequence[Scalar], order: int, backend: str = EXACT) -> "TruncatedSeries":
        """Truncate or zero-pad a coefficient list (known polynomial) to ``order``."""
        padded = list(values[: order + 1]) + [0] * max(0, order + 1 - len(values))
        return cls(order, tuple(padded), backend)

    # ---- helpers -----------------------------------------------------------

    @property
    def _zero(self):
        return Fraction(0) if self.backend == EXACT else 0.0

    def _check(self, other: "TruncatedSeries") -> None:
        if self.backend != other.backend:
            raise BackendMismatchError(f"cannot combine {self.backend} and {other.backend} series")
        if self.order != other.order:
            raise OrderMismatchError(f"cannot combine orders {self.order} and {other.order}")

    def coefficient(self, k: int) -> Scalar:
        return self.coeffs[k] if 0 <= k <= self.order else self._zero

    def nonzero(self) -> List[Tuple[int, Scalar]]:
        return [(k, c) for k, c in enumerate(self.coeffs) if c != 0]

    def is_zero(self) -> bool:
        return all(c == 0 for c in self.coeffs)

    def lowest_order(self) -> int:
        """Index of the first non-zero coefficient (order + 1 for the zero series)."""
        for k, c in enumerate(self.coeffs):
            if c != 0:
                return k
        return self.order + 1

    def truncate(self, order: int) -> "TruncatedSeries":
        if order > self.order:
            raise OrderMismatchError(f"cannot extend a series of order {self.order} to {order}")
        return TruncatedSeries(order, self.coeffs[: order + 1], self.backend, self.tolerance)

    def to_float(self) -> "TruncatedSeries":
        if self.backend == FLOAT:
            return self
        return TruncatedSeries(self.order, tuple(float(c) for c in self.coeffs), FLOAT)

    def close_to(self, other: "TruncatedSeries", rel_tol: float = 1e-9, abs_tol: float = 1e-12) -> bool:
        if self.order != other.order:
            return False
        for a, b in zip(self.coeffs, other.coeffs):
            if abs(complex(a) - complex(b)) > max(abs_tol, rel_tol * max(abs(complex(a)), abs(complex(b)))):
                return False
        return True

    # ---- arithmetic ------------------------------------------------------

    def __add__(self, other: "TruncatedSeries") -> "TruncatedSeries":
        self._check(other)
        return TruncatedSeries(
            self.order, tuple(a + b for a, b in zip(self.coeffs, other.coeffs)), self.backend, self.tolerance
        )

    def __sub__(self, other: "TruncatedSeries") -> "TruncatedSeries":
        self._check(other)
        return TruncatedSeries(
            self.order, tuple(a - b for a, b in zip(self.coeffs, other.coeffs)), self.backend, self.tolerance
        )

    def __neg__(self) -> "TruncatedSeries":
        return self.scale(-1)

    def scale(self, factor: Scalar) -> "TruncatedSeries":
        return TruncatedSeries(self.order, tuple(c * factor for c in self.coeffs), self.backend, self.tolerance)

    def __mul__(self, other: "TruncatedSeries") -> "TruncatedSeries":
        return mul(self, other)

    def power(self, exponent: int) -> "TruncatedSeries":
        result = TruncatedSeries.one(self.order, self.backend)
        for _ in range(exponent):
            result = mul(result, self)
        return result

    def inverse(self) -> "TruncatedSeries":
        """Multiplicative inverse up to order m; needs c_0 != 0."""
        c0 = self.coeffs[0]
        if c0 == 0:
            raise SeriesError("series with zero constant term has no inverse")
        out = [self._zero] * (self.order + 1)
        out[0] = 1 / c0 if self.backend == FLOAT else Fraction(1) / c0
        for k in range(1, self.order + 1):
            acc = sum((self.coeffs[j] * out[k - j] for j in range(1, k + 1)), self._zero)
            out[k] = -acc / c0
        return TruncatedSeries(self.order, tuple(out), self.backend, self.tolerance)

    def evaluate(self, z: Scalar) -> Scalar:
        """Horner evaluation of sum c_k z^k."""
        total = self._zero
        for c in reversed(self.coeffs):
            total = total * z + c
        return total

    def log(self) -> "TruncatedSeries":
        return log_from_poly(self)

    def exp(self) -> "TruncatedSeries":
        return poly_from_log(self)

    def __repr__(self) -> str:
        return f"TruncatedSeries(order={self.order}, backend={self.backend}, coeffs={list(self.coeffs)})"


def mul(a: TruncatedSeries, b: TruncatedSeries) -> TruncatedSeries:
    """Cauchy product truncated at the common order."""
    a._check(b)
    m = a.order
    out = [a._zero] * (m + 1)
    right = b.nonzero()
    for i, x in a.nonzero():
        for j, y in right:
            if i + j > m:
                break
            out[i + j] += x * y
    return TruncatedSeries(m, tuple(out), a.backend, a.tolerance)


def product(factors: Iterable[TruncatedSeries], order: int, backend: str = EXACT) -> TruncatedSeries:
    result = TruncatedSeries.one(order, backend)
    for factor in factors:
        result = mul(result, factor)
    return result


def _is_one(value, series: TruncatedSeries) -> bool:
    if series.backend == EXACT:
        return value == 1
    return abs(value - 1) <= series.tolerance


def log_from_poly(e: TruncatedSeries) -> TruncatedSeries:
    """
    Log-coefficients p_1..p_m of a series with e_0 = 1.

    Raises:
        SeriesError: If e_0 is not 1
    """
    if not _is_one(e.coeffs[0], e):
        raise SeriesError(f"log_from_poly needs constant term 1, got {e.coeffs[0]}")
    m = e.order
    zero = e._zero
    p = [zero] * (m + 1)
    for k in range(1, m + 1):
        acc = sum((j * p[j] * e.coeffs[k - j] for j in range(1, k)), zero)
        p[k] = e.coeffs[k] - acc / k
    return TruncatedSeries(m, tuple(p), e.backend, e.tolerance)


def poly_from_log(p: TruncatedSeries) -> TruncatedSeries:
    """
    Exponentiate log-coefficients back to e_0..e_m.

    Raises:
        SeriesError: If p_0 is not 0
    """
    if p.coeffs[0] != 0 and not (p.backend == FLOAT and abs(p.coeffs[0]) <= p.tolerance):
        raise SeriesError(f"poly_from_log needs constant term 0, got {p.coeffs[0]}")
    m = p.order
    zero = p._zero
    e = [zero] * (m + 1)
    e[0] = Fraction(1) if p.backend == EXACT else 1.0
    for k in range(1, m + 1):
        acc = sum((j * p.coeffs[j] * e[k - j] for j in range(1, k + 1)), zero)
        e[k] = acc / k
    return TruncatedSeries(m, tuple(e), p.backend, p.tolerance)


def evaluate(series: TruncatedSeries, z: Scalar) -> Scalar:
    return series.evaluate(z)


def as_number(value: Scalar) -> Number:
    """Plain float (or complex) view of a coefficient or evaluation result."""
    if isinstance(value, complex):
        return value
    return float(value)
