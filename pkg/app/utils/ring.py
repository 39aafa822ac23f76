"""
Exact coefficient arithmetic: the theta weight, prime fields, dual numbers and
truncated power series.

Rationals are plain `fractions.Fraction`; everything here interoperates with it
through the usual operator protocol.
"""
import logging
import random
from fractions import Fraction
from typing import List, Optional, Sequence, Union

from sympy import isprime
from sympy.ntheory import sqrt_mod

from app.utils.errors import DivisionByZero, WorkbenchError

logger = logging.getLogger(__name__)

DEFAULT_PRIME = 2305843009213693951  # 2^61 - 1
MIN_PRIME = 2 ** 31

Scalar = Union[int, Fraction, "PrimeFieldElement"]


def theta(x: int) -> Fraction:
    """θ(x) = 1 for x > 0, 1/2 at 0, 0 for x < 0."""
    if x > 0:
        return Fraction(1)
    if x == 0:
        return Fraction(1, 2)
    return Fraction(0)


def sign(x: int) -> int:
    return (x > 0) - (x < 0)


class PrimeFieldElement:
    """An element of Z/pZ. Immutable."""

    __slots__ = ('value', 'modulus')

    def __init__(self, value: int, modulus: int):
        self.value = value % modulus
        self.modulus = modulus

    def _coerce(self, other):
        if isinstance(other, PrimeFieldElement):
            if other.modulus != self.modulus:
                raise WorkbenchError(f"mixed moduli {self.modulus} and {other.modulus}")
            return other.value
        if isinstance(other, int):
            return other % self.modulus
        if isinstance(other, Fraction):
            den = other.denominator % self.modulus
            if den == 0:
                raise DivisionByZero(f"denominator of {other} vanishes mod p", witness=str(other))
            return other.numerator * pow(den, -1, self.modulus) % self.modulus
        return NotImplemented

    def _wrap(self, value: int) -> 'PrimeFieldElement':
        return PrimeFieldElement(value, self.modulus)

    def __add__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        return self._wrap(self.value + o)

    __radd__ = __add__

    def __sub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        return self._wrap(self.value - o)

    def __rsub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        return self._wrap(o - self.value)

    def __mul__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        return self._wrap(self.value * o)

    __rmul__ = __mul__

    def inverse(self) -> 'PrimeFieldElement':
        if self.value == 0:
            raise DivisionByZero("inverse of zero in prime field", witness="0")
        return self._wrap(pow(self.value, -1, self.modulus))

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        if o == 0:
            raise DivisionByZero("division by zero in prime field", witness="0")
        return self._wrap(self.value * pow(o, -1, self.modulus))

    def __rtruediv__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        return self._wrap(o) / self

    def __neg__(self):
        return self._wrap(-self.value)

    def __pos__(self):
        return self

    def __pow__(self, exponent: int):
        if exponent < 0:
            return self.inverse() ** (-exponent)
        return self._wrap(pow(self.value, exponent, self.modulus))

    def __eq__(self, other):
        if isinstance(other, (PrimeFieldElement, int, Fraction)):
            try:
                return self.value == self._coerce(other)
            except DivisionByZero:
                return False
        return NotImplemented

    def __hash__(self):
        return hash((self.value, self.modulus))

    def __bool__(self):
        return self.value != 0

    def __int__(self):
        return self.value

    def signed(self) -> int:
        """Representative in (-p/2, p/2]."""
        return self.value if self.value <= self.modulus // 2 else self.value - self.modulus

    def __repr__(self):
        return f"{self.signed()} mod p"


class PrimeField:
    """The field Z/pZ for a prime p > 2^31."""

    def __init__(self, prime: int = DEFAULT_PRIME):
        if prime <= MIN_PRIME or not isprime(prime):
            raise WorkbenchError(f"modulus {prime} must be a prime above 2^31")
        self.prime = prime

    def __call__(self, value: Union[int, Fraction]) -> PrimeFieldElement:
        if isinstance(value, PrimeFieldElement):
            return value
        return PrimeFieldElement(0, self.prime) + value

    @property
    def zero(self) -> PrimeFieldElement:
        return PrimeFieldElement(0, self.prime)

    @property
    def one(self) -> PrimeFieldElement:
        return PrimeFieldElement(1, self.prime)

    def random_element(self, rng: random.Random, nonzero: bool = True) -> PrimeFieldElement:
        low = 1 if nonzero else 0
        return PrimeFieldElement(rng.randrange(low, self.prime), self.prime)

    def sqrt(self, x: PrimeFieldElement) -> Optional[PrimeFieldElement]:
        """A square root of x, or None if x is not a quadratic residue."""
        if not x:
            return self.zero
        root = sqrt_mod(x.value, self.prime)
        if root is None:
            return None
        return PrimeFieldElement(root, self.prime)

    def error_bound(self, degree: int) -> Fraction:
        """Schwartz-Zippel bound on the per-point false-pass probability."""
        return Fraction(degree, self.prime)

    def __eq__(self, other):
        return isinstance(other, PrimeField) and other.prime == self.prime

    def __hash__(self):
        return hash(self.prime)

    def __repr__(self):
        return f"PrimeField({self.prime})"


def lift_signed(value) -> Union[int, Fraction]:
    """Small-integer representative of a field value."""
    if isinstance(value, PrimeFieldElement):
        return value.signed()
    return value


class DualValue:
    """(value, derivative) pair with (a, a')(b, b') = (ab, a'b + ab')."""

    __slots__ = ('value', 'derivative')

    def __init__(self, value, derivative=0):
        self.value = value
        self.derivative = derivative

    @staticmethod
    def _split(other):
        if isinstance(other, DualValue):
            return other.value, other.derivative
        return other, 0

    def __add__(self, other):
        v, d = self._split(other)
        return DualValue(self.value + v, self.derivative + d)

    __radd__ = __add__

    def __sub__(self, other):
        v, d = self._split(other)
        return DualValue(self.value - v, self.derivative - d)

    def __rsub__(self, other):
        v, d = self._split(other)
        return DualValue(v - self.value, d - self.derivative)

    def __mul__(self, other):
        v, d = self._split(other)
        return DualValue(self.value * v, self.derivative * v + self.value * d)

    __rmul__ = __mul__

    def __truediv__(self, other):
        v, d = self._split(other)
        if not v:
            raise DivisionByZero("dual division by zero value", witness=repr(other))
        return DualValue(self.value / v, (self.derivative * v - self.value * d) / (v * v))

    def __rtruediv__(self, other):
        v, d = self._split(other)
        return DualValue(v, d) / self

    def __neg__(self):
        return DualValue(-self.value, -self.derivative)

    def __pow__(self, exponent: int):
        if exponent < 0:
            return DualValue(1) / (self ** (-exponent))
        if exponent == 0:
            return DualValue(1)
        return DualValue(self.value ** exponent,
                         exponent * self.value ** (exponent - 1) * self.derivative)

    def __eq__(self, other):
        v, d = self._split(other)
        return self.value == v and self.derivative == d

    def __hash__(self):
        return hash((self.value, self.derivative))

    def __bool__(self):
        return bool(self.value) or bool(self.derivative)

    def __repr__(self):
        return f"DualValue({self.value!r}, {self.derivative!r})"


class TruncatedSeries:
    """Power series in ħ truncated after ħ^order (ħ^(order+1) = 0)."""

    __slots__ = ('coefficients', 'order')

    def __init__(self, coefficients: Sequence, order: int = 2):
        coeffs: List = list(coefficients)[:order + 1]
        coeffs += [0] * (order + 1 - len(coeffs))
        self.coefficients = tuple(coeffs)
        self.order = order

    @classmethod
    def exp(cls, rate, order: int = 2) -> 'TruncatedSeries':
        """exp(rate·ħ) truncated."""
        coeffs = []
        term = Fraction(1)
        for k in range(order + 1):
            coeffs.append(term * rate ** k if k else Fraction(1))
            term = term / (k + 1)
        return cls(coeffs, order)

    def _lift(self, other) -> 'TruncatedSeries':
        if isinstance(other, TruncatedSeries):
            return other
        return TruncatedSeries([other], self.order)

    def __add__(self, other):
        o = self._lift(other)
        return TruncatedSeries([a + b for a, b in zip(self.coefficients, o.coefficients)], self.order)

    __radd__ = __add__

    def __sub__(self, other):
        o = self._lift(other)
        return TruncatedSeries([a - b for a, b in zip(self.coefficients, o.coefficients)], self.order)

    def __rsub__(self, other):
        return self._lift(other) - self

    def __neg__(self):
        return TruncatedSeries([-a for a in self.coefficients], self.order)

    def __mul__(self, other):
        o = self._lift(other)
        out = [0] * (self.order + 1)
        for i, a in enumerate(self.coefficients):
            if not a:
                continue
            for j in range(self.order + 1 - i):
                b = o.coefficients[j]
                if b:
                    out[i + j] = out[i + j] + a * b
        return TruncatedSeries(out, self.order)

    __rmul__ = __mul__

    def __pow__(self, exponent: int):
        if exponent < 0:
            return self.inverse() ** (-exponent)
        result = TruncatedSeries([1], self.order)
        for _ in range(exponent):
            result = result * self
        return result

    def inverse(self) -> 'TruncatedSeries':
        """Series inverse; the constant term must be a nonzero scalar."""
        c0 = self.coefficients[0]
        if not c0:
            raise DivisionByZero("series with zero constant term", witness=repr(self))
        inv = [Fraction(1) / c0 if isinstance(c0, (int, Fraction)) else 1 / c0]
        for n in range(1, self.order + 1):
            acc = 0
            for k in range(1, n + 1):
                acc = acc + self.coefficients[k] * inv[n - k]
            inv.append(-acc * inv[0])
        return TruncatedSeries(inv, self.order)

    def coefficient(self, k: int):
        return self.coefficients[k]

    def __eq__(self, other):
        o = self._lift(other)
        return all(a == b for a, b in zip(self.coefficients, o.coefficients))

    def __hash__(self):
        return hash(self.coefficients)

    def __bool__(self):
        return any(bool(a) for a in self.coefficients)

    def __repr__(self):
        return f"TruncatedSeries({list(self.coefficients)!r})"
