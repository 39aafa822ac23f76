"""
Sparse multivariate Laurent polynomials with exact coefficients.

A monomial is a tuple of (variable, exponent) pairs sorted by variable name
with no zero exponents; a polynomial maps monomials to nonzero coefficients.
Equal polynomials therefore have identical term dictionaries.
"""
import logging
from fractions import Fraction
from typing import Callable, Dict, Iterable, Mapping, Optional, Tuple, Union

from app.utils.errors import DivisionByZero, NotPolynomialError
from app.utils.ring import PrimeFieldElement

logger = logging.getLogger(__name__)

Monomial = Tuple[Tuple[str, int], ...]
ONE_MONOMIAL: Monomial = ()


def mono_mul(m1: Monomial, m2: Monomial) -> Monomial:
    if not m1:
        return m2
    if not m2:
        return m1
    merged = dict(m1)
    for var, exp in m2:
        merged[var] = merged.get(var, 0) + exp
    return tuple(sorted((v, e) for v, e in merged.items() if e))


def mono_str(m: Monomial) -> str:
    return '*'.join(v if e == 1 else f"{v}^{e}" for v, e in m)


def _as_coefficient(value):
    if isinstance(value, bool):
        value = int(value)
    if isinstance(value, int):
        return Fraction(value)
    return value


class SparsePoly:
    """Immutable sparse polynomial; exponents may be negative (Laurent)."""

    __slots__ = ('terms', '_hash')

    def __init__(self, terms: Optional[Mapping[Monomial, object]] = None):
        clean: Dict[Monomial, object] = {}
        if terms:
            for mono, coeff in terms.items():
                if coeff:
                    clean[mono] = _as_coefficient(coeff)
        self.terms = clean
        self._hash = None

    # constructors

    @classmethod
    def constant(cls, value) -> 'SparsePoly':
        return cls({ONE_MONOMIAL: value})

    @classmethod
    def variable(cls, name: str, exponent: int = 1) -> 'SparsePoly':
        return cls({((name, exponent),): 1})

    @classmethod
    def monomial(cls, mono: Monomial, coeff=1) -> 'SparsePoly':
        return cls({mono: coeff})

    @classmethod
    def zero(cls) -> 'SparsePoly':
        return cls()

    @classmethod
    def one(cls) -> 'SparsePoly':
        return cls.constant(1)

    @classmethod
    def coerce(cls, value) -> 'SparsePoly':
        if isinstance(value, SparsePoly):
            return value
        if isinstance(value, (int, Fraction, PrimeFieldElement)):
            return cls.constant(value)
        raise TypeError(f"cannot coerce {type(value).__name__} to SparsePoly")

    # inspection

    def is_zero(self) -> bool:
        return not self.terms

    def is_constant(self) -> bool:
        return not self.terms or (len(self.terms) == 1 and ONE_MONOMIAL in self.terms)

    def constant_value(self):
        return self.terms.get(ONE_MONOMIAL, Fraction(0))

    def is_monomial(self) -> bool:
        return len(self.terms) == 1

    def variables(self) -> frozenset:
        return frozenset(v for mono in self.terms for v, _ in mono)

    def degree(self) -> int:
        """Total degree (sum of exponents, Laurent exponents counted signed)."""
        if not self.terms:
            return 0
        return max(sum(e for _, e in mono) for mono in self.terms)

    def degree_in(self, var: str) -> int:
        """Largest exponent of var over all terms; negative for a pure Laurent tail."""
        return max((dict(m).get(var, 0) for m in self.terms), default=0)

    def min_degree_in(self, var: str) -> int:
        return min((dict(m).get(var, 0) for m in self.terms), default=0)

    def coefficients_in(self, var: str) -> Dict[int, 'SparsePoly']:
        """Split into {exponent of var: coefficient polynomial}."""
        parts: Dict[int, Dict[Monomial, object]] = {}
        for mono, coeff in self.terms.items():
            d = dict(mono)
            e = d.pop(var, 0)
            parts.setdefault(e, {})[tuple(sorted(d.items()))] = coeff
        return {e: SparsePoly(t) for e, t in parts.items()}

    def sorted_terms(self):
        return sorted(self.terms.items(), key=lambda item: item[0])

    # arithmetic

    def _other(self, other) -> Optional['SparsePoly']:
        if isinstance(other, SparsePoly):
            return other
        if isinstance(other, (int, Fraction, PrimeFieldElement)):
            return SparsePoly.constant(other)
        return None

    def __add__(self, other):
        o = self._other(other)
        if o is None:
            return NotImplemented
        if not o.terms:
            return self
        if not self.terms:
            return o
        out = dict(self.terms)
        for mono, coeff in o.terms.items():
            out[mono] = out[mono] + coeff if mono in out else coeff
        return SparsePoly(out)

    __radd__ = __add__

    def __neg__(self):
        return SparsePoly({m: -c for m, c in self.terms.items()})

    def __sub__(self, other):
        o = self._other(other)
        if o is None:
            return NotImplemented
        return self + (-o)

    def __rsub__(self, other):
        o = self._other(other)
        if o is None:
            return NotImplemented
        return o + (-self)

    def __mul__(self, other):
        o = self._other(other)
        if o is None:
            return NotImplemented
        if not self.terms or not o.terms:
            return SparsePoly()
        if o.is_constant():
            c = o.constant_value()
            return SparsePoly({m: v * c for m, v in self.terms.items()})
        if self.is_constant():
            c = self.constant_value()
            return SparsePoly({m: c * v for m, v in o.terms.items()})
        out: Dict[Monomial, object] = {}
        for m1, c1 in self.terms.items():
            for m2, c2 in o.terms.items():
                mono = mono_mul(m1, m2)
                prod = c1 * c2
                out[mono] = out[mono] + prod if mono in out else prod
        return SparsePoly(out)

    __rmul__ = __mul__

    def __truediv__(self, other):
        """Division by a scalar or by a monomial (Laurent) only."""
        o = self._other(other)
        if o is None:
            return NotImplemented
        if o.is_zero():
            raise DivisionByZero("division by the zero polynomial", witness=str(self))
        return self * o.monomial_inverse()

    def monomial_inverse(self) -> 'SparsePoly':
        if not self.is_monomial():
            raise NotPolynomialError(f"{self} is not a monomial; inverse is not polynomial")
        (mono, coeff), = self.terms.items()
        return SparsePoly({tuple((v, -e) for v, e in mono): Fraction(1) / coeff
                           if isinstance(coeff, Fraction) else 1 / coeff})

    def __pow__(self, exponent: int):
        if exponent < 0:
            return self.monomial_inverse() ** (-exponent)
        result = SparsePoly.one()
        base = self
        while exponent:
            if exponent & 1:
                result = result * base
            exponent >>= 1
            if exponent:
                base = base * base
        return result

    def __eq__(self, other):
        o = self._other(other)
        if o is None:
            return NotImplemented
        return self.terms == o.terms

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(frozenset(self.terms.items()))
        return self._hash

    def __bool__(self):
        return bool(self.terms)

    # calculus and substitution

    def partial(self, var: str) -> 'SparsePoly':
        out: Dict[Monomial, object] = {}
        for mono, coeff in self.terms.items():
            d = dict(mono)
            e = d.get(var, 0)
            if e == 0:
                continue
            if e == 1:
                del d[var]
            else:
                d[var] = e - 1
            key = tuple(sorted(d.items()))
            out[key] = out.get(key, 0) + coeff * e
        return SparsePoly(out)

    def evaluate(self, point: Mapping[str, object]):
        """Value at a point; negative exponents need invertible values."""
        total = 0
        powers: Dict[Tuple[str, int], object] = {}
        for mono, coeff in self.terms.items():
            value = coeff
            for var, exp in mono:
                key = (var, exp)
                if key not in powers:
                    base = point[var]
                    try:
                        powers[key] = base ** exp
                    except ZeroDivisionError:
                        raise DivisionByZero(f"{var} vanishes at the point", witness=f"{var}^{exp}")
                value = value * powers[key]
            total = total + value
        return total

    def substitute(self, mapping: Mapping[str, object]) -> 'SparsePoly':
        """Replace variables by polynomials or scalars."""
        if not self.terms:
            return self
        cache: Dict[Tuple[str, int], SparsePoly] = {}
        result = SparsePoly()
        acc: Dict[Monomial, object] = {}
        for mono, coeff in self.terms.items():
            kept = []
            factor = None
            for var, exp in mono:
                if var not in mapping:
                    kept.append((var, exp))
                    continue
                key = (var, exp)
                if key not in cache:
                    image = SparsePoly.coerce(mapping[var])
                    if exp < 0 and not image.is_monomial():
                        raise NotPolynomialError(f"negative power of {var} replaced by {image}")
                    cache[key] = image ** exp
                factor = cache[key] if factor is None else factor * cache[key]
            if factor is None:
                acc[mono] = acc.get(mono, 0) + coeff
            else:
                result = result + factor * SparsePoly({tuple(kept): coeff})
        return result + SparsePoly(acc)

    def rename(self, mapping: Mapping[str, str]) -> 'SparsePoly':
        out: Dict[Monomial, object] = {}
        for mono, coeff in self.terms.items():
            merged: Dict[str, int] = {}
            for v, e in mono:
                name = mapping.get(v, v)
                merged[name] = merged.get(name, 0) + e
            key = tuple(sorted((v, e) for v, e in merged.items() if e))
            out[key] = out.get(key, 0) + coeff
        return SparsePoly(out)

    def invert_variable(self, var: str) -> 'SparsePoly':
        """x -> x^{-1} for a Laurent variable."""
        out = {}
        for mono, coeff in self.terms.items():
            key = tuple((v, -e if v == var else e) for v, e in mono)
            out[key] = coeff
        return SparsePoly(out)

    def map_coefficients(self, func: Callable) -> 'SparsePoly':
        return SparsePoly({m: func(c) for m, c in self.terms.items()})

    def __repr__(self):
        if not self.terms:
            return '0'
        parts = []
        for mono, coeff in self.sorted_terms():
            if not mono:
                parts.append(str(coeff))
            elif coeff == 1:
                parts.append(mono_str(mono))
            elif coeff == -1:
                parts.append('-' + mono_str(mono))
            else:
                parts.append(f"{coeff}*{mono_str(mono)}")
        return ' + '.join(parts).replace('+ -', '- ')

    __str__ = __repr__


PolyLike = Union[SparsePoly, int, Fraction]


def poly_normalize(p: SparsePoly) -> SparsePoly:
    """Canonical form: like terms collected, zero coefficients dropped."""
    return SparsePoly(p.terms)


def poly_partial(p: SparsePoly, var: str) -> SparsePoly:
    return p.partial(var)


def poly_sum(items: Iterable) -> SparsePoly:
    acc: Dict[Monomial, object] = {}
    for item in items:
        for mono, coeff in SparsePoly.coerce(item).terms.items():
            acc[mono] = acc[mono] + coeff if mono in acc else coeff
    return SparsePoly(acc)
