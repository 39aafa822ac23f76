"""
Arithmetic expression DAGs over generator symbols.

Polynomial subterms collapse into `SparsePoly` leaves as they are built, so an
`Expr` only keeps explicit structure where a quotient by a non-constant
polynomial appears (inverses, minor ratios). Evaluation is exact in whatever
field the point values live in; dual-number evaluation gives derivatives.
"""
import logging
from fractions import Fraction
from typing import Callable, Dict, List, Mapping, Optional, Sequence, Tuple

from app.utils.errors import DivisionByZero, NotPolynomialError
from app.utils.polynomial import SparsePoly, poly_sum
from app.utils.ring import DualValue, PrimeFieldElement

logger = logging.getLogger(__name__)

_POLY_KINDS = ('poly',)


class Expr:
    """Immutable expression node.

    Kinds: 'poly' (a polynomial leaf, covering constants and symbols),
    'add', 'sub', 'mul', 'div', 'neg'.
    """

    __slots__ = ('kind', 'args', 'payload', '_vars', '_poly', '_partials', '__weakref__')

    def __init__(self, kind: str, args: Tuple['Expr', ...] = (), payload=None):
        self.kind = kind
        self.args = args
        self.payload = payload
        self._vars = None
        self._poly = None
        self._partials = None

    # construction

    @classmethod
    def poly(cls, p: SparsePoly) -> 'Expr':
        return cls('poly', (), p)

    @classmethod
    def const(cls, value) -> 'Expr':
        return cls.poly(SparsePoly.constant(value))

    @classmethod
    def symbol(cls, name: str) -> 'Expr':
        return cls.poly(SparsePoly.variable(name))

    @classmethod
    def lift(cls, value) -> 'Expr':
        if isinstance(value, Expr):
            return value
        if isinstance(value, SparsePoly):
            return cls.poly(value)
        if isinstance(value, (int, Fraction, PrimeFieldElement)):
            return cls.const(value)
        raise TypeError(f"cannot lift {type(value).__name__} to Expr")

    def is_poly_leaf(self) -> bool:
        return self.kind == 'poly'

    def is_zero(self) -> bool:
        return self.kind == 'poly' and self.payload.is_zero()

    def is_one(self) -> bool:
        return self.kind == 'poly' and self.payload == 1

    def __bool__(self):
        return not self.is_zero()

    # arithmetic with leaf folding

    def __add__(self, other):
        o = _lift_or_none(other)
        if o is None:
            return NotImplemented
        if self.is_zero():
            return o
        if o.is_zero():
            return self
        if self.kind == 'poly' and o.kind == 'poly':
            return Expr.poly(self.payload + o.payload)
        return Expr('add', (self, o))

    def __radd__(self, other):
        o = _lift_or_none(other)
        if o is None:
            return NotImplemented
        return o + self

    def __sub__(self, other):
        o = _lift_or_none(other)
        if o is None:
            return NotImplemented
        if o.is_zero():
            return self
        if self.is_zero():
            return -o
        if self.kind == 'poly' and o.kind == 'poly':
            return Expr.poly(self.payload - o.payload)
        return Expr('sub', (self, o))

    def __rsub__(self, other):
        o = _lift_or_none(other)
        if o is None:
            return NotImplemented
        return o - self

    def __neg__(self):
        if self.kind == 'poly':
            return Expr.poly(-self.payload)
        if self.kind == 'neg':
            return self.args[0]
        return Expr('neg', (self,))

    def __mul__(self, other):
        o = _lift_or_none(other)
        if o is None:
            return NotImplemented
        if self.is_zero() or o.is_zero():
            return Expr.const(0)
        if self.is_one():
            return o
        if o.is_one():
            return self
        if self.kind == 'poly' and o.kind == 'poly':
            return Expr.poly(self.payload * o.payload)
        return Expr('mul', (self, o))

    def __rmul__(self, other):
        o = _lift_or_none(other)
        if o is None:
            return NotImplemented
        return o * self

    def __truediv__(self, other):
        o = _lift_or_none(other)
        if o is None:
            return NotImplemented
        if o.is_zero():
            raise DivisionByZero("quotient by the zero polynomial", witness=repr(self))
        if self.is_zero():
            return self
        if o.kind == 'poly' and o.payload.is_constant():
            return self * Expr.const(Fraction(1) / o.payload.constant_value())
        return Expr('div', (self, o))

    def __rtruediv__(self, other):
        o = _lift_or_none(other)
        if o is None:
            return NotImplemented
        return o / self

    def __pow__(self, exponent: int):
        if exponent < 0:
            return Expr.const(1) / (self ** (-exponent))
        result = Expr.const(1)
        for _ in range(exponent):
            result = result * self
        return result

    # structure

    def variables(self) -> frozenset:
        if self._vars is None:
            if self.kind == 'poly':
                self._vars = self.payload.variables()
            else:
                acc = frozenset()
                for child in self.args:
                    acc = acc | child.variables()
                self._vars = acc
        return self._vars

    def is_polynomial(self) -> bool:
        try:
            self.to_poly()
        except NotPolynomialError:
            return False
        return True

    def to_poly(self) -> SparsePoly:
        """Expand to a polynomial; quotients raise NotPolynomialError."""
        if self._poly is None:
            if self.kind == 'poly':
                self._poly = self.payload
            elif self.kind == 'div':
                raise NotPolynomialError(f"quotient in {self!r}")
            else:
                parts = [c.to_poly() for c in self.args]
                if self.kind == 'add':
                    self._poly = parts[0] + parts[1]
                elif self.kind == 'sub':
                    self._poly = parts[0] - parts[1]
                elif self.kind == 'mul':
                    self._poly = parts[0] * parts[1]
                else:
                    self._poly = -parts[0]
        return self._poly

    def numerator_denominator(self) -> Tuple[SparsePoly, SparsePoly]:
        """Cross-multiplied pair (num, den) with self = num / den."""
        if self.kind == 'poly':
            return self.payload, SparsePoly.one()
        parts = [c.numerator_denominator() for c in self.args]
        if self.kind == 'neg':
            return -parts[0][0], parts[0][1]
        (n1, d1) = parts[0]
        (n2, d2) = parts[1]
        if self.kind == 'add':
            if d1 == d2:
                return n1 + n2, d1
            return n1 * d2 + n2 * d1, d1 * d2
        if self.kind == 'sub':
            if d1 == d2:
                return n1 - n2, d1
            return n1 * d2 - n2 * d1, d1 * d2
        if self.kind == 'mul':
            return n1 * n2, d1 * d2
        return n1 * d2, d1 * n2

    # evaluation

    def evaluate(self, point: Mapping[str, object], memo: Optional[Dict[int, object]] = None):
        if memo is None:
            memo = {}
        key = id(self)
        if key in memo:
            return memo[key]
        if self.kind == 'poly':
            value = self.payload.evaluate(point)
        elif self.kind == 'neg':
            value = -self.args[0].evaluate(point, memo)
        else:
            left = self.args[0].evaluate(point, memo)
            right = self.args[1].evaluate(point, memo)
            if self.kind == 'add':
                value = left + right
            elif self.kind == 'sub':
                value = left - right
            elif self.kind == 'mul':
                value = left * right
            else:
                if not _value_nonzero(right):
                    raise DivisionByZero("denominator vanishes at point",
                                         witness=_short(repr(self.args[1])))
                value = left / right
        memo[key] = value
        return value

    def derivative_at(self, point: Mapping[str, object], var: str) -> DualValue:
        """(value, d/dvar) at the point by dual-number propagation."""
        dual_point = {name: DualValue(value, 1 if name == var else 0)
                      for name, value in point.items()}
        result = self.evaluate(dual_point)
        if not isinstance(result, DualValue):
            return DualValue(result, 0)
        return result

    def poly_partials(self) -> Dict[str, SparsePoly]:
        if self._partials is None:
            p = self.to_poly()
            self._partials = {v: p.partial(v) for v in sorted(p.variables())}
        return self._partials

    def gradient_at(self, point: Mapping[str, object]) -> Dict[str, object]:
        """Partial derivatives at the point for every variable of the expression."""
        if self.is_polynomial():
            return {v: dp.evaluate(point) for v, dp in self.poly_partials().items()}
        grad = {}
        for var in sorted(self.variables()):
            grad[var] = self.derivative_at(point, var).derivative
        return grad

    def substitute(self, mapping: Mapping[str, 'Expr'], memo: Optional[Dict[int, 'Expr']] = None) -> 'Expr':
        if memo is None:
            memo = {}
        key = id(self)
        if key in memo:
            return memo[key]
        if self.kind == 'poly':
            hit = {v: mapping[v] for v in self.payload.variables() if v in mapping}
            if not hit:
                result = self
            elif all(Expr.lift(e).is_poly_leaf() for e in hit.values()):
                result = Expr.poly(self.payload.substitute(
                    {v: Expr.lift(e).payload for v, e in hit.items()}))
            else:
                result = _expand_poly(self.payload, {v: Expr.lift(e) for v, e in hit.items()})
        else:
            children = [c.substitute(mapping, memo) for c in self.args]
            if self.kind == 'add':
                result = children[0] + children[1]
            elif self.kind == 'sub':
                result = children[0] - children[1]
            elif self.kind == 'mul':
                result = children[0] * children[1]
            elif self.kind == 'div':
                result = children[0] / children[1]
            else:
                result = -children[0]
        memo[key] = result
        return result

    def __repr__(self):
        if self.kind == 'poly':
            return f"({self.payload})"
        if self.kind == 'neg':
            return f"-{self.args[0]!r}"
        op = {'add': '+', 'sub': '-', 'mul': '*', 'div': '/'}[self.kind]
        return f"({self.args[0]!r} {op} {self.args[1]!r})"


def _lift_or_none(value) -> Optional[Expr]:
    try:
        return Expr.lift(value)
    except TypeError:
        return None


def _value_nonzero(value) -> bool:
    if isinstance(value, DualValue):
        return bool(value.value)
    return bool(value)


def _short(text: str, limit: int = 200) -> str:
    return text if len(text) <= limit else text[:limit] + '...'


def _expand_poly(p: SparsePoly, images: Mapping[str, Expr]) -> Expr:
    total = Expr.const(0)
    for mono, coeff in p.sorted_terms():
        term = Expr.const(coeff)
        rest = []
        for var, exp in mono:
            if var in images:
                term = term * (images[var] ** exp)
            else:
                rest.append((var, exp))
        if rest:
            term = term * Expr.poly(SparsePoly.monomial(tuple(rest)))
        total = total + term
    return total


def expr_eval(e: Expr, point: Mapping[str, object]):
    return Expr.lift(e).evaluate(point)


def expr_derivative_eval(e: Expr, point: Mapping[str, object], var: str) -> DualValue:
    return Expr.lift(e).derivative_at(point, var)


def entry_symbol(matrix: str, i: int, j: int) -> str:
    """Generator name for entry (i, j), 1-based: a12, or b1_12 for indexed copies."""
    name = matrix.lower()
    if any(ch.isdigit() for ch in name):
        return f"{name}_{i}{j}"
    return f"{name}{i}{j}"


def laplace_det(rows: Sequence[Sequence], one=1, zero=0):
    """Determinant by row-wise Laplace expansion with memoized column minors.

    Works over any ring whose elements support +, -, * and truthiness.
    """
    n = len(rows)
    if n == 0:
        return one
    memo: Dict[Tuple[int, ...], object] = {}

    def minor(cols: Tuple[int, ...]):
        k = n - len(cols)
        if k == n:
            return one
        if cols in memo:
            return memo[cols]
        total = zero
        for idx, col in enumerate(cols):
            entry = rows[k][col]
            if not entry:
                continue
            sub = minor(cols[:idx] + cols[idx + 1:])
            if not sub:
                continue
            term = entry * sub
            total = total + term if idx % 2 == 0 else total - term
        memo[cols] = total
        return total

    return minor(tuple(range(n)))


class MatrixExpr:
    """Square matrix of Expr entries."""

    def __init__(self, rows: Sequence[Sequence]):
        self.rows: List[List[Expr]] = [[Expr.lift(x) for x in row] for row in rows]
        self.n = len(self.rows)

    @classmethod
    def symbols(cls, matrix: str, n: int) -> 'MatrixExpr':
        return cls([[Expr.symbol(entry_symbol(matrix, i + 1, j + 1)) for j in range(n)]
                    for i in range(n)])

    @classmethod
    def identity(cls, n: int) -> 'MatrixExpr':
        return cls([[1 if i == j else 0 for j in range(n)] for i in range(n)])

    @classmethod
    def zeros(cls, n: int) -> 'MatrixExpr':
        return cls([[0] * n for _ in range(n)])

    def __getitem__(self, index: Tuple[int, int]) -> Expr:
        i, j = index
        return self.rows[i][j]

    @property
    def T(self) -> 'MatrixExpr':
        return MatrixExpr([[self.rows[j][i] for j in range(self.n)] for i in range(self.n)])

    def map(self, func: Callable[[Expr], object]) -> 'MatrixExpr':
        return MatrixExpr([[func(x) for x in row] for row in self.rows])

    def __add__(self, other: 'MatrixExpr') -> 'MatrixExpr':
        return MatrixExpr([[a + b for a, b in zip(r1, r2)] for r1, r2 in zip(self.rows, other.rows)])

    def __sub__(self, other: 'MatrixExpr') -> 'MatrixExpr':
        return MatrixExpr([[a - b for a, b in zip(r1, r2)] for r1, r2 in zip(self.rows, other.rows)])

    def __neg__(self) -> 'MatrixExpr':
        return self.map(lambda x: -x)

    def scale(self, c) -> 'MatrixExpr':
        c = Expr.lift(c)
        return self.map(lambda x: c * x)

    def __matmul__(self, other: 'MatrixExpr') -> 'MatrixExpr':
        n = self.n
        out = []
        for i in range(n):
            row = []
            for j in range(n):
                acc = Expr.const(0)
                polys = []
                for k in range(n):
                    a, b = self.rows[i][k], other.rows[k][j]
                    if a.is_zero() or b.is_zero():
                        continue
                    if a.kind == 'poly' and b.kind == 'poly':
                        polys.append(a.payload * b.payload)
                    else:
                        acc = acc + a * b
                if polys:
                    acc = Expr.poly(poly_sum(polys)) + acc
                row.append(acc)
            out.append(row)
        return MatrixExpr(out)

    def submatrix(self, rows: Sequence[int], cols: Sequence[int]) -> 'MatrixExpr':
        return MatrixExpr([[self.rows[i][j] for j in cols] for i in rows])

    def minor(self, rows: Sequence[int], cols: Sequence[int]) -> Expr:
        return self.submatrix(rows, cols).det()

    def det(self) -> Expr:
        if all(x.kind == 'poly' for row in self.rows for x in row):
            polys = [[x.payload for x in row] for row in self.rows]
            return Expr.poly(laplace_det(polys, one=SparsePoly.one(), zero=SparsePoly.zero()))
        return laplace_det(self.rows, one=Expr.const(1), zero=Expr.const(0))

    def adjugate(self) -> 'MatrixExpr':
        n = self.n
        out = [[None] * n for _ in range(n)]
        for i in range(n):
            for j in range(n):
                rows = [r for r in range(n) if r != j]
                cols = [c for c in range(n) if c != i]
                cof = self.minor(rows, cols) if n > 1 else Expr.const(1)
                out[i][j] = cof if (i + j) % 2 == 0 else -cof
        return MatrixExpr(out)

    def inverse(self) -> 'MatrixExpr':
        """Adjugate over determinant; entries are quotients."""
        d = self.det()
        return self.adjugate().map(lambda x: x / d)

    def evaluate(self, point: Mapping[str, object], memo: Optional[Dict[int, object]] = None) -> List[List[object]]:
        memo = {} if memo is None else memo
        return [[x.evaluate(point, memo) for x in row] for row in self.rows]

    def to_polys(self) -> List[List[SparsePoly]]:
        return [[x.to_poly() for x in row] for row in self.rows]

    def substitute(self, mapping: Mapping[str, Expr]) -> 'MatrixExpr':
        memo: Dict[int, Expr] = {}
        return self.map(lambda x: x.substitute(mapping, memo))

    def variables(self) -> frozenset:
        acc = frozenset()
        for row in self.rows:
            for x in row:
                acc = acc | x.variables()
        return acc

    def entries(self):
        for i, row in enumerate(self.rows):
            for j, x in enumerate(row):
                yield (i, j), x

    def __repr__(self):
        return f"MatrixExpr({self.rows!r})"
