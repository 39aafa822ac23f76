"""
Leg-indexed matrix algebra.

A `LegMatrix` is an operator on (C^N)^{⊗k}. Basis states are multi-indices
(i_1, ..., i_k) with 0-based entries; leg 1 is the most significant digit, so
`embed(A, 1, 2)` is the Kronecker product A ⊗ E. Entries are stored sparsely
as {(row, col): value}; an optional common scalar denominator carries the
rational spectral-parameter R-matrices.
"""
import itertools
import logging
from fractions import Fraction
from typing import Dict, Iterable, Optional, Sequence, Tuple

import numpy as np

from app.utils.errors import LegIndexError, WorkbenchError
from app.utils.expr import Expr, MatrixExpr
from app.utils.polynomial import SparsePoly
from app.utils.ring import theta

logger = logging.getLogger(__name__)

Q_PARAMETER = 's'  # q = s^2


class LegMatrix:
    """Sparse N^k x N^k operator with an optional scalar denominator."""

    __slots__ = ('dim', 'legs', 'entries', 'denominator')

    def __init__(self, dim: int, legs: int, entries: Optional[Dict[Tuple[int, int], object]] = None,
                 denominator=None):
        if legs < 1 or dim < 1:
            raise WorkbenchError(f"invalid leg matrix shape dim={dim} legs={legs}")
        self.dim = dim
        self.legs = legs
        self.entries = {k: v for k, v in (entries or {}).items() if v}
        self.denominator = SparsePoly.one() if denominator is None else SparsePoly.coerce(denominator)

    # indexing

    @property
    def size(self) -> int:
        return self.dim ** self.legs

    def digits(self, index: int) -> Tuple[int, ...]:
        out = []
        for _ in range(self.legs):
            index, d = divmod(index, self.dim)
            out.append(d)
        return tuple(reversed(out))

    def index(self, digits: Sequence[int]) -> int:
        value = 0
        for d in digits:
            value = value * self.dim + d
        return value

    def entry(self, row: Sequence[int], col: Sequence[int]):
        return self.entries.get((self.index(row), self.index(col)), 0)

    def _check_leg(self, leg: int):
        if not 1 <= leg <= self.legs:
            raise LegIndexError(f"leg {leg} outside 1..{self.legs}", witness=str(leg))

    def _check_compatible(self, other: 'LegMatrix'):
        if not isinstance(other, LegMatrix) or other.dim != self.dim or other.legs != self.legs:
            raise WorkbenchError("leg matrices of different shape")

    # constructors

    @classmethod
    def identity(cls, dim: int, legs: int = 1) -> 'LegMatrix':
        size = dim ** legs
        return cls(dim, legs, {(i, i): Fraction(1) for i in range(size)})

    @classmethod
    def zero(cls, dim: int, legs: int = 1) -> 'LegMatrix':
        return cls(dim, legs, {})

    @classmethod
    def from_dense(cls, rows: Sequence[Sequence], dim: int, legs: int = 1) -> 'LegMatrix':
        entries = {(i, j): v for i, row in enumerate(rows) for j, v in enumerate(row) if v}
        return cls(dim, legs, entries)

    def to_dense(self) -> np.ndarray:
        arr = np.empty((self.size, self.size), dtype=object)
        arr[:, :] = 0
        for (i, j), v in self.entries.items():
            arr[i, j] = v
        return arr

    # algebra

    def __matmul__(self, other: 'LegMatrix') -> 'LegMatrix':
        self._check_compatible(other)
        by_row: Dict[int, list] = {}
        for (i, j), v in other.entries.items():
            by_row.setdefault(i, []).append((j, v))
        out: Dict[Tuple[int, int], object] = {}
        for (i, k), a in self.entries.items():
            for j, b in by_row.get(k, ()):
                key = (i, j)
                prod = a * b
                out[key] = out[key] + prod if key in out else prod
        return LegMatrix(self.dim, self.legs, out, self.denominator * other.denominator)

    def _combine(self, other: 'LegMatrix', sign: int) -> 'LegMatrix':
        self._check_compatible(other)
        if self.denominator == other.denominator:
            left, right, den = self.entries, other.entries, self.denominator
        else:
            left = {k: v * other.denominator for k, v in self.entries.items()}
            right = {k: v * self.denominator for k, v in other.entries.items()}
            den = self.denominator * other.denominator
        out = dict(left)
        for key, v in right.items():
            v = v if sign > 0 else -v
            out[key] = out[key] + v if key in out else v
        return LegMatrix(self.dim, self.legs, out, den)

    def __add__(self, other: 'LegMatrix') -> 'LegMatrix':
        return self._combine(other, 1)

    def __sub__(self, other: 'LegMatrix') -> 'LegMatrix':
        return self._combine(other, -1)

    def __neg__(self) -> 'LegMatrix':
        return LegMatrix(self.dim, self.legs, {k: -v for k, v in self.entries.items()}, self.denominator)

    def scale(self, c) -> 'LegMatrix':
        return LegMatrix(self.dim, self.legs, {k: v * c for k, v in self.entries.items()}, self.denominator)

    def over(self, denominator) -> 'LegMatrix':
        """Same numerator, extra scalar denominator."""
        return LegMatrix(self.dim, self.legs, self.entries, self.denominator * SparsePoly.coerce(denominator))

    def map_entries(self, func) -> 'LegMatrix':
        return LegMatrix(self.dim, self.legs, {k: func(v) for k, v in self.entries.items()},
                         func(self.denominator))

    def invert_parameter(self, var: str = Q_PARAMETER) -> 'LegMatrix':
        """Laurent substitution var -> var^{-1} in every entry."""
        def flip(v):
            return SparsePoly.coerce(v).invert_variable(var)
        return self.map_entries(flip)

    def rename_parameters(self, mapping: Dict[str, object]) -> 'LegMatrix':
        def sub(v):
            return SparsePoly.coerce(v).substitute(mapping)
        return self.map_entries(sub)

    def partial_transpose(self, leg: int) -> 'LegMatrix':
        self._check_leg(leg)
        pos = leg - 1
        out = {}
        for (i, j), v in self.entries.items():
            r, c = list(self.digits(i)), list(self.digits(j))
            r[pos], c[pos] = c[pos], r[pos]
            out[(self.index(r), self.index(c))] = v
        return LegMatrix(self.dim, self.legs, out, self.denominator)

    def transpose(self) -> 'LegMatrix':
        return LegMatrix(self.dim, self.legs, {(j, i): v for (i, j), v in self.entries.items()},
                         self.denominator)

    def place(self, legs: Sequence[int], total_legs: int) -> 'LegMatrix':
        """Act with this operator on the given legs of a total_legs space."""
        if len(legs) != self.legs or len(set(legs)) != len(legs):
            raise LegIndexError(f"need {self.legs} distinct legs, got {tuple(legs)}", witness=str(tuple(legs)))
        for leg in legs:
            if not 1 <= leg <= total_legs:
                raise LegIndexError(f"leg {leg} outside 1..{total_legs}", witness=str(leg))
        target = LegMatrix(self.dim, total_legs)
        others = [l for l in range(1, total_legs + 1) if l not in legs]
        out = {}
        for (i, j), v in self.entries.items():
            rd, cd = self.digits(i), self.digits(j)
            for rest in itertools.product(range(self.dim), repeat=len(others)):
                r = [0] * total_legs
                c = [0] * total_legs
                for leg, a, b in zip(legs, rd, cd):
                    r[leg - 1], c[leg - 1] = a, b
                for leg, d in zip(others, rest):
                    r[leg - 1] = c[leg - 1] = d
                out[(target.index(r), target.index(c))] = v
        return LegMatrix(self.dim, total_legs, out, self.denominator)

    # comparison

    def first_difference(self, other: 'LegMatrix') -> Optional[Tuple[tuple, tuple, object, object]]:
        """First (row, col, lhs, rhs) where the two operators differ, after clearing denominators."""
        self._check_compatible(other)
        same_den = self.denominator == other.denominator
        for key in sorted(set(self.entries) | set(other.entries)):
            a = self.entries.get(key, 0)
            b = other.entries.get(key, 0)
            if not same_den:
                a = a * other.denominator
                b = b * self.denominator
            if not _equal(a, b):
                return self.digits(key[0]), self.digits(key[1]), a, b
        return None

    def __eq__(self, other):
        if not isinstance(other, LegMatrix):
            return NotImplemented
        return other.dim == self.dim and other.legs == self.legs and self.first_difference(other) is None

    __hash__ = None

    def __repr__(self):
        return f"LegMatrix(N={self.dim}, legs={self.legs}, nnz={len(self.entries)})"


def _equal(a, b) -> bool:
    diff = a - b
    return not diff


# -- constructors of the named operators -----------------------------------

def unit_matrix(N: int, i: int, j: int) -> LegMatrix:
    """E_ij with 1-based indices."""
    return LegMatrix(N, 1, {(i - 1, j - 1): Fraction(1)})


def kron(a: LegMatrix, b: LegMatrix) -> LegMatrix:
    """a ⊗ b (a on the leading legs)."""
    total = a.legs + b.legs
    return a.place(range(1, a.legs + 1), total) @ b.place(range(a.legs + 1, total + 1), total)


def embed(m: LegMatrix, target_leg: int, total_legs: int) -> LegMatrix:
    if m.legs != 1:
        raise LegIndexError("embed takes a one-leg operator", witness=str(m.legs))
    return m.place((target_leg,), total_legs)


def partial_transpose(m: LegMatrix, leg: int) -> LegMatrix:
    return m.partial_transpose(leg)


def _swap_state(N: int, i: int, j: int) -> Tuple[int, int]:
    return i * N + j, j * N + i


def permutation_p(N: int) -> LegMatrix:
    """P = Σ E_ij ⊗ E_ji."""
    entries = {}
    for i in range(N):
        for j in range(N):
            entries[_swap_state(N, i, j)] = Fraction(1)
    return LegMatrix(N, 2, entries)


def classical_r(N: int) -> LegMatrix:
    """r = 2 Σ θ(i - j) E_ij ⊗ E_ji."""
    entries = {}
    for i in range(N):
        for j in range(N):
            weight = 2 * theta(i - j)
            if weight:
                entries[_swap_state(N, i, j)] = weight
    return LegMatrix(N, 2, entries)


Q_SELECTORS = ('i', 'ii', 'iii', 'perm')


def q_matrix(N: int, selector: str) -> LegMatrix:
    """Q of the three admissible cases, plus P as a negative control."""
    r = classical_r(N)
    if selector == 'i':
        return LegMatrix.zero(N, 2)
    if selector == 'ii':
        return -r.partial_transpose(2)
    if selector == 'iii':
        return r.partial_transpose(1)
    if selector == 'perm':
        return permutation_p(N)
    raise WorkbenchError(f"unknown Q selector {selector!r}")


def _s(exp: int) -> SparsePoly:
    return SparsePoly.variable(Q_PARAMETER, exp) if exp else SparsePoly.one()


def q_poly(power: int) -> SparsePoly:
    """q^power as a Laurent monomial in s."""
    return _s(2 * power)


def quantum_R(N: int, inverse_q: bool = False) -> LegMatrix:
    """Trigonometric R(q) = E⊗E + Σ E_kl⊗E_lk [(q - q^{-1})θ(l - k) + (s - s^{-1})²/2 δ_kl]."""
    q_diff = q_poly(1) - q_poly(-1)
    half_square = (_s(1) - _s(-1)) ** 2 * Fraction(1, 2)
    entries: Dict[Tuple[int, int], object] = {}
    for i in range(N * N):
        entries[(i, i)] = SparsePoly.one()
    for k in range(N):
        for l in range(N):
            coeff = q_diff * theta(l - k)
            if k == l:
                coeff = coeff + half_square
            if not coeff:
                continue
            key = _swap_state(N, k, l)
            entries[key] = entries.get(key, SparsePoly.zero()) + coeff
    R = LegMatrix(N, 2, entries)
    return R.invert_parameter() if inverse_q else R


def affine_R(N: int, lam, mu, inverse_q: bool = False) -> LegMatrix:
    """R(λ, μ; q) over the common denominator q^{-1}λ - qμ.

    `lam` and `mu` are Laurent polynomials (e.g. the variable 'lam' or its inverse).
    """
    lam = SparsePoly.coerce(lam)
    mu = SparsePoly.coerce(mu)
    q, qi = q_poly(1), q_poly(-1)
    if inverse_q:
        q, qi = qi, q
    den = qi * lam - q * mu
    entries: Dict[Tuple[int, int], object] = {}
    for i in range(N):
        for j in range(N):
            if i == j:
                entries[(i * N + i, i * N + i)] = den
            else:
                entries[(i * N + j, i * N + j)] = lam - mu
                entries[_swap_state(N, i, j)] = (qi - q) * (lam if i < j else mu)
    return LegMatrix(N, 2, entries, den)


def commutator(a: LegMatrix, b: LegMatrix) -> LegMatrix:
    return a @ b - b @ a


def cybe(r: LegMatrix) -> LegMatrix:
    """[[r, r]] = [r12, r13] + [r12, r23] + [r13, r23]."""
    r12, r13, r23 = r.place((1, 2), 3), r.place((1, 3), 3), r.place((2, 3), 3)
    return commutator(r12, r13) + commutator(r12, r23) + commutator(r13, r23)


def triangular_project(m: MatrixExpr, sign: str, diag_weight) -> MatrixExpr:
    """Strict upper ('+') or lower ('-') part plus diag_weight times the diagonal."""
    if sign not in ('+', '-'):
        raise WorkbenchError(f"projection sign must be '+' or '-', got {sign!r}")
    weight = Fraction(diag_weight)
    n = m.n
    rows = []
    for i in range(n):
        row = []
        for j in range(n):
            if i == j:
                row.append(m[i, j] * weight if weight else Expr.const(0))
            elif (i < j) == (sign == '+'):
                row.append(m[i, j])
            else:
                row.append(Expr.const(0))
        rows.append(row)
    return MatrixExpr(rows)


def leg_matrix_from_expr(m: MatrixExpr) -> LegMatrix:
    """One-leg operator whose entries are the polynomial entries of m."""
    return LegMatrix(m.n, 1, {(i, j): x.to_poly() for (i, j), x in m.entries() if not x.is_zero()})
