"""
Dirac Service - second-class constraints on the A, B systems

Block-upper-triangular (b.u.t.) constraint sets for A and for BAB^T, their
Gram matrix {C_k, C_l}, the Dirac bracket

    {f, g}_D = {f, g} - {f, C_k} (D^{-1})_{kl} {C_l, g},

the linear system whose solution A = F[B] makes B F[B] B^T upper
triangular, and the probe that decides nondegeneracy of the reduced
bracket near B' = 1.

Surface points are drawn over F_p: B at random, A = F[B], then every row of
B rescaled by a square root so that BAB^T has unit diagonal. Points where a
square root does not exist, the system is singular or the Gram degenerates
are redrawn by the sampler.
"""
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations, combinations_with_replacement
from typing import Callable, Dict, List, Optional, Sequence, Tuple

from app.models import CheckOutcome
from app.services.casimir_service import minor
from app.services.poisson_service import (PointContext, PoissonAlgebra, _default_sampler, algebra_for,
                                          bracket)
from app.utils.errors import (DivisionByZero, InvalidPartition, NotPolynomialError, SingularGram, SingularSystem,
                              WorkbenchError)
from app.utils.expr import Expr, MatrixExpr, entry_symbol
from app.utils.linalg import det as field_det
from app.utils.linalg import inverse, matmul, rank, solve
from app.utils.polynomial import SparsePoly
from app.utils.ring import DualValue
from app.utils.sampling import PointSampler
from app.utils.tensor import triangular_project

logger = logging.getLogger(__name__)

HALF = Fraction(1, 2)

SurfaceSampler = Callable[[PoissonAlgebra, PointSampler], Dict[str, object]]


# -- constraint sets -----------------------------------------------------------

@dataclass(frozen=True)
class Constraint:
    """One constraint function C with C = 0 on the surface.

    `entry` is the 0-based (k, l) of the constrained entry; determinant
    constraints carry the first and last row of their diagonal block.
    """
    label: str
    expr: Expr
    role: str = 'A'
    kind: str = 'zero'
    entry: Tuple[int, int] = (0, 0)


@dataclass
class ConstraintSet:
    N: int
    constraints: List[Constraint]
    surface: Dict[str, object] = field(default_factory=dict)
    blocks: Tuple[int, ...] = ()
    which: str = 'custom'

    @classmethod
    def custom(cls, N: int, items: Sequence[Tuple[str, object]],
               surface: Optional[Dict[str, object]] = None) -> 'ConstraintSet':
        return cls(N, [Constraint(label, Expr.lift(e), role='custom', kind='custom') for label, e in items],
                   dict(surface or {}))

    @property
    def exprs(self) -> List[Expr]:
        return [c.expr for c in self.constraints]

    @property
    def labels(self) -> List[str]:
        return [c.label for c in self.constraints]

    def __len__(self):
        return len(self.constraints)

    def restrict(self, expr) -> Expr:
        """Substitute the solved-form part of the surface."""
        if not self.surface:
            return Expr.lift(expr)
        return Expr.lift(expr).substitute({v: Expr.lift(x) for v, x in self.surface.items()})

    def reparameterized(self, func: Callable[[Expr], Expr]) -> 'ConstraintSet':
        """Same surface cut out by func(C_k); func must keep 0 a simple zero."""
        items = [Constraint(f"{c.label}'", Expr.lift(func(c.expr)), c.role, c.kind, c.entry)
                 for c in self.constraints]
        return ConstraintSet(self.N, items, dict(self.surface), self.blocks, self.which)


def block_owner(N: int, blocks: Sequence[int]) -> List[int]:
    owner = []
    for n, size in enumerate(blocks):
        owner += [n] * size
    return owner


def validate_partition(N: int, blocks: Optional[Sequence[int]]) -> Tuple[int, ...]:
    if blocks is None:
        return (1,) * N
    blocks = tuple(int(b) for b in blocks)
    if not blocks or any(b <= 0 for b in blocks) or sum(blocks) != N:
        raise InvalidPartition(f"block sizes {list(blocks)} do not partition {N}", witness=str(list(blocks)))
    return blocks


def _matrix_constraints(m: MatrixExpr, name: str, role: str, blocks: Tuple[int, ...]) -> List[Constraint]:
    N = m.n
    owner = block_owner(N, blocks)
    out = []
    for k in range(N):
        for l in range(k):
            if owner[k] > owner[l]:
                out.append(Constraint(entry_symbol(name, k + 1, l + 1), m[k, l], role, 'zero', (k, l)))
    start = 0
    for size in blocks:
        rows = list(range(start, start + size))
        if size == 1:
            out.append(Constraint(f"{entry_symbol(name, start + 1, start + 1)}-1", m[start, start] - 1,
                                  role, 'unit', (start, start)))
        else:
            out.append(Constraint(f"det {name}[{start + 1}..{start + size}]-1", m.minor(rows, rows) - 1,
                                  role, 'det', (start, start + size - 1)))
        start += size
    return out


def but_constraints(N: int, block_sizes: Optional[Sequence[int]] = None, which: str = 'both') -> ConstraintSet:
    """b.u.t. constraints on A, on M = BAB^T, or on both.

    Zero constraints for the entries below the diagonal blocks come first,
    then one determinant constraint per diagonal block (x_kk - 1 for blocks
    of size one). The surface substitutes the zero and unit entries of A.

    Raises:
        InvalidPartition: block sizes do not partition N
    """
    if which not in ('A', 'BABt', 'both'):
        raise WorkbenchError(f"constraint selector must be A, BABt or both, not {which!r}")
    blocks = validate_partition(N, block_sizes)
    A = MatrixExpr.symbols('a', N)
    constraints: List[Constraint] = []
    surface: Dict[str, object] = {}
    if which in ('A', 'both'):
        part = _matrix_constraints(A, 'a', 'A', blocks)
        constraints += part
        for c in part:
            k, l = c.entry
            if c.kind == 'zero':
                surface[entry_symbol('a', k + 1, l + 1)] = 0
            elif c.kind == 'unit':
                surface[entry_symbol('a', k + 1, k + 1)] = 1
    if which in ('BABt', 'both'):
        B = MatrixExpr.symbols('b', N)
        constraints += _matrix_constraints(B @ A @ B.T, 'm', 'BABt', blocks)
    return ConstraintSet(N, constraints, surface, blocks, which)


# -- Gram matrix ---------------------------------------------------------------

def constraint_gram(alg: PoissonAlgebra, cs: ConstraintSet) -> MatrixExpr:
    """D_kl = {C_k, C_l} with the solved-form surface substituted (exact)."""
    polys = [c.to_poly() for c in cs.exprs]
    surface = cs.surface
    n = len(polys)
    rows = [[SparsePoly.zero()] * n for _ in range(n)]
    for k in range(n):
        for l in range(k + 1, n):
            value = alg.bracket_poly(polys[k], polys[l])
            if surface:
                value = value.substitute(surface)
            rows[k][l] = value
            rows[l][k] = -value
    return MatrixExpr(rows)


def gram_at_point(alg: PoissonAlgebra, cs: ConstraintSet, point: Dict[str, object]) -> List[List[object]]:
    ctx = PointContext(alg, point)
    exprs = cs.exprs
    return [[ctx.bracket(ck, cl) for cl in exprs] for ck in exprs]


def _value(x):
    return x.value if isinstance(x, DualValue) else x


def _derivative(x):
    return x.derivative if isinstance(x, DualValue) else 0


def _invert_gram(D: List[List[object]]) -> List[List[object]]:
    """Inverse of the Gram; dual entries get d(D^{-1}) = -D^{-1} dD D^{-1}.

    Raises:
        SingularGram: the Gram values are degenerate at the point
    """
    values = [[_value(x) for x in row] for row in D]
    try:
        inv = inverse(values)
    except DivisionByZero:
        raise SingularGram("constraint Gram is singular at the point",
                           witness=f"Gram rank {rank(values)} < {len(values)}")
    if not any(isinstance(x, DualValue) for row in D for x in row):
        return inv
    dD = [[_derivative(x) for x in row] for row in D]
    dinv = matmul(matmul(inv, dD), inv)
    n = len(D)
    return [[DualValue(inv[i][j], -dinv[i][j]) for j in range(n)] for i in range(n)]


class DiracContext:
    """Dirac bracket at one point (field values or dual numbers)."""

    def __init__(self, alg: PoissonAlgebra, cs: ConstraintSet, point: Dict[str, object]):
        self.alg = alg
        self.cs = cs
        self.base = PointContext(alg, point)
        exprs = cs.exprs
        self.hams = [self.base.hamiltonian(c) for c in exprs]
        grads = [self.base.gradient(c) for c in exprs]
        self.gram = [[self._pair(h, g) for g in grads] for h in self.hams]
        self.gram_inverse = _invert_gram(self.gram)

    @staticmethod
    def _pair(ham: Dict[str, object], grad: Dict[str, object]):
        total = 0
        for y, value in ham.items():
            gy = grad.get(y)
            if gy:
                total = total + value * gy
        return total

    def _correction(self, left: List[object], right: List[object]):
        total = 0
        for k, u in enumerate(left):
            if not u:
                continue
            row = self.gram_inverse[k]
            for l, v in enumerate(right):
                if v and row[l]:
                    total = total + u * row[l] * v
        return total

    def bracket(self, f, g):
        f, g = Expr.lift(f), Expr.lift(g)
        gf, gg = self.base.gradient(f), self.base.gradient(g)
        left = [self._pair(h, gf) for h in self.hams]
        right = [self._pair(h, gg) for h in self.hams]
        return self.base.bracket(f, g) + self._correction(left, right)

    def bivector(self) -> List[List[object]]:
        """[{x, y}_D] over the generators of the algebra."""
        gens = self.alg.generators
        n = len(self.hams)
        weighted = [{y: sum((self.gram_inverse[k][l] * self.hams[l][y]
                             for l in range(n) if y in self.hams[l] and self.gram_inverse[k][l]), 0)
                     for y in gens} for k in range(n)]
        out = []
        for x in gens:
            row = []
            for y in gens:
                value = self.base.pi(x, y) if (x, y) in self.alg.table else 0
                for k in range(n):
                    hx = self.hams[k].get(x)
                    if hx:
                        value = value + hx * weighted[k][y]
                row.append(value)
            out.append(row)
        return out


def dirac_bracket(alg: PoissonAlgebra, cs: ConstraintSet, f, g, point: Optional[Dict[str, object]] = None):
    """{f, g}_D at a point, or symbolically (adjugate inverse) when no point is given.

    The symbolic form restricts brackets to the solved-form surface and is
    meant for small constraint sets.

    Raises:
        SingularGram: the Gram is degenerate (identically, or at the point)
        NotPolynomialError: symbolic mode with a rational f or g
    """
    if point is not None:
        return DiracContext(alg, cs, point).bracket(f, g)
    gram = constraint_gram(alg, cs)
    det = gram.det()
    if det.is_zero():
        raise SingularGram("constraint Gram vanishes identically on the surface",
                           witness=f"det of the {len(cs)}x{len(cs)} Gram is 0")
    inv = gram.inverse()
    fc = [cs.restrict(bracket(alg, f, c)) for c in cs.exprs]
    cg = [cs.restrict(bracket(alg, c, g)) for c in cs.exprs]
    result = cs.restrict(bracket(alg, f, g))
    for k, u in enumerate(fc):
        if u.is_zero():
            continue
        for l, v in enumerate(cg):
            if v.is_zero() or inv[k, l].is_zero():
                continue
            result = result - u * inv[k, l] * v
    return result


def dirac_bivector(alg: PoissonAlgebra, cs: ConstraintSet, point: Dict[str, object]) -> List[List[object]]:
    return DiracContext(alg, cs, point).bivector()


# -- the F[B] system -------------------------------------------------------------

def _equation_labels(n: int) -> Tuple[List[Tuple[int, int]], List[Tuple[int, int]]]:
    """Rows (k, l) with k > l and unknowns (i, j) with i < j, both lexicographic."""
    rows = [(k, l) for k in range(n) for l in range(k)]
    cols = [(i, j) for i in range(n) for j in range(i + 1, n)]
    return rows, cols


def system_matrix(B) -> Tuple[List[List[object]], List[object]]:
    """Coefficients b_ki b_lj and right-hand sides -Σ_s b_ks b_ls.

    B is a MatrixExpr or a nested list of field values.
    """
    entry = (lambda i, j: B[i, j]) if isinstance(B, MatrixExpr) else (lambda i, j: B[i][j])
    n = B.n if isinstance(B, MatrixExpr) else len(B)
    rows, cols = _equation_labels(n)
    matrix = [[entry(k, i) * entry(l, j) for (i, j) in cols] for (k, l) in rows]
    rhs = []
    for k, l in rows:
        acc = entry(k, 0) * entry(l, 0)
        for s in range(1, n):
            acc = acc + entry(k, s) * entry(l, s)
        rhs.append(-acc)
    return matrix, rhs


def _minor_factors(B: MatrixExpr) -> List[Tuple[str, Expr]]:
    out = []
    for d in range(1, B.n):
        out.append((f"M+_{d}", minor(B, 'upper-right', d)))
        out.append((f"M-_{d}", minor(B, 'bottom-left', d)))
    return out


def _vanishing_minor(B) -> str:
    if not isinstance(B, MatrixExpr):
        values = B
        for d in range(1, len(values)):
            upper = [row[len(values) - d:] for row in values[:d]]
            lower = [row[:d] for row in values[len(values) - d:]]
            if not field_det(upper):
                return f"M+_{d}"
            if not field_det(lower):
                return f"M-_{d}"
        return "system determinant"
    for label, value in _minor_factors(B):
        if value.is_zero():
            return label
    return "system determinant"


def solve_F(B: MatrixExpr, n: Optional[int] = None) -> MatrixExpr:
    """Upper unitriangular F with B F B^T upper triangular (Cramer's rule).

    Raises:
        SingularSystem: the system determinant vanishes; witness names the
            vanishing corner minor of B
    """
    n = B.n if n is None else n
    if B.n != n:
        raise WorkbenchError(f"B is {B.n}x{B.n}, expected {n}x{n}")
    matrix, rhs = system_matrix(B)
    _, cols = _equation_labels(n)
    F = [[Expr.const(1 if i == j else 0) for j in range(n)] for i in range(n)]
    if not cols:
        return MatrixExpr(F)
    system = MatrixExpr(matrix)
    det = system.det()
    if det.is_zero():
        raise SingularSystem("F[B] system is singular", witness=_vanishing_minor(B))
    for c, (i, j) in enumerate(cols):
        replaced = [[rhs[r] if cc == c else matrix[r][cc] for cc in range(len(cols))] for r in range(len(cols))]
        F[i][j] = MatrixExpr(replaced).det() / det
    return MatrixExpr(F)


def solve_F_at_point(B: List[List[object]]) -> List[List[object]]:
    """F[B] for field-valued B.

    Raises:
        SingularSystem: singular system at this B
    """
    n = len(B)
    one = B[0][0] ** 0
    F = [[one if i == j else one * 0 for j in range(n)] for i in range(n)]
    matrix, rhs = system_matrix(B)
    _, cols = _equation_labels(n)
    if not cols:
        return F
    try:
        solution = solve(matrix, rhs)
    except DivisionByZero:
        raise SingularSystem("F[B] system is singular at the point", witness=_vanishing_minor(B))
    for (i, j), value in zip(cols, solution):
        F[i][j] = value
    return F


def system_determinant_check(n: int) -> CheckOutcome:
    """det of the F[B] system against Π_d M+_d M-_d, up to a reported sign."""
    B = MatrixExpr.symbols('b', n)
    matrix, _ = system_matrix(B)
    det = MatrixExpr(matrix).det().to_poly() if matrix else SparsePoly.one()
    product = SparsePoly.one()
    for _, value in _minor_factors(B):
        product = product * value.to_poly()
    if det == product:
        return CheckOutcome(passed=True, details={'sign': '+', 'n': n})
    if det == -product:
        return CheckOutcome(passed=True, details={'sign': '-', 'n': n})
    return CheckOutcome(passed=False, witness=f"det = {det} differs from the minor product {product}",
                        details={'n': n})


def upper_triangularity_check(n: int) -> CheckOutcome:
    """B F[B] B^T has no entries below the diagonal (exact in the b variables)."""
    B = MatrixExpr.symbols('b', n)
    M = B @ solve_F(B) @ B.T
    for k in range(n):
        for l in range(k):
            num, _ = M[k, l].numerator_denominator()
            if num:
                return CheckOutcome(passed=False, witness=f"(BFB^T)_{k + 1}{l + 1} numerator {num}")
    return CheckOutcome(passed=True, details={'n': n})


# -- surface points --------------------------------------------------------------

def upper_triangular_surface(alg: PoissonAlgebra, sampler: PointSampler, rescale: bool = True) -> Dict[str, object]:
    """Point with A = F[B] and BAB^T upper unitriangular.

    Generators of other matrices get independent random values.

    Raises:
        SingularSystem: F[B] undefined at the drawn B
        DivisionByZero: a diagonal entry of BAB^T is zero or not a square
    """
    n = alg.N
    field_ = sampler.field
    B = [[sampler.element() for _ in range(n)] for _ in range(n)]
    F = solve_F_at_point(B)
    if rescale:
        M = matmul(matmul(B, F), [list(col) for col in zip(*B)])
        for i in range(n):
            d = M[i][i]
            if not d:
                raise DivisionByZero(f"(BAB^T)_{i + 1}{i + 1} vanishes", witness=f"m{i + 1}{i + 1}")
            root = field_.sqrt(1 / d)
            if root is None:
                raise DivisionByZero(f"1/(BAB^T)_{i + 1}{i + 1} is not a square", witness=f"m{i + 1}{i + 1}")
            B[i] = [x * root for x in B[i]]
    point = {}
    for i in range(n):
        for j in range(n):
            point[entry_symbol('a', i + 1, j + 1)] = F[i][j]
            point[entry_symbol('b', i + 1, j + 1)] = B[i][j]
    for g in alg.generators:
        if g not in point:
            point[g] = sampler.element()
    return point


def _surface_for(cs: ConstraintSet) -> SurfaceSampler:
    if cs.which == 'custom' or any(b != 1 for b in cs.blocks):
        raise WorkbenchError("surface sampling is implemented for upper-triangular A/BAB^T constraints only")
    return upper_triangular_surface


def _draw_context(alg: PoissonAlgebra, cs: ConstraintSet, sampler: PointSampler,
                  surface: SurfaceSampler) -> Tuple[Dict[str, object], DiracContext]:
    def attempt(rng):
        point = surface(alg, sampler)
        return point, DiracContext(alg, cs, point)

    return sampler.draw(attempt, label='surface point')


# -- checks ------------------------------------------------------------------------

def dirac_centrality_check(alg: PoissonAlgebra, cs: ConstraintSet, sampler: Optional[PointSampler] = None,
                           trials: int = 20, surface: Optional[SurfaceSampler] = None) -> CheckOutcome:
    """{C_k, g}_D = 0 for every constraint and generator at surface points."""
    sampler = _default_sampler(sampler)
    surface = surface or _surface_for(cs)
    for trial in range(trials):
        _, ctx = _draw_context(alg, cs, sampler, surface)
        for c in cs.constraints:
            for g in alg.generators:
                value = ctx.bracket(c.expr, Expr.symbol(g))
                if value:
                    return CheckOutcome(passed=False, witness=f"{{{c.label}, {g}}}_D = {value} at trial {trial}",
                                        details={'backend': 'modular'})
    return CheckOutcome(passed=True, details={'backend': 'modular', 'trials': trials, 'constraints': len(cs)})


def dirac_jacobi_check(alg: PoissonAlgebra, cs: ConstraintSet, sampler: Optional[PointSampler] = None,
                       trials: int = 20, surface: Optional[SurfaceSampler] = None) -> CheckOutcome:
    """Antisymmetry and Jacobi of the Dirac bivector at surface points.

    Derivatives of the bivector come from one dual-number pass per generator.
    """
    sampler = _default_sampler(sampler)
    surface = surface or _surface_for(cs)
    gens = alg.generators
    n = len(gens)
    for trial in range(trials):
        point, ctx = _draw_context(alg, cs, sampler, surface)
        P = ctx.bivector()
        for x in range(n):
            for y in range(x, n):
                if P[x][y] != -P[y][x]:
                    return CheckOutcome(passed=False,
                                        witness=f"{{{gens[x]}, {gens[y]}}}_D not antisymmetric at trial {trial}")
        dP = []
        for z in gens:
            dual = {v: DualValue(value, 1 if v == z else 0) for v, value in point.items()}
            Pz = DiracContext(alg, cs, dual).bivector()
            dP.append([[_derivative(e) for e in row] for row in Pz])
        for x, y, w in combinations(range(n), 3):
            residual = 0
            for u, v, t in ((x, y, w), (y, w, x), (w, x, y)):
                for z in range(n):
                    if P[u][z]:
                        d = dP[z][v][t]
                        if d:
                            residual = residual + P[u][z] * d
            if residual:
                return CheckOutcome(passed=False,
                                    witness=f"triple ({gens[x]}, {gens[y]}, {gens[w]}) residual {residual} "
                                            f"at trial {trial}",
                                    details={'backend': 'modular', 'trials': trial + 1})
    return CheckOutcome(passed=True, details={'backend': 'modular', 'trials': trials, 'generators': n})


def unchanged_brackets_check(alg: PoissonAlgebra, cs: ConstraintSet, generators: Optional[Sequence[str]] = None,
                             sampler: Optional[PointSampler] = None, trials: int = 10,
                             surface: Optional[SurfaceSampler] = None) -> CheckOutcome:
    """{x, y}_D = {x, y} for the listed generators (default: the free entries of A)."""
    sampler = _default_sampler(sampler)
    surface = surface or _surface_for(cs)
    if generators is None:
        generators = [entry_symbol('a', i + 1, j + 1) for i in range(alg.N) for j in range(i + 1, alg.N)]
    pairs = list(combinations(generators, 2))
    for trial in range(trials):
        _, ctx = _draw_context(alg, cs, sampler, surface)
        for x, y in pairs:
            lhs = ctx.bracket(Expr.symbol(x), Expr.symbol(y))
            rhs = ctx.base.pi(x, y)
            if lhs != rhs:
                return CheckOutcome(passed=False, witness=f"{{{x}, {y}}}_D = {lhs} but {{{x}, {y}}} = {rhs}")
    return CheckOutcome(passed=True, details={'pairs': len(pairs), 'trials': trials})


def reparameterization_check(alg: PoissonAlgebra, cs: ConstraintSet, f, g,
                             func: Callable[[Expr], Expr] = lambda c: c * 2 + c * c,
                             sampler: Optional[PointSampler] = None, trials: int = 10,
                             surface: Optional[SurfaceSampler] = None) -> CheckOutcome:
    """{f, g}_D does not change when every C_k is replaced by func(C_k)."""
    sampler = _default_sampler(sampler)
    surface = surface or _surface_for(cs)
    other = cs.reparameterized(func)
    for trial in range(trials):
        def attempt(rng):
            point = surface(alg, sampler)
            return dirac_bracket(alg, cs, f, g, point), dirac_bracket(alg, other, f, g, point)

        lhs, rhs = sampler.draw(attempt, label='surface point')
        if lhs != rhs:
            return CheckOutcome(passed=False, witness=f"{lhs} vs {rhs} after reparameterization at trial {trial}")
    return CheckOutcome(passed=True, details={'trials': trials})


def degenerate_gram_check(alg: PoissonAlgebra, cs: ConstraintSet, sampler: Optional[PointSampler] = None,
                          trials: int = 5, surface: Optional[SurfaceSampler] = None) -> CheckOutcome:
    """Passes when the Gram is singular at every sampled surface point."""
    sampler = _default_sampler(sampler)
    surface = surface or _surface_for(cs)
    ranks = []
    for trial in range(trials):
        point = sampler.draw(lambda rng: surface(alg, sampler), label='surface point')
        gram = gram_at_point(alg, cs, point)
        ranks.append(rank(gram))
        try:
            _invert_gram(gram)
        except SingularGram:
            continue
        return CheckOutcome(passed=False, witness=f"Gram invertible at trial {trial}", details={'ranks': ranks})
    return CheckOutcome(passed=True, details={'ranks': ranks, 'size': len(cs)})


def gram_formula_check(n: int, q: str = 'ii', sampler: Optional[PointSampler] = None,
                       trials: int = 5) -> CheckOutcome:
    """Gram blocks of the upper-triangular system against the closed form.

    {C_kl, C*_ij} = B_ik (BA^TA)_jl + (BAA)_il B_jk in the component scale,
    {C, C} = 0 and {C*, C*} = 0. Each block is compared exactly after the
    A-surface substitution, and at full surface points where that fails.
    """
    alg = algebra_for('AB', n, q=q, scale='component')
    cs = but_constraints(n, which='both')
    gram = constraint_gram(alg, cs)
    A = MatrixExpr.symbols('a', n).substitute({v: Expr.lift(x) for v, x in cs.surface.items()})
    B = MatrixExpr.symbols('b', n)
    BAtA, BAA = B @ A.T @ A, B @ A @ A
    idx = {(c.role, c.entry): pos for pos, c in enumerate(cs.constraints)}
    expected: Dict[Tuple[int, int], Expr] = {}
    for (role, (k, l)), p in idx.items():
        for (role2, (i, j)), r in idx.items():
            if role == 'A' and role2 == 'BABt':
                expected[(p, r)] = B[i, k] * BAtA[j, l] + BAA[i, l] * B[j, k]
            elif role == role2:
                expected[(p, r)] = Expr.const(0)
    residual = []
    for (p, r), value in expected.items():
        if (gram[p, r] - value).to_poly():
            residual.append((p, r))
    if not residual:
        return CheckOutcome(passed=True, details={'exact_on_A_surface': True, 'constraints': len(cs)})

    sampler = _default_sampler(sampler)
    for trial in range(trials):
        point = sampler.draw(lambda rng: upper_triangular_surface(alg, sampler), label='surface point')
        values = gram_at_point(alg, cs, point)
        for p, r in residual:
            want = expected[(p, r)].evaluate(point)
            if values[p][r] != want:
                return CheckOutcome(passed=False,
                                    witness=f"{{{cs.labels[p]}, {cs.labels[r]}}} = {values[p][r]}, formula {want}",
                                    details={'residual_entries': len(residual)})
    return CheckOutcome(passed=True, details={
        'exact_on_A_surface': False, 'residual_entries': len(residual),
        'residual_pairs': [f"{cs.labels[p]}|{cs.labels[r]}" for p, r in residual[:6]], 'trials': trials})


def f_bracket_sign_check(case: str, n: int, sampler: Optional[PointSampler] = None,
                         trials: int = 20) -> CheckOutcome:
    """Brackets of the entries of F[B] against {a, a} at A = F[B].

    Case i: the brackets induced by the B table equal -{a, a}.
    Cases ii and iii: the Dirac brackets equal +{a, a}.
    """
    if case not in ('i', 'ii', 'iii'):
        raise WorkbenchError(f"unknown case {case!r}")
    if n not in (2, 3):
        raise WorkbenchError(f"F[B] bracket signs are checked for n = 2, 3, not {n}")
    sampler = _default_sampler(sampler)
    alg = algebra_for('AB', n, q=case)
    F = solve_F(MatrixExpr.symbols('b', n))
    entries = [(i, j) for i in range(n) for j in range(i + 1, n)]
    pairs = list(combinations_with_replacement(entries, 2))
    sign = -1 if case == 'i' else 1
    cs = None if case == 'i' else but_constraints(n, which='both')

    for trial in range(trials):
        if cs is None:
            point = sampler.draw(lambda rng: upper_triangular_surface(alg, sampler, rescale=False),
                                 label='F[B] point')
            induced = base = PointContext(alg, point)
        else:
            point, induced = _draw_context(alg, cs, sampler, upper_triangular_surface)
            base = induced.base
        for (i, j), (s, p) in pairs:
            lhs = induced.bracket(F[i, j], F[s, p])
            x, y = entry_symbol('a', i + 1, j + 1), entry_symbol('a', s + 1, p + 1)
            rhs = base.pi(x, y)
            if lhs != rhs * sign:
                return CheckOutcome(passed=False,
                                    witness=f"{{F_{i + 1}{j + 1}, F_{s + 1}{p + 1}}} = {lhs}, "
                                            f"expected {'-' if sign < 0 else '+'}{{{x}, {y}}} = {rhs * sign}",
                                    details={'case': case, 'trials': trial + 1})
    return CheckOutcome(passed=True, details={'case': case, 'n': n, 'pairs': len(pairs), 'trials': trials,
                                              'sign': '-' if sign < 0 else '+'})


# -- nondegeneracy near B' = 1 -------------------------------------------------------

def omega_symbol(j: int, i: int) -> str:
    return f"w{j + 1}{i + 1}"


def nondegeneracy_system(A: MatrixExpr, Bp: MatrixExpr) -> Tuple[List[Tuple[int, int]], List[List[Expr]]]:
    """Linear system in the strictly lower ω whose trivial kernel means nondegeneracy.

    The image of ω is P_+[B'(P_{+,1/2}(A^T ω^T) - P_{-,1/2}(A ω))B'^{-1}],
    read off on the strictly upper entries (i, j); the unknown paired with
    (i, j) is ω_ji.
    """
    n = A.n
    cells = [(i, j) for i in range(n) for j in range(i + 1, n)]
    omega = MatrixExpr([[Expr.symbol(omega_symbol(r, c)) if r > c else Expr.const(0) for c in range(n)]
                        for r in range(n)])
    inner = triangular_project(A.T @ omega.T, '+', HALF) - triangular_project(A @ omega, '-', HALF)
    image = Bp @ inner @ Bp.inverse()
    unknowns = [omega_symbol(j, i) for (i, j) in cells]
    rows = []
    for (i, j) in cells:
        entry = image[i, j]
        row = []
        for u in unknowns:
            unit = {w: Expr.const(1 if w == u else 0) for w in unknowns}
            row.append(entry.substitute(unit))
        rows.append(row)
    return cells, rows


def nondegeneracy_determinant(A: MatrixExpr, Bp: MatrixExpr) -> Expr:
    cells, rows = nondegeneracy_system(A, Bp)
    if not cells:
        return Expr.const(1)
    return MatrixExpr(rows).det()


def upper_unitriangular(n: int, name: str = 'a') -> MatrixExpr:
    return MatrixExpr([[Expr.const(1) if i == j else (Expr.symbol(entry_symbol(name, i + 1, j + 1)) if i < j
                                                       else Expr.const(0)) for j in range(n)] for i in range(n)])


def nondegeneracy_probe(A: MatrixExpr, Bp: MatrixExpr, expected=None) -> CheckOutcome:
    """Determinant of the ω system; passes when it is nonzero (or equals `expected`)."""
    for i in range(A.n):
        for j in range(i + 1):
            want = 1 if i == j else 0
            if A[i, j].kind != 'poly' or A[i, j].payload != want:
                raise WorkbenchError("nondegeneracy probe needs an upper unitriangular A")
    value = nondegeneracy_determinant(A, Bp)
    details = {'n': A.n, 'unknowns': A.n * (A.n - 1) // 2}
    try:
        details['determinant'] = str(value.to_poly())
    except NotPolynomialError:
        details['determinant'] = repr(value)
    if expected is not None:
        diff = value - Expr.lift(expected)
        num, _ = diff.numerator_denominator()
        if num:
            return CheckOutcome(passed=False, witness=f"determinant {details['determinant']} != {expected}",
                                details=details)
        return CheckOutcome(passed=True, details=details)
    num, _ = value.numerator_denominator()
    if not num:
        return CheckOutcome(passed=False, witness="determinant vanishes identically", details=details)
    return CheckOutcome(passed=True, details=details)
