"""
Poisson Service - quadratic Poisson algebras and the Leibniz bracket engine

Every algebra of the catalog is a list of matrix blocks (a, b, c, b1, ...)
together with a table of generator brackets read off from r-matrix forms:
the bracket {X1 ⊗ Y2} is a two-leg operator whose entry ((i, k), (j, l)) is
{x_ij, y_kl}. Brackets of polynomials follow by the Leibniz rule; rational
expressions (inverses, minor ratios) go through the point backend.

Checks provided here:
- Jacobi over generator triples (symbolic or at random points of F_p)
- Poisson / anti-Poisson maps between catalog algebras
- Casimir (centrality) checks
- bivector rank
- pattern and function-constraint reductions
- agreement of component formulas with their r-matrix forms
"""
import logging
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import combinations
from typing import Callable, Dict, Iterable, List, Optional, Sequence, Tuple

from app.models import AlgebraSpec, CheckOutcome, Q_CHOICES
from app.utils.errors import (InvalidPartition, MalformedQListError, NotPolynomialError, UnknownFamilyError,
                              WorkbenchError)
from app.utils.expr import Expr, MatrixExpr, entry_symbol
from app.utils.linalg import rank
from app.utils.polynomial import SparsePoly, poly_sum
from app.utils.ring import PrimeField, sign, theta
from app.utils.sampling import PointSampler
from app.utils.tensor import LegMatrix, classical_r, q_matrix

logger = logging.getLogger(__name__)

Pair = Tuple[str, str]


# -- r-matrix forms ----------------------------------------------------------

@lru_cache(maxsize=None)
def r_matrices(N: int) -> Dict[str, LegMatrix]:
    """r and its partial transposes t1, t2 and t1t2 (the full transpose)."""
    r = classical_r(N)
    return {'r': r, 't1': r.partial_transpose(1), 't2': r.partial_transpose(2), 't12': r.transpose()}


def symbol_matrix(name: str, N: int) -> LegMatrix:
    """One-leg operator whose (i, j) entry is the generator x_ij."""
    return LegMatrix(N, 1, {(i, j): SparsePoly.variable(entry_symbol(name, i + 1, j + 1))
                            for i in range(N) for j in range(N)})


def _legs(X: LegMatrix, Y: LegMatrix) -> Tuple[LegMatrix, LegMatrix]:
    return X.place((1,), 2), Y.place((2,), 2)


def reflection_form(X, Y, R, Q=None):
    """r X1Y2 - X1Y2 r + X1 r^{t1} Y2 - Y2 r^{t1} X1."""
    X1, Y2 = _legs(X, Y)
    r, rt1 = R['r'], R['t1']
    return r @ X1 @ Y2 - X1 @ Y2 @ r + X1 @ rt1 @ Y2 - Y2 @ rt1 @ X1


def negative_reflection_form(X, Y, R, Q=None):
    return -reflection_form(X, Y, R)


def lie_poisson_form(X, Y, R, Q=None):
    """r X1Y2 - X1Y2 r."""
    X1, Y2 = _legs(X, Y)
    return R['r'] @ X1 @ Y2 - X1 @ Y2 @ R['r']


def q_form(X, Y, R, Q):
    """{B1, A2} = B1 Q A2 + B1 A2 Q^{t2}."""
    X1, Y2 = _legs(X, Y)
    return X1 @ Q @ Y2 + X1 @ Y2 @ Q.partial_transpose(2)


def chain_form(X, Y, R, Q):
    """{B_{k+1}1, B_k2} = B_{k+1}1 Q B_k2."""
    X1, Y2 = _legs(X, Y)
    return X1 @ Q @ Y2


def s_b_form(X, Y, R, Q=None):
    S1, B2 = _legs(X, Y)
    return S1 @ R['t12'] @ B2 + B2 @ R['t2'] @ S1


def s_a_form(X, Y, R, Q=None):
    S1, A2 = _legs(X, Y)
    return R['r'] @ S1 @ A2 + A2 @ R['t2'] @ S1


def s_s_form(X, Y, R, Q=None):
    S1, S2 = _legs(X, Y)
    return R['r'] @ S1 @ S2 - S1 @ S2 @ R['t12']


def s_b_iii_form(X, Y, R, Q=None):
    S1, B2 = _legs(X, Y)
    return -(S1 @ R['r'] @ B2) - B2 @ R['t1'] @ S1


def s_a_iii_form(X, Y, R, Q=None):
    S1, A2 = _legs(X, Y)
    return -(R['t12'] @ S1 @ A2) - A2 @ R['t1'] @ S1


def plb_form(X, Y, R, Q=None):
    """{B1, F2} = B1 r F2 - B1F2 r^{t1}."""
    B1, F2 = _legs(X, Y)
    return B1 @ R['r'] @ F2 - B1 @ F2 @ R['t1']


def tilde_b_form(X, Y, R, Q=None):
    """{B1, F̃2} = r B1F̃2 - F̃2 r^{t1} B1."""
    B1, F2 = _legs(X, Y)
    return R['r'] @ B1 @ F2 - F2 @ R['t1'] @ B1


FORMS: Dict[str, Callable] = {
    'reflection': reflection_form,
    'neg-reflection': negative_reflection_form,
    'lie-poisson': lie_poisson_form,
    'q-form': q_form,
    'chain': chain_form,
    's-b': s_b_form,
    's-a': s_a_form,
    's-s': s_s_form,
    's-b-iii': s_b_iii_form,
    's-a-iii': s_a_iii_form,
    'plb': plb_form,
    'tilde-b': tilde_b_form,
}


# -- family blueprints -------------------------------------------------------

@dataclass(frozen=True)
class BracketBlock:
    """{left ⊗ right} given by a named form, optionally with a Q selector."""
    left: str
    right: str
    form: str
    q: Optional[str] = None
    weight: int = 1


def chain_selectors(spec: AlgebraSpec) -> List[str]:
    """Q^{[k]} for k = 1..j-1; defaults to case (ii) throughout."""
    j = spec.chain_length
    if spec.chain_q is None:
        return ['ii'] * (j - 1)
    if len(spec.chain_q) != j - 1:
        raise MalformedQListError(f"chain of length {j} needs {j - 1} Q selectors, got {len(spec.chain_q)}",
                                  witness=str(spec.chain_q))
    for sel in spec.chain_q:
        if sel not in Q_CHOICES:
            raise MalformedQListError(f"unknown Q selector {sel!r} in chain list", witness=sel)
    return list(spec.chain_q)


def family_blueprint(spec: AlgebraSpec) -> Tuple[List[str], List[BracketBlock]]:
    """Matrix blocks and bracket blocks of a catalog family."""
    family, q = spec.family, spec.q
    if family == 'A':
        return ['a'], [BracketBlock('a', 'a', 'reflection')]
    if family == 'B':
        return ['b'], [BracketBlock('b', 'b', 'lie-poisson')]
    if family == 'BC':
        return ['b', 'c'], [BracketBlock('b', 'b', 'lie-poisson'), BracketBlock('c', 'c', 'lie-poisson'),
                            BracketBlock('c', 'b', 'lie-poisson')]
    if family == 'AB':
        return ['a', 'b'], [BracketBlock('a', 'a', 'reflection'), BracketBlock('b', 'b', 'lie-poisson'),
                            BracketBlock('b', 'a', 'q-form', q)]
    if family == 'ABC':
        return ['a', 'b', 'c'], [
            BracketBlock('a', 'a', 'reflection'), BracketBlock('b', 'b', 'lie-poisson'),
            BracketBlock('c', 'c', 'lie-poisson'), BracketBlock('c', 'b', 'lie-poisson'),
            BracketBlock('b', 'a', 'q-form', q), BracketBlock('c', 'a', 'q-form', q)]
    if family == 'B-chain':
        links = chain_selectors(spec)
        j = spec.chain_length
        names = ['a'] + [f"b{k}" for k in range(1, j + 1)]
        blocks = [BracketBlock('a', 'a', 'reflection'), BracketBlock('b1', 'a', 'q-form', q)]
        blocks += [BracketBlock(f"b{k}", f"b{k}", 'lie-poisson') for k in range(1, j + 1)]
        blocks += [BracketBlock(f"b{k + 1}", f"b{k}", 'chain', links[k - 1]) for k in range(1, j)]
        return names, blocks
    if family == 'BC-chain':
        links = chain_selectors(spec)
        j = spec.chain_length
        names = ['a']
        blocks = [BracketBlock('a', 'a', 'reflection'), BracketBlock('b1', 'a', 'q-form', q),
                  BracketBlock('c1', 'a', 'q-form', q)]
        for k in range(1, j + 1):
            b, c = f"b{k}", f"c{k}"
            names += [b, c]
            blocks += [BracketBlock(b, b, 'lie-poisson'), BracketBlock(c, c, 'lie-poisson'),
                       BracketBlock(c, b, 'lie-poisson')]
        for k in range(1, j):
            sel = links[k - 1]
            for upper in (f"b{k + 1}", f"c{k + 1}"):
                for lower in (f"b{k}", f"c{k}"):
                    blocks.append(BracketBlock(upper, lower, 'chain', sel))
        return names, blocks
    if family == 'S-extended':
        if spec.case == 'ii':
            sb, sa = 's-b', 's-a'
        else:
            sb, sa = 's-b-iii', 's-a-iii'
        return ['s', 'b', 'a'], [
            BracketBlock('s', 's', 's-s'), BracketBlock('s', 'b', sb), BracketBlock('s', 'a', sa),
            BracketBlock('b', 'b', 'lie-poisson'), BracketBlock('a', 'a', 'reflection'),
            BracketBlock('b', 'a', 'q-form', spec.case)]
    if family == 'FB-groupoid':
        return ['f', 'b'], [BracketBlock('f', 'f', 'neg-reflection'), BracketBlock('b', 'b', 'lie-poisson'),
                            BracketBlock('b', 'f', 'plb')]
    if family == 'B-tilde':
        return ['b', 'ft'], [BracketBlock('b', 'b', 'lie-poisson'), BracketBlock('ft', 'ft', 'reflection'),
                             BracketBlock('b', 'ft', 'tilde-b')]
    if family == 'FB-triple':
        names, blocks = [], []
        for copy, weight in ((1, 1), (2, 1), (3, -1)):
            f, b = f"f{copy}", f"b{copy}"
            names += [f, b]
            blocks += [BracketBlock(f, f, 'neg-reflection', weight=weight),
                       BracketBlock(b, b, 'lie-poisson', weight=weight),
                       BracketBlock(b, f, 'plb', weight=weight)]
        return names, blocks
    raise UnknownFamilyError(f"unknown algebra family {family!r}", witness=family)


# -- the algebra -------------------------------------------------------------

class PoissonAlgebra:
    """Generators with an antisymmetric quadratic bracket table.

    `table` holds both orders of every nonzero generator pair; missing pairs
    Poisson commute.
    """

    def __init__(self, spec: AlgebraSpec, matrices: Sequence[str], table: Dict[Pair, SparsePoly]):
        self.spec = spec
        self.N = spec.N
        self.matrix_names = list(matrices)
        self.generators = [entry_symbol(m, i + 1, j + 1)
                           for m in self.matrix_names for i in range(self.N) for j in range(self.N)]
        self.index = {g: n for n, g in enumerate(self.generators)}
        self.table = {k: v for k, v in table.items() if v}
        self.neighbours: Dict[str, Dict[str, SparsePoly]] = {g: {} for g in self.generators}
        for (x, y), value in self.table.items():
            self.neighbours[x][y] = value
        self._partials: Dict[Pair, Dict[str, SparsePoly]] = {}

    @property
    def name(self) -> str:
        return self.spec.label()

    def pair(self, x: str, y: str) -> SparsePoly:
        return self.table.get((x, y), SparsePoly.zero())

    def pair_partials(self, x: str, y: str) -> Dict[str, SparsePoly]:
        key = (x, y)
        if key not in self._partials:
            p = self.pair(x, y)
            self._partials[key] = {v: p.partial(v) for v in p.variables() if v in self.index}
        return self._partials[key]

    def matrix(self, name: str) -> MatrixExpr:
        if name not in self.matrix_names:
            raise WorkbenchError(f"{self.name} has no matrix {name!r}")
        return MatrixExpr.symbols(name, self.N)

    def bracket_poly(self, f, g) -> SparsePoly:
        """Leibniz extension Σ ∂f/∂x ∂g/∂y {x, y}; other variables are constants."""
        f = SparsePoly.coerce(f)
        g = SparsePoly.coerce(g)
        df = {x: f.partial(x) for x in f.variables() if x in self.index}
        if not df:
            return SparsePoly.zero()
        dg = {y: g.partial(y) for y in g.variables() if y in self.index}
        terms = []
        for x, fx in df.items():
            row = self.neighbours[x]
            for y, gy in dg.items():
                pxy = row.get(y)
                if pxy is not None:
                    terms.append(fx * gy * pxy)
        return poly_sum(terms)

    def lie_derivative(self, g: str, p_partials: Dict[str, SparsePoly]) -> SparsePoly:
        """{g, P} from the partials of P."""
        row = self.neighbours[g]
        return poly_sum(dp * row[x] for x, dp in p_partials.items() if x in row)

    def antisymmetry_defects(self) -> List[Pair]:
        out = []
        for (x, y), value in self.table.items():
            if x == y or self.pair(y, x) != -value:
                out.append((x, y))
        return sorted(out)

    def __repr__(self):
        return f"PoissonAlgebra({self.name}, N={self.N}, generators={len(self.generators)})"


ALGEBRA_CACHE_SIZE = 64


def _spec_key(spec: AlgebraSpec) -> tuple:
    chain_q = None if spec.chain_q is None else tuple(spec.chain_q)
    return spec.family, spec.N, spec.q, spec.chain_length, chain_q, spec.case, spec.scale


def build_algebra(spec: AlgebraSpec) -> PoissonAlgebra:
    """Populate the bracket table of a catalog algebra.

    The last ALGEBRA_CACHE_SIZE algebras are kept, keyed by their spec fields.

    Raises:
        UnknownFamilyError: family outside the catalog
        MalformedQListError: chain Q list of the wrong length or with unknown selectors
    """
    return _cached_algebra(_spec_key(spec))


@lru_cache(maxsize=ALGEBRA_CACHE_SIZE)
def _cached_algebra(key: tuple) -> PoissonAlgebra:
    family, N, q, chain_length, chain_q, case, scale = key
    spec = AlgebraSpec(family=family, N=N, q=q, chain_length=chain_length,
                       chain_q=None if chain_q is None else list(chain_q), case=case, scale=scale)
    matrices, blocks = family_blueprint(spec)
    R = r_matrices(N)
    symbols = {m: symbol_matrix(m, N) for m in matrices}
    scale = Fraction(1, 2) if spec.scale == 'component' else Fraction(1)
    table: Dict[Pair, SparsePoly] = {}
    for block in blocks:
        Q = q_matrix(N, block.q) if block.q else None
        T = FORMS[block.form](symbols[block.left], symbols[block.right], R, Q)
        factor = scale * block.weight
        for (row, col), value in T.entries.items():
            i, k = T.digits(row)
            j, l = T.digits(col)
            x = entry_symbol(block.left, i + 1, j + 1)
            y = entry_symbol(block.right, k + 1, l + 1)
            value = SparsePoly.coerce(value) * factor
            table[(x, y)] = table[(x, y)] + value if (x, y) in table else value
            if block.left != block.right:
                table[(y, x)] = table[(y, x)] - value if (y, x) in table else -value
    alg = PoissonAlgebra(spec, matrices, table)
    logger.debug(f"Built {alg!r} with {len(alg.table)} table entries")
    return alg


def clear_algebra_cache() -> None:
    _cached_algebra.cache_clear()


def algebra_for(family: str, N: int, **fields) -> PoissonAlgebra:
    return build_algebra(AlgebraSpec(family=family, N=N, **fields))


# -- bracket evaluation ------------------------------------------------------

def bracket(alg: PoissonAlgebra, f, g) -> Expr:
    """Symbolic bracket of two polynomial expressions.

    Raises:
        NotPolynomialError: f or g contains a quotient; use bracket_at_point
    """
    f, g = Expr.lift(f), Expr.lift(g)
    if not (f.is_polynomial() and g.is_polynomial()):
        raise NotPolynomialError("symbolic bracket needs polynomial arguments; use the point backend")
    return Expr.poly(alg.bracket_poly(f.to_poly(), g.to_poly()))


def rational_bracket(alg: PoissonAlgebra, f: Expr, g: str) -> SparsePoly:
    """Numerator of {f, g} for rational f and a generator g, cross-multiplied by den(f)^2."""
    num, den = Expr.lift(f).numerator_denominator()
    gp = SparsePoly.variable(g)
    return alg.bracket_poly(num, gp) * den - num * alg.bracket_poly(den, gp)


class PointContext:
    """Bracket values at one point, with table values and gradients cached."""

    def __init__(self, alg: PoissonAlgebra, point: Dict[str, object]):
        self.alg = alg
        self.point = point
        self._pi: Dict[Pair, object] = {}
        self._grads: Dict[int, Dict[str, object]] = {}

    def pi(self, x: str, y: str):
        key = (x, y)
        if key not in self._pi:
            self._pi[key] = self.alg.pair(x, y).evaluate(self.point)
        return self._pi[key]

    def gradient(self, expr: Expr) -> Dict[str, object]:
        key = id(expr)
        if key not in self._grads:
            self._grads[key] = (expr, Expr.lift(expr).gradient_at(self.point))
        return self._grads[key][1]

    def hamiltonian(self, expr: Expr) -> Dict[str, object]:
        """{expr, y} for every generator y with a nonzero value."""
        out: Dict[str, object] = {}
        for x, gx in self.gradient(expr).items():
            if x not in self.alg.index or not gx:
                continue
            for y in self.alg.neighbours[x]:
                term = gx * self.pi(x, y)
                out[y] = out[y] + term if y in out else term
        return out

    def bracket(self, f: Expr, g: Expr):
        ham = self.hamiltonian(f)
        grad = self.gradient(g)
        total = 0
        for y, value in ham.items():
            gy = grad.get(y)
            if gy:
                total = total + value * gy
        return total


def bracket_at_point(alg: PoissonAlgebra, f, g, point: Dict[str, object]):
    """{f, g} at a point; denominators must not vanish there."""
    return PointContext(alg, point).bracket(Expr.lift(f), Expr.lift(g))


def _default_sampler(sampler: Optional[PointSampler]) -> PointSampler:
    return sampler if sampler is not None else PointSampler(PrimeField(), 0)


def _sample_variables(alg: PoissonAlgebra, exprs: Iterable[Expr]) -> List[str]:
    names = set(alg.generators)
    for e in exprs:
        names |= Expr.lift(e).variables()
    return sorted(names)


# -- Jacobi ------------------------------------------------------------------

def jacobi_check(alg: PoissonAlgebra, backend: str = 'symbolic', sampler: Optional[PointSampler] = None,
                 trials: int = 20) -> CheckOutcome:
    """Cyclic sums {g_i, {g_j, g_k}} + cyc over all generator triples.

    By the Leibniz rule, generator triples suffice for all polynomials.
    """
    gens = alg.generators
    triples = [t for t in combinations(gens, 3)
               if (t[1], t[2]) in alg.table or (t[2], t[0]) in alg.table or (t[0], t[1]) in alg.table]
    if backend == 'symbolic':
        for x, y, z in triples:
            residual = (alg.lie_derivative(x, alg.pair_partials(y, z))
                        + alg.lie_derivative(y, alg.pair_partials(z, x))
                        + alg.lie_derivative(z, alg.pair_partials(x, y)))
            if residual:
                return CheckOutcome(passed=False, witness=f"triple ({x}, {y}, {z}) residual {residual}",
                                    details={'backend': 'symbolic', 'triples': len(triples)})
        return CheckOutcome(passed=True, details={'backend': 'symbolic', 'triples': len(triples)})

    sampler = _default_sampler(sampler)
    for trial in range(trials):
        point = sampler.point(gens)
        ctx = PointContext(alg, point)
        grads: Dict[Pair, Dict[str, object]] = {}

        def grad(u, v):
            if (u, v) not in grads:
                grads[(u, v)] = {w: dp.evaluate(point) for w, dp in alg.pair_partials(u, v).items()}
            return grads[(u, v)]

        def lie(g, u, v):
            total = 0
            row = alg.neighbours[g]
            for w, dw in grad(u, v).items():
                if w in row:
                    total = total + dw * ctx.pi(g, w)
            return total

        for x, y, z in triples:
            residual = lie(x, y, z) + lie(y, z, x) + lie(z, x, y)
            if residual:
                return CheckOutcome(passed=False,
                                    witness=f"triple ({x}, {y}, {z}) residual {residual} at trial {trial}",
                                    details={'backend': 'modular', 'trials': trial + 1})
    return CheckOutcome(passed=True, details={
        'backend': 'modular', 'trials': trials, 'triples': len(triples),
        'error_bound': str(sampler.field.error_bound(3))})


# -- Poisson maps ------------------------------------------------------------

class _SignTracker:
    def __init__(self):
        self.plus = True
        self.minus = True
        self.witness: Optional[str] = None

    def update(self, label: str, lhs, rhs):
        if lhs != rhs:
            self.plus = False
        if lhs != -rhs:
            self.minus = False
        if not (self.plus or self.minus) and self.witness is None:
            self.witness = f"pair {label}: source bracket {lhs} vs target {rhs}"

    @property
    def sign(self) -> str:
        if self.plus:
            return 'poisson'
        if self.minus:
            return 'anti'
        return 'neither'

    @property
    def settled(self) -> bool:
        return not (self.plus or self.minus)


def poisson_map_check(source: PoissonAlgebra, mapping: Dict[str, Expr], target: PoissonAlgebra,
                      mode: str = 'auto', backend: str = 'symbolic', sampler: Optional[PointSampler] = None,
                      trials: int = 20) -> CheckOutcome:
    """Compare {φ(u), φ(v)}_source with ±ψ_uv(φ) for every target pair.

    `mapping` sends each target generator to an expression over the source
    generators. Ties (every pair commuting) count as 'poisson'.
    """
    if mode not in ('auto', 'poisson', 'anti'):
        raise WorkbenchError(f"unknown map mode {mode!r}")
    missing = [u for u in target.generators if u not in mapping]
    if missing:
        raise WorkbenchError(f"map leaves target generators undefined: {missing[:3]}")
    images = {u: Expr.lift(mapping[u]) for u in target.generators}
    tracker = _SignTracker()
    pairs = list(combinations(target.generators, 2))
    polynomial = all(e.is_polynomial() for e in images.values())

    if backend == 'symbolic' and polynomial:
        used = 'symbolic'
        polys = {u: e.to_poly() for u, e in images.items()}
        for u, v in pairs:
            lhs = source.bracket_poly(polys[u], polys[v])
            rhs = target.pair(u, v).substitute(polys)
            tracker.update(f"({u}, {v})", lhs, rhs)
            if tracker.settled:
                break
    else:
        used = 'modular'
        sampler = _default_sampler(sampler)
        variables = _sample_variables(source, images.values())
        for _ in range(trials):
            def attempt(rng):
                point = sampler.point(variables)
                ctx = PointContext(source, point)
                values = {u: e.evaluate(point) for u, e in images.items()}
                hams = {u: ctx.hamiltonian(e) for u, e in images.items()}
                out = []
                for u, v in pairs:
                    grad_v = ctx.gradient(images[v])
                    lhs = 0
                    for y, value in hams[u].items():
                        gy = grad_v.get(y)
                        if gy:
                            lhs = lhs + value * gy
                    out.append((u, v, lhs, target.pair(u, v).evaluate(values)))
                return out

            for u, v, lhs, rhs in sampler.draw(attempt, label='map point'):
                tracker.update(f"({u}, {v})", lhs, rhs)
            if tracker.settled:
                break

    if mode == 'auto':
        passed = tracker.sign != 'neither'
    elif mode == 'poisson':
        passed = tracker.plus
    else:
        passed = tracker.minus
    details = {'sign': tracker.sign, 'backend': used, 'pairs': len(pairs), 'mode': mode}
    if passed:
        return CheckOutcome(passed=True, details=details)
    witness = tracker.witness or f"map is {tracker.sign}, not {mode}"
    return CheckOutcome(passed=False, witness=witness, details=details)


# -- centrality and rank ------------------------------------------------------

def casimir_check(alg: PoissonAlgebra, candidate, backend: str = 'symbolic',
                  sampler: Optional[PointSampler] = None, trials: int = 20) -> CheckOutcome:
    """{candidate, g} = 0 for every generator g.

    Polynomials are decided exactly; quotients are cross-multiplied when
    N <= 2 and otherwise evaluated at random points.
    """
    candidate = Expr.lift(candidate)
    if backend == 'symbolic' and candidate.is_polynomial():
        p = candidate.to_poly()
        for g in alg.generators:
            value = alg.bracket_poly(p, SparsePoly.variable(g))
            if value:
                return CheckOutcome(passed=False, witness=f"{{candidate, {g}}} = {value}",
                                    details={'backend': 'symbolic'})
        return CheckOutcome(passed=True, details={'backend': 'symbolic'})
    if backend == 'symbolic' and alg.N <= 2:
        for g in alg.generators:
            value = rational_bracket(alg, candidate, g)
            if value:
                return CheckOutcome(passed=False, witness=f"numerator of {{candidate, {g}}} = {value}",
                                    details={'backend': 'symbolic-rational'})
        return CheckOutcome(passed=True, details={'backend': 'symbolic-rational'})

    sampler = _default_sampler(sampler)
    variables = _sample_variables(alg, [candidate])
    for trial in range(trials):
        def attempt(rng):
            point = sampler.point(variables)
            candidate.evaluate(point)
            return PointContext(alg, point).hamiltonian(candidate)

        ham = sampler.draw(attempt, label='casimir point')
        for g in alg.generators:
            value = ham.get(g, 0)
            if value:
                return CheckOutcome(passed=False, witness=f"{{candidate, {g}}} = {value} at trial {trial}",
                                    details={'backend': 'modular'})
    return CheckOutcome(passed=True, details={
        'backend': 'modular', 'trials': trials, 'error_bound': str(sampler.field.error_bound(2))})


def bivector_matrix(alg: PoissonAlgebra, point: Dict[str, object]) -> List[List[object]]:
    gens = alg.generators
    return [[alg.pair(x, y).evaluate(point) if (x, y) in alg.table else 0 for y in gens] for x in gens]


def bivector_rank(alg: PoissonAlgebra, point: Dict[str, object]) -> int:
    """Rank of [{g_i, g_j}(point)] over the field of the point values."""
    return rank(bivector_matrix(alg, point))


def generic_rank(alg: PoissonAlgebra, sampler: Optional[PointSampler] = None, trials: int = 3) -> int:
    sampler = _default_sampler(sampler)
    return max(bivector_rank(alg, sampler.point(alg.generators)) for _ in range(trials))


# -- reductions ----------------------------------------------------------------

def staircase_pattern(matrix: str, N: int, steps: Sequence[int], kind: str = 'lower') -> List[str]:
    """Generators cut off by a staircase line.

    lower: row i (0-based) loses columns j < steps[i]; steps nondecreasing.
    upper: row i loses columns j >= N - steps[i]; steps nonincreasing.
    """
    if len(steps) != N:
        raise InvalidPartition(f"staircase needs {N} steps, got {len(steps)}")
    pairs = list(zip(steps, steps[1:]))
    if kind == 'lower' and any(a > b for a, b in pairs):
        raise InvalidPartition(f"lower staircase steps must be nondecreasing: {list(steps)}")
    if kind == 'upper' and any(a < b for a, b in pairs):
        raise InvalidPartition(f"upper staircase steps must be nonincreasing: {list(steps)}")
    out = []
    for i in range(N):
        for j in range(N):
            cut = j < steps[i] if kind == 'lower' else j >= N - steps[i]
            if cut:
                out.append(entry_symbol(matrix, i + 1, j + 1))
    return out


def lower_triangle(matrix: str, N: int) -> List[str]:
    return [entry_symbol(matrix, i + 1, j + 1) for i in range(N) for j in range(N) if i > j]


def pattern_reduction_check(alg: PoissonAlgebra, zero: Iterable[str] = (), unit: Iterable[str] = (),
                            equalities: Optional[Dict[str, str]] = None) -> CheckOutcome:
    """Every bracket of a constraint with a generator vanishes on the pattern.

    Constraints are x (zero pattern), x - 1 (unit pattern) and x - y for each
    equality x -> y; the surface substitutes them away.
    """
    equalities = dict(equalities or {})
    zero, unit = list(zero), list(unit)
    unknown = [g for g in zero + unit + list(equalities) + list(equalities.values()) if g not in alg.index]
    if unknown:
        raise WorkbenchError(f"pattern names unknown generators: {unknown[:3]}")
    surface: Dict[str, object] = {g: 0 for g in zero}
    surface.update({g: 1 for g in unit})
    surface.update({x: SparsePoly.variable(y) for x, y in equalities.items()})
    constraints = [(g, SparsePoly.variable(g)) for g in zero + unit]
    constraints += [(f"{x}-{y}", SparsePoly.variable(x) - SparsePoly.variable(y)) for x, y in equalities.items()]
    for label, c in constraints:
        for g in alg.generators:
            value = alg.bracket_poly(c, SparsePoly.variable(g)).substitute(surface)
            if value:
                return CheckOutcome(passed=False, witness=f"{{{label}, {g}}} = {value} on the pattern",
                                    details={'constraints': len(constraints)})
    return CheckOutcome(passed=True, details={'constraints': len(constraints)})


def constraint_reduction_check(alg: PoissonAlgebra, constraints: Sequence[Expr],
                               surface_point: Callable[[PointSampler], Dict[str, object]],
                               sampler: Optional[PointSampler] = None, trials: int = 20) -> CheckOutcome:
    """{C_k, g} = 0 for every constraint and generator at sampled surface points."""
    sampler = _default_sampler(sampler)
    constraints = [Expr.lift(c) for c in constraints]
    for trial in range(trials):
        def attempt(rng):
            point = surface_point(sampler)
            for k, c in enumerate(constraints):
                if c.evaluate(point):
                    raise WorkbenchError(f"surface sampler missed constraint {k}")
            ctx = PointContext(alg, point)
            return [ctx.hamiltonian(c) for c in constraints]

        for k, ham in enumerate(sampler.draw(attempt, label='surface point')):
            for g, value in ham.items():
                if value:
                    return CheckOutcome(passed=False,
                                        witness=f"{{C_{k}, {g}}} = {value} at trial {trial}",
                                        details={'backend': 'modular'})
    return CheckOutcome(passed=True, details={'backend': 'modular', 'trials': trials,
                                              'constraints': len(constraints)})


def commuting_blocks_check(alg: PoissonAlgebra, left: Iterable[Expr], right: Iterable[Expr]) -> CheckOutcome:
    """Every left expression Poisson commutes with every right one (polynomial, exact)."""
    right = [Expr.lift(e).to_poly() for e in right]
    for n, u in enumerate(left):
        u = Expr.lift(u).to_poly()
        for m, v in enumerate(right):
            value = alg.bracket_poly(u, v)
            if value:
                return CheckOutcome(passed=False, witness=f"bracket of entries {n} and {m} = {value}")
    return CheckOutcome(passed=True)


# -- component formulas ----------------------------------------------------------

def _v(name: str, i: int, j: int) -> SparsePoly:
    return SparsePoly.variable(entry_symbol(name, i, j))


def _component_A(i, j, k, l, N):
    return ((sign(j - l) + sign(i - k)) * _v('a', i, l) * _v('a', k, j)
            + (sign(j - k) + 1) * _v('a', j, l) * _v('a', i, k)
            + (sign(i - l) - 1) * _v('a', l, j) * _v('a', k, i))


def _component_B(i, j, k, l, N):
    return (sign(j - l) + sign(i - k)) * _v('b', i, l) * _v('b', k, j)


def _component_b_a(i, j, k, l, N):
    return -(_v('b', i, k) * _v('a', j, l) * theta(k - j)) - _v('b', i, l) * _v('a', k, j) * theta(l - j)


def _component_b_b(i, j, k, l, N):
    return _v('b', i, l) * _v('b', k, j) * (theta(i - k) - theta(l - j))


def _component_s_s(i, j, k, l, N):
    return _v('s', i, l) * _v('s', k, j) * (theta(i - k) - theta(j - l))


def _component_s_a(i, j, k, l, N):
    return _v('s', k, j) * _v('a', i, l) * theta(i - k) + _v('s', l, j) * _v('a', k, i) * theta(i - l)


def _component_s_b(i, j, k, l, N):
    total = _v('s', l, j) * _v('b', k, i) * theta(i - l)
    if j == k:
        total = total + poly_sum(_v('s', i, rho) * _v('b', rho, l) * theta(j - rho) for rho in range(1, N + 1))
    return total


def _component_plb(i, j, k, l, N):
    total = SparsePoly.zero()
    for s in range(1, N + 1):
        if k == j:
            total = total + _v('b', i, s) * _v('f', s, l) * theta(s - j)
        if j == l:
            total = total - _v('b', i, s) * _v('f', k, s) * theta(j - s)
    return total


def _component_tilde_b(i, j, k, l, N):
    return _v('b', k, j) * _v('ft', i, l) * theta(i - k) - _v('b', l, j) * _v('ft', k, i) * theta(l - i)


# kind -> (formula, left matrix, right matrix, algebra fields whose table it must reproduce)
COMPONENT_FORMULAS: Dict[str, tuple] = {
    'A': (_component_A, 'a', 'a', {'family': 'A'}),
    'B': (_component_B, 'b', 'b', {'family': 'B'}),
    'b-a': (_component_b_a, 'b', 'a', {'family': 'AB', 'q': 'ii', 'scale': 'component'}),
    'b-b': (_component_b_b, 'b', 'b', {'family': 'B', 'scale': 'component'}),
    's-s': (_component_s_s, 's', 's', {'family': 'S-extended', 'case': 'ii', 'scale': 'component'}),
    's-a': (_component_s_a, 's', 'a', {'family': 'S-extended', 'case': 'ii', 'scale': 'component'}),
    's-b': (_component_s_b, 's', 'b', {'family': 'S-extended', 'case': 'ii', 'scale': 'component'}),
    'plb': (_component_plb, 'b', 'f', {'family': 'FB-groupoid', 'scale': 'component'}),
    'tilde-b': (_component_tilde_b, 'b', 'ft', {'family': 'B-tilde', 'scale': 'component'}),
}


def component_table(kind: str, N: int) -> Dict[Pair, SparsePoly]:
    """Brackets {x_ij, y_kl} from the explicit component formula of `kind`."""
    if kind not in COMPONENT_FORMULAS:
        raise WorkbenchError(f"unknown component formula {kind!r}")
    formula, left, right, _ = COMPONENT_FORMULAS[kind]
    out = {}
    for i in range(1, N + 1):
        for j in range(1, N + 1):
            for k in range(1, N + 1):
                for l in range(1, N + 1):
                    out[(entry_symbol(left, i, j), entry_symbol(right, k, l))] = \
                        SparsePoly.coerce(formula(i, j, k, l, N))
    return out


def component_agreement_check(kind: str, N: int) -> CheckOutcome:
    """Component formula versus the r-matrix table in the matching normalization."""
    fields = COMPONENT_FORMULAS[kind][3]
    alg = algebra_for(N=N, **fields)
    for (x, y), expected in component_table(kind, N).items():
        actual = alg.pair(x, y)
        if actual != expected:
            return CheckOutcome(passed=False, witness=f"{{{x}, {y}}}: r-matrix {actual} vs component {expected}",
                                details={'algebra': alg.name, 'scale': alg.spec.scale})
    return CheckOutcome(passed=True, details={'algebra': alg.name, 'scale': alg.spec.scale})


# -- named maps between catalog algebras -----------------------------------------

def matrix_images(name: str, m: MatrixExpr) -> Dict[str, Expr]:
    return {entry_symbol(name, i + 1, j + 1): x for (i, j), x in m.entries()}


def _target(source: PoissonAlgebra, family: str, **fields) -> AlgebraSpec:
    return AlgebraSpec(family=family, N=source.N, scale=source.spec.scale, **fields)


_DUAL_Q = {'ii': 'iii', 'iii': 'ii'}


def _map_identity(alg):
    return alg.spec, {g: Expr.symbol(g) for g in alg.generators}


def _map_babt(alg):
    A, B = alg.matrix('a'), alg.matrix('b')
    return _target(alg, 'A'), matrix_images('a', B @ A @ B.T)


def _map_bact(alg):
    A, B, C = alg.matrix('a'), alg.matrix('b'), alg.matrix('c')
    return _target(alg, 'A'), matrix_images('a', B @ A @ C.T)


def _map_frak_a(alg):
    A, B = alg.matrix('a'), alg.matrix('b')
    return _target(alg, 'A'), matrix_images('a', B @ A.inverse().T @ B.T)


def _map_frak_a_bc(alg):
    A, B, C = alg.matrix('a'), alg.matrix('b'), alg.matrix('c')
    return _target(alg, 'A'), matrix_images('a', B @ A.inverse().T @ C.T)


def _map_theta(alg):
    B, C = alg.matrix('b'), alg.matrix('c')
    images = matrix_images('b', C.inverse().T)
    images.update(matrix_images('c', B.inverse().T))
    return alg.spec, images


def _map_bct(alg):
    B, C = alg.matrix('b'), alg.matrix('c')
    return _target(alg, 'A'), matrix_images('a', B @ C.T)


def _map_duality(alg):
    A, B = alg.matrix('a'), alg.matrix('b')
    images = matrix_images('a', A.inverse())
    images.update(matrix_images('b', B.inverse().T))
    return _target(alg, 'AB', q=_DUAL_Q.get(alg.spec.q, alg.spec.q)), images


def _map_duality_abc(alg):
    A, B, C = alg.matrix('a'), alg.matrix('b'), alg.matrix('c')
    images = matrix_images('a', A.inverse())
    images.update(matrix_images('b', C.inverse().T))
    images.update(matrix_images('c', B.inverse().T))
    return _target(alg, 'ABC', q=_DUAL_Q.get(alg.spec.q, alg.spec.q)), images


def _map_s_matrix(alg):
    A, B = alg.matrix('a'), alg.matrix('b')
    case = alg.spec.q
    if case not in ('ii', 'iii'):
        raise WorkbenchError("the S-matrix map needs case (ii) or (iii)")
    S = A.T @ B.inverse() if case == 'ii' else A @ B.inverse()
    images = matrix_images('s', S)
    images.update(matrix_images('b', B))
    images.update(matrix_images('a', A))
    return _target(alg, 'S-extended', case=case), images


def _first_link(alg) -> str:
    return chain_selectors(alg.spec)[0]


def _need_two_links(alg):
    if alg.spec.chain_length < 2:
        raise WorkbenchError("chain maps need at least two links")


def _map_chain_drop(alg):
    _need_two_links(alg)
    images = matrix_images('a', alg.matrix('a'))
    images.update(matrix_images('b', alg.matrix('b1')))
    return _target(alg, 'AB', q=alg.spec.q), images


def _map_chain_product(alg):
    _need_two_links(alg)
    images = matrix_images('a', alg.matrix('a'))
    images.update(matrix_images('b', alg.matrix('b2') @ alg.matrix('b1')))
    return _target(alg, 'AB', q=alg.spec.q), images


def _map_chain_shift(alg):
    _need_two_links(alg)
    A, B1 = alg.matrix('a'), alg.matrix('b1')
    images = matrix_images('a', B1 @ A @ B1.T)
    images.update(matrix_images('b', alg.matrix('b2')))
    return _target(alg, 'AB', q=_first_link(alg)), images


def _map_bc_chain_drop(alg):
    _need_two_links(alg)
    images = matrix_images('a', alg.matrix('a'))
    images.update(matrix_images('b', alg.matrix('b1')))
    images.update(matrix_images('c', alg.matrix('c1')))
    return _target(alg, 'ABC', q=alg.spec.q), images


def _map_bc_chain_product(alg):
    _need_two_links(alg)
    images = matrix_images('a', alg.matrix('a'))
    images.update(matrix_images('b', alg.matrix('b2') @ alg.matrix('b1')))
    images.update(matrix_images('c', alg.matrix('c2') @ alg.matrix('c1')))
    return _target(alg, 'ABC', q=alg.spec.q), images


def _map_bc_chain_shift(alg):
    _need_two_links(alg)
    A, B1, C1 = alg.matrix('a'), alg.matrix('b1'), alg.matrix('c1')
    images = matrix_images('a', B1 @ A @ C1.T)
    images.update(matrix_images('b', alg.matrix('b2')))
    images.update(matrix_images('c', alg.matrix('c2')))
    return _target(alg, 'ABC', q=_first_link(alg)), images


def _map_fb_source(alg):
    return _target(alg, 'A'), matrix_images('a', alg.matrix('f'))


def _map_fb_target(alg):
    F, B = alg.matrix('f'), alg.matrix('b')
    return _target(alg, 'A'), matrix_images('a', B @ F @ B.T)


def _map_fb_tilde(alg):
    F, B = alg.matrix('f'), alg.matrix('b')
    images = matrix_images('b', B)
    images.update(matrix_images('ft', B @ F @ B.T))
    return _target(alg, 'B-tilde'), images


@dataclass(frozen=True)
class MapDefinition:
    name: str
    families: Tuple[str, ...]
    claimed: str
    build: Callable
    summary: str


MAPS: Dict[str, MapDefinition] = {m.name: m for m in (
    MapDefinition('identity', (), 'poisson', _map_identity, "identity map"),
    MapDefinition('BABt', ('AB',), 'poisson', _map_babt, "A -> B A B^T onto the A algebra"),
    MapDefinition('BACt', ('ABC',), 'poisson', _map_bact, "A -> B A C^T onto the A algebra"),
    MapDefinition('frakA', ('AB',), 'poisson', _map_frak_a, "B A^{-T} B^T onto the A algebra"),
    MapDefinition('frakA-BC', ('ABC',), 'poisson', _map_frak_a_bc, "B A^{-T} C^T onto the A algebra"),
    MapDefinition('theta', ('BC',), 'anti', _map_theta, "(B, C) -> (C^{-T}, B^{-T})"),
    MapDefinition('BCt', ('BC',), 'poisson', _map_bct, "(B, C) -> B C^T onto the A algebra"),
    MapDefinition('duality', ('AB',), 'anti', _map_duality, "(A, B) -> (A^{-1}, B^{-T}), Q (ii) <-> (iii)"),
    MapDefinition('duality-ABC', ('ABC',), 'anti', _map_duality_abc,
                  "(A, B, C) -> (A^{-1}, C^{-T}, B^{-T}), Q (ii) <-> (iii)"),
    MapDefinition('S-matrix', ('AB',), 'poisson', _map_s_matrix,
                  "(A, B) -> (S, B, A), S = A^T B^{-1} (ii) or A B^{-1} (iii)"),
    MapDefinition('chain-drop', ('B-chain',), 'poisson', _map_chain_drop, "(A, B1, B2) -> (A, B1)"),
    MapDefinition('chain-product', ('B-chain',), 'poisson', _map_chain_product, "(A, B1, B2) -> (A, B2 B1)"),
    MapDefinition('chain-shift', ('B-chain',), 'poisson', _map_chain_shift,
                  "(A, B1, B2) -> (B1 A B1^T, B2)"),
    MapDefinition('bc-chain-drop', ('BC-chain',), 'poisson', _map_bc_chain_drop,
                  "(A, B1, C1, B2, C2) -> (A, B1, C1)"),
    MapDefinition('bc-chain-product', ('BC-chain',), 'poisson', _map_bc_chain_product,
                  "(A, B1, C1, B2, C2) -> (A, B2 B1, C2 C1)"),
    MapDefinition('bc-chain-shift', ('BC-chain',), 'poisson', _map_bc_chain_shift,
                  "(A, B1, C1, B2, C2) -> (B1 A C1^T, B2, C2)"),
    MapDefinition('fb-source', ('FB-groupoid',), 'anti', _map_fb_source, "(F, B) -> F onto the A algebra"),
    MapDefinition('fb-target', ('FB-groupoid',), 'poisson', _map_fb_target,
                  "(F, B) -> B F B^T onto the A algebra"),
    MapDefinition('fb-tilde', ('FB-groupoid',), 'poisson', _map_fb_tilde,
                  "(F, B) -> (B, B F B^T) onto the B-tilde algebra"),
)}


def named_map_check(name: str, source: PoissonAlgebra, mode: Optional[str] = None, backend: str = 'symbolic',
                    sampler: Optional[PointSampler] = None, trials: int = 20) -> CheckOutcome:
    """Run a catalog map; `mode` defaults to the claimed sign."""
    if name not in MAPS:
        raise WorkbenchError(f"unknown map {name!r}")
    definition = MAPS[name]
    if definition.families and source.spec.family not in definition.families:
        raise WorkbenchError(f"map {name} is defined on {definition.families}, not {source.spec.family}")
    target_spec, mapping = definition.build(source)
    target = build_algebra(target_spec)
    outcome = poisson_map_check(source, mapping, target, mode=mode or definition.claimed,
                                backend=backend, sampler=sampler, trials=trials)
    outcome.details.update({'map': name, 'target': target.name, 'claimed': definition.claimed})
    return outcome
