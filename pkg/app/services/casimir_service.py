"""
Casimir Service - central elements of the catalog algebras

Builds corner minors, determinant pencils and the chain matrix S, assembles
the central-element family of every supported system, and provides the
exponent calculus for minors whose brackets with generators are
log-scaling: {M, g} = c_g * M * g with constant integers c_g.
"""
import itertools
import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence

import numpy as np

from app.models import AlgebraSpec, CheckOutcome
from app.services.poisson_service import PointContext, PoissonAlgebra, build_algebra, casimir_check
from app.utils.errors import (DivisionByZero, NonScalingBracket, NotPolynomialError, UnsupportedSystemError,
                              WorkbenchError)
from app.utils.expr import Expr, MatrixExpr, entry_symbol, laplace_det
from app.utils.linalg import rank
from app.utils.polynomial import SparsePoly
from app.utils.ring import PrimeField, lift_signed
from app.utils.sampling import PointSampler

logger = logging.getLogger(__name__)

CORNERS = ('bottom-left', 'upper-right', 'principal-upper-left', 'principal-bottom-right')
PENCIL_PARAMETER = 'lam'


@dataclass(frozen=True)
class MinorSpec:
    """A d x d corner minor of a named matrix role (A, B_k, C_k, S, ...)."""
    corner: str
    size: int
    role: str = 'A'

    def __post_init__(self):
        if self.corner not in CORNERS:
            raise WorkbenchError(f"unknown minor corner {self.corner!r}")
        if self.size < 0:
            raise WorkbenchError(f"negative minor size {self.size}")


def corner_minor(m: MatrixExpr, spec: MinorSpec) -> Expr:
    """Determinant of the requested corner block; the 0 x 0 minor is 1."""
    N, d = m.n, spec.size
    if d > N:
        raise WorkbenchError(f"minor of size {d} in a {N}x{N} matrix")
    if d == 0:
        return Expr.const(1)
    low, high = list(range(d)), list(range(N - d, N))
    rows, cols = {
        'bottom-left': (high, low),
        'upper-right': (low, high),
        'principal-upper-left': (low, low),
        'principal-bottom-right': (high, high),
    }[spec.corner]
    return m.minor(rows, cols)


def minor(m: MatrixExpr, corner: str, d: int) -> Expr:
    return corner_minor(m, MinorSpec(corner, d))


def det_pencil(m1: MatrixExpr, m2: MatrixExpr, normalizer=None, symmetric: bool = False) -> Dict[int, Expr]:
    """λ-coefficients of det(m1 + λ m2) / normalizer, keyed by exponent.

    With `symmetric` the pencil is det(λ m1 + λ^{-1} m2), a Laurent
    polynomial with exponents -N, -N+2, ..., N.
    """
    if m1.n != m2.n:
        raise WorkbenchError("pencil matrices differ in size")
    lam = SparsePoly.variable(PENCIL_PARAMETER)
    if symmetric:
        left, right = lam, SparsePoly.variable(PENCIL_PARAMETER, -1)
    else:
        left, right = SparsePoly.one(), lam
    try:
        rows = [[m1[i, j].to_poly() * left + m2[i, j].to_poly() * right for j in range(m1.n)]
                for i in range(m1.n)]
    except NotPolynomialError:
        raise NotPolynomialError("pencil matrices must have polynomial entries")
    det = laplace_det(rows, one=SparsePoly.one(), zero=SparsePoly.zero())
    norm = Expr.lift(normalizer) if normalizer is not None else None
    out = {}
    for exponent, coeff in sorted(det.coefficients_in(PENCIL_PARAMETER).items()):
        value = Expr.poly(coeff)
        out[exponent] = value / norm if norm is not None else value
    return out


def build_chain_S(A: MatrixExpr, chain: Sequence[MatrixExpr], case: str = 'ii') -> MatrixExpr:
    """A^T B1^{-1} B2^T B3^{-1} ... (case ii) or A B1^{-1} B2^T ... (case iii).

    Odd positions contribute inverses, even positions transposes.
    """
    if case not in ('ii', 'iii'):
        raise WorkbenchError(f"chain matrix S is defined for cases ii and iii, not {case!r}")
    S = A.T if case == 'ii' else A
    for k, B in enumerate(chain, start=1):
        S = S @ (B.inverse() if k % 2 else B.T)
    return S


@dataclass
class CasimirFamily:
    system: str
    members: Dict[str, Expr]
    expected: int
    notes: List[str] = field(default_factory=list)

    def __len__(self):
        return len(self.members)


def _det(m: MatrixExpr) -> Expr:
    return m.det()


def _y_members(A: MatrixExpr, N: int) -> Dict[str, Expr]:
    pencil = det_pencil(A, A.T, normalizer=_det(A), symmetric=True)
    return {f"Y{p}": pencil[N - 2 * p] for p in range(1, N // 2 + 1) if (N - 2 * p) in pencil}


def _z_members(B: MatrixExpr, C: MatrixExpr, suffix: str = '') -> Dict[str, Expr]:
    pencil = det_pencil(B, C, normalizer=_det(B))
    return {f"Z{p}{suffix}": pencil[p] for p in range(1, B.n + 1) if p in pencil}


def _corners(case: str, odd: bool):
    """(S corner, B/C corner) for the chain parity and case."""
    if case == 'ii':
        return ('principal-upper-left' if odd else 'upper-right'), 'upper-right'
    return ('principal-bottom-right' if odd else 'bottom-left'), 'bottom-left'


def _x_members(S: MatrixExpr, minor_mats: Sequence[MatrixExpr], prefactor: Expr, case: str,
               N: int) -> Dict[str, Expr]:
    """X_p for a chain of length len(minor_mats) built on the matrix S."""
    j = len(minor_mats)
    odd = j % 2 == 1
    s_corner, m_corner = _corners(case, odd)

    def ms(q):
        return minor(S, s_corner, q)

    def mk(k, q):
        return minor(minor_mats[k - 1], m_corner, q)

    out = {}
    if odd:
        for p in range(1, N // 2 + 1):
            num = ms(p) * ms(N - p)
            den = Expr.const(1)
            for k in range(1, j + 1):
                pair = mk(k, p) * mk(k, N - p)
                if k % 2:
                    den = den * pair
                else:
                    num = num * pair
            out[f"X{p}"] = num / den * prefactor
    else:
        for p in range(0, (N + 1) // 2):
            num, den = ms(p), ms(N - p)
            for k in range(1, j + 1):
                num = num * mk(k, p)
                den = den * mk(k, N - p)
            out[f"X{p}"] = num / den
    return out


def _chain_prefactor(A: MatrixExpr, bs: Sequence[MatrixExpr], cs: Optional[Sequence[MatrixExpr]]) -> Expr:
    """Determinant prefactor of the odd-chain X_p."""
    num, den = Expr.const(1), _det(A)
    for k, B in enumerate(bs, start=1):
        if cs is None:
            factor = _det(B) * _det(B)
        else:
            factor = _det(B) * _det(cs[k - 1])
        if k % 2:
            num = num * factor
        else:
            den = den * factor
    return num / den


def chain_k_composite(S: MatrixExpr, chain: Sequence[MatrixExpr], p: int, case: str = 'ii') -> Expr:
    """K^p: alternating ratio of S and chain minors."""
    N = S.n
    j = len(chain)
    s_corner, m_corner = _corners(case, j % 2 == 1)
    value = minor(S, s_corner, p)
    for k, B in enumerate(chain, start=1):
        if k % 2:
            value = value / minor(B, m_corner, N - p)
        else:
            value = value * minor(B, m_corner, p)
    return value


def casimir_family(spec: AlgebraSpec) -> CasimirFamily:
    """Central elements of a catalog system.

    Raises:
        UnsupportedSystemError: systems without a known family (case i, custom Q,
            S-extended and the (F, B) algebras)
    """
    N = spec.N
    family = spec.family
    A = MatrixExpr.symbols('a', N)
    if family == 'A':
        pencil = det_pencil(A, A.T)
        members = {f"r{k}": pencil[k] for k in range(0, N // 2 + 1) if k in pencil}
        for d in range(1, (N - 1) // 2 + 1):
            members[f"b{d}"] = minor(A, 'bottom-left', d) / minor(A, 'bottom-left', N - d)
        return CasimirFamily(spec.label(), members, N)
    if family == 'B':
        B = MatrixExpr.symbols('b', N)
        members = {f"c{d}": minor(B, 'upper-right', d) / minor(B, 'bottom-left', N - d)
                   for d in range(1, N + 1)}
        return CasimirFamily(spec.label(), members, N)
    if family == 'BC':
        B, C = MatrixExpr.symbols('b', N), MatrixExpr.symbols('c', N)
        members = {f"m{d}": minor(B, 'bottom-left', d) / minor(C, 'upper-right', N - d) for d in range(N + 1)}
        members.update({f"q{s}": value for s, value in det_pencil(B, C).items()})
        return CasimirFamily(spec.label(), members, 2 * N,
                             notes=["det B and det C appear in both sets"])

    case = spec.q
    if family not in ('AB', 'ABC', 'B-chain', 'BC-chain') or case not in ('ii', 'iii'):
        raise UnsupportedSystemError(f"no central-element family for {spec.label()}", witness=spec.label())

    if family == 'AB':
        B = MatrixExpr.symbols('b', N)
        S = build_chain_S(A, [B], case)
        members = _y_members(A, N)
        members.update(_x_members(S, [B], _chain_prefactor(A, [B], None), case, N))
        return CasimirFamily(spec.label(), members, 2 * (N // 2))
    if family == 'ABC':
        B, C = MatrixExpr.symbols('b', N), MatrixExpr.symbols('c', N)
        # case iii swaps the roles: S built on C, minors taken from B
        S = build_chain_S(A, [B] if case == 'ii' else [C], case)
        minors_of = C if case == 'ii' else B
        prefactor = _det(B) * _det(C) / _det(A)
        members = _y_members(A, N)
        members.update(_x_members(S, [minors_of], prefactor, case, N))
        members.update(_z_members(B, C))
        return CasimirFamily(spec.label(), members, 2 * (N // 2) + N)

    j = spec.chain_length
    bs = [MatrixExpr.symbols(f"b{k}", N) for k in range(1, j + 1)]
    S = build_chain_S(A, bs, case)
    members = _y_members(A, N)
    if family == 'B-chain':
        members.update(_x_members(S, bs, _chain_prefactor(A, bs, None), case, N))
        expected = N if j % 2 == 0 else 2 * (N // 2)
        return CasimirFamily(spec.label(), members, expected)
    cs = [MatrixExpr.symbols(f"c{k}", N) for k in range(1, j + 1)]
    members.update(_x_members(S, cs, _chain_prefactor(A, bs, cs), case, N))
    for k in range(1, j + 1):
        members.update(_z_members(bs[k - 1], cs[k - 1], suffix=f"^({k})"))
    expected = N * (j + 1) if j % 2 == 0 else 2 * (N // 2) + N * j
    return CasimirFamily(spec.label(), members, expected)


def family_check(spec: AlgebraSpec, backend: str = 'modular', sampler: Optional[PointSampler] = None,
                 trials: int = 20, members: Optional[Sequence[str]] = None) -> CheckOutcome:
    """Every (selected) family member is central on its system."""
    fam = casimir_family(spec)
    alg = build_algebra(spec)
    names = list(members) if members else list(fam.members)
    unknown = [n for n in names if n not in fam.members]
    if unknown:
        raise WorkbenchError(f"{fam.system} has no members {unknown}")
    for name in names:
        outcome = casimir_check(alg, fam.members[name], backend=backend, sampler=sampler, trials=trials)
        if not outcome.passed:
            return CheckOutcome(passed=False, witness=f"{name}: {outcome.witness}",
                                details={'system': fam.system, 'member': name})
        logger.debug(f"{fam.system}: {name} is central ({outcome.details.get('backend')})")
    return CheckOutcome(passed=True, details={'system': fam.system, 'members': names,
                                              'expected_count': fam.expected})


# -- exponent calculus -------------------------------------------------------------

def exponent_matrix(kind: str, N: int, p: int) -> np.ndarray:
    """Block-constant integer matrices D, F, G0, G-, G+, E for minor size p.

    Strips of width p sit on the top rows and left columns (D, G0 rows, G-, E)
    or on the bottom rows and right columns (F, G0 columns, G+).
    """
    if not 0 <= p <= N:
        raise WorkbenchError(f"block size {p} outside 0..{N}")
    out = np.zeros((N, N), dtype=int)
    for i in range(N):
        for j in range(N):
            top, left = i < p, j < p
            bottom, right = i >= N - p, j >= N - p
            if kind == 'D':
                out[i, j] = int(top) + int(left)
            elif kind == 'F':
                out[i, j] = -(int(bottom) + int(right))
            elif kind == 'G0':
                out[i, j] = 1 if (top and not right) else (-1 if (right and not top) else 0)
            elif kind == 'G-':
                out[i, j] = int(left)
            elif kind == 'G+':
                out[i, j] = -int(bottom)
            elif kind == 'E':
                out[i, j] = int(top)
            else:
                raise WorkbenchError(f"unknown exponent matrix {kind!r}")
    return out




def scaling_exponents(minor_expr, alg: PoissonAlgebra, matrix: str,
                      sampler: Optional[PointSampler] = None, points: int = 2) -> np.ndarray:
    """Constants c_g with {minor, g} = c_g * minor * g for the entries g of `matrix`.

    Raises:
        NonScalingBracket: the ratio is not the same integer at every sample point
    """
    sampler = sampler if sampler is not None else PointSampler(PrimeField(), 0)
    minor_expr = Expr.lift(minor_expr)
    N = alg.N
    gens = [entry_symbol(matrix, i + 1, j + 1) for i in range(N) for j in range(N)]
    variables = sorted(set(alg.generators) | minor_expr.variables())
    samples: List[Dict[str, object]] = []
    for _ in range(points):
        def attempt(rng):
            point = sampler.point(variables)
            value = minor_expr.evaluate(point)
            if not value:
                raise DivisionByZero("minor vanishes at point")
            ham = PointContext(alg, point).hamiltonian(minor_expr)
            return {g: ham.get(g, 0) / (value * point[g]) for g in gens}

        samples.append(sampler.draw(attempt, label='scaling point'))
    out = np.zeros((N, N), dtype=int)
    for n, g in enumerate(gens):
        first = samples[0][g]
        c = lift_signed(first)
        if any(s[g] != first for s in samples[1:]) or not isinstance(c, int) or abs(c) > N * N:
            raise NonScalingBracket(g)
        out[n // N, n % N] = c
    return out


def scaling_exponent_check(minor_expr, alg: PoissonAlgebra, matrix: str, predicted: np.ndarray,
                           sampler: Optional[PointSampler] = None) -> CheckOutcome:
    """Compare measured log-scaling exponents with a predicted block matrix."""
    try:
        measured = scaling_exponents(minor_expr, alg, matrix, sampler)
    except NonScalingBracket as exc:
        return CheckOutcome(passed=False, witness=f"bracket with {exc.generator} is not log-scaling")
    details = {'measured': measured.tolist(), 'predicted': np.asarray(predicted).tolist()}
    diff = np.argwhere(measured != predicted)
    if len(diff):
        i, j = diff[0]
        return CheckOutcome(passed=False, witness=f"entry ({i + 1},{j + 1}) of {matrix}: measured "
                                                  f"{measured[i, j]}, predicted {predicted[i, j]}",
                            details=details)
    return CheckOutcome(passed=True, details=details)


def _log_hamiltonian(ctx: PointContext, expr: Expr, gens: Sequence[str]) -> List[object]:
    """{expr, g} / expr at the context point, for each generator."""
    value = expr.evaluate(ctx.point)
    if not value:
        raise DivisionByZero("function vanishes at point")
    ham = ctx.hamiltonian(expr)
    return [ham.get(g, 0) / value for g in gens]


def determinant_prefactor_search(spec: AlgebraSpec, core, determinants: Dict[str, Expr], span: int = 2,
                                 sampler: Optional[PointSampler] = None, points: int = 2) -> List[Dict[str, int]]:
    """Exponent vectors e with core * Π det_k^{e_k} central, e_k in [-span, span].

    Uses additivity of log-derivatives: the candidate is central iff
    h(core) + Σ e_k h(det_k) = 0, where h(f) = ({f, g} / f)_g.
    """
    alg = build_algebra(spec)
    sampler = sampler if sampler is not None else PointSampler(PrimeField(), 0)
    core = Expr.lift(core)
    names = list(determinants)
    exprs = [Expr.lift(determinants[n]) for n in names]
    variables = sorted(set(alg.generators).union(core.variables(), *(e.variables() for e in exprs)))
    vectors = []
    for _ in range(points):
        def attempt(rng):
            ctx = PointContext(alg, sampler.point(variables))
            return (_log_hamiltonian(ctx, core, alg.generators),
                    [_log_hamiltonian(ctx, e, alg.generators) for e in exprs])

        vectors.append(sampler.draw(attempt, label='prefactor point'))
    found = []
    for exps in itertools.product(range(-span, span + 1), repeat=len(names)):
        ok = True
        for h_core, h_dets in vectors:
            for n in range(len(alg.generators)):
                total = h_core[n]
                for e, h in zip(exps, h_dets):
                    if e:
                        total = total + e * h[n]
                if total:
                    ok = False
                    break
            if not ok:
                break
        if ok:
            found.append(dict(zip(names, exps)))
    logger.info(f"Prefactor search on {alg.name}: {len(found)} central pattern(s)")
    return found


def family_jacobian_rank(family: CasimirFamily, variables: Sequence[str],
                         sampler: Optional[PointSampler] = None, trials: int = 2) -> int:
    """Rank of the gradient matrix of the family at random points (evidence of independence)."""
    sampler = sampler if sampler is not None else PointSampler(PrimeField(), 0)
    exprs = [Expr.lift(e) for e in family.members.values()]
    best = 0
    for _ in range(trials):
        def attempt(rng):
            point = sampler.point(variables)
            rows = []
            for e in exprs:
                e.evaluate(point)
                grad = e.gradient_at(point)
                rows.append([grad.get(v, 0) for v in variables])
            return rows

        best = max(best, rank(sampler.draw(attempt, label='jacobian point')))
    return best


def homogeneity_check(expr, groups: Dict[str, Sequence[str]], sampler: Optional[PointSampler] = None,
                      trials: int = 5) -> CheckOutcome:
    """expr is unchanged when each group of variables is rescaled by its own factor."""
    sampler = sampler if sampler is not None else PointSampler(PrimeField(), 0)
    expr = Expr.lift(expr)
    variables = sorted(expr.variables())
    for trial in range(trials):
        def attempt(rng):
            point = sampler.point(variables)
            scaled = dict(point)
            factors = {}
            for label, names in groups.items():
                t = sampler.element()
                factors[label] = t
                for name in names:
                    if name in scaled:
                        scaled[name] = scaled[name] * t
            return expr.evaluate(point), expr.evaluate(scaled), factors

        before, after, factors = sampler.draw(attempt, label='scaling point')
        if before != after:
            return CheckOutcome(passed=False, witness=f"value changes under scaling {factors} at trial {trial}")
    return CheckOutcome(passed=True, details={'groups': sorted(groups), 'trials': trials})


def matrix_generators(name: str, N: int) -> List[str]:
    return [entry_symbol(name, i + 1, j + 1) for i in range(N) for j in range(N)]
