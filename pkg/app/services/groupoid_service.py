"""
Groupoid Service - the (F, B) pair algebra

F carries the reflection bracket with the overall minus sign, B the
Lie-Poisson bracket, and {B, F} the mixed form. The checks here cover the
source and target projections, the separation of F and F̃ = B F B^T, the
constraint test on three mutually commuting copies, and the block upper
triangular reductions of F and F̃.
"""
import logging
from typing import Dict, List, Optional, Sequence, Tuple

from app.models import CheckOutcome
from app.services.dirac_service import block_owner, validate_partition
from app.services.poisson_service import (PoissonAlgebra, _default_sampler, algebra_for, commuting_blocks_check,
                                          constraint_reduction_check, named_map_check, pattern_reduction_check)
from app.utils.errors import WorkbenchError
from app.utils.expr import MatrixExpr, entry_symbol
from app.utils.linalg import inverse, matmul
from app.utils.polynomial import SparsePoly
from app.utils.sampling import PointSampler

logger = logging.getLogger(__name__)

FAMILY_PAIRS = (('f', 'f'), ('g', 'g'), ('h', 'h'), ('f', 'g'), ('f', 'h'), ('g', 'h'))


def groupoid_algebra(N: int, scale: str = 'r-matrix') -> PoissonAlgebra:
    return algebra_for('FB-groupoid', N, scale=scale)


def f_tilde(alg: PoissonAlgebra) -> MatrixExpr:
    F, B = alg.matrix('f'), alg.matrix('b')
    return B @ F @ B.T


def separation_check(N: int) -> CheckOutcome:
    """{F̃ ⊗ F} = 0."""
    alg = groupoid_algebra(N)
    outcome = commuting_blocks_check(alg, [x for _, x in f_tilde(alg).entries()],
                                     [x for _, x in alg.matrix('f').entries()])
    outcome.details.update({'N': N, 'left': 'BFB^T', 'right': 'F'})
    return outcome


def projection_check(N: int, backend: str = 'symbolic', sampler: Optional[PointSampler] = None,
                     trials: int = 20) -> CheckOutcome:
    """Source is anti-Poisson, target Poisson onto the reflection algebra, and (B, F̃) obeys the tilde table."""
    alg = groupoid_algebra(N)
    results = {}
    for name in ('fb-source', 'fb-target', 'fb-tilde'):
        outcome = named_map_check(name, alg, backend=backend, sampler=sampler, trials=trials)
        results[name] = outcome.details['sign']
        if not outcome.passed:
            return CheckOutcome(passed=False, witness=f"{name}: {outcome.witness}",
                                details={'N': N, 'maps': results})
    return CheckOutcome(passed=True, details={'N': N, 'maps': results})


# -- three copies ------------------------------------------------------------------

def groupoid_constraints(alg: PoissonAlgebra) -> Tuple[Dict[str, List[Tuple[str, SparsePoly]]], Dict[str, SparsePoly]]:
    """f = B3 - B2 B1, g = F3 - F1, h = F2 - B1 F1 B1^T and the surface solving them.

    The surface keeps (F1, B1, B2) free and eliminates B3, F3 and F2.
    """
    if alg.spec.family != 'FB-triple':
        raise WorkbenchError(f"groupoid constraints live on FB-triple, not {alg.name}")
    F1, F2, F3 = (alg.matrix(f"f{k}") for k in (1, 2, 3))
    B1, B2, B3 = (alg.matrix(f"b{k}") for k in (1, 2, 3))
    product = B2 @ B1
    conjugate = B1 @ F1 @ B1.T
    families = {
        'f': [(entry_symbol('f', i + 1, j + 1), (B3[i, j] - product[i, j]).to_poly()) for (i, j), _ in B3.entries()],
        'g': [(entry_symbol('g', i + 1, j + 1), (F3[i, j] - F1[i, j]).to_poly()) for (i, j), _ in F3.entries()],
        'h': [(entry_symbol('h', i + 1, j + 1), (F2[i, j] - conjugate[i, j]).to_poly()) for (i, j), _ in F2.entries()],
    }
    surface: Dict[str, SparsePoly] = {}
    for (i, j), _ in B3.entries():
        surface[entry_symbol('b3', i + 1, j + 1)] = product[i, j].to_poly()
        surface[entry_symbol('f3', i + 1, j + 1)] = F1[i, j].to_poly()
        surface[entry_symbol('f2', i + 1, j + 1)] = conjugate[i, j].to_poly()
    return families, surface


def lagrangian_check(N: int = 2) -> CheckOutcome:
    """All six constraint families Poisson commute on the constraint surface."""
    alg = algebra_for('FB-triple', N)
    families, surface = groupoid_constraints(alg)
    for left, right in FAMILY_PAIRS:
        for x, cx in families[left]:
            for y, cy in families[right]:
                value = alg.bracket_poly(cx, cy).substitute(surface)
                if value:
                    logger.debug(f"{{{x}, {y}}} survives on the groupoid surface")
                    return CheckOutcome(passed=False, witness=f"{{{x}, {y}}} = {value}",
                                        details={'N': N, 'family': f"{{{left}, {right}}}"})
    return CheckOutcome(passed=True, details={'N': N, 'families': [f"{{{a}, {b}}}" for a, b in FAMILY_PAIRS]})


# -- block upper triangular reductions ---------------------------------------------

def lower_block_cells(N: int, blocks: Optional[Sequence[int]] = None) -> List[Tuple[int, int]]:
    owner = block_owner(N, validate_partition(N, blocks))
    return [(i, j) for i in range(N) for j in range(N) if owner[i] > owner[j]]


def f_reduction_check(N: int, blocks: Optional[Sequence[int]] = None) -> CheckOutcome:
    """F restricted to a b.u.t. form is a Poisson reduction of the pair algebra."""
    alg = groupoid_algebra(N)
    zero = [entry_symbol('f', i + 1, j + 1) for i, j in lower_block_cells(N, blocks)]
    outcome = pattern_reduction_check(alg, zero=zero)
    outcome.details.update({'N': N, 'blocks': list(validate_partition(N, blocks))})
    return outcome


def _tilde_surface(alg: PoissonAlgebra, cells: Sequence[Tuple[int, int]]):
    """Random B and b.u.t. F̃ over F_p; F = B^-1 F̃ B^-T."""
    N = alg.N

    def draw(sampler: PointSampler) -> Dict[str, object]:
        field = sampler.field
        B = [[sampler.element(nonzero=False) for _ in range(N)] for _ in range(N)]
        Ft = [[field.zero if (i, j) in cells else sampler.element() for j in range(N)] for i in range(N)]
        Binv = inverse(B, one=field.one, zero=field.zero)
        BinvT = [list(row) for row in zip(*Binv)]
        F = matmul(matmul(Binv, Ft, zero=field.zero), BinvT, zero=field.zero)
        point = {entry_symbol('b', i + 1, j + 1): B[i][j] for i in range(N) for j in range(N)}
        point.update({entry_symbol('f', i + 1, j + 1): F[i][j] for i in range(N) for j in range(N)})
        return point

    return draw


def f_tilde_reduction_check(N: int, blocks: Optional[Sequence[int]] = None,
                            sampler: Optional[PointSampler] = None, trials: int = 20) -> CheckOutcome:
    """The lower blocks of F̃ = B F B^T are Poissonnian constraints, without a Dirac correction."""
    alg = groupoid_algebra(N)
    cells = lower_block_cells(N, blocks)
    Ft = f_tilde(alg)
    outcome = constraint_reduction_check(alg, [Ft[i, j] for i, j in cells], _tilde_surface(alg, set(cells)),
                                         sampler=_default_sampler(sampler), trials=trials)
    outcome.details.update({'N': N, 'blocks': list(validate_partition(N, blocks))})
    return outcome
