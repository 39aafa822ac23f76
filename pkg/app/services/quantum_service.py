"""
Quantum Service - identity catalog for the trigonometric R-matrices

Every entry builds its two sides as leg matrices over Laurent polynomials in
s (q = s^2) and, for the affine entries, the formal spectral parameters
lam, mu, rho, nu. Equality is decided exactly after clearing denominators.
Entries carry the status they are expected to have; entries marked
'report' are evaluated and recorded without an expectation.
"""
import logging
from dataclasses import dataclass
from typing import Callable, Dict, Iterable, List, Optional, Tuple

from app.models import CheckOutcome
from app.utils.errors import WorkbenchError
from app.utils.polynomial import SparsePoly
from app.utils.tensor import LegMatrix, affine_R, classical_r, cybe, permutation_p, q_poly, quantum_R

logger = logging.getLogger(__name__)

LAM, MU, RHO, NU = (SparsePoly.variable(v) for v in ('lam', 'mu', 'rho', 'nu'))

Sides = Tuple[LegMatrix, LegMatrix]


def _inv(p: SparsePoly) -> SparsePoly:
    return p.monomial_inverse()


def _q_diff() -> SparsePoly:
    return q_poly(1) - q_poly(-1)


def R(N: int, legs: Tuple[int, int] = (1, 2), total: int = 2, inverse_q: bool = False) -> LegMatrix:
    return quantum_R(N, inverse_q).place(legs, total)


def RA(N: int, lam, mu, legs: Tuple[int, int] = (1, 2), total: int = 2, inverse_q: bool = False) -> LegMatrix:
    return affine_R(N, lam, mu, inverse_q).place(legs, total)


def P(N: int, legs: Tuple[int, int] = (1, 2), total: int = 2) -> LegMatrix:
    return permutation_p(N).place(legs, total)


# -- the entries ---------------------------------------------------------------------

def _r_inverse(N):
    return R(N) @ R(N, inverse_q=True), LegMatrix.identity(N, 2)


def _r_inverse_left(N):
    return R(N, inverse_q=True) @ R(N), LegMatrix.identity(N, 2)


def _r_comm_t1(N):
    r, rt = R(N), R(N).partial_transpose(1)
    return r @ rt, rt @ r


def _r_comm_t2(N):
    r, rt = R(N), R(N).partial_transpose(2)
    return r @ rt, rt @ r


def _r_perm(N):
    return R(N) + R(N, (2, 1), inverse_q=True), P(N).scale(_q_diff())


def _r_perm_minus(N):
    return R(N) - R(N, (2, 1), inverse_q=True), P(N).scale(_q_diff())


def _r_perm_unit(N):
    return R(N) + R(N, (2, 1), inverse_q=True), P(N)


def _r_yb(N):
    r12, r13, r23 = R(N, (1, 2), 3), R(N, (1, 3), 3), R(N, (2, 3), 3)
    return r12 @ r13 @ r23, r23 @ r13 @ r12


def _yb_new(N):
    r23 = R(N, (2, 3), 3)
    r13 = R(N, (1, 3), 3, inverse_q=True).partial_transpose(1)
    r12 = R(N, (1, 2), 3, inverse_q=True).partial_transpose(1)
    return r23 @ r13 @ r12, r12 @ r13 @ r23


def _rr_int(N):
    r23 = R(N, (2, 3), 3, inverse_q=True).partial_transpose(3)
    r12 = R(N, (1, 2), 3, inverse_q=True).partial_transpose(2)
    r13 = R(N, (1, 3), 3)
    return r23 @ r12 @ r13, r13 @ r12 @ r23


def _yb_another(N):
    r23 = R(N, (2, 3), 3).partial_transpose(2)
    r12 = R(N, (1, 2), 3, inverse_q=True).partial_transpose(2)
    r13 = R(N, (1, 3), 3)
    return r23 @ r12 @ r13, r13 @ r12 @ r23


def _r23_perm_t3(N):
    lhs = R(N, (2, 3), 3, inverse_q=True).partial_transpose(3) + R(N, (3, 2), 3).partial_transpose(3)
    return lhs, P(N, (2, 3), 3).partial_transpose(3).scale(_q_diff())


def _r23_perm_t3_minus(N):
    lhs = R(N, (2, 3), 3, inverse_q=True).partial_transpose(3) - R(N, (3, 2), 3).partial_transpose(3)
    return lhs, P(N, (2, 3), 3).partial_transpose(3).scale(-_q_diff())


def _r_mn_inverse(N):
    return RA(N, LAM, MU) @ RA(N, LAM, MU, inverse_q=True), LegMatrix.identity(N, 2)


def _r_1(N):
    return RA(N, LAM, MU), RA(N, _inv(LAM), _inv(MU), inverse_q=True).transpose()


def _r_2(N):
    return RA(N, LAM, MU), RA(N, _inv(MU), _inv(LAM))


def _r_3(N):
    middle = RA(N, RHO, NU, inverse_q=True).partial_transpose(1)
    return RA(N, LAM, MU) @ middle @ RA(N, LAM, MU, inverse_q=True), middle


def _yb_mn(N):
    r12 = RA(N, LAM, MU, (1, 2), 3)
    r13 = RA(N, LAM, RHO, (1, 3), 3)
    r23 = RA(N, MU, RHO, (2, 3), 3)
    return r12 @ r13 @ r23, r23 @ r13 @ r12


def _yb_new_mn(N):
    r23 = RA(N, MU, NU, (2, 3), 3)
    r12 = RA(N, LAM, _inv(MU), (1, 2), 3, inverse_q=True).partial_transpose(2)
    r13 = RA(N, LAM, _inv(NU), (1, 3), 3, inverse_q=True).partial_transpose(3)
    return r23 @ r12 @ r13, r13 @ r12 @ r23


def _r_ab_mn_swap(N):
    lhs = RA(N, MU, _inv(LAM), inverse_q=True).partial_transpose(2)
    rhs = RA(N, LAM, _inv(MU), inverse_q=True).partial_transpose(2)
    return lhs, rhs


def _cybe(N):
    return cybe(classical_r(N)), LegMatrix.zero(N, 3)


@dataclass(frozen=True)
class IdentityEntry:
    id: str
    legs: int
    parameters: Tuple[str, ...]
    expected: str  # 'pass' | 'fail' | 'report'
    summary: str
    build: Callable[[int], Sides]
    max_N: int = 3


CATALOG: Dict[str, IdentityEntry] = {e.id: e for e in [
    IdentityEntry('R-inverse', 2, ('q',), 'pass', "R(q) R(q^-1) = 1", _r_inverse, 4),
    IdentityEntry('R-inverse-left', 2, ('q',), 'pass', "R(q^-1) R(q) = 1", _r_inverse_left, 4),
    IdentityEntry('R-comm-t1', 2, ('q',), 'pass', "[R, R^t1] = 0", _r_comm_t1, 4),
    IdentityEntry('R-comm-t2', 2, ('q',), 'pass', "[R, R^t2] = 0", _r_comm_t2, 4),
    IdentityEntry('R-perm', 2, ('q',), 'fail', "R12(q) + R21(q^-1) = (q - q^-1) P12 as stated", _r_perm, 4),
    IdentityEntry('R-perm-minus', 2, ('q',), 'pass', "R12(q) - R21(q^-1) = (q - q^-1) P12", _r_perm_minus, 4),
    IdentityEntry('R-perm-unit', 2, ('q',), 'fail', "R12(q) + R21(q^-1) = P12", _r_perm_unit, 4),
    IdentityEntry('R-YB', 3, ('q',), 'pass', "R12 R13 R23 = R23 R13 R12", _r_yb),
    IdentityEntry('YB-new', 3, ('q',), 'pass', "R23(q) R13^t1(q^-1) R12^t1(q^-1) = reversed", _yb_new),
    IdentityEntry('RR-int', 3, ('q',), 'pass', "R23^t3(q^-1) R12^t2(q^-1) R13(q) = reversed", _rr_int),
    IdentityEntry('YB-another', 3, ('q',), 'pass', "R23^t2(q) R12^t2(q^-1) R13(q) = reversed", _yb_another),
    IdentityEntry('R23-perm-t3', 3, ('q',), 'fail', "R23^t3(q^-1) + R32^t3(q) = (q - q^-1) P23^t3 as stated",
                  _r23_perm_t3),
    IdentityEntry('R23-perm-t3-minus', 3, ('q',), 'pass', "R23^t3(q^-1) - R32^t3(q) = (q^-1 - q) P23^t3",
                  _r23_perm_t3_minus),
    IdentityEntry('R-MN-inverse', 2, ('q', 'lam', 'mu'), 'pass', "R(λ,μ;q) R(λ,μ;q^-1) = 1", _r_mn_inverse),
    IdentityEntry('R-1', 2, ('q', 'lam', 'mu'), 'pass', "R(λ,μ;q) = R^t1t2(λ^-1,μ^-1;q^-1)", _r_1),
    IdentityEntry('R-2', 2, ('q', 'lam', 'mu'), 'pass', "R(λ,μ;q) = R(μ^-1,λ^-1;q)", _r_2),
    IdentityEntry('R-3', 2, ('q', 'lam', 'mu', 'rho', 'nu'), 'report',
                  "R(λ,μ;q) R^t1(ρ,ν;q^-1) R(λ,μ;q^-1) = R^t1(ρ,ν;q^-1)", _r_3),
    IdentityEntry('R-AB-mn-swap', 2, ('q', 'lam', 'mu'), 'pass',
                  "R^t2(μ,λ^-1;q^-1) = R^t2(λ,μ^-1;q^-1)", _r_ab_mn_swap),
    IdentityEntry('YB-MN', 3, ('q', 'lam', 'mu', 'rho'), 'pass',
                  "R12(λ,μ) R13(λ,ρ) R23(μ,ρ) = R23(μ,ρ) R13(λ,ρ) R12(λ,μ)", _yb_mn, 2),
    IdentityEntry('YB-new-mn', 3, ('q', 'lam', 'mu', 'nu'), 'pass',
                  "R23(μ,ν;q) R12^t2(λ,μ^-1;q^-1) R13^t3(λ,ν^-1;q^-1) = reversed", _yb_new_mn, 2),
    IdentityEntry('CYBE', 3, (), 'report', "[[r, r]] = 0 for the classical r", _cybe, 4),
]}


def identity_check(entry_id: str, N: int = 2) -> CheckOutcome:
    """Exact comparison of both sides; the witness is the first differing entry."""
    entry = CATALOG.get(entry_id)
    if entry is None:
        raise WorkbenchError(f"unknown identity {entry_id!r}", witness=entry_id)
    if N > entry.max_N:
        raise WorkbenchError(f"{entry_id} is checked for N <= {entry.max_N}, got {N}")
    lhs, rhs = entry.build(N)
    diff = lhs.first_difference(rhs)
    details = {'identity': entry_id, 'N': N, 'legs': entry.legs, 'expected': entry.expected}
    if diff is None:
        return CheckOutcome(passed=True, details=details)
    row, col, a, b = diff
    logger.debug(f"{entry_id} differs at {row}, {col}")
    return CheckOutcome(passed=False, witness=f"entry {row}x{col}: {a} != {b}", details=details)


def identity_suite(N: int = 2, entries: Optional[Iterable[str]] = None) -> Dict[str, dict]:
    """Run catalog entries; each result records whether it matched its expected status."""
    ids = sorted(entries) if entries is not None else sorted(CATALOG)
    out = {}
    for entry_id in ids:
        entry = CATALOG.get(entry_id)
        if entry is not None and N > entry.max_N:
            continue
        outcome = identity_check(entry_id, N)
        expected = entry.expected
        matched = expected == 'report' or (outcome.passed == (expected == 'pass'))
        out[entry_id] = {'holds': outcome.passed, 'expected': expected, 'matched': matched,
                         'witness': outcome.witness}
    return out


def catalog_listing() -> List[str]:
    return [f"{e.id}  [{e.legs} legs; expected {e.expected}]  {e.summary}" for e in
            sorted(CATALOG.values(), key=lambda e: e.id)]
