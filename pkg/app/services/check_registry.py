"""
Check Registry - the catalog of runnable checks

Maps every check id a scenario may name to the service call that runs it.
Each runner receives a CheckContext (algebra spec, parameters, backend,
sampler, trial count) and returns a CheckOutcome; expectation matching and
timing happen in the scenario service.
"""
import logging
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional, Tuple

from app.models import FAMILIES, AlgebraSpec, CheckOutcome
from app.services import casimir_service, dirac_service, groupoid_service, quantum_service, rewriting_service
from app.services.poisson_service import (MAPS, PoissonAlgebra, build_algebra, commuting_blocks_check,
                                          component_agreement_check, generic_rank, jacobi_check, lower_triangle,
                                          named_map_check, pattern_reduction_check, staircase_pattern)
from app.utils.errors import WorkbenchError
from app.utils.expr import Expr, MatrixExpr, entry_symbol
from app.utils.sampling import PointSampler

logger = logging.getLogger(__name__)

_MISSING = object()


@dataclass
class CheckContext:
    """Everything a runner may use; built fresh for every check."""
    spec: Optional[AlgebraSpec]
    params: Dict[str, Any]
    backend: str
    sampler: PointSampler
    trials: int
    degree_cap: int = 4

    def algebra(self) -> PoissonAlgebra:
        if self.spec is None:
            raise WorkbenchError("check needs an algebra but the scenario names none")
        return build_algebra(self.spec)

    def param(self, name: str, default=_MISSING):
        if name in self.params:
            return self.params[name]
        if default is _MISSING:
            raise WorkbenchError(f"missing parameter {name!r}", witness=name)
        return default

    @property
    def N(self) -> int:
        return int(self.params.get('N', self.spec.N if self.spec is not None else 2))


@dataclass(frozen=True)
class CheckDefinition:
    id: str
    summary: str
    run: Callable[[CheckContext], CheckOutcome]
    needs_algebra: bool = False
    params: Tuple[str, ...] = field(default_factory=tuple)


# -- poisson -----------------------------------------------------------------------

def _jacobi(ctx: CheckContext) -> CheckOutcome:
    return jacobi_check(ctx.algebra(), backend=ctx.backend, sampler=ctx.sampler, trials=ctx.trials)


def _antisymmetry(ctx: CheckContext) -> CheckOutcome:
    defects = ctx.algebra().antisymmetry_defects()
    if defects:
        x, y = defects[0]
        return CheckOutcome(passed=False, witness=f"{{{x}, {y}}} != -{{{y}, {x}}}", details={'defects': len(defects)})
    return CheckOutcome(passed=True)


def _map(ctx: CheckContext) -> CheckOutcome:
    return named_map_check(ctx.param('map'), ctx.algebra(), mode=ctx.param('mode', None), backend=ctx.backend,
                           sampler=ctx.sampler, trials=ctx.trials)


def _rank(ctx: CheckContext) -> CheckOutcome:
    """Generic bivector rank against `rank` or `corank` when given."""
    alg = ctx.algebra()
    value = generic_rank(alg, sampler=ctx.sampler, trials=int(ctx.param('points', 3)))
    corank = len(alg.generators) - value
    details = {'rank': value, 'corank': corank, 'generators': len(alg.generators)}
    expected_rank = ctx.param('rank', None)
    expected_corank = ctx.param('corank', None)
    if expected_rank is not None and value != expected_rank:
        return CheckOutcome(passed=False, witness=f"rank {value}, expected {expected_rank}", details=details)
    if expected_corank is not None and corank != expected_corank:
        return CheckOutcome(passed=False, witness=f"corank {corank}, expected {expected_corank}", details=details)
    if ctx.param('even', False) and value % 2:
        return CheckOutcome(passed=False, witness=f"odd rank {value}", details=details)
    return CheckOutcome(passed=True, details=details)


def _pattern(ctx: CheckContext) -> CheckOutcome:
    """Pattern reduction; zero cells come from `zero`, `lower_triangle` or `staircase`."""
    alg = ctx.algebra()
    zero = list(ctx.param('zero', []))
    if 'lower_triangle' in ctx.params:
        zero += lower_triangle(ctx.params['lower_triangle'], alg.N)
    if 'staircase' in ctx.params:
        stair = ctx.params['staircase']
        zero += staircase_pattern(stair['matrix'], alg.N, stair['steps'], stair.get('kind', 'lower'))
    outcome = pattern_reduction_check(alg, zero=zero, unit=ctx.param('unit', []),
                                      equalities=ctx.param('equalities', None))
    outcome.details['zero'] = len(zero)
    return outcome


def _component(ctx: CheckContext) -> CheckOutcome:
    return component_agreement_check(ctx.param('kind'), ctx.N)


def _commuting(ctx: CheckContext) -> CheckOutcome:
    """Every entry of one matrix commutes with every entry of another."""
    alg = ctx.algebra()
    left, right = alg.matrix(ctx.param('left')), alg.matrix(ctx.param('right'))
    return commuting_blocks_check(alg, [x for _, x in left.entries()], [x for _, x in right.entries()])


# -- casimir -----------------------------------------------------------------------

def _casimir(ctx: CheckContext) -> CheckOutcome:
    return casimir_service.family_check(ctx.spec, backend=ctx.backend, sampler=ctx.sampler, trials=ctx.trials,
                                        members=ctx.param('members', None))


def _minor_matrix(spec: AlgebraSpec, role: str) -> MatrixExpr:
    """Matrix a minor is taken from: 'S' builds the chain matrix, anything else is a generator matrix."""
    if role != 'S':
        return MatrixExpr.symbols(role, spec.N)
    A = MatrixExpr.symbols('a', spec.N)
    if spec.family == 'AB':
        chain = [MatrixExpr.symbols('b', spec.N)]
    elif spec.family == 'B-chain':
        chain = [MatrixExpr.symbols(f"b{k}", spec.N) for k in range(1, spec.chain_length + 1)]
    else:
        raise WorkbenchError(f"no chain matrix S on {spec.label()}")
    return casimir_service.build_chain_S(A, chain, spec.q)


def _exponent(ctx: CheckContext) -> CheckOutcome:
    """Log-scaling exponents of a corner minor against a predicted block matrix."""
    alg = ctx.algebra()
    spec = casimir_service.MinorSpec(ctx.param('corner'), int(ctx.param('size')), ctx.param('role', 'a'))
    m = casimir_service.corner_minor(_minor_matrix(ctx.spec, spec.role), spec)
    predicted = casimir_service.exponent_matrix(ctx.param('predicted'), alg.N, int(ctx.param('p', spec.size)))
    outcome = casimir_service.scaling_exponent_check(m, alg, ctx.param('matrix'), predicted * int(ctx.param('sign', 1)),
                                                     sampler=ctx.sampler)
    outcome.details['predicted_kind'] = ctx.param('predicted')
    return outcome


def _homogeneity(ctx: CheckContext) -> CheckOutcome:
    """Each family member is unchanged when every matrix is rescaled by its own factor."""
    fam = casimir_service.casimir_family(ctx.spec)
    alg = ctx.algebra()
    groups = {name: casimir_service.matrix_generators(name, alg.N) for name in alg.matrix_names}
    names = list(ctx.param('members', fam.members))
    for name in names:
        outcome = casimir_service.homogeneity_check(fam.members[name], groups, sampler=ctx.sampler,
                                                    trials=min(ctx.trials, 5))
        if not outcome.passed:
            return CheckOutcome(passed=False, witness=f"{name}: {outcome.witness}")
    return CheckOutcome(passed=True, details={'members': names})


def _independence(ctx: CheckContext) -> CheckOutcome:
    """Jacobian rank of the family; compared with `rank` when given."""
    fam = casimir_service.casimir_family(ctx.spec)
    alg = ctx.algebra()
    value = casimir_service.family_jacobian_rank(fam, alg.generators, sampler=ctx.sampler)
    details = {'jacobian_rank': value, 'members': len(fam), 'expected_count': fam.expected}
    expected = ctx.param('rank', None)
    if expected is not None and value != expected:
        return CheckOutcome(passed=False, witness=f"jacobian rank {value}, expected {expected}", details=details)
    return CheckOutcome(passed=True, details=details)


# -- dirac -------------------------------------------------------------------------

def _constraints(ctx: CheckContext) -> dirac_service.ConstraintSet:
    return dirac_service.but_constraints(ctx.spec.N, ctx.param('blocks', None), ctx.param('which', 'both'))


def _dirac_centrality(ctx: CheckContext) -> CheckOutcome:
    return dirac_service.dirac_centrality_check(ctx.algebra(), _constraints(ctx), sampler=ctx.sampler,
                                                trials=ctx.trials)


def _dirac_jacobi(ctx: CheckContext) -> CheckOutcome:
    return dirac_service.dirac_jacobi_check(ctx.algebra(), _constraints(ctx), sampler=ctx.sampler,
                                            trials=ctx.trials)


def _dirac_unchanged(ctx: CheckContext) -> CheckOutcome:
    return dirac_service.unchanged_brackets_check(ctx.algebra(), _constraints(ctx),
                                                  generators=ctx.param('generators', None),
                                                  sampler=ctx.sampler, trials=min(ctx.trials, 10))


def _dirac_reparameterization(ctx: CheckContext) -> CheckOutcome:
    f = Expr.symbol(ctx.param('f', entry_symbol('a', 1, 2)))
    g = Expr.symbol(ctx.param('g', entry_symbol('b', 1, 1)))
    return dirac_service.reparameterization_check(ctx.algebra(), _constraints(ctx), f, g, sampler=ctx.sampler,
                                                  trials=min(ctx.trials, 10))


def _singular_gram(ctx: CheckContext) -> CheckOutcome:
    return dirac_service.degenerate_gram_check(ctx.algebra(), _constraints(ctx), sampler=ctx.sampler,
                                               trials=min(ctx.trials, 5))


def _gram_formula(ctx: CheckContext) -> CheckOutcome:
    return dirac_service.gram_formula_check(ctx.N, q=ctx.param('q', 'ii'), sampler=ctx.sampler,
                                            trials=min(ctx.trials, 5))


def _f_bracket_sign(ctx: CheckContext) -> CheckOutcome:
    return dirac_service.f_bracket_sign_check(ctx.param('case'), ctx.N, sampler=ctx.sampler, trials=ctx.trials)


def _system_determinant(ctx: CheckContext) -> CheckOutcome:
    return dirac_service.system_determinant_check(ctx.N)


def _upper_triangularity(ctx: CheckContext) -> CheckOutcome:
    return dirac_service.upper_triangularity_check(ctx.N)


def _nondegeneracy(ctx: CheckContext) -> CheckOutcome:
    """ω-system determinant for upper unitriangular A at B' = 1."""
    n = ctx.N
    return dirac_service.nondegeneracy_probe(dirac_service.upper_unitriangular(n), MatrixExpr.identity(n),
                                             expected=ctx.param('expected', 1))


# -- quantum -----------------------------------------------------------------------

def _identity(ctx: CheckContext) -> CheckOutcome:
    """One catalog identity; report-only entries always pass and record whether they hold."""
    entry_id = ctx.param('entry')
    outcome = quantum_service.identity_check(entry_id, ctx.N)
    if quantum_service.CATALOG[entry_id].expected == 'report':
        details = dict(outcome.details, holds=outcome.passed)
        if outcome.witness:
            details['difference'] = outcome.witness
        return CheckOutcome(passed=True, details=details)
    return outcome


def _identity_suite(ctx: CheckContext) -> CheckOutcome:
    results = quantum_service.identity_suite(ctx.N, ctx.param('entries', None))
    details = {k: {'holds': v['holds'], 'expected': v['expected']} for k, v in results.items()}
    for entry_id, result in results.items():
        if not result['matched']:
            return CheckOutcome(passed=False, witness=f"{entry_id}: {result['witness'] or 'holds unexpectedly'}",
                                details=details)
    return CheckOutcome(passed=True, details=details)


# -- rewriting ---------------------------------------------------------------------

def _relations(ctx: CheckContext) -> Tuple[str, ...]:
    return tuple(ctx.param('relations', rewriting_service.RELATIONS))


def _confluence(ctx: CheckContext) -> CheckOutcome:
    return rewriting_service.confluence_check(ctx.N, _relations(ctx), specialize=ctx.param('specialize', None),
                                              degree_cap=ctx.degree_cap)


def _relations_reduce(ctx: CheckContext) -> CheckOutcome:
    return rewriting_service.relations_reduce_check(ctx.N, _relations(ctx))


def _automorphism(ctx: CheckContext) -> CheckOutcome:
    return rewriting_service.quantum_automorphism_check(ctx.N, twist=bool(ctx.param('twist', False)),
                                                        specialize=ctx.param('specialize', None),
                                                        degree_cap=int(ctx.param('degree_cap', 6)))


def _semiclassical(ctx: CheckContext) -> CheckOutcome:
    return rewriting_service.semiclassical_check(ctx.param('relation'), ctx.N)


def _order_zero(ctx: CheckContext) -> CheckOutcome:
    return rewriting_service.semiclassical_order_zero_check(ctx.N, _relations(ctx))


# -- groupoid ----------------------------------------------------------------------

def _separation(ctx: CheckContext) -> CheckOutcome:
    return groupoid_service.separation_check(ctx.N)


def _projections(ctx: CheckContext) -> CheckOutcome:
    return groupoid_service.projection_check(ctx.N, backend=ctx.backend, sampler=ctx.sampler, trials=ctx.trials)


def _lagrangian(ctx: CheckContext) -> CheckOutcome:
    return groupoid_service.lagrangian_check(ctx.N)


def _f_reduction(ctx: CheckContext) -> CheckOutcome:
    return groupoid_service.f_reduction_check(ctx.N, ctx.param('blocks', None))


def _f_tilde_reduction(ctx: CheckContext) -> CheckOutcome:
    return groupoid_service.f_tilde_reduction_check(ctx.N, ctx.param('blocks', None), sampler=ctx.sampler,
                                                    trials=ctx.trials)


CHECKS: Dict[str, CheckDefinition] = {c.id: c for c in (
    CheckDefinition('jacobi', "Jacobi identity over all generator triples", _jacobi, True),
    CheckDefinition('antisymmetry', "bracket table is antisymmetric", _antisymmetry, True),
    CheckDefinition('map', "named Poisson / anti-Poisson map", _map, True, ('map', 'mode')),
    CheckDefinition('rank', "generic bivector rank and corank", _rank, True, ('rank', 'corank', 'even', 'points')),
    CheckDefinition('pattern', "zero / unit / equality pattern is a Poisson reduction", _pattern, True,
                    ('zero', 'unit', 'equalities', 'lower_triangle', 'staircase')),
    CheckDefinition('component', "component formulas equal the r-matrix table", _component, False, ('kind', 'N')),
    CheckDefinition('commuting', "two generator matrices Poisson commute", _commuting, True, ('left', 'right')),
    CheckDefinition('casimir', "central-element family is central", _casimir, True, ('members',)),
    CheckDefinition('exponent', "log-scaling exponents of a corner minor", _exponent, True,
                    ('corner', 'size', 'role', 'matrix', 'predicted', 'p', 'sign')),
    CheckDefinition('homogeneity', "family members are degree zero in every matrix", _homogeneity, True,
                    ('members',)),
    CheckDefinition('independence', "Jacobian rank of the central-element family", _independence, True,
                    ('rank',)),
    CheckDefinition('dirac-centrality', "constraints are central for the Dirac bracket", _dirac_centrality, True,
                    ('blocks', 'which')),
    CheckDefinition('dirac-jacobi', "Dirac bracket is antisymmetric and satisfies Jacobi", _dirac_jacobi, True,
                    ('blocks', 'which')),
    CheckDefinition('dirac-unchanged', "free generators keep their brackets", _dirac_unchanged, True,
                    ('blocks', 'which', 'generators')),
    CheckDefinition('dirac-reparameterization', "Dirac bracket ignores constraint reparameterization",
                    _dirac_reparameterization, True, ('blocks', 'which', 'f', 'g')),
    CheckDefinition('singular-gram', "constraint Gram is singular on the surface", _singular_gram, True,
                    ('blocks', 'which')),
    CheckDefinition('gram-formula', "constraint Gram against the closed form", _gram_formula, False, ('N', 'q')),
    CheckDefinition('f-bracket-sign', "sign of the induced brackets of F[B]", _f_bracket_sign, False,
                    ('case', 'N')),
    CheckDefinition('system-determinant', "det of the F[B] system is a product of corner minors",
                    _system_determinant, False, ('N',)),
    CheckDefinition('upper-triangularity', "B F[B] B^T is upper triangular", _upper_triangularity, False, ('N',)),
    CheckDefinition('nondegeneracy', "ω-system determinant at B' = 1", _nondegeneracy, False, ('N', 'expected')),
    CheckDefinition('identity', "one quantum R-matrix identity", _identity, False, ('entry', 'N')),
    CheckDefinition('identity-suite', "quantum identity catalog against expected outcomes", _identity_suite, False,
                    ('N', 'entries')),
    CheckDefinition('confluence', "exchange rules rewrite every overlap to one normal form", _confluence, False,
                    ('N', 'relations', 'specialize')),
    CheckDefinition('relations-reduce', "quantum relations reduce to zero", _relations_reduce, False,
                    ('N', 'relations')),
    CheckDefinition('automorphism', "A -> B A B^T preserves the quantum relations", _automorphism, False,
                    ('N', 'twist', 'specialize', 'degree_cap')),
    CheckDefinition('semiclassical', "first order in ħ reproduces the classical table", _semiclassical, False,
                    ('relation', 'N')),
    CheckDefinition('order-zero', "exchange rules commute at ħ = 0", _order_zero, False, ('N', 'relations')),
    CheckDefinition('groupoid-separation', "{BFB^T ⊗ F} = 0", _separation, False, ('N',)),
    CheckDefinition('groupoid-projections', "source, target and tilde maps of the pair algebra", _projections,
                    False, ('N',)),
    CheckDefinition('groupoid-lagrangian', "groupoid constraints commute on their surface", _lagrangian, False,
                    ('N',)),
    CheckDefinition('f-reduction', "b.u.t. F is a Poisson reduction", _f_reduction, False, ('N', 'blocks')),
    CheckDefinition('f-tilde-reduction', "b.u.t. BFB^T is a Poisson reduction", _f_tilde_reduction, False,
                    ('N', 'blocks')),
)}


def get_check(check_id: str) -> CheckDefinition:
    definition = CHECKS.get(check_id)
    if definition is None:
        raise WorkbenchError(f"unknown check id {check_id!r}", witness=check_id)
    return definition


def unknown_params(check_id: str, params: Dict[str, Any]) -> List[str]:
    allowed = set(get_check(check_id).params)
    return sorted(k for k in params if k not in allowed)


def catalog_listing() -> List[str]:
    """Families, check ids, maps and quantum identities; every section sorted."""
    lines = ["Families:"]
    lines += [f"  {name}" for name in sorted(FAMILIES)]
    lines += [f"  {label}" for label in sorted(f"{f}({q})" for f in ('AB', 'ABC') for q in ('i', 'ii', 'iii'))]
    lines.append("Checks:")
    lines += [f"  {c.id}  {c.summary}" for c in sorted(CHECKS.values(), key=lambda c: c.id)]
    lines.append("Maps:")
    lines += [f"  {m.name}  [{m.claimed}]  {m.summary}" for m in sorted(MAPS.values(), key=lambda m: m.name)]
    lines.append("Quantum identities:")
    lines += [f"  {line}" for line in quantum_service.catalog_listing()]
    return lines
