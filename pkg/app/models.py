"""
Validated data models for scenarios and reports.

Scenario files and report documents are the only structured data the
workbench exchanges with the outside world; both go through these models.
"""
from typing import Any, Dict, List, Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator
from sympy import isprime

from app.utils.ring import DEFAULT_PRIME, MIN_PRIME

SCHEMA_VERSION = "1.0"
TOOL_VERSION = "0.4.0"

FAMILIES = (
    'A', 'B', 'BC', 'AB', 'ABC', 'B-chain', 'BC-chain',
    'S-extended', 'FB-groupoid', 'FB-triple', 'B-tilde',
)
Q_CHOICES = ('i', 'ii', 'iii', 'perm')


class AlgebraSpec(BaseModel):
    """Which Poisson algebra to build."""
    model_config = ConfigDict(extra='forbid', frozen=True)

    family: str
    N: int = Field(2, ge=1, le=5)
    q: str = 'ii'  # Q selector for AB / ABC and the first chain link
    chain_length: int = Field(1, ge=1)
    chain_q: Optional[List[str]] = None  # Q^{[k]} for links k = 1..j-1
    case: Literal['ii', 'iii'] = 'ii'  # S-extended only
    scale: Literal['r-matrix', 'component'] = 'r-matrix'

    @field_validator('family')
    @classmethod
    def known_family(cls, value: str) -> str:
        if value not in FAMILIES:
            raise ValueError(f"unknown family {value!r}; expected one of {', '.join(FAMILIES)}")
        return value

    @field_validator('q')
    @classmethod
    def known_q(cls, value: str) -> str:
        if value not in Q_CHOICES:
            raise ValueError(f"unknown Q selector {value!r}")
        return value

    def label(self) -> str:
        if self.family in ('AB', 'ABC'):
            return f"{self.family}({self.q})"
        if self.family in ('B-chain', 'BC-chain'):
            return f"{self.family}({self.chain_length})"
        if self.family == 'S-extended':
            return f"S-extended({self.case})"
        return self.family


class CheckSpec(BaseModel):
    """One check of a scenario; `algebra` overrides the scenario default."""
    model_config = ConfigDict(extra='forbid')

    id: str
    algebra: Optional[AlgebraSpec] = None
    params: Dict[str, Any] = Field(default_factory=dict)
    expect: Literal['pass', 'fail'] = 'pass'
    label: Optional[str] = None

    @property
    def record_id(self) -> str:
        return self.label or self.id


class Scenario(BaseModel):
    model_config = ConfigDict(extra='forbid')

    name: str
    backend: Literal['symbolic', 'modular'] = 'symbolic'
    prime: int = DEFAULT_PRIME
    seed: int = 0
    trials: int = Field(20, ge=1)
    output: Optional[str] = None
    algebra: Optional[AlgebraSpec] = None
    checks: List[CheckSpec]

    @field_validator('prime')
    @classmethod
    def large_prime(cls, value: int) -> int:
        if value <= MIN_PRIME or not isprime(value):
            raise ValueError(f"prime {value} must be a prime above 2^31")
        return value

    @model_validator(mode='after')
    def unique_record_ids(self) -> 'Scenario':
        seen = set()
        for check in self.checks:
            if check.record_id in seen:
                raise ValueError(f"duplicate check label {check.record_id!r}; set a distinct 'label'")
            seen.add(check.record_id)
        return self


class CheckOutcome(BaseModel):
    """What a check function returns, before expectation matching."""
    passed: bool
    witness: Optional[str] = None
    details: Dict[str, Any] = Field(default_factory=dict)


class CheckRecord(BaseModel):
    id: str
    check: str
    status: Literal['pass', 'fail', 'error', 'expected-fail']
    expected: Literal['pass', 'fail'] = 'pass'
    matched: bool
    witness: Optional[str] = None
    details: Dict[str, Any] = Field(default_factory=dict)
    elapsed_ms: float = 0.0

    @model_validator(mode='after')
    def witness_iff_failure(self) -> 'CheckRecord':
        if self.status in ('fail', 'error') and not self.witness:
            raise ValueError(f"record {self.id} has status {self.status} but no witness")
        if self.status not in ('fail', 'error') and self.witness is not None:
            raise ValueError(f"record {self.id} carries a witness with status {self.status}")
        return self


class ReportSummary(BaseModel):
    total: int
    passed: int
    failed: int
    errors: int
    expected_failures: int
    mismatches: int


class Report(BaseModel):
    schema_version: str = SCHEMA_VERSION
    tool_version: str = TOOL_VERSION
    scenario: Dict[str, Any]
    records: List[CheckRecord]
    summary: ReportSummary

    @field_validator('records')
    @classmethod
    def sorted_by_id(cls, records: List[CheckRecord]) -> List[CheckRecord]:
        return sorted(records, key=lambda r: r.id)
