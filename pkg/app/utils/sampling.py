"""
Random evaluation points for the modular backend.

A check that cannot decide an identity symbolically evaluates both sides at
random points of F_p (Schwartz-Zippel). Points that hit a vanishing
denominator, a singular Gram matrix or a singular linear system are thrown
away and redrawn, up to the configured resampling limit.
"""
import logging
import random
import zlib
from typing import Callable, Dict, Iterable, Optional, TypeVar

from app.utils.errors import (DivisionByZero, InconclusiveSampling, SingularGram,
                              SingularSystem)
from app.utils.ring import PrimeField, PrimeFieldElement

logger = logging.getLogger(__name__)

T = TypeVar('T')

RESAMPLE_ON = (DivisionByZero, SingularGram, SingularSystem)


def check_seed(base_seed: int, check_id: str) -> int:
    """Per-check seed; serial and pooled runs draw the same points."""
    return (base_seed * 1_000_003) ^ zlib.crc32(check_id.encode('utf-8'))


class PointSampler:
    """Draws points of F_p^m over a fixed generator list."""

    def __init__(self, field: PrimeField, seed: int = 0, resample_limit: int = 32):
        self.field = field
        self.rng = random.Random(seed)
        self.resample_limit = resample_limit

    @classmethod
    def for_check(cls, field: PrimeField, base_seed: int, check_id: str,
                  resample_limit: int = 32) -> 'PointSampler':
        return cls(field, check_seed(base_seed, check_id), resample_limit)

    def element(self, nonzero: bool = True) -> PrimeFieldElement:
        return self.field.random_element(self.rng, nonzero=nonzero)

    def point(self, generators: Iterable[str],
              fixed: Optional[Dict[str, object]] = None) -> Dict[str, PrimeFieldElement]:
        """Random nonzero value per generator; `fixed` values override."""
        fixed = fixed or {}
        out = {}
        for g in generators:
            out[g] = self.field(fixed[g]) if g in fixed else self.element()
        return out

    def draw(self, attempt: Callable[[random.Random], T], label: str = 'point') -> T:
        """Run `attempt` until it survives, resampling on degenerate points.

        Raises:
            InconclusiveSampling: every attempt up to the limit hit a degenerate point
        """
        last = None
        for n in range(self.resample_limit):
            try:
                return attempt(self.rng)
            except RESAMPLE_ON as exc:
                last = exc
                logger.debug(f"Resampling {label} after attempt {n + 1}: {exc}")
        logger.warning(f"No usable {label} after {self.resample_limit} attempts")
        raise InconclusiveSampling(
            f"no usable {label} after {self.resample_limit} attempts",
            witness=getattr(last, 'witness', None) or str(last))
