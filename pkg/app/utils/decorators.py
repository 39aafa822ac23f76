"""
Custom decorators for the verification workbench.
Includes check timing with a structured log line per executed check.
"""
import functools
import json
import logging
import time
from datetime import datetime, timezone

logger = logging.getLogger(__name__)


def timed_check(fn):
    """
    Time a function that produces a CheckRecord.

    Sets `elapsed_ms` on the returned record and logs one JSON line with the
    record id, status and timing.
    """
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        start_time = time.perf_counter()

        record = fn(*args, **kwargs)

        elapsed_ms = round((time.perf_counter() - start_time) * 1000.0, 3)
        record.elapsed_ms = elapsed_ms

        check_data = {
            'timestamp': datetime.now(timezone.utc).isoformat(),
            'id': record.id,
            'check': record.check,
            'status': record.status,
            'elapsed_ms': elapsed_ms,
        }
        logger.info(f"Check: {json.dumps(check_data, sort_keys=True)}")
        return record
    return wrapper
