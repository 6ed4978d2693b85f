"""
Utility helpers: worker pool, timing and lossless serialization
"""
import logging
import time
from concurrent.futures import ThreadPoolExecutor
from contextlib import contextmanager
from fractions import Fraction

from core.coeffs import canonical

logger = logging.getLogger(__name__)

# ======================================================
# 🧵 WORKER POOL
# ======================================================

def run_jobs(func, jobs: list, threads: int = 1) -> list:
    """
    Maps a pure function over jobs and returns results in job order.

    With threads == 1 everything runs in-process, which keeps output byte-identical.
    """
    jobs = list(jobs)
    if threads <= 1 or len(jobs) <= 1:
        return [func(job) for job in jobs]
    logger.debug(f"Dispatching {len(jobs)} jobs on {threads} threads")
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(func, jobs))


@contextmanager
def stopwatch():
    """Yields a dict whose 'ms' entry is filled when the block exits"""
    timing = {'ms': 0.0}
    start = time.perf_counter()
    try:
        yield timing
    finally:
        timing['ms'] = (time.perf_counter() - start) * 1000.0


# ======================================================
# 📦 SERIALIZATION
# ======================================================

def fraction_str(value) -> str:
    """Rationals serialize as 'p/q' (integers as 'p')"""
    value = Fraction(value)
    if value.denominator == 1:
        return str(value.numerator)
    return f"{value.numerator}/{value.denominator}"


def parse_fraction(text: str) -> Fraction:
    return Fraction(text.strip())


def qscalar_json(x) -> dict:
    """QScalar as sorted u-exponent/coefficient arrays"""
    num, den = canonical(x)
    return {
        'num': [[e, fraction_str(c)] for e, c in num],
        'den': [[e, fraction_str(c)] for e, c in den],
    }


def phased_json(value) -> list:
    """PhasedScalar as a sorted list of {u_frac, phase, value}"""
    return [
        {'u_frac': fraction_str(f), 'phase': fraction_str(t), 'value': qscalar_json(v)}
        for (f, t), v in sorted(value.terms.items())
    ]
