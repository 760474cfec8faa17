"""
One-Dimensional Search
----------------------
Golden-section maximisation and crossing bisection on a logarithmic axis,
the two searches behind the design problems.
"""

import math
from typing import Callable, List, NamedTuple, Sequence, Tuple

from utils.logger import get_logger

logger = get_logger(__name__)

INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0
INV_PHI_SQ = (3.0 - math.sqrt(5.0)) / 2.0


class SearchResult(NamedTuple):
    x: float
    fx: float
    iterations: int
    bracket: Tuple[float, float]


def golden_section_max(obj: Callable[[float], float], lo: float, hi: float,
                       rel_tol: float = 0.005, max_iter: int = 200) -> SearchResult:
    """
    Maximise a unimodal objective on [lo, hi] by golden-section search in log x.

    Stops once hi / lo - 1 <= rel_tol.

    Args:
        obj: Objective, evaluated at positive x
        lo: Lower end of the bracket (> 0)
        hi: Upper end of the bracket
        rel_tol: Relative width of the final bracket

    Returns:
        SearchResult with the best evaluated point
    """
    if not 0 < lo <= hi:
        raise ValueError(f"golden-section bracket must satisfy 0 < lo <= hi, got [{lo}, {hi}]")
    a, b = math.log(lo), math.log(hi)
    tol = math.log1p(rel_tol)

    dist = b - a
    if dist <= tol:
        x = math.sqrt(lo * hi)
        return SearchResult(x, obj(x), 0, (lo, hi))

    c = a + INV_PHI_SQ * dist
    d = a + INV_PHI * dist
    yc = obj(math.exp(c))
    yd = obj(math.exp(d))
    iterations = 0
    while b - a > tol and iterations < max_iter:
        iterations += 1
        if yc > yd:
            b, d, yd = d, c, yc
            c = a + INV_PHI_SQ * (b - a)
            yc = obj(math.exp(c))
        else:
            a, c, yc = c, d, yd
            d = a + INV_PHI * (b - a)
            yd = obj(math.exp(d))
        logger.debug(f"golden section {iterations}: bracket [{math.exp(a):.6g}, {math.exp(b):.6g}]")

    x, fx = (c, yc) if yc > yd else (d, yd)
    return SearchResult(math.exp(x), fx, iterations, (math.exp(a), math.exp(b)))


def bisect_crossing(passes: Callable[[float], bool], failing: float, passing: float,
                    rel_tol: float = 0.01, max_iter: int = 100) -> SearchResult:
    """
    Locate the point where a predicate switches from failing to passing.

    Bisects in log x between a known failing and a known passing point
    until they are within rel_tol of each other. The returned x is the
    passing end of the final bracket; fx is 1.0.
    """
    if failing <= 0 or passing <= 0:
        raise ValueError("bisection endpoints must be positive")
    iterations = 0
    while max(failing, passing) / min(failing, passing) - 1.0 > rel_tol and iterations < max_iter:
        iterations += 1
        mid = math.sqrt(failing * passing)
        if passes(mid):
            passing = mid
        else:
            failing = mid
        logger.debug(f"bisection {iterations}: failing={failing:.6g}, passing={passing:.6g}")
    return SearchResult(passing, 1.0, iterations, (min(failing, passing), max(failing, passing)))


def is_unimodal(values: Sequence[float]) -> bool:
    """True if the sequence rises (weakly) and then falls (weakly) exactly once."""
    diffs: List[float] = [b - a for a, b in zip(values[:-1], values[1:])]
    signs = [1 if d > 0 else -1 for d in diffs if d != 0]
    changes = sum(1 for s1, s2 in zip(signs[:-1], signs[1:]) if s1 != s2)
    return changes == 0 or (changes == 1 and signs[0] == 1)
