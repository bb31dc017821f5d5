"""Bounded maximization of concave scalar functions."""

from __future__ import annotations

import math
from collections.abc import Callable
from dataclasses import dataclass

INV_PHI = (math.sqrt(5) - 1) / 2

X_TOL = 1e-9
MAX_ITER = 200


@dataclass(frozen=True)
class ScalarResult:
    x: float
    value: float
    iterations: int
    method: str
    at_bound: str | None = None


def maximize_concave(
    fn: Callable[[float], float],
    lo: float,
    hi: float,
    slope: Callable[[float], float] | None = None,
    tol: float = X_TOL,
    max_iter: int = MAX_ITER,
) -> ScalarResult:
    """Maximize ``fn`` on ``[lo, hi]``.

    With ``slope`` available the root of the derivative is bracketed and
    bisected; a flat start (``slope(lo) <= 0``) returns ``lo``.  Without a
    usable slope, golden-section search runs instead, and ties resolve toward
    ``lo``.
    """
    if not lo <= hi:
        raise ValueError(f"empty interval [{lo}, {hi}]")
    if hi - lo <= tol:
        return ScalarResult(lo, fn(lo), 0, "degenerate", "lo")
    if slope is not None:
        s_lo, s_hi = slope(lo), slope(hi)
        if math.isfinite(s_lo) and math.isfinite(s_hi):
            if s_lo <= 0:
                return ScalarResult(lo, fn(lo), 0, "bisect", "lo")
            if s_hi >= 0:
                return ScalarResult(hi, fn(hi), 0, "bisect", "hi")
            a, b = lo, hi
            it = 0
            while b - a > tol and it < max_iter:
                mid = 0.5 * (a + b)
                s = slope(mid)
                if not math.isfinite(s):
                    break
                if s > 0:
                    a = mid
                else:
                    b = mid
                it += 1
            else:
                x = 0.5 * (a + b)
                return ScalarResult(x, fn(x), it, "bisect")
    return golden_section(fn, lo, hi, tol, max_iter)


def golden_section(
    fn: Callable[[float], float], lo: float, hi: float, tol: float = X_TOL, max_iter: int = MAX_ITER
) -> ScalarResult:
    a, b = lo, hi
    x1 = b - INV_PHI * (b - a)
    x2 = a + INV_PHI * (b - a)
    f1, f2 = fn(x1), fn(x2)
    it = 0
    while b - a > tol and it < max_iter:
        if f1 >= f2:
            b, x2, f2 = x2, x1, f1
            x1 = b - INV_PHI * (b - a)
            f1 = fn(x1)
        else:
            a, x1, f1 = x1, x2, f2
            x2 = a + INV_PHI * (b - a)
            f2 = fn(x2)
        it += 1
    x = 0.5 * (a + b)
    best_x, best_v, bound = x, fn(x), None
    # concave maxima can sit on the boundary; the interior search only approaches it
    for edge, tag in ((lo, "lo"), (hi, "hi")):
        v = fn(edge)
        if v > best_v or (tag == "lo" and v >= best_v):
            best_x, best_v, bound = edge, v, tag
    return ScalarResult(best_x, best_v, it, "golden", bound)
