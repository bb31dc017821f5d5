"""Pool-adjacent-violators for separable concave objectives under a chain order.

Given per-coordinate maximizers of concave ``psi_n``, adjacent coordinates
that break the required order are pooled into a block and the block receives
the single value maximizing the block's summed objective.  For concave
separable objectives this yields the constrained maximizer.
"""

from __future__ import annotations

import math
from collections.abc import Callable, Sequence
from dataclasses import dataclass, field

from .scalar import maximize_concave

_CONCAVITY_SAMPLES = 17


@dataclass
class IroningResult:
    values: list[float]
    blocks: list[tuple[int, int]]  # inclusive 0-based (start, end) of pooled runs
    projected: bool = False
    events: list[dict] = field(default_factory=list)

    @property
    def pooled(self) -> bool:
        return any(end > start for start, end in self.blocks)


class _Sum:
    def __init__(self, parts: Sequence[Callable[[float], float]]):
        self.parts = list(parts)
        slopes = [getattr(p, "slope", None) for p in self.parts]
        self.slope = None if any(s is None for s in slopes) else (
            lambda x: math.fsum(s(x) for s in slopes)
        )

    def __call__(self, x: float) -> float:
        return math.fsum(p(x) for p in self.parts)


def _violates(prev: float, cur: float, increasing: bool) -> bool:
    return prev > cur if increasing else prev < cur


def is_concave_on(fn: Callable[[float], float], lo: float, hi: float) -> bool:
    if hi <= lo:
        return True
    xs = [lo + (hi - lo) * k / (_CONCAVITY_SAMPLES - 1) for k in range(_CONCAVITY_SAMPLES)]
    ys = [fn(x) for x in xs]
    for k in range(1, len(xs) - 1):
        d2 = ys[k - 1] - 2 * ys[k] + ys[k + 1]
        scale = abs(ys[k - 1]) + 2 * abs(ys[k]) + abs(ys[k + 1])
        if d2 > 1e-9 * scale + 1e-12:
            return False
    return True


def monotone_projection(values: Sequence[float], increasing: bool = True) -> IroningResult:
    """Least-squares projection onto the monotone cone (classic PAVA)."""
    sign = 1.0 if increasing else -1.0
    blocks: list[list[float]] = []  # [start, end, sum, count]
    for i, v in enumerate(values):
        blocks.append([i, i, sign * v, 1])
        while len(blocks) > 1 and blocks[-2][2] / blocks[-2][3] > blocks[-1][2] / blocks[-1][3]:
            s, e, tot, cnt = blocks.pop()
            blocks[-1][1] = e
            blocks[-1][2] += tot
            blocks[-1][3] += cnt
    out = [0.0] * len(values)
    spans = []
    for s, e, tot, cnt in blocks:
        for i in range(int(s), int(e) + 1):
            out[i] = sign * tot / cnt
        spans.append((int(s), int(e)))
    return IroningResult(out, spans, projected=True)


def pool_adjacent_violators(
    candidates: Sequence[float],
    objectives: Sequence[Callable[[float], float]],
    bounds: tuple[float, float] | None = None,
    increasing: bool = True,
) -> IroningResult:
    """Iron ``candidates`` into a monotone sequence maximizing ``sum psi_n``.

    ``objectives[n]`` must be concave on ``bounds`` (default: the candidates'
    range).  Objects exposing a ``slope`` attribute are solved by derivative
    bisection, plain callables by golden section.  If a sampled concavity check
    fails, the result falls back to the least-squares monotone projection of
    the candidates and is marked ``projected``.
    """
    if len(candidates) != len(objectives):
        raise ValueError("candidates and objectives lengths differ")
    if not candidates:
        return IroningResult([], [])
    lo, hi = bounds if bounds is not None else (min(candidates), max(candidates))
    # every pooled value lies between its members' maximizers
    if not all(is_concave_on(fn, lo, hi) for fn in objectives):
        result = monotone_projection(candidates, increasing)
        result.events.append({"kind": "nonconcave_fallback"})
        return result

    stack: list[list] = []  # [start, end, value]
    events = []
    for i, v in enumerate(candidates):
        stack.append([i, i, float(v)])
        while len(stack) > 1 and _violates(stack[-2][2], stack[-1][2], increasing):
            s2, e2, _ = stack.pop()
            s1, e1, _ = stack.pop()
            block = _Sum(objectives[s1 : e2 + 1])
            res = maximize_concave(block, lo, hi, slope=block.slope)
            stack.append([s1, e2, res.x])
            events.append({"kind": "pool", "start": s1, "end": e2, "value": res.x})
    values = [0.0] * len(candidates)
    blocks = []
    for s, e, v in stack:
        for i in range(s, e + 1):
            values[i] = v
        blocks.append((s, e))
    return IroningResult(values, blocks, events=events)
