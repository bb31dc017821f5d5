"""Expected-utility contract solver.

After binding the lowest type's IR and the local downward ICs, every reward
is a linear form in the frequencies, so the provider objective separates into
per-type terms ``w_n * Q_n * G(f_n) - C_n * f_n``.  Each term is maximized
over the cycle length ``theta = 1/f`` (concave in theta), and the result is
ironed if the frequencies come out non-monotone.
"""

from __future__ import annotations

import math
from collections.abc import Sequence
from dataclasses import dataclass, field

from .aoi import CycleCase
from .contract import (
    ContractMenu,
    ProviderPreferences,
    WorkerTypeLadder,
    provider_eut,
    provider_pt,
    provider_terms,
    pt_value,
    resolve_f_min,
    rewards_from_frequencies,
    satisfaction_at_theta,
    validate_menu,
    worker_utility,
)
from .errors import DomainError
from .ironing import IroningResult, pool_adjacent_violators
from .report import SolveReport
from .scalar import maximize_concave


@dataclass(frozen=True)
class CoefficientVector:
    """Per-type linear reward cost of ``f_n`` in the provider objective.

    Normalized by ``Q_n`` so that, with uniform types and no loss block, the
    entries are the familiar ``b_n``.  ``eta`` and ``m`` record the loss block
    (types ``1..m`` weighted by ``eta``) the coefficients were built for.
    """

    coeffs: tuple[float, ...]
    eta: float
    m: int


def _block_weights(n: int, eta: float, m: int) -> list[float]:
    return [eta if i < m else 1.0 for i in range(n)]


def reward_cost_weights(ladder: WorkerTypeLadder, eta: float, m: int) -> list[float]:
    """Unnormalized cost of ``f_n``: ``d/df_n sum_i Q_i w_i R_i``.

    Built by expanding every reward through the recursion
    ``R_i = R_{i-1} + f_i/g_i - f_{i-1}/g_i`` into a linear form and summing
    with weight ``eta`` on the loss block ``i < m``.
    """
    n = ladder.n
    if isinstance(m, bool) or not isinstance(m, int) or not 0 <= m <= n:
        raise DomainError(f"partition index m must lie in [0, {n}], got {m!r}")
    w = _block_weights(n, eta, m)
    g = ladder.gamma
    form = [0.0] * n
    total = [0.0] * n
    for i in range(n):
        form[i] += 1.0 / g[i]
        if i > 0:
            form[i - 1] -= 1.0 / g[i]
        scale = ladder.q[i] * w[i]
        for j in range(i + 1):
            total[j] += scale * form[j]
    return total


def linear_reward_coefficients(ladder: WorkerTypeLadder, eta: float, m: int) -> CoefficientVector:
    raw = reward_cost_weights(ladder, eta, m)
    coeffs = tuple(c / q if q > 0 else math.nan for c, q in zip(raw, ladder.q))
    return CoefficientVector(coeffs, float(eta), m)


def printed_eut_coefficients(ladder: WorkerTypeLadder) -> list[float]:
    """``b_n = 1/g_n + (1/g_n - 1/g_{n+1})(N - n)``, ``b_N = 1/g_N``."""
    g, N = ladder.gamma, ladder.n
    out = []
    for k in range(N):
        n = k + 1
        if n < N:
            out.append(1 / g[k] + (1 / g[k] - 1 / g[k + 1]) * (N - n))
        else:
            out.append(1 / g[k])
    return out


def printed_case3_coefficients(ladder: WorkerTypeLadder, m: int) -> list[float]:
    """The mixed-case coefficients as published (no ``eta`` on the loss block)."""
    g, N = ladder.gamma, ladder.n
    out = []
    for k in range(N):
        n = k + 1
        if n <= m:
            nxt = 1 / g[k + 1] if k + 1 < N else 0.0
            out.append((m - n + 1) / g[k] - (m - n) * nxt + (N - m) / g[k] - (N - m) * nxt)
        elif n < N:
            out.append((N - n + 1) / g[k] - (N - n) / g[k + 1])
        else:
            out.append(1 / g[k])
    return out


@dataclass(frozen=True)
class TypeObjective:
    """``g_weight * G(theta) - cost / theta`` for one type, concave in theta."""

    prefs: ProviderPreferences
    case: CycleCase
    type_index: int
    g_weight: float
    cost: float

    def __call__(self, theta: float) -> float:
        _, G = satisfaction_at_theta(theta, self.prefs, self.case, self.type_index)
        return self.g_weight * G - self.cost / theta

    def slope(self, theta: float) -> float:
        d_lat, d_aoi = self.case.slopes(theta)
        alpha = self.prefs.alpha_for(self.type_index)
        d_g = -alpha * d_aoi - (1 - alpha) * d_lat
        return self.g_weight * self.prefs.beta * d_g + self.cost / theta**2


def theta_bounds(prefs: ProviderPreferences, case: CycleCase) -> tuple[float, float]:
    return case.theta_min, 1.0 / resolve_f_min(prefs, case)


def maximize_per_type(
    coeff: float,
    prefs: ProviderPreferences,
    case: CycleCase,
    weight_on_G: float = 1.0,
    type_index: int = 0,
) -> float:
    """Frequency maximizing ``weight_on_G * G(f) - coeff * f``, floored at ``f_min``.

    The search runs over ``theta`` in ``[theta_min, 1/f_min]``, which is the
    same as maximizing over the whole case domain and then clamping, since the
    objective is concave in theta.
    """
    lo, hi = theta_bounds(prefs, case)
    obj = TypeObjective(prefs, case, type_index, weight_on_G, coeff)
    res = maximize_concave(obj, lo, hi, slope=obj.slope)
    return 1.0 / res.x


def type_objectives(
    ladder: WorkerTypeLadder,
    prefs: ProviderPreferences,
    case: CycleCase,
    eta: float = 1.0,
    m: int = 0,
) -> list[TypeObjective]:
    """Separable objective terms with ``eta`` applied to the first ``m`` types."""
    prefs.check_ladder(ladder)
    costs = reward_cost_weights(ladder, eta, m)
    w = _block_weights(ladder.n, eta, m)
    return [
        TypeObjective(prefs, case, n, ladder.q[n] * w[n], costs[n]) for n in range(ladder.n)
    ]


def solve_frequencies(
    ladder: WorkerTypeLadder,
    prefs: ProviderPreferences,
    case: CycleCase,
    eta: float = 1.0,
    m: int = 0,
) -> tuple[list[float], list[float], IroningResult | None]:
    """Per-type optimal frequencies for the given loss block, ironed if needed.

    Returns ``(f, f_unironed, ironing)``; ``ironing`` is None when the per-type
    optima were already nondecreasing.
    """
    objs = type_objectives(ladder, prefs, case, eta, m)
    lo, hi = theta_bounds(prefs, case)
    thetas = [maximize_concave(o, lo, hi, slope=o.slope).x for o in objs]
    raw_f = [1.0 / th for th in thetas]
    if all(b <= a for a, b in zip(thetas, thetas[1:])):
        return raw_f, raw_f, None
    ironed = pool_adjacent_violators(thetas, objs, bounds=(lo, hi), increasing=False)
    return [1.0 / th for th in ironed.values], raw_f, ironed


def build_report(
    solver: str,
    menu: ContractMenu,
    ladder: WorkerTypeLadder,
    prefs: ProviderPreferences,
    case: CycleCase,
    **extra,
) -> SolveReport:
    terms = provider_terms(menu, ladder, prefs, case)
    return SolveReport(
        solver=solver,
        f=menu.f,
        R=menu.R,
        worker_utility=[worker_utility(it, g) for it, g in zip(menu.items, ladder.gamma)],
        terms_eut=terms,
        terms_pt=[pt_value(u, prefs) for u in terms],
        U_s_eut=provider_eut(menu, ladder, prefs, case),
        U_s_pt=provider_pt(menu, ladder, prefs, case),
        validation=validate_menu(menu, ladder),
        latency_model=case.latency_model,
        eta=prefs.eta,
        u_ref=prefs.u_ref,
        **extra,
    )


def _ironing_events(ironing: IroningResult | None) -> list[dict]:
    if ironing is None:
        return []
    events = [dict(ev) for ev in ironing.events]
    for ev in events:
        # solver irons in theta; report blocks as 1-based types and frequencies
        if "value" in ev:
            ev["f"] = 1.0 / ev.pop("value")
        for key in ("start", "end"):
            if key in ev:
                ev[key] += 1
    return events


def solve_eut(
    ladder: WorkerTypeLadder, prefs: ProviderPreferences, case: CycleCase
) -> tuple[ContractMenu, SolveReport]:
    f, raw_f, ironing = solve_frequencies(ladder, prefs, case)
    R = rewards_from_frequencies(f, ladder)
    menu = ContractMenu.from_arrays(f, R, solver="eut")
    coeffs = linear_reward_coefficients(ladder, 1.0, 0).coeffs
    flags = []
    if ironing is not None:
        flags.append("projected" if ironing.projected else "ironed")
    report = build_report(
        "eut",
        menu,
        ladder,
        prefs,
        case,
        case_tag="EUT",
        m=0,
        f_unironed=raw_f,
        coefficients=list(coeffs),
        ironing=_ironing_events(ironing),
        flags=flags,
    )
    return menu, report


@dataclass
class LemmaResult:
    name: str
    premise: bool
    holds: bool | None  # None when the premise is unmet and the check is skipped
    witness: list[int] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.holds is not False

    def to_dict(self) -> dict:
        return {"premise": self.premise, "holds": self.holds, "witness": self.witness}


def check_lemmas(
    ladder: WorkerTypeLadder, menu: ContractMenu, report: SolveReport, tol: float = 1e-9
) -> dict[str, LemmaResult]:
    """Check the three monotonicity lemmas on a solved menu.

    Witnesses are 1-based type indices ``n`` where the ordering between
    ``n`` and ``n + 1`` breaks, or where the premise fails.
    """
    inv = [1.0 / g for g in ladder.gamma]
    N = ladder.n
    strict = all(b > a for a, b in zip(ladder.gamma, ladder.gamma[1:]))

    own = [worker_utility(it, g) for it, g in zip(menu.items, ladder.gamma)]
    bad2 = [n + 1 for n in range(N - 1) if own[n + 1] < own[n] - tol]
    lemma2 = LemmaResult("lemma2", True, not bad2, bad2)

    convex_bad = [n + 1 for n in range(1, N - 1) if inv[n - 1] + inv[n + 1] - 2 * inv[n] < 0]
    premise3 = strict and not convex_bad
    b = linear_reward_coefficients(ladder, 1.0, 0).coeffs
    bad3 = [n + 1 for n in range(N - 1) if not b[n] > b[n + 1]]
    if premise3:
        lemma3 = LemmaResult("lemma3", True, not bad3, bad3)
    else:
        lemma3 = LemmaResult("lemma3", False, None, convex_bad)

    premise4 = ladder.is_uniform and not bad3
    terms = report.terms_eut
    bad4 = [
        n + 1
        for n in range(N - 1)
        if terms[n + 1] < terms[n] - tol * max(1.0, abs(terms[n]))
    ]
    if premise4:
        lemma4 = LemmaResult("lemma4", True, not bad4, bad4)
    else:
        lemma4 = LemmaResult("lemma4", False, None, [])
    return {"lemma2": lemma2, "lemma3": lemma3, "lemma4": lemma4}
