"""Comparison mechanisms.

These are declared reconstructions of the mechanisms the proposed contract is
compared against, not faithful copies of their source models:

CC  complete information: each type gets its own first-best item with the
    participation constraint binding, so workers keep nothing.
CS  social welfare: frequencies maximize total surplus under the monotone
    menu constraint, and rewards then follow the information-rent recursion.
SG  uniform posted item: the provider, not knowing costs, posts one
    (frequency, reward) pair; only types that find it individually rational
    participate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .aoi import CycleCase
from .contract import (
    ContractMenu,
    ProviderPreferences,
    WorkerTypeLadder,
    rewards_from_frequencies,
    satisfaction_at_theta,
    type_weights,
    worker_utility,
)
from .eut import TypeObjective, theta_bounds
from .ironing import _Sum, pool_adjacent_violators
from .pt import solve_pt
from .scalar import maximize_concave

MECHANISMS = ("CA", "CC", "CS", "SG")


@dataclass
class MechanismResult:
    mechanism: str
    f: list[float]
    R: list[float]
    provider_utility: float
    worker_utility: list[float]
    participates: list[bool]
    welfare: float
    provider_utility_pt: float | None = None
    extra: dict = field(default_factory=dict)

    def rows(self, sweep_param=None) -> list[dict]:
        return [
            {
                "mechanism": self.mechanism,
                "sweep_param": sweep_param,
                "provider_utility": self.provider_utility,
                "welfare": self.welfare,
                "type_index": n + 1,
                "worker_utility": self.worker_utility[n],
                "f": self.f[n],
                "R": self.R[n],
                "participates": self.participates[n],
            }
            for n in range(len(self.f))
        ]


def _first_best_objectives(ladder, prefs, case) -> list[TypeObjective]:
    """Per-type surplus ``Q_n (G(theta) - 1/(gamma_n theta))``."""
    return [
        TypeObjective(prefs, case, n, ladder.q[n], ladder.q[n] / ladder.gamma[n])
        for n in range(ladder.n)
    ]


def evaluate_mechanism(mechanism, f, R, ladder, prefs, case, participates=None, **extra) -> MechanismResult:
    """Provider utility, worker utilities and welfare of a menu.

    Non-participating types contribute nothing to either side.
    """
    participates = participates or [True] * ladder.n
    menu = ContractMenu.from_arrays(f, R)
    terms = [
        _g_at(it.f, prefs, case, n) - it.R if p else 0.0
        for n, (it, p) in enumerate(zip(menu.items, participates))
    ]
    w = type_weights(ladder, prefs)
    M = ladder.workers
    wu = [
        worker_utility(it, g) if p else 0.0
        for it, g, p in zip(menu.items, ladder.gamma, participates)
    ]
    provider = math.fsum(M * w[n] * terms[n] for n in range(ladder.n) if participates[n])
    welfare = provider + math.fsum(M * w[n] * wu[n] for n in range(ladder.n))
    return MechanismResult(mechanism, list(f), list(R), provider, wu, list(participates), welfare, **extra)


def solve_cc(ladder: WorkerTypeLadder, prefs: ProviderPreferences, case: CycleCase) -> MechanismResult:
    prefs.check_ladder(ladder)
    lo, hi = theta_bounds(prefs, case)
    f = []
    for n in range(ladder.n):
        # per-type problem is independent of Q_n, so solve it unweighted
        obj = TypeObjective(prefs, case, n, 1.0, 1.0 / ladder.gamma[n])
        f.append(1.0 / maximize_concave(obj, lo, hi, slope=obj.slope).x)
    R = [fn / g for fn, g in zip(f, ladder.gamma)]
    return evaluate_mechanism("CC", f, R, ladder, prefs, case)


def solve_cs(ladder: WorkerTypeLadder, prefs: ProviderPreferences, case: CycleCase) -> MechanismResult:
    prefs.check_ladder(ladder)
    lo, hi = theta_bounds(prefs, case)
    objs = _first_best_objectives(ladder, prefs, case)
    thetas = []
    for n in range(ladder.n):
        obj = TypeObjective(prefs, case, n, 1.0, 1.0 / ladder.gamma[n])
        thetas.append(maximize_concave(obj, lo, hi, slope=obj.slope).x)
    ironed = False
    if any(b > a for a, b in zip(thetas, thetas[1:])):
        thetas = pool_adjacent_violators(thetas, objs, bounds=(lo, hi), increasing=False).values
        ironed = True
    f = [1.0 / th for th in thetas]
    R = rewards_from_frequencies(f, ladder)
    return evaluate_mechanism("CS", f, R, ladder, prefs, case, extra={"ironed": ironed})


def solve_sg_uniform(
    ladder: WorkerTypeLadder, prefs: ProviderPreferences, case: CycleCase
) -> MechanismResult:
    """Best single posted item over participation thresholds ``k``.

    For threshold ``k`` the reward binds type ``k``'s IR, ``R = f / gamma_k``,
    so every type with ``gamma_n >= gamma_k`` joins.  The frequency maximizes
    the provider's utility over that upper segment; the best ``k`` wins, the
    lowest ``k`` on ties.
    """
    prefs.check_ladder(ladder)
    lo, hi = theta_bounds(prefs, case)
    w = type_weights(ladder, prefs)
    best = None
    seen = set()
    for k in range(ladder.n):
        joined = tuple(n for n in range(ladder.n) if ladder.gamma[n] >= ladder.gamma[k])
        if joined in seen:
            continue
        seen.add(joined)
        mass = math.fsum(w[n] for n in joined)
        parts = [TypeObjective(prefs, case, n, w[n], 0.0) for n in joined]
        parts.append(TypeObjective(prefs, case, joined[0], 0.0, mass / ladder.gamma[k]))
        block = _Sum(parts)
        res = maximize_concave(block, lo, hi, slope=block.slope)
        value = ladder.workers * res.value
        if best is None or value > best[0]:
            best = (value, k, res.x, joined)
    _, k, theta, joined = best
    f_bar = 1.0 / theta
    R_bar = f_bar / ladder.gamma[k]
    participates = [n in joined for n in range(ladder.n)]
    f = [f_bar if p else 0.0 for p in participates]
    R = [R_bar if p else 0.0 for p in participates]
    res = evaluate_mechanism("SG", f, R, ladder, prefs, case, participates, extra={"threshold_type": k + 1})
    res.extra["posted_item"] = {"f": f_bar, "R": R_bar}
    return res


def _g_at(f, prefs, case, n):
    return satisfaction_at_theta(1.0 / f, prefs, case, n)[1]


def compare_mechanisms(
    ladder: WorkerTypeLadder, prefs: ProviderPreferences, case: CycleCase
) -> dict[str, MechanismResult]:
    """CA (the PT contract), CC, CS and SG on one instance.

    Provider utility is the objective (EUT) value for every mechanism; the CA
    entry also carries the subjective PT value.
    """
    menu, report = solve_pt(ladder, prefs, case)
    ca = evaluate_mechanism("CA", menu.f, menu.R, ladder, prefs, case, provider_utility_pt=report.U_s_pt)
    ca.extra = {"case_tag": report.case_tag, "m": report.m}
    return {
        "CA": ca,
        "CC": solve_cc(ladder, prefs, case),
        "CS": solve_cs(ladder, prefs, case),
        "SG": solve_sg_uniform(ladder, prefs, case),
    }


def soft_ordering(results: dict[str, MechanismResult]) -> dict[str, bool]:
    """Orderings reported at paper settings (reconstructions, so soft)."""
    U = {k: v.provider_utility for k, v in results.items()}
    W = {k: math.fsum(v.worker_utility) for k, v in results.items()}
    tol = 1e-9
    return {
        "provider CC>=CA": U["CC"] >= U["CA"] - tol * max(1.0, abs(U["CA"])),
        "provider CA>=CS": U["CA"] >= U["CS"] - tol * max(1.0, abs(U["CS"])),
        "provider CS>=SG": U["CS"] >= U["SG"] - tol * max(1.0, abs(U["SG"])),
        "workers CS highest": all(W["CS"] >= W[k] - tol for k in W),
        "workers SG>=CA": W["SG"] >= W["CA"] - tol,
        "workers CC zero": all(abs(u) <= 1e-9 for u in results["CC"].worker_utility),
    }
