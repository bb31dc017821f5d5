"""Prospect-theory contract design.

The provider frames each per-type utility ``U_n = G_n - R_n`` against a
reference point.  With linear framing (``zeta+ = zeta- = 1``) the PT objective
is the EUT objective with the loss block reweighted by ``eta``, so the solver
reuses the separable EUT machinery once the loss/gain partition is known:

* all types in gain or all in loss, or ``eta == 1``: the EUT menu is optimal;
* ``eta < 1``: the partition brackets the reference point in the EUT per-type
  utilities, and types ``1..m`` are re-solved with ``eta`` on their block;
* ``eta > 1``: candidate partitions are polled in order, each candidate is
  re-solved and ironed, and the first whose own per-type utilities bracket the
  reference point is accepted.

Other framings go to the grid oracle :func:`brute_force_pt`.
"""

from __future__ import annotations

import itertools
import math
import warnings
from collections.abc import Callable, Sequence
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .aoi import CycleCase
from .contract import (
    ContractMenu,
    ProviderPreferences,
    WorkerTypeLadder,
    provider_pt,
    provider_terms,
    resolve_f_min,
    rewards_from_frequencies,
    satisfaction_at_theta,
    type_weights,
)
from .errors import DomainError, ResourceError
from .eut import (
    _ironing_events,
    build_report,
    linear_reward_coefficients,
    printed_case3_coefficients,
    solve_eut,
    solve_frequencies,
)
from .ironing import pool_adjacent_violators
from .report import SolveReport

MAX_ORACLE_TUPLES = 20_000_000


class PtTag(str, Enum):
    ALL_GAIN = "AllGain"
    ALL_LOSS = "AllLoss"
    MIXED = "Mixed"


@dataclass(frozen=True)
class PtCase:
    tag: PtTag
    m: int = 0

    def __post_init__(self) -> None:
        object.__setattr__(self, "tag", PtTag(self.tag))


def bracket_index(terms: Sequence[float], u_ref: float) -> int:
    """Number of types strictly below the reference point.

    For nondecreasing ``terms`` this is the ``m`` with
    ``terms[m-1] < u_ref <= terms[m]``; a type sitting exactly on the reference
    point counts as a gain.
    """
    return sum(1 for u in terms if u < u_ref)


def classify_terms(terms: Sequence[float], u_ref: float) -> PtCase:
    if terms[0] >= u_ref:
        return PtCase(PtTag.ALL_GAIN, 0)
    if terms[-1] <= u_ref:
        return PtCase(PtTag.ALL_LOSS, len(terms))
    return PtCase(PtTag.MIXED, bracket_index(terms, u_ref))


def classify_case(
    ladder: WorkerTypeLadder,
    prefs: ProviderPreferences,
    case: CycleCase,
    eut_menu: ContractMenu,
) -> PtCase:
    """Regime of the EUT menu relative to ``u_ref``.

    ``m`` of a mixed regime comes from :func:`find_partition` (bracketing for
    ``eta <= 1``, polling for ``eta > 1``).
    """
    terms = provider_terms(eut_menu, ladder, prefs, case)
    base = classify_terms(terms, prefs.u_ref)
    if base.tag is not PtTag.MIXED:
        return base
    mode = "polling" if prefs.eta > 1 else "eut_based"
    part = find_partition(ladder, prefs, case, mode, eut_menu=eut_menu)
    return PtCase(PtTag.MIXED, part.m)


@dataclass
class PartitionResult:
    m: int
    validated: bool
    mode: str
    f: list[float] = field(default_factory=list)
    candidates: list[dict] = field(default_factory=list)
    ironing: list[dict] = field(default_factory=list)
    projected: bool = False


def _candidate(ladder, prefs, case, m):
    f, raw_f, ironing = solve_frequencies(ladder, prefs, case, prefs.eta, m)
    menu = ContractMenu.from_arrays(f, rewards_from_frequencies(f, ladder))
    terms = provider_terms(menu, ladder, prefs, case)
    return f, raw_f, ironing, menu, terms


def find_partition(
    ladder: WorkerTypeLadder,
    prefs: ProviderPreferences,
    case: CycleCase,
    mode: str = "eut_based",
    eut_menu: ContractMenu | None = None,
    check: str = "pt",
) -> PartitionResult:
    """Locate the loss/gain boundary ``m`` of a mixed regime.

    ``eut_based`` brackets ``u_ref`` in the EUT per-type utilities.  ``polling``
    tries ``m = 1 .. N-1``; for each it re-solves types ``1..m`` with ``eta`` on
    their block, irons, and accepts the first ``m`` whose per-type utilities
    satisfy ``U_{m+1} >= u_ref >= U_m``.  ``check="pt"`` evaluates that test on
    the candidate menu, ``check="eut"`` on the EUT menu.  When nothing
    validates, the candidate with the highest PT objective wins (smallest
    ``m`` on ties) and ``validated`` is False.
    """
    if eut_menu is None:
        eut_menu, _ = solve_eut(ladder, prefs, case)
    eut_terms = provider_terms(eut_menu, ladder, prefs, case)
    if mode == "eut_based":
        return PartitionResult(bracket_index(eut_terms, prefs.u_ref), True, mode)
    if mode != "polling":
        raise DomainError(f"unknown partition mode {mode!r}")
    if check not in ("pt", "eut"):
        raise DomainError(f"unknown polling check {check!r}")

    u_ref = prefs.u_ref
    polled = []
    best = None
    for m in range(1, ladder.n):
        f, _, ironing, menu, terms = _candidate(ladder, prefs, case, m)
        probe = terms if check == "pt" else eut_terms
        ok = probe[m] >= u_ref >= probe[m - 1]
        objective = provider_pt(menu, ladder, prefs, case)
        polled.append({"m": m, "validated": ok, "U_s_pt": objective})
        entry = (m, f, ironing)
        if ok:
            return _partition(entry, True, polled)
        if best is None or objective > best[0]:
            best = (objective, entry)
    if best is None:  # single type: no interior boundary
        return PartitionResult(bracket_index(eut_terms, u_ref), False, "polling", candidates=polled)
    return _partition(best[1], False, polled)


def _partition(entry, validated, polled) -> PartitionResult:
    m, f, ironing = entry
    return PartitionResult(
        m,
        validated,
        "polling",
        f=list(f),
        candidates=polled,
        ironing=_ironing_events(ironing),
        projected=bool(ironing is not None and ironing.projected),
    )


def iron_monotone(
    candidates: Sequence[float],
    objectives: Sequence[Callable[[float], float]],
    bounds: tuple[float, float] | None = None,
) -> list[float]:
    """Nondecreasing sequence maximizing ``sum objectives[n](x_n)``.

    ``candidates`` are the unconstrained per-coordinate maximizers.  See
    :func:`aoi_contract.ironing.pool_adjacent_violators` for the details and
    the non-concave fallback.
    """
    return pool_adjacent_violators(candidates, objectives, bounds=bounds).values


def solve_pt(
    ladder: WorkerTypeLadder,
    prefs: ProviderPreferences,
    case: CycleCase,
    polling_check: str = "pt",
    oracle_grid: int = 200,
) -> tuple[ContractMenu, SolveReport]:
    prefs.check_ladder(ladder)
    if prefs.zeta_plus != 1.0 or prefs.zeta_minus != 1.0:
        warnings.warn(
            "curved PT framing has no closed-form path; using the grid oracle",
            RuntimeWarning,
            stacklevel=2,
        )
        menu, _ = brute_force_pt(ladder, prefs, case, oracle_grid)
        report = build_report(
            "pt-bruteforce",
            menu,
            ladder,
            prefs,
            case,
            case_tag=menu.provenance["case_tag"],
            m=menu.provenance["m"],
            flags=["bruteforce"],
        )
        return menu, report

    eut_menu, eut_report = solve_eut(ladder, prefs, case)
    terms = eut_report.terms_eut
    regime = classify_terms(terms, prefs.u_ref)
    eta = prefs.eta
    flags = list(eut_report.flags)
    notes = []
    polling = []
    ironing = list(eut_report.ironing)
    m = regime.m
    adjusted: list[int] = []
    printed = None

    if prefs.use_weighting:
        notes.append("probability weighting applied to evaluation only")

    if regime.tag is not PtTag.MIXED or eta == 1.0:
        f = eut_menu.f
        if regime.tag is PtTag.MIXED:
            notes.append("eta == 1: PT solution coincides with EUT")
        else:
            notes.append(f"{regime.tag.value}: PT solution coincides with EUT")
    elif eta < 1.0:
        f, _, iron = solve_frequencies(ladder, prefs, case, eta, m)
        ironing = _ironing_events(iron)
        flags = []
        if iron is not None:
            flags.append("projected" if iron.projected else "ironed")
        adjusted = list(range(1, m + 1))
    else:
        part = find_partition(ladder, prefs, case, "polling", eut_menu=eut_menu, check=polling_check)
        m = part.m
        f = part.f
        ironing = part.ironing
        polling = part.candidates
        flags = []
        if ironing:
            flags.append("projected" if part.projected else "ironed")
        if not part.validated:
            flags.append("partition_unvalidated")
        adjusted = list(range(1, m + 1))

    coeffs = linear_reward_coefficients(ladder, eta if regime.tag is PtTag.MIXED else 1.0, m if regime.tag is PtTag.MIXED else 0)
    if regime.tag is PtTag.MIXED and eta != 1.0:
        printed = printed_case3_coefficients(ladder, m)
        if any(not math.isclose(a, b, rel_tol=1e-12) for a, b in zip(coeffs.coeffs, printed)):
            notes.append("loss-block coefficients differ from the eta-free published form")

    R = rewards_from_frequencies(f, ladder)
    menu = ContractMenu.from_arrays(f, R, solver="pt", case_tag=regime.tag.value, m=m)
    report = build_report(
        "pt",
        menu,
        ladder,
        prefs,
        case,
        case_tag=regime.tag.value,
        m=m,
        adjusted_types=adjusted,
        coefficients=list(coeffs.coeffs),
        printed_coefficients=printed,
        ironing=ironing,
        flags=flags,
        notes=notes,
        polling=polling,
    )
    return menu, report


def _pt_values(u: np.ndarray, prefs: ProviderPreferences) -> np.ndarray:
    diff = u - prefs.u_ref
    gain = np.where(diff >= 0, np.abs(diff) ** prefs.zeta_plus, 0.0)
    loss = np.where(diff < 0, -prefs.eta * np.abs(diff) ** prefs.zeta_minus, 0.0)
    return gain + loss


def brute_force_pt(
    ladder: WorkerTypeLadder,
    prefs: ProviderPreferences,
    case: CycleCase,
    grid_points: int = 200,
    max_tuples: int = MAX_ORACLE_TUPLES,
) -> tuple[ContractMenu, float]:
    """Best monotone frequency tuple on a uniform grid, by exhaustive search.

    Rewards follow the binding-constraint recursion and the objective is the
    PT provider utility evaluated from its definition.  Cost grows like
    ``C(grid + N - 1, N)``; beyond ``max_tuples`` a :class:`ResourceError` is
    raised.
    """
    prefs.check_ladder(ladder)
    if grid_points < 2:
        raise DomainError("grid_points >= 2 required")
    N = ladder.n
    n_tuples = math.comb(grid_points + N - 1, N)
    if n_tuples > max_tuples:
        raise ResourceError(
            f"{n_tuples} monotone tuples for N={N}, grid={grid_points}; "
            f"reduce grid_points or N (limit {max_tuples})"
        )
    f_lo = resolve_f_min(prefs, case)
    f_hi = 1.0 / case.theta_min
    grid = np.linspace(f_lo, f_hi, grid_points)
    grid[-1] = f_hi
    G = np.array(
        [[satisfaction_at_theta(1.0 / x, prefs, case, n)[1] for x in grid] for n in range(N)]
    )
    inv = np.array([1.0 / g for g in ladder.gamma])
    rent_rate = inv[:-1] - inv[1:]
    w = np.array(type_weights(ladder, prefs)) * ladder.workers

    best_val = -math.inf
    best_idx = None
    combos = itertools.combinations_with_replacement(range(grid_points), N)
    chunk = 1 << 18
    while True:
        flat = np.fromiter(
            itertools.chain.from_iterable(itertools.islice(combos, chunk)), dtype=np.int64
        )
        if flat.size == 0:
            break
        idx = flat.reshape(-1, N)
        F = grid[idx]
        rent = np.zeros_like(F)
        if N > 1:
            rent[:, 1:] = np.cumsum(F[:, :-1] * rent_rate, axis=1)
        R = F * inv + rent
        terms = G[np.arange(N), idx] - R
        obj = _pt_values(terms, prefs) @ w
        k = int(np.argmax(obj))
        if obj[k] > best_val:
            best_val = float(obj[k])
            best_idx = idx[k].copy()

    f = [float(grid[i]) for i in best_idx]
    R = rewards_from_frequencies(f, ladder)
    terms = provider_terms(ContractMenu.from_arrays(f, R), ladder, prefs, case)
    regime = classify_terms(terms, prefs.u_ref)
    menu = ContractMenu.from_arrays(
        f,
        R,
        solver="pt-bruteforce",
        grid_points=grid_points,
        grid_step=float(grid[1] - grid[0]),
        case_tag=regime.tag.value,
        m=regime.m,
    )
    return menu, provider_pt(menu, ladder, prefs, case)
