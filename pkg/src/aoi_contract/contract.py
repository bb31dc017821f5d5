"""Contract data model, utilities of both sides, and IR/IC validation.

Type indices are 0-based in the Python API; serialized output is 1-based.
"""

from __future__ import annotations

import dataclasses
import math
from collections.abc import Sequence
from dataclasses import dataclass, field
from numbers import Integral, Real

from .aoi import CycleCase
from .errors import DomainError

IC_TOL = 1e-9


def _finite(name: str, value) -> float:
    if isinstance(value, bool) or not isinstance(value, Real) or not math.isfinite(value):
        raise DomainError(f"{name} must be a finite number, got {value!r}")
    return float(value)


@dataclass(frozen=True)
class WorkerTypeLadder:
    """Sorted worker types ``gamma`` (inverse per-time update cost).

    ``q[n]`` is the probability that a worker has type ``n`` and ``workers`` is
    the number of workers the provider contracts with.
    """

    gamma: tuple[float, ...]
    q: tuple[float, ...]
    workers: int = 10

    def __post_init__(self) -> None:
        gamma = tuple(_finite("gamma", g) for g in self.gamma)
        q = tuple(_finite("q", p) for p in self.q)
        object.__setattr__(self, "gamma", gamma)
        object.__setattr__(self, "q", q)
        if not gamma:
            raise DomainError("ladder needs at least one type")
        if len(q) != len(gamma):
            raise DomainError(f"q has {len(q)} entries for {len(gamma)} types")
        if any(g <= 0 for g in gamma):
            raise DomainError("gamma must be strictly positive")
        if any(b < a for a, b in zip(gamma, gamma[1:])):
            raise DomainError("gamma must be nondecreasing")
        if any(p < 0 for p in q):
            raise DomainError("q entries must be >= 0")
        if abs(math.fsum(q) - 1.0) > 1e-12:
            raise DomainError(f"q must sum to 1 (got {math.fsum(q)!r})")
        if isinstance(self.workers, bool) or not isinstance(self.workers, Integral) or self.workers < 1:
            raise DomainError(f"workers must be a positive integer, got {self.workers!r}")

    @classmethod
    def uniform(cls, gamma: Sequence[float], workers: int = 10) -> WorkerTypeLadder:
        n = len(gamma)
        return cls(tuple(gamma), tuple([1.0 / n] * n), workers)

    @property
    def n(self) -> int:
        return len(self.gamma)

    @property
    def is_uniform(self) -> bool:
        return all(p == self.q[0] for p in self.q)


@dataclass(frozen=True)
class ContractItem:
    f: float
    R: float

    def __post_init__(self) -> None:
        if _finite("f", self.f) < 0:
            raise DomainError(f"f must be >= 0, got {self.f}")
        if _finite("R", self.R) < 0:
            raise DomainError(f"R must be >= 0, got {self.R}")


@dataclass(frozen=True)
class ContractMenu:
    """One item per worker type, index-aligned with the ladder.

    Monotonicity is not enforced here; :func:`validate_menu` reports it.
    """

    items: tuple[ContractItem, ...]
    provenance: dict = field(default_factory=dict, compare=False)

    @classmethod
    def from_arrays(cls, f: Sequence[float], R: Sequence[float], **provenance) -> ContractMenu:
        if len(f) != len(R):
            raise DomainError("f and R lengths differ")
        return cls(tuple(ContractItem(float(x), float(r)) for x, r in zip(f, R)), provenance)

    @property
    def f(self) -> list[float]:
        return [item.f for item in self.items]

    @property
    def R(self) -> list[float]:
        return [item.R for item in self.items]

    def __len__(self) -> int:
        return len(self.items)


@dataclass(frozen=True)
class ProviderPreferences:
    """Service-provider preferences.

    ``alpha`` is either one weight for every type or a per-type sequence.
    ``L_max`` is the maximum tolerated service latency.  ``f_min=None`` means
    the case default from :meth:`CycleCase.default_f_min`.
    """

    beta: float = 1.0
    alpha: float | tuple[float, ...] = 0.8
    K: float = 200.0
    L_max: float = 50.0
    u_ref: float = 0.0
    eta: float = 1.0
    zeta_plus: float = 1.0
    zeta_minus: float = 1.0
    rho: float = 1.0
    use_weighting: bool = False
    f_min: float | None = None

    def __post_init__(self) -> None:
        if _finite("beta", self.beta) <= 0:
            raise DomainError("beta > 0 required")
        if isinstance(self.alpha, Sequence):
            alpha = tuple(_finite("alpha", x) for x in self.alpha)
            object.__setattr__(self, "alpha", alpha)
        else:
            alpha = (_finite("alpha", self.alpha),)
        if any(not 0.0 <= x <= 1.0 for x in alpha):
            raise DomainError("alpha must lie in [0, 1]")
        _finite("K", self.K)
        _finite("L_max", self.L_max)
        _finite("u_ref", self.u_ref)
        if _finite("eta", self.eta) < 0:
            raise DomainError("eta >= 0 required")
        for name in ("zeta_plus", "zeta_minus"):
            if not 0.0 < _finite(name, getattr(self, name)) <= 1.0:
                raise DomainError(f"{name} must lie in (0, 1]")
        if _finite("rho", self.rho) <= 0:
            raise DomainError("rho > 0 required")
        if self.f_min is not None and _finite("f_min", self.f_min) <= 0:
            raise DomainError("f_min > 0 required")

    def alpha_for(self, n: int) -> float:
        if isinstance(self.alpha, tuple):
            return self.alpha[n]
        return float(self.alpha)

    def check_ladder(self, ladder: WorkerTypeLadder) -> None:
        if isinstance(self.alpha, tuple) and len(self.alpha) != ladder.n:
            raise DomainError(f"alpha has {len(self.alpha)} entries for {ladder.n} types")

    def replace(self, **changes) -> ProviderPreferences:
        return dataclasses.replace(self, **changes)


def resolve_f_min(prefs: ProviderPreferences, case: CycleCase) -> float:
    f_min = case.default_f_min() if prefs.f_min is None else prefs.f_min
    if 1.0 / f_min < case.theta_min * (1 - 1e-12):
        raise DomainError(
            f"empty feasible interval: f_min={f_min} exceeds 1/theta_min={1 / case.theta_min}"
        )
    return f_min


def worker_utility(item: ContractItem, gamma_n: float) -> float:
    if not gamma_n > 0:
        raise DomainError(f"gamma_n > 0 required, got {gamma_n}")
    return item.R - item.f / gamma_n


def rewards_from_frequencies(f: Sequence[float], ladder: WorkerTypeLadder) -> list[float]:
    """Rewards that bind the lowest type's IR and every local downward IC.

    ``R_n = f_n/g_n + sum_{i<n} (f_i/g_i - f_i/g_{i+1})``.
    """
    if len(f) != ladder.n:
        raise DomainError(f"{len(f)} frequencies for {ladder.n} types")
    if any(x < 0 for x in f):
        raise DomainError("frequencies must be >= 0")
    for i in range(len(f) - 1):
        if f[i + 1] < f[i] - 1e-12 * max(1.0, abs(f[i])):
            raise DomainError(f"frequencies must be nondecreasing (f[{i}] > f[{i + 1}])")
    g = ladder.gamma
    rewards = []
    rent = 0.0
    for n, fn in enumerate(f):
        rewards.append(fn / g[n] + rent)
        if n + 1 < len(f):
            rent += f[n] / g[n] - f[n] / g[n + 1]
    return rewards


@dataclass(frozen=True)
class ValidationReport:
    """IR, IC and monotonicity checks of a menu against a ladder.

    ``utility[n][i]`` is what a type-``n`` worker gets from item ``i`` and
    ``ic_slack[n][i] = utility[n][n] - utility[n][i]``.
    """

    ir_slack: list[float]
    utility: list[list[float]]
    ic_slack: list[list[float]]
    f_monotone: bool
    R_monotone: bool
    tol: float

    @property
    def worst_ir(self) -> float:
        return min(self.ir_slack)

    @property
    def worst_ic(self) -> float:
        n = len(self.ic_slack)
        vals = [self.ic_slack[i][j] for i in range(n) for j in range(n) if i != j]
        return min(vals) if vals else math.inf

    @property
    def ir_ok(self) -> bool:
        return self.worst_ir >= -self.tol

    @property
    def ic_ok(self) -> bool:
        return self.worst_ic >= -self.tol

    @property
    def passed(self) -> bool:
        return self.ir_ok and self.ic_ok and self.f_monotone and self.R_monotone

    def failures(self) -> list[str]:
        out = []
        for n, s in enumerate(self.ir_slack):
            if s < -self.tol:
                out.append(f"IR type {n + 1}: slack {s:.6g}")
        for n, row in enumerate(self.ic_slack):
            for i, s in enumerate(row):
                if i != n and s < -self.tol:
                    out.append(f"IC type {n + 1} vs item {i + 1}: slack {s:.6g}")
        if not self.f_monotone:
            out.append("f not nondecreasing")
        if not self.R_monotone:
            out.append("R not nondecreasing")
        return out

    def to_dict(self) -> dict:
        return {
            "passed": self.passed,
            "worst_ir_slack": self.worst_ir,
            "worst_ic_slack": self.worst_ic if len(self.ir_slack) > 1 else None,
            "f_monotone": self.f_monotone,
            "R_monotone": self.R_monotone,
            "failures": self.failures(),
        }


def validate_menu(menu: ContractMenu, ladder: WorkerTypeLadder, tol: float = IC_TOL) -> ValidationReport:
    if len(menu) != ladder.n:
        raise DomainError(f"menu has {len(menu)} items for {ladder.n} types")
    items = menu.items
    utility = [[worker_utility(item, g) for item in items] for g in ladder.gamma]
    n = ladder.n
    ir = [utility[k][k] for k in range(n)]
    ic = [[utility[k][k] - utility[k][i] for i in range(n)] for k in range(n)]
    f, R = menu.f, menu.R
    f_mono = all(b >= a - tol for a, b in zip(f, f[1:]))
    R_mono = all(b >= a - tol for a, b in zip(R, R[1:]))
    return ValidationReport(ir, utility, ic, f_mono, R_mono, tol)


def satisfaction_at_theta(
    theta: float, prefs: ProviderPreferences, case: CycleCase, n: int
) -> tuple[float, float]:
    lat, aoi = case.curves(theta)
    alpha = prefs.alpha_for(n)
    g = alpha * (prefs.K - aoi) + (1 - alpha) * (prefs.L_max - lat)
    return g, prefs.beta * g


def performance_and_satisfaction(
    f: float, prefs: ProviderPreferences, case: CycleCase, type_index: int
) -> tuple[float, float]:
    """Performance ``g`` and satisfaction ``G = beta * g`` at frequency ``f``.

    ``g = alpha_n (K - AoI(1/f)) + (1 - alpha_n) (L_max - latency(1/f))``.
    """
    if not f > 0:
        raise DomainError(f"f > 0 required, got {f}")
    return satisfaction_at_theta(1.0 / f, prefs, case, type_index)


def prelec_weight(q: float, rho: float) -> float:
    if not q > 0:
        raise DomainError(f"probability must be > 0, got {q}")
    if q > 1:
        raise DomainError(f"probability must be <= 1, got {q}")
    if not rho > 0:
        raise DomainError(f"rho > 0 required, got {rho}")
    if q == 1.0:
        return 1.0
    return math.exp(-((-math.log(q)) ** rho))


def type_weights(ladder: WorkerTypeLadder, prefs: ProviderPreferences) -> list[float]:
    if not prefs.use_weighting:
        return list(ladder.q)
    return [prelec_weight(p, prefs.rho) if p > 0 else 0.0 for p in ladder.q]


def provider_terms(
    menu: ContractMenu, ladder: WorkerTypeLadder, prefs: ProviderPreferences, case: CycleCase
) -> list[float]:
    """Per-type objective provider utility ``G_n - R_n``."""
    if len(menu) != ladder.n:
        raise DomainError(f"menu has {len(menu)} items for {ladder.n} types")
    prefs.check_ladder(ladder)
    out = []
    for n, item in enumerate(menu.items):
        _, G = performance_and_satisfaction(item.f, prefs, case, n)
        out.append(G - item.R)
    return out


def provider_eut(
    menu: ContractMenu, ladder: WorkerTypeLadder, prefs: ProviderPreferences, case: CycleCase
) -> float:
    terms = provider_terms(menu, ladder, prefs, case)
    w = type_weights(ladder, prefs)
    return math.fsum(ladder.workers * w[n] * terms[n] for n in range(ladder.n))


def pt_value(u_eut: float, prefs: ProviderPreferences) -> float:
    """Reference-framed value: gains ``(u - ref)^z+``, losses ``-eta (ref - u)^z-``."""
    diff = u_eut - prefs.u_ref
    if diff >= 0:
        return diff**prefs.zeta_plus
    return -prefs.eta * (-diff) ** prefs.zeta_minus


def provider_pt(
    menu: ContractMenu, ladder: WorkerTypeLadder, prefs: ProviderPreferences, case: CycleCase
) -> float:
    terms = provider_terms(menu, ladder, prefs, case)
    w = type_weights(ladder, prefs)
    return math.fsum(ladder.workers * w[n] * pt_value(terms[n], prefs) for n in range(ladder.n))
