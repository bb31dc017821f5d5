"""Average AoI and service latency for the periodic update-cycle model.

A worker collects data for ``c`` periods of length ``t`` and then idles for
``a`` periods, so the update cycle is ``theta = (c + a) * t``.  Training
requests arrive at the start of a period, every period equally likely.

Two latency models are available.  ``printed`` is the published closed form,
which carries an extra factor ``c`` in the collection-phase term; it is the
default because the cycle-case curves and their convexity analysis are derived
from it.  ``enumerated`` follows the per-period latency rule literally and is
what :func:`cycle_enumeration` and :func:`monte_carlo_averages` measure.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from numbers import Integral, Real

import numpy as np

from .errors import DomainError

LATENCY_MODELS = ("printed", "enumerated")


class CycleKind(str, Enum):
    FIXED_UPDATE = "fixed_update"  # c frozen, idle length follows theta
    FIXED_IDLE = "fixed_idle"  # a frozen, collection length follows theta


def _check_latency_model(model: str) -> str:
    if model not in LATENCY_MODELS:
        raise DomainError(f"latency_model must be one of {LATENCY_MODELS}, got {model!r}")
    return model


def _positive_real(name: str, value) -> float:
    if isinstance(value, bool) or not isinstance(value, Real):
        raise DomainError(f"{name} must be a real number, got {value!r}")
    value = float(value)
    if not math.isfinite(value) or value <= 0:
        raise DomainError(f"{name} must be positive, got {value}")
    return value


@dataclass(frozen=True)
class TimingParams:
    """Period length ``t`` (seconds) with collection and idle period counts.

    ``c`` and ``a`` may be reals for the closed forms; the enumeration and
    Monte Carlo oracles require integers.
    """

    t: float
    c: float
    a: float

    def __post_init__(self) -> None:
        _positive_real("t", self.t)
        for name in ("c", "a"):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, Real):
                raise DomainError(f"{name} must be a number, got {value!r}")
            if value < 1:
                raise DomainError(f"{name} >= 1 required, got {value}")

    @property
    def theta(self) -> float:
        return self.c * self.t + self.a * self.t

    def require_integral(self) -> tuple[int, int]:
        c, a = self.c, self.a
        for name, value in (("c", c), ("a", a)):
            if isinstance(value, Integral):
                continue
            if float(value).is_integer():
                continue
            raise DomainError(f"{name} must be an integer for enumeration, got {value}")
        return int(c), int(a)


@dataclass(frozen=True)
class FreshnessAverages:
    avg_latency: float
    avg_aoi: float
    model_tag: str


@dataclass(frozen=True)
class PeriodRow:
    period: int
    phase: str
    latency: float
    aoi: float


@dataclass(frozen=True)
class CycleCase:
    """One of the two cycle families in which theta varies continuously.

    ``FIXED_UPDATE`` freezes the collection length ``c = fixed_value`` and
    ``FIXED_IDLE`` freezes the idle length ``a = fixed_value``.  Either way the
    free part must span at least one period, so ``theta >= (fixed + 1) * t``.
    """

    kind: CycleKind
    fixed_value: int
    t: float
    latency_model: str = "printed"

    def __post_init__(self) -> None:
        object.__setattr__(self, "kind", CycleKind(self.kind))
        if isinstance(self.fixed_value, bool) or not isinstance(self.fixed_value, Integral):
            raise DomainError(f"fixed_value must be an integer, got {self.fixed_value!r}")
        if self.fixed_value < 1:
            raise DomainError(f"fixed_value >= 1 required, got {self.fixed_value}")
        _positive_real("t", self.t)
        _check_latency_model(self.latency_model)

    @property
    def theta_min(self) -> float:
        return (self.fixed_value + 1) * self.t

    def default_f_min(self) -> float:
        # longest admissible cycle keeps the free part within 13 periods
        return 1.0 / ((self.fixed_value + 13) * self.t)

    def check_theta(self, theta: float) -> None:
        lo = self.theta_min
        if not theta >= lo * (1 - 1e-12):
            raise DomainError(
                f"theta={theta} below the {self.kind.value} domain theta >= {lo}"
            )

    def curves(self, theta: float) -> tuple[float, float]:
        """Return ``(avg_latency, avg_aoi)`` at cycle length ``theta``."""
        if self.kind is CycleKind.FIXED_UPDATE:
            return case1_curves(theta, self)
        return case2_curves(theta, self)

    def slopes(self, theta: float) -> tuple[float, float]:
        """Derivatives of :meth:`curves` with respect to theta."""
        t, k = self.t, self.fixed_value
        if self.kind is CycleKind.FIXED_UPDATE:
            c = k
            if self.latency_model == "printed":
                d_lat = -c * t * t * (c * c + 3 * c - 2) / (2 * theta**2)
            else:
                d_lat = -t * t * (c * c + c) / (2 * theta**2)
            d_aoi = 0.5 - (c * c * t * t + c * t * t) / (2 * theta**2)
            return d_lat, d_aoi
        a = k
        u = theta - a * t
        if self.latency_model == "printed":
            num = u**3 / (2 * t) + 1.5 * u * u + a * t * t
            d_num = 1.5 * u * u / t + 3 * u
            d_lat = d_num / theta - num / theta**2
        else:
            d_lat = 0.5 - t * t * (a * a - a) / (2 * theta**2)
        d_aoi = -t * t * a * (a - 1) / (2 * theta**2)
        return d_lat, d_aoi


def cycle_enumeration(params: TimingParams) -> tuple[FreshnessAverages, list[PeriodRow]]:
    """Average latency and AoI by enumerating every arrival period.

    A request in collection period ``z`` waits ``(c + 2 - z) * t``; any other
    request waits ``t``.  The AoI is ``t`` up to period ``c + 1`` and
    ``(l - c) * t`` for a later period ``l``.  Sums are exact rationals and are
    divided once.
    """
    c, a = params.require_integral()
    t = Fraction(params.t)
    rows = []
    lat_sum = Fraction(0)
    aoi_sum = Fraction(0)
    for period in range(1, c + a + 1):
        latency = (c + 2 - period) * t if period <= c else t
        aoi = t if period <= c + 1 else (period - c) * t
        lat_sum += latency
        aoi_sum += aoi
        phase = "collect" if period <= c else "idle"
        rows.append(PeriodRow(period, phase, float(latency), float(aoi)))
    n = c + a
    avg = FreshnessAverages(float(lat_sum / n), float(aoi_sum / n), "enumerated")
    return avg, rows


def avg_latency_printed(params: TimingParams) -> float:
    c, a, t = params.c, params.a, params.t
    return c / (c + a) * (c * t / 2 * (c + 3)) + a * t / (c + a)


def avg_latency_enumerated(params: TimingParams) -> float:
    """Closed form of the enumerated latency, ``t (c(c+3)/2 + a) / (c+a)``."""
    c, a, t = params.c, params.a, params.t
    return t * (c * (c + 3) / 2 + a) / (c + a)


def avg_latency(params: TimingParams, latency_model: str = "printed") -> float:
    if _check_latency_model(latency_model) == "printed":
        return avg_latency_printed(params)
    return avg_latency_enumerated(params)


def avg_aoi(params: TimingParams) -> float:
    c, a, t = params.c, params.a, params.t
    return t / (c + a) * (c + 1 + (a - 1) * (a + 2) / 2)


def averages(params: TimingParams, latency_model: str = "printed") -> FreshnessAverages:
    return FreshnessAverages(avg_latency(params, latency_model), avg_aoi(params), latency_model)


def _require_kind(case: CycleCase, kind: CycleKind) -> None:
    if case.kind is not kind:
        raise DomainError(f"expected a {kind.value} case, got {case.kind.value}")


def case1_curves(theta: float, case: CycleCase) -> tuple[float, float]:
    """``(avg_latency, avg_aoi)`` with the collection length ``c`` frozen.

    The latency constant term is ``t``; substituting ``a = theta/t - c`` into
    the general latency formula gives ``+t``, not ``+1``.
    """
    _require_kind(case, CycleKind.FIXED_UPDATE)
    case.check_theta(theta)
    c, t = case.fixed_value, case.t
    if case.latency_model == "printed":
        lat = c * t * t * (c * c + 3 * c - 2) / (2 * theta) + t
    else:
        lat = t * t * (c * c + c) / (2 * theta) + t
    aoi = theta / 2 + (t - 2 * c * t) / 2 + (c * c * t * t + c * t * t) / (2 * theta)
    return lat, aoi


def case2_curves(theta: float, case: CycleCase) -> tuple[float, float]:
    """``(avg_latency, avg_aoi)`` with the idle length ``a`` frozen.

    The AoI side is the direct substitution ``c = theta/t - a`` into the general
    AoI formula, ``t + t^2 a (a-1) / (2 theta)``.
    """
    _require_kind(case, CycleKind.FIXED_IDLE)
    case.check_theta(theta)
    a, t = case.fixed_value, case.t
    u = theta - a * t
    if case.latency_model == "printed":
        lat = u**3 / (2 * t * theta) + 3 * u * u / (2 * theta) + a * t * t / theta
    else:
        lat = (u * u + 3 * u * t + 2 * a * t * t) / (2 * theta)
    aoi = t + t * t * a * (a - 1) / (2 * theta)
    return lat, aoi


@dataclass(frozen=True)
class MonteCarloEstimate:
    avg_latency: float
    avg_aoi: float
    se_latency: float
    se_aoi: float
    samples: int


_MC_CHUNK = 1 << 20


def monte_carlo_averages(params: TimingParams, samples: int, seed: int) -> MonteCarloEstimate:
    """Sample arrival periods uniformly and average latency and AoI.

    Draws come from one generator in fixed-size chunks and are tallied per
    period, so the estimate is a function of ``(params, samples, seed)`` only.
    """
    if isinstance(samples, bool) or not isinstance(samples, Integral) or samples < 1:
        raise DomainError(f"samples >= 1 required, got {samples!r}")
    c, a = params.require_integral()
    n_periods = c + a
    rng = np.random.default_rng(seed)
    counts = np.zeros(n_periods, dtype=np.int64)
    remaining = int(samples)
    while remaining:
        k = min(_MC_CHUNK, remaining)
        draws = rng.integers(0, n_periods, size=k)
        counts += np.bincount(draws, minlength=n_periods)
        remaining -= k
    _, rows = cycle_enumeration(params)
    lat = np.array([r.latency for r in rows])
    aoi = np.array([r.aoi for r in rows])
    p = counts / samples

    def mean_se(values: np.ndarray) -> tuple[float, float]:
        mean = float(p @ values)
        if samples < 2:
            return mean, math.inf
        var = float(p @ (values - mean) ** 2) * samples / (samples - 1)
        return mean, math.sqrt(max(var, 0.0) / samples)

    lat_mean, lat_se = mean_se(lat)
    aoi_mean, aoi_se = mean_se(aoi)
    return MonteCarloEstimate(lat_mean, aoi_mean, lat_se, aoi_se, int(samples))
