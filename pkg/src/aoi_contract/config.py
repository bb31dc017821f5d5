"""Experiment configuration: a small JSON schema with simulation defaults.

Layout (every section and key optional)::

    {
      "preset": "table1" | "table1-beta5",
      "timing": {"t": 2, "case": "fixed_idle", "a": 3, "sweep": [1, 13]},
      "ladder": {"N": 10, "gamma": {"start": 0.001, "step": 0.001}, "q": "uniform", "M": 10},
      "preferences": {"beta": 1, "alpha": 0.8, "K": 200, "L_max": 50, "eta": 1,
                      "zeta_plus": 1, "zeta_minus": 1, "rho": 1,
                      "use_weighting": false, "u_ref": 0, "f_min": null},
      "run": {"seed": 0, "out": null, "latency_model": "printed", "oracle": false, "jobs": 1}
    }

``gamma`` is an explicit list or a linear range ``{"start", "step"}`` or
``{"start", "stop"}`` of ``N`` points.  ``timing`` carries ``a`` for the
fixed-idle case and ``c`` for the fixed-update case.
"""

from __future__ import annotations

import dataclasses
import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Any

from .aoi import LATENCY_MODELS, CycleCase, CycleKind
from .contract import ProviderPreferences, WorkerTypeLadder, resolve_f_min
from .errors import DomainError

PRESETS: dict[str, dict[str, Any]] = {
    "table1": {},
    "table1-beta5": {"preferences": {"beta": 5.0}},
}

_SECTIONS = {
    "timing": {"t", "case", "a", "c", "sweep"},
    "ladder": {"N", "gamma", "q", "M"},
    "preferences": {
        "beta", "alpha", "K", "L_max", "eta", "zeta_plus", "zeta_minus",
        "rho", "use_weighting", "u_ref", "f_min",
    },
    "run": {"seed", "out", "latency_model", "oracle", "jobs"},
}

LADDER_NOTE = "N=10 types with gamma_n = 0.001 n unless the ladder section says otherwise"


class ConfigError(DomainError):
    """Malformed or inconsistent configuration."""


@dataclass(frozen=True)
class ExperimentConfig:
    preset: str
    t: float
    case_kind: CycleKind
    fixed: int
    sweep: tuple[int, ...]
    gamma: tuple[float, ...]
    q: tuple[float, ...]
    workers: int
    prefs: ProviderPreferences
    seed: int = 0
    out: str | None = None
    latency_model: str = "printed"
    oracle: bool = False
    jobs: int = 1

    def ladder(self) -> WorkerTypeLadder:
        return WorkerTypeLadder(self.gamma, self.q, self.workers)

    def case(self, fixed: int | None = None) -> CycleCase:
        return CycleCase(
            self.case_kind, self.fixed if fixed is None else fixed, self.t, self.latency_model
        )

    def replace(self, **changes) -> ExperimentConfig:
        return dataclasses.replace(self, **changes)

    def header(self) -> dict:
        """Settings echoed into every output file."""
        prefs = dataclasses.asdict(self.prefs)
        if isinstance(prefs["alpha"], tuple):
            prefs["alpha"] = list(prefs["alpha"])
        return {
            "preset": self.preset,
            "timing": {
                "t": self.t,
                "case": self.case_kind.value,
                self.free_axis_fixed_key: self.fixed,
                "sweep": list(self.sweep),
            },
            "ladder": {
                "N": len(self.gamma),
                "gamma": list(self.gamma),
                "q": list(self.q),
                "M": self.workers,
                "assumption": LADDER_NOTE,
            },
            "preferences": prefs,
            "run": {"seed": self.seed, "latency_model": self.latency_model, "oracle": self.oracle},
        }

    @property
    def free_axis_fixed_key(self) -> str:
        return "a" if self.case_kind is CycleKind.FIXED_IDLE else "c"


def _merge(base: dict, extra: dict) -> dict:
    out = {k: dict(v) if isinstance(v, dict) else v for k, v in base.items()}
    for key, val in extra.items():
        if isinstance(val, dict) and isinstance(out.get(key), dict):
            out[key] = {**out[key], **val}
        else:
            out[key] = val
    return out


def _check_keys(raw: dict) -> None:
    if not isinstance(raw, dict):
        raise ConfigError("config root must be a JSON object")
    for key, val in raw.items():
        if key == "preset":
            continue
        if key not in _SECTIONS:
            raise ConfigError(f"unknown key {key!r}")
        if not isinstance(val, dict):
            raise ConfigError(f"section {key!r} must be an object")
        for sub in val:
            if sub not in _SECTIONS[key]:
                raise ConfigError(f"unknown key '{key}.{sub}'")


def _number(section: str, key: str, val, integer: bool = False):
    ok = not isinstance(val, bool) and isinstance(val, (int, float))
    if integer:
        ok = ok and float(val).is_integer()
    if not ok or not math.isfinite(val):
        kind = "an integer" if integer else "a finite number"
        raise ConfigError(f"'{section}.{key}' must be {kind}, got {val!r}")
    return int(val) if integer else float(val)


def _gamma(spec, n: int) -> tuple[float, ...]:
    if isinstance(spec, list):
        return tuple(_number("ladder", "gamma", g) for g in spec)
    if not isinstance(spec, dict) or "start" not in spec or len(spec.keys() & {"step", "stop"}) != 1:
        raise ConfigError("'ladder.gamma' must be a list or {start, step} / {start, stop}")
    extra = set(spec) - {"start", "step", "stop"}
    if extra:
        raise ConfigError(f"unknown key 'ladder.gamma.{sorted(extra)[0]}'")
    start = _number("ladder", "gamma.start", spec["start"])
    if "step" in spec:
        step = _number("ladder", "gamma.step", spec["step"])
    else:
        stop = _number("ladder", "gamma.stop", spec["stop"])
        step = (stop - start) / (n - 1) if n > 1 else 0.0
    return tuple(start + step * k for k in range(n))


def _wrap(fn, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except ConfigError:
        raise
    except DomainError as exc:
        raise ConfigError(str(exc)) from exc


def _build(raw: dict) -> ExperimentConfig:
    _check_keys(raw)
    preset = raw.get("preset", "table1")
    if preset not in PRESETS:
        raise ConfigError(f"unknown preset {preset!r}; choose from {sorted(PRESETS)}")
    merged = _merge(PRESETS[preset], {k: v for k, v in raw.items() if k != "preset"})
    timing = merged.get("timing", {})
    ladder = merged.get("ladder", {})
    pref = merged.get("preferences", {})
    run = merged.get("run", {})

    t = _number("timing", "t", timing.get("t", 2.0))
    if t <= 0:
        raise ConfigError("'timing.t' must be > 0")
    try:
        kind = CycleKind(timing.get("case", "fixed_idle"))
    except ValueError:
        raise ConfigError(
            f"'timing.case' must be one of {[k.value for k in CycleKind]}, got {timing.get('case')!r}"
        ) from None
    key, other = ("a", "c") if kind is CycleKind.FIXED_IDLE else ("c", "a")
    if other in timing:
        raise ConfigError(f"'timing.{other}' is the swept variable in case {kind.value}; set '{key}'")
    fixed = _number("timing", key, timing.get(key, 3), integer=True)
    if fixed < 1:
        raise ConfigError(f"'timing.{key}' violates {key} >= 1 (got {fixed})")
    sweep = timing.get("sweep", [1, 13])
    if not (isinstance(sweep, list) and len(sweep) == 2):
        raise ConfigError("'timing.sweep' must be [first, last]")
    lo, hi = (_number("timing", "sweep", v, integer=True) for v in sweep)
    if not 1 <= lo <= hi:
        raise ConfigError("'timing.sweep' needs 1 <= first <= last")

    n = _number("ladder", "N", ladder.get("N", 10), integer=True)
    if n < 1:
        raise ConfigError("'ladder.N' must be >= 1")
    gamma = _gamma(ladder.get("gamma", {"start": 0.001, "step": 0.001}), n)
    if len(gamma) != n:
        if "N" in ladder:
            raise ConfigError(f"'ladder.gamma' has {len(gamma)} entries but 'ladder.N' is {n}")
        n = len(gamma)
    q_spec = ladder.get("q", "uniform")
    if q_spec == "uniform":
        q = tuple([1.0 / n] * n)
    elif isinstance(q_spec, list):
        q = tuple(_number("ladder", "q", x) for x in q_spec)
    else:
        raise ConfigError("'ladder.q' must be \"uniform\" or a list")
    workers = _number("ladder", "M", ladder.get("M", 10), integer=True)
    _wrap(WorkerTypeLadder, gamma, q, workers)

    kwargs = {}
    for name, val in pref.items():
        if name == "use_weighting":
            if not isinstance(val, bool):
                raise ConfigError("'preferences.use_weighting' must be true or false")
            kwargs[name] = val
        elif name == "alpha" and isinstance(val, list):
            kwargs[name] = tuple(_number("preferences", "alpha", x) for x in val)
        elif name == "f_min" and val is None:
            kwargs[name] = None
        else:
            kwargs[name] = _number("preferences", name, val)
    prefs = _wrap(ProviderPreferences, **kwargs)

    latency_model = run.get("latency_model", "printed")
    if latency_model not in LATENCY_MODELS:
        raise ConfigError(f"'run.latency_model' must be one of {list(LATENCY_MODELS)}")
    oracle = run.get("oracle", False)
    if not isinstance(oracle, bool):
        raise ConfigError("'run.oracle' must be true or false")
    out = run.get("out")
    if out is not None and not isinstance(out, str):
        raise ConfigError("'run.out' must be a path string")
    seed = _number("run", "seed", run.get("seed", 0), integer=True)
    jobs = _number("run", "jobs", run.get("jobs", 1), integer=True)
    if jobs < 1:
        raise ConfigError("'run.jobs' must be >= 1")

    cfg = ExperimentConfig(
        preset=preset,
        t=t,
        case_kind=kind,
        fixed=fixed,
        sweep=tuple(range(lo, hi + 1)),
        gamma=gamma,
        q=q,
        workers=workers,
        prefs=prefs,
        seed=seed,
        out=out,
        latency_model=latency_model,
        oracle=oracle,
        jobs=jobs,
    )
    _wrap(prefs.check_ladder, cfg.ladder())
    _wrap(cfg.case)
    _wrap(resolve_f_min, prefs, cfg.case())
    return cfg


def config_from_dict(raw: dict, preset: str | None = None) -> ExperimentConfig:
    """Validate a parsed config; ``preset`` replaces the file's own preset."""
    if preset is not None:
        if not isinstance(raw, dict):
            raise ConfigError("config root must be a JSON object")
        raw = {**raw, "preset": preset}
    return _build(raw)


def load_config(path: str | Path | None = None, preset: str | None = None) -> ExperimentConfig:
    """Read and validate a config file; ``None`` gives the defaults."""
    if path is None:
        return config_from_dict({}, preset)
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from exc
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc.msg} at line {exc.lineno})") from exc
    return config_from_dict(raw, preset)
