"""Experiment runners behind the command line.

Every runner returns a :class:`RunOutcome` whose ``status`` follows the exit
code contract: 0 when all hard checks pass, 2 when only a soft (paper-setting)
check failed, 1 on any hard failure.  Outputs are written with fixed key and
row order and ``repr`` floats, so equal inputs give byte-identical files.
"""

from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from .aoi import (
    CycleCase,
    CycleKind,
    TimingParams,
    avg_aoi,
    avg_latency,
    avg_latency_enumerated,
    avg_latency_printed,
    cycle_enumeration,
    monte_carlo_averages,
)
from .baselines import MechanismResult, compare_mechanisms, evaluate_mechanism, soft_ordering
from .config import ExperimentConfig
from .contract import ContractMenu, WorkerTypeLadder, validate_menu
from .errors import DomainError
from .eut import check_lemmas, solve_eut
from .pt import brute_force_pt, solve_pt

SCHEMA_VERSION = 1
REPORT_FIELDS = (
    "solver", "type_index", "f", "R", "worker_utility", "provider_term", "provider_term_pt",
)
SWEEP_FIELDS = (
    "mechanism", "sweep_param", "provider_utility", "welfare", "type_index",
    "worker_utility", "f", "R", "participates", "provider_utility_pt", "case_tag", "m",
)
SIMULATE_FIELDS = (
    "c", "a", "t", "samples", "mc_latency", "se_latency", "mc_aoi", "se_aoi",
    "exact_latency", "exact_aoi", "printed_latency", "within_5se",
)
SWEEP_AXES = ("a", "c", "eta", "u_ref")
REL_EXACT = 1e-12
GRID_TOL = 1e-9
MC_SAMPLES = 200_000
ORACLE_GRID = 200
ORACLE_GAP = 0.01


@dataclass
class RunOutcome:
    hard: dict[str, bool] = field(default_factory=dict)
    soft: dict[str, bool] = field(default_factory=dict)
    files: list[Path] = field(default_factory=list)
    payload: dict = field(default_factory=dict)

    @property
    def status(self) -> int:
        if not all(self.hard.values()):
            return 1
        if not all(self.soft.values()):
            return 2
        return 0

    def failed(self) -> list[str]:
        hard = [f"hard: {k}" for k, ok in self.hard.items() if not ok]
        soft = [f"soft: {k}" for k, ok in self.soft.items() if not ok]
        return hard + soft


def _fmt(value):
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, bool):
        return "true" if value else "false"
    if value is None:
        return ""
    return str(value)


def write_csv(path: Path, fields, rows) -> Path:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(fields)
    for row in rows:
        writer.writerow([_fmt(row.get(k)) for k in fields])
    path.write_text(buf.getvalue())
    return path


def _clean(obj):
    # JSON has no inf/nan; emit them as strings rather than invalid tokens
    if isinstance(obj, float) and not math.isfinite(obj):
        return repr(obj)
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    return obj


def write_json(path: Path, payload: dict) -> Path:
    path.write_text(json.dumps(_clean(payload), indent=2, allow_nan=False) + "\n")
    return path


def _outdir(out: str | Path) -> Path:
    path = Path(out)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _header(cfg: ExperimentConfig, command: str) -> dict:
    return {"schema_version": SCHEMA_VERSION, "command": command, "config": cfg.header()}


# --- solve -----------------------------------------------------------------


def run_solve(cfg: ExperimentConfig, out: str | Path) -> RunOutcome:
    """Solve EUT and PT menus, validate them and check the monotonicity lemmas."""
    ladder, case, prefs = cfg.ladder(), cfg.case(), cfg.prefs
    eut_menu, eut_report = solve_eut(ladder, prefs, case)
    pt_menu, pt_report = solve_pt(ladder, prefs, case)
    lemmas = check_lemmas(ladder, eut_menu, eut_report)
    outcome = RunOutcome()
    outcome.hard["eut IR/IC"] = eut_report.validation.passed
    outcome.hard["pt IR/IC"] = pt_report.validation.passed
    for name, res in lemmas.items():
        outcome.hard[name] = res.ok
    payload = _header(cfg, "solve")
    payload["eut"] = eut_report.to_dict()
    payload["pt"] = pt_report.to_dict()
    payload["lemmas"] = {k: v.to_dict() for k, v in lemmas.items()}
    payload["checks"] = {"hard": outcome.hard}
    outcome.payload = payload

    d = _outdir(out)
    rows = [{"solver": "eut", **r} for r in eut_report.rows()]
    rows += [{"solver": "pt", **r} for r in pt_report.rows()]
    outcome.files = [write_json(d / "menu.json", payload), write_csv(d / "report.csv", REPORT_FIELDS, rows)]
    return outcome


# --- sweep -----------------------------------------------------------------


def check_axis(cfg: ExperimentConfig, axis: str) -> None:
    if axis not in SWEEP_AXES:
        raise DomainError(f"unknown sweep axis {axis!r}; choose from {list(SWEEP_AXES)}")
    need = {"a": CycleKind.FIXED_IDLE, "c": CycleKind.FIXED_UPDATE}.get(axis)
    if need is not None and cfg.case_kind is not need:
        raise DomainError(
            f"axis {axis!r} is the fixed part of case {need.value}, "
            f"but the config uses {cfg.case_kind.value}"
        )


def _parse_value(axis: str, value):
    if axis in ("a", "c"):
        if isinstance(value, bool) or not float(value).is_integer() or value < 1:
            raise DomainError(f"axis {axis!r} takes integers >= 1, got {value!r}")
        return int(value)
    return float(value)


def _sweep_point(cfg: ExperimentConfig, axis: str, value) -> dict:
    ladder = cfg.ladder()
    if axis in ("a", "c"):
        case = cfg.case(value)
        results = compare_mechanisms(ladder, cfg.prefs, case)
        ca_menu_ok = validate_menu_from(results["CA"], ladder)
        return {"value": value, "results": results, "ca_valid": ca_menu_ok}
    prefs = cfg.prefs.replace(**{axis: value})
    case = cfg.case()
    menu, report = solve_pt(ladder, prefs, case)
    ca = evaluate_mechanism(
        "CA", menu.f, menu.R, ladder, prefs, case, provider_utility_pt=report.U_s_pt
    )
    ca.extra = {"case_tag": report.case_tag, "m": report.m}
    return {"value": value, "results": {"CA": ca}, "ca_valid": report.validation.passed}


def validate_menu_from(result: MechanismResult, ladder: WorkerTypeLadder) -> bool:
    return validate_menu(ContractMenu.from_arrays(result.f, result.R), ladder).passed


def _rows(point: dict) -> list[dict]:
    rows = []
    for tag, res in point["results"].items():
        for row in res.rows(sweep_param=point["value"]):
            row["provider_utility_pt"] = res.provider_utility_pt
            row["case_tag"] = res.extra.get("case_tag")
            row["m"] = res.extra.get("m")
            rows.append(row)
    return rows


def rises_then_falls(values, tol: float = 1e-9) -> bool:
    """True when the sequence climbs to an interior peak and then declines."""
    if len(values) < 3:
        return False
    k = max(range(len(values)), key=lambda i: values[i])
    if k in (0, len(values) - 1):
        return False
    up = all(b >= a - tol for a, b in zip(values[: k + 1], values[1 : k + 1]))
    down = all(b <= a + tol for a, b in zip(values[k:], values[k + 1 :]))
    return up and down


def nonincreasing(values, tol: float = 1e-9) -> bool:
    return all(b <= a + tol * max(1.0, abs(a)) for a, b in zip(values, values[1:]))


def nondecreasing(values, tol: float = 1e-9) -> bool:
    return all(b >= a - tol * max(1.0, abs(a)) for a, b in zip(values, values[1:]))


def run_sweep(
    cfg: ExperimentConfig, axis: str, values, out: str | Path, jobs: int | None = None
) -> RunOutcome:
    """One comparison (a/c axes) or PT solve (eta/u_ref axes) per value.

    Points may run in worker processes; results are collected in input order.
    """
    check_axis(cfg, axis)
    values = [_parse_value(axis, v) for v in values]
    if not values:
        raise DomainError("sweep needs at least one value")
    jobs = cfg.jobs if jobs is None else jobs
    if jobs > 1 and len(values) > 1:
        with ProcessPoolExecutor(max_workers=min(jobs, len(values))) as pool:
            points = list(pool.map(_sweep_point, [cfg] * len(values), [axis] * len(values), values))
    else:
        points = [_sweep_point(cfg, axis, v) for v in values]

    outcome = RunOutcome()
    outcome.hard["CA menus IR/IC"] = all(p["ca_valid"] for p in points)
    ca = [p["results"]["CA"] for p in points]
    if axis in ("a", "c"):
        dominance = all(
            p["results"]["CC"].provider_utility
            >= p["results"]["CA"].provider_utility - 1e-9 * max(1.0, abs(p["results"]["CA"].provider_utility))
            for p in points
        )
        outcome.hard["provider CC>=CA"] = dominance
        outcome.hard["workers CC zero"] = all(
            abs(u) <= 1e-9 for p in points for u in p["results"]["CC"].worker_utility
        )
        outcome.soft["CA provider utility rises then falls"] = rises_then_falls(
            [r.provider_utility for r in ca]
        )
        for name in soft_ordering(points[0]["results"]):
            outcome.soft[f"{name} at every point"] = all(
                soft_ordering(p["results"])[name] for p in points
            )
    elif axis == "eta":
        outcome.soft["U_s,PT nonincreasing in eta"] = nonincreasing([r.provider_utility_pt for r in ca])
        outcome.soft["worker utility sum nondecreasing in eta"] = nondecreasing(
            [math.fsum(r.worker_utility) for r in ca]
        )
    else:
        counts = [r.extra["m"] if r.extra["case_tag"] == "Mixed" else 0 for r in ca]
        if cfg.prefs.eta < 1:
            outcome.soft["adjusted-type count nondecreasing in u_ref"] = nondecreasing(counts)

    rows = [row for p in points for row in _rows(p)]
    d = _outdir(out)
    summary = _header(cfg, "sweep")
    summary.update(
        {
            "axis": axis,
            "values": values,
            "rows": len(rows),
            "checks": {"hard": outcome.hard, "soft": outcome.soft},
        }
    )
    outcome.payload = summary
    outcome.files = [
        write_csv(d / "sweep.csv", SWEEP_FIELDS, rows),
        write_json(d / "sweep.json", summary),
    ]
    return outcome


def run_compare(cfg: ExperimentConfig, out: str | Path) -> RunOutcome:
    ladder = cfg.ladder()
    results = compare_mechanisms(ladder, cfg.prefs, cfg.case())
    outcome = RunOutcome()
    ca, cc = results["CA"], results["CC"]
    outcome.hard["provider CC>=CA"] = cc.provider_utility >= ca.provider_utility - 1e-9 * max(
        1.0, abs(ca.provider_utility)
    )
    outcome.hard["CA menu IR/IC"] = validate_menu_from(ca, ladder)
    outcome.hard["participants IR"] = all(
        u >= -1e-9 for r in results.values() for u, p in zip(r.worker_utility, r.participates) if p
    )
    outcome.soft.update(soft_ordering(results))
    d = _outdir(out)
    rows = _rows({"value": None, "results": results})
    summary = _header(cfg, "compare")
    summary["mechanisms"] = {
        k: {
            "provider_utility": r.provider_utility,
            "worker_utility_sum": math.fsum(r.worker_utility),
            "welfare": r.welfare,
            "participants": [n + 1 for n, p in enumerate(r.participates) if p],
            "extra": r.extra,
        }
        for k, r in results.items()
    }
    summary["checks"] = {"hard": outcome.hard, "soft": outcome.soft}
    outcome.payload = summary
    outcome.files = [
        write_csv(d / "compare.csv", SWEEP_FIELDS, rows),
        write_json(d / "compare.json", summary),
    ]
    return outcome


# --- validate --------------------------------------------------------------


def _rel_close(x: float, y: float, rel: float) -> bool:
    return abs(x - y) <= rel * max(abs(x), abs(y), 1e-300)


def enumeration_checks(ts=(1, 2), span=range(1, 14)) -> dict:
    """Closed forms against the per-period enumeration on the integer grid."""
    aoi_bad, lat_bad, grid_bad = [], [], []
    deviation = []
    for t in ts:
        for c in span:
            for a in span:
                p = TimingParams(t, c, a)
                exact, _ = cycle_enumeration(p)
                if not _rel_close(avg_aoi(p), exact.avg_aoi, REL_EXACT):
                    aoi_bad.append([t, c, a])
                if not _rel_close(avg_latency_enumerated(p), exact.avg_latency, REL_EXACT):
                    lat_bad.append([t, c, a])
                theta = (c + a) * t
                for model in ("printed", "enumerated"):
                    for case in (
                        CycleCase(CycleKind.FIXED_UPDATE, c, t, model),
                        CycleCase(CycleKind.FIXED_IDLE, a, t, model),
                    ):
                        lat, aoi = case.curves(theta)
                        if abs(lat - avg_latency(p, model)) > GRID_TOL * max(1.0, abs(lat)) or abs(
                            aoi - avg_aoi(p)
                        ) > GRID_TOL * max(1.0, abs(aoi)):
                            grid_bad.append([t, c, a, case.kind.value, model])
                printed = avg_latency_printed(p)
                if c >= 2:
                    deviation.append(
                        {"t": t, "c": c, "a": a, "printed": printed, "enumerated": exact.avg_latency}
                    )
    return {
        "cases": len(ts) * len(span) ** 2,
        "aoi_mismatch": aoi_bad,
        "latency_mismatch": lat_bad,
        "grid_mismatch": grid_bad,
        "printed_latency_deviation": deviation,
    }


def _mc_row(p: TimingParams, samples: int, seed: int) -> dict:
    est = monte_carlo_averages(p, samples, seed)
    exact, _ = cycle_enumeration(p)
    ok = abs(est.avg_latency - exact.avg_latency) <= 5 * est.se_latency + 1e-12 and abs(
        est.avg_aoi - exact.avg_aoi
    ) <= 5 * est.se_aoi + 1e-12
    return {
        "c": p.c,
        "a": p.a,
        "t": p.t,
        "samples": samples,
        "mc_latency": est.avg_latency,
        "se_latency": est.se_latency,
        "mc_aoi": est.avg_aoi,
        "se_aoi": est.se_aoi,
        "exact_latency": exact.avg_latency,
        "exact_aoi": exact.avg_aoi,
        "printed_latency": avg_latency_printed(p),
        "within_5se": ok,
    }


def monte_carlo_checks(t: float, seed: int, samples: int = MC_SAMPLES) -> list[dict]:
    cycles = ((1, 1), (2, 3), (5, 7), (13, 13))
    return [_mc_row(TimingParams(t, c, a), samples, seed + k) for k, (c, a) in enumerate(cycles)]


def oracle_check(ladder: WorkerTypeLadder, prefs, case, grid: int = ORACLE_GRID) -> dict:
    menu, report = solve_pt(ladder, prefs, case)
    bf_menu, bf_value = brute_force_pt(ladder, prefs, case, grid)
    gap = (bf_value - report.U_s_pt) / max(abs(bf_value), 1e-12)
    return {
        "gamma": list(ladder.gamma),
        "solver_objective": report.U_s_pt,
        "oracle_objective": bf_value,
        "relative_gap": gap,
        "solver_case": [report.case_tag, report.m],
        "oracle_case": [bf_menu.provenance["case_tag"], bf_menu.provenance["m"]],
        "ok": gap <= ORACLE_GAP
        and report.case_tag == bf_menu.provenance["case_tag"]
        and report.m == bf_menu.provenance["m"],
    }


def ic_curves(menu, ladder: WorkerTypeLadder, tol: float = 1e-9) -> dict:
    """Each type's utility across all items, and whether its own item is best."""
    rep = validate_menu(menu, ladder)
    curves = {}
    for n, row in enumerate(rep.utility):
        curves[str(n + 1)] = {"utility": row, "peaks_at_own": row[n] >= max(row) - tol}
    return curves


def run_validate(cfg: ExperimentConfig, out: str | Path, oracle: bool | None = None) -> RunOutcome:
    oracle = cfg.oracle if oracle is None else oracle
    outcome = RunOutcome()
    ladder, case, prefs = cfg.ladder(), cfg.case(), cfg.prefs

    enum = enumeration_checks()
    outcome.hard["AoI closed form = enumeration"] = not enum["aoi_mismatch"]
    outcome.hard["enumerated latency closed form = enumeration"] = not enum["latency_mismatch"]
    outcome.hard["case curves = general formulas on grid"] = not enum["grid_mismatch"]

    mc = monte_carlo_checks(cfg.t, cfg.seed)
    outcome.hard["Monte Carlo within 5 SE"] = all(r["within_5se"] for r in mc)

    eut_menu, eut_report = solve_eut(ladder, prefs, case)
    pt_menu, pt_report = solve_pt(ladder, prefs, case)
    outcome.hard["eut IR/IC"] = eut_report.validation.passed
    outcome.hard["pt IR/IC"] = pt_report.validation.passed
    lemmas = check_lemmas(ladder, eut_menu, eut_report)
    for name, res in lemmas.items():
        outcome.hard[name] = res.ok
    curves = ic_curves(pt_menu, ladder)
    outcome.hard["own item maximizes utility"] = all(c["peaks_at_own"] for c in curves.values())
    outcome.hard["own item nonnegative"] = all(
        c["utility"][int(k) - 1] >= -1e-9 for k, c in curves.items()
    )

    oracles = []
    if oracle:
        small = WorkerTypeLadder.uniform(ladder.gamma[:3], ladder.workers)
        oracles.append(oracle_check(small, prefs, case))
        outcome.hard["brute-force oracle agrees"] = all(o["ok"] for o in oracles)

    payload = _header(cfg, "validate")
    payload.update(
        {
            "enumeration": {k: v for k, v in enum.items() if k != "printed_latency_deviation"},
            "printed_latency_deviation": [
                r for r in enum["printed_latency_deviation"] if r["t"] == cfg.t
            ],
            "monte_carlo": mc,
            "validation": {"eut": eut_report.validation.to_dict(), "pt": pt_report.validation.to_dict()},
            "lemmas": {k: v.to_dict() for k, v in lemmas.items()},
            "ic_curves": curves,
            "oracle": oracles,
            "checks": {"hard": outcome.hard, "soft": outcome.soft},
        }
    )
    outcome.payload = payload
    outcome.files = [write_json(_outdir(out) / "validate.json", payload)]
    return outcome


# --- simulate --------------------------------------------------------------


def run_simulate(cfg: ExperimentConfig, out: str | Path, samples: int = MC_SAMPLES) -> RunOutcome:
    """Monte Carlo averages for every integer cycle in the sweep range."""
    rows = []
    for k, free in enumerate(cfg.sweep):
        c, a = (free, cfg.fixed) if cfg.case_kind is CycleKind.FIXED_IDLE else (cfg.fixed, free)
        rows.append(_mc_row(TimingParams(cfg.t, c, a), samples, cfg.seed + k))
    outcome = RunOutcome()
    outcome.hard["Monte Carlo within 5 SE"] = all(r["within_5se"] for r in rows)
    outcome.payload = {**_header(cfg, "simulate"), "rows": rows}
    outcome.files = [write_csv(_outdir(out) / "simulate.csv", SIMULATE_FIELDS, rows)]
    return outcome
