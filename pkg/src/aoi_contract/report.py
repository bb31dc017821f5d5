"""Solve reports and their JSON/CSV serialization."""

from __future__ import annotations

from dataclasses import dataclass, field

from .contract import ValidationReport

MENU_FIELDS = ("type_index", "f", "R", "worker_utility", "provider_term", "provider_term_pt")


@dataclass
class SolveReport:
    solver: str
    f: list[float]
    R: list[float]
    worker_utility: list[float]
    terms_eut: list[float]
    terms_pt: list[float]
    U_s_eut: float
    U_s_pt: float
    validation: ValidationReport
    latency_model: str
    eta: float
    u_ref: float
    case_tag: str = "EUT"
    m: int = 0
    adjusted_types: list[int] = field(default_factory=list)
    f_unironed: list[float] = field(default_factory=list)
    coefficients: list[float] = field(default_factory=list)
    printed_coefficients: list[float] | None = None
    ironing: list[dict] = field(default_factory=list)
    flags: list[str] = field(default_factory=list)
    notes: list[str] = field(default_factory=list)
    polling: list[dict] = field(default_factory=list)
    oracle: dict | None = None

    def rows(self) -> list[dict]:
        return [
            {
                "type_index": n + 1,
                "f": self.f[n],
                "R": self.R[n],
                "worker_utility": self.worker_utility[n],
                "provider_term": self.terms_eut[n],
                "provider_term_pt": self.terms_pt[n],
            }
            for n in range(len(self.f))
        ]

    def to_dict(self) -> dict:
        out = {
            "solver": self.solver,
            "case_tag": self.case_tag,
            "m": self.m,
            "adjusted_types": self.adjusted_types,
            "eta": self.eta,
            "u_ref": self.u_ref,
            "latency_model": self.latency_model,
            "U_s_eut": self.U_s_eut,
            "U_s_pt": self.U_s_pt,
            "items": self.rows(),
            "validation": self.validation.to_dict(),
            "coefficients": self.coefficients,
            "ironing": self.ironing,
            "flags": self.flags,
            "notes": self.notes,
        }
        if self.printed_coefficients is not None:
            out["printed_coefficients"] = self.printed_coefficients
        if self.polling:
            out["polling"] = self.polling
        if self.oracle is not None:
            out["oracle"] = self.oracle
        return out
