"""Data models for run manifests, inequality ledgers and certificates"""
from typing import Dict, List, Optional, Tuple

from pydantic import BaseModel, Field


class RunManifest(BaseModel):
    """Everything needed to re-run a CLI invocation"""
    subcommand: str
    parameters: Dict[str, str] = Field(default_factory=dict)
    seed: int = 0
    version: str
    outputs: Dict[str, str] = Field(default_factory=dict)  # file name -> sha256

    def to_text(self) -> str:
        """Flat key=value text with sorted keys"""
        lines = [
            f"subcommand={self.subcommand}",
            f"seed={self.seed}",
            f"version={self.version}",
        ]
        lines += [f"param.{key}={self.parameters[key]}" for key in sorted(self.parameters)]
        lines += [f"output.{key}={self.outputs[key]}" for key in sorted(self.outputs)]
        return "\n".join(lines) + "\n"

    @classmethod
    def from_pairs(cls, pairs: Dict[str, Optional[str]]) -> "RunManifest":
        parameters = {k[len("param."):]: v or "" for k, v in pairs.items() if k.startswith("param.")}
        outputs = {k[len("output."):]: v or "" for k, v in pairs.items() if k.startswith("output.")}
        return cls(
            subcommand=pairs["subcommand"],
            seed=int(pairs.get("seed") or 0),
            version=pairs.get("version") or "",
            parameters=parameters,
            outputs=outputs,
        )


class LedgerRow(BaseModel):
    """One inequality lhs <= rhs, compared through logarithms"""
    name: str
    lhs_log: float
    rhs_log: float
    slack: float  # rhs_log - lhs_log
    passed: bool
    note: str = ""


class BoundReport(BaseModel):
    """Outcome of checking an inequality at sample points"""
    name: str
    ok: bool
    samples: int
    max_slack: float  # largest lhs/rhs over samples, <= 1 when ok
    witness: Optional[str] = None


class ContractionCertificate(BaseModel):
    """Certified b|z-w| <= |T(z)-T(w)| <= c|z-w| on a square"""
    b_lower: float
    c_upper: float
    koebe_k: float
    padding: float
    samples: int
    derivative_min: float
    derivative_max: float


class ExceptionalSet(BaseModel):
    """Grid cells where g' > g^(1+delta)"""
    intervals: List[Tuple[float, float]] = Field(default_factory=list)
    measure: float = 0.0
    bound: float
    bound_checked: bool  # g >= 1 on every cell, so measure <= bound applies
    ok: bool

    def contains(self, x: float) -> bool:
        return any(a <= x <= b for a, b in self.intervals)


class CertificateReport(BaseModel):
    """Verdict of a zero-measure certificate over sampled points"""
    certified: bool
    checks: int
    worst_ratio: float
    witness: Optional[str] = None
