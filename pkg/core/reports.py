"""
Report family emitted by params, quadrature and engine, plus JSON/CSV persistence.

Every report is a frozen dataclass; ``to_dict`` produces plain JSON types
(Fractions as "p/q" strings, numpy scalars as floats) so that two runs with the
same config and seed serialise byte-identically.
"""
from __future__ import annotations

import csv
import dataclasses
import io
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np


def jsonable(value: Any) -> Any:
    if dataclasses.is_dataclass(value) and not isinstance(value, type):
        return {f.name: jsonable(getattr(value, f.name)) for f in dataclasses.fields(value)}
    if isinstance(value, Fraction):
        return str(value) if value.denominator != 1 else value.numerator
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        v = float(value)
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return v
    if isinstance(value, dict):
        return {str(k): jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple, np.ndarray)):
        return [jsonable(v) for v in value]
    return value


class _Report:
    def to_dict(self) -> Dict[str, Any]:
        return jsonable(self)


@dataclass(frozen=True)
class Check(_Report):
    name: str
    residual: Any
    passed: bool
    note: str = ""


@dataclass(frozen=True)
class AdmissibilityReport(_Report):
    verdict: bool
    checks: Tuple[Check, ...]
    balance_residual: Any = 0.0
    notes: Tuple[str, ...] = ()

    def failing(self) -> List[str]:
        return [c.name for c in self.checks if not c.passed]

    def check(self, name: str) -> Check:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)


@dataclass(frozen=True)
class QuadratureResult(_Report):
    value: float
    error_estimate: float
    n_evals: int
    converged: bool
    route: str = ""
    tol: float = 0.0


@dataclass(frozen=True)
class DivergenceReport(_Report):
    region: str
    fitted_exponent: float
    predicted_exponent: Optional[float]
    r_squared: float
    convergent: bool
    radii: Tuple[float, ...] = ()
    masses: Tuple[float, ...] = ()


@dataclass(frozen=True)
class InequalityReport(_Report):
    kind: str
    form: str  # "integral" (hardy) or "norm" (whs, ckn, sobolev)
    lhs: float
    rhs_grad_factor: float
    rhs_q_factor: float
    a: float
    rhs: float
    ratio: float
    constant: Optional[float] = None
    satisfied_at_constant: Optional[bool] = None
    integrals: Dict[str, float] = field(default_factory=dict)
    provenance: Dict[str, QuadratureResult] = field(default_factory=dict)
    gradient_gap: Optional[float] = None


@dataclass(frozen=True)
class IntegralFit(_Report):
    name: str
    fitted: float
    predicted: Optional[float]
    r_squared: float
    passed: Optional[bool]
    values: Tuple[float, ...] = ()


@dataclass(frozen=True)
class ScalingReport(_Report):
    experiment: str
    grid_name: str
    grid: Tuple[float, ...]
    fits: Tuple[IntegralFit, ...]
    ratio_fit: Optional[IntegralFit] = None
    passed: Optional[bool] = None
    conclusion: str = ""
    flags: Tuple[str, ...] = ()
    extra: Dict[str, Any] = field(default_factory=dict)

    def fit(self, name: str) -> IntegralFit:
        for f in self.fits:
            if f.name == name:
                return f
        raise KeyError(name)


@dataclass(frozen=True)
class SearchReport(_Report):
    method: str
    best_ratio: float
    best_parameters: Tuple[float, ...]
    trace: Tuple[Tuple[Tuple[float, ...], float], ...]
    target: Optional[float]
    fraction_of_target: Optional[float]
    seed: Optional[int] = None
    n_evals: int = 0

    def best_so_far(self) -> List[float]:
        out: List[float] = []
        best = -math.inf
        for _, ratio in self.trace:
            best = max(best, ratio)
            out.append(best)
        return out


@dataclass(frozen=True)
class LemmaReport(_Report):
    lemma: str
    p: float
    n_samples: int
    seed: Optional[int]
    first_sup: float
    first_bound_violations: int
    second_inf: float
    second_bound_violations: int
    notes: Tuple[str, ...] = ()


@dataclass(frozen=True)
class RunRecord(_Report):
    command: str
    version: str
    config: Dict[str, Any]
    payload: Dict[str, Any]
    started: str
    finished: str


def dumps(obj: Any) -> str:
    data = obj.to_dict() if hasattr(obj, "to_dict") else jsonable(obj)
    return json.dumps(data, indent=2, sort_keys=True, ensure_ascii=False) + "\n"


def write_json(obj: Any, path: Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(dumps(obj), encoding="utf-8")
    return path


def csv_text(columns: Sequence[str], rows: Iterable[Sequence[Any]]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\r\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_csv_cell(v) for v in row])
    return buf.getvalue()


def write_csv(columns: Sequence[str], rows: Iterable[Sequence[Any]], path: Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as f:
        f.write(csv_text(columns, rows))
    return path


def _csv_cell(v: Any) -> Any:
    v = jsonable(v)
    if isinstance(v, float):
        return repr(v)
    if v is None:
        return ""
    return v
