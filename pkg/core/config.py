"""
Experiment configuration: one JSON document per run, validated against
``schemas/experiment.schema.json`` before anything is computed.
"""
from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field, replace
from functools import lru_cache
from pathlib import Path
from typing import Any, Dict, Optional, Tuple

from jsonschema import Draft202012Validator

from .engine import InequalitySpec
from .errors import ConfigError, GrushinError
from .fields import TrialField, build_field
from .geometry import DEFAULT_EXCLUSION_RADIUS, DEFAULT_FD_STEP, GrushinSpace
from .params import DEFAULT_PARAMS_TOL, CknParams, HardyParams, WhsParams
from .quadrature import DEFAULT_TOL, GAUSS_ORDER
from .utils import parse_number

log = logging.getLogger(__name__)

SCHEMA_PATH = Path(__file__).parent / "schemas" / "experiment.schema.json"
SCHEMA_VERSION = 1


@dataclass(frozen=True)
class Tolerances:
    quad: float = DEFAULT_TOL
    params: float = DEFAULT_PARAMS_TOL
    trigger: float = DEFAULT_PARAMS_TOL
    fit: Optional[float] = None  # per-experiment default when unset
    exclusion: float = DEFAULT_EXCLUSION_RADIUS
    fd_step: float = DEFAULT_FD_STEP
    gauss_order: int = GAUSS_ORDER


@dataclass(frozen=True)
class ExperimentConfig:
    raw: Dict[str, Any]
    space: GrushinSpace
    spec: InequalitySpec
    field_section: Optional[Dict[str, Any]] = None
    lambdas: Tuple[float, ...] = ()
    eps_list: Tuple[float, ...] = ()
    eps_shift_grid: Tuple[float, ...] = ()
    translation: Optional[Dict[str, Any]] = None
    search: Dict[str, Any] = field(default_factory=dict)
    tolerances: Tolerances = Tolerances()
    seed: int = 0
    output: Dict[str, str] = field(default_factory=dict)

    def build_field(self) -> TrialField:
        if self.field_section is None:
            raise ConfigError("config has no 'field' section", ["$: 'field' is required by this command"])
        sec = self.field_section
        return build_field(self.space, sec["family"], sec["params"], sec.get("transform"))

    def with_overrides(
        self, tol: Optional[float] = None, seed: Optional[int] = None, params_tol: Optional[float] = None
    ) -> "ExperimentConfig":
        out = self
        if tol is not None:
            out = replace(out, tolerances=replace(out.tolerances, quad=tol))
        if params_tol is not None:
            out = replace(out, tolerances=replace(out.tolerances, params=params_tol, trigger=params_tol))
        if seed is not None:
            out = replace(out, seed=seed)
        return out


@lru_cache(maxsize=1)
def _validator() -> Draft202012Validator:
    schema = json.loads(SCHEMA_PATH.read_text(encoding="utf-8"))
    Draft202012Validator.check_schema(schema)
    return Draft202012Validator(schema)


def validate(data: Any) -> None:
    errors = sorted(_validator().iter_errors(data), key=lambda e: [str(p) for p in e.absolute_path])
    if errors:
        lines = [f"{e.json_path}: {e.message}" for e in errors]
        raise ConfigError("config does not match the experiment schema", lines)


def _numbers(values, exact: bool, where: str):
    try:
        return tuple(parse_number(v, exact) for v in values)
    except ValueError as e:
        raise ConfigError(f"bad number in {where}", [f"{where}: {e}"]) from e


def _field_params(params: Dict[str, Any]) -> Dict[str, Any]:
    out: Dict[str, Any] = {}
    for key, value in params.items():
        if isinstance(value, list):
            out[key] = [float(parse_number(v)) for v in value]
        elif value is None:
            out[key] = None
        else:
            out[key] = float(parse_number(value))
    return out


def _spec(space: GrushinSpace, section: Dict[str, Any], exact: bool) -> InequalitySpec:
    kind = section["kind"]
    names = sorted(section["params"])
    values = dict(zip(names, _numbers([section["params"][n] for n in names], exact, "$.inequality.params")))
    if kind == "hardy":
        params = HardyParams(values["p"], values["alpha"])
    elif kind == "whs":
        params = WhsParams(values["p"], values["s"], values["alpha"])
    elif kind == "ckn":
        params = CknParams(**values)
    else:
        params = values["p"]
    return InequalitySpec(kind, space, params)


def parse_config(data: Dict[str, Any]) -> ExperimentConfig:
    validate(data)
    exact = bool(data.get("exact", False))
    try:
        sp = data["space"]
        space = GrushinSpace(sp["d"], sp["k"], parse_number(sp["mu"], exact))
        spec = _spec(space, data["inequality"], exact)
    except GrushinError as e:
        raise ConfigError("config describes an invalid problem", [str(e)]) from e

    fld = None
    if "field" in data:
        fld = {
            "family": data["field"]["family"],
            "params": _field_params(data["field"].get("params", {})),
            "transform": data["field"].get("transform"),
        }
        if fld["transform"]:
            fld["transform"] = {
                k: (
                    [float(parse_number(x)) for x in v]
                    if isinstance(v, list)
                    else v if k == "kind" else float(parse_number(v))
                )
                for k, v in fld["transform"].items()
            }

    tol = data.get("tolerances", {})
    search = dict(data.get("search", {}))
    if "bounds" in search:
        search["bounds"] = tuple(float(parse_number(b)) for b in search["bounds"])
        if not search["bounds"][0] < search["bounds"][1]:
            raise ConfigError("search bounds must be increasing", [f"$.search.bounds: {list(search['bounds'])}"])
    translation = None
    if "translation" in data:
        tr = data["translation"]
        translation = {
            "x0": [float(parse_number(v)) for v in tr["x0"]],
            "y0": [float(parse_number(v)) for v in tr["y0"]],
            "n_samples": tr.get("n_samples", 20_000),
        }
    cfg = ExperimentConfig(
        raw=data,
        space=space,
        spec=spec,
        field_section=fld,
        lambdas=tuple(float(v) for v in _numbers(data.get("lambdas", []), False, "$.lambdas")),
        eps_list=tuple(float(v) for v in _numbers(data.get("eps_list", []), False, "$.eps_list")),
        eps_shift_grid=tuple(float(v) for v in _numbers(data.get("eps_shift_grid", []), False, "$.eps_shift_grid")),
        translation=translation,
        search=search,
        tolerances=Tolerances(
            quad=tol.get("quad", DEFAULT_TOL),
            params=tol.get("params", DEFAULT_PARAMS_TOL),
            trigger=tol.get("trigger", DEFAULT_PARAMS_TOL),
            fit=tol.get("fit"),
            exclusion=tol.get("exclusion", DEFAULT_EXCLUSION_RADIUS),
            fd_step=tol.get("fd_step", DEFAULT_FD_STEP),
            gauss_order=tol.get("gauss_order", GAUSS_ORDER),
        ),
        seed=data.get("seed", 0),
        output=dict(data.get("output", {})),
    )
    log.debug("parsed config: %s, %s", space, spec.kind)
    return cfg


def load_config(path: Path) -> ExperimentConfig:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise ConfigError(f"cannot read config {path}", [str(e)]) from e
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError(f"{path}: invalid JSON", [f"line {e.lineno}, column {e.colno}: {e.msg}"]) from e
    return parse_config(data)
