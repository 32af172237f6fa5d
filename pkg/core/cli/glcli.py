"""
grushinlab command line.

Every command reads one JSON experiment config, runs one library operation and
writes a RunRecord (JSON) plus a flat CSV. Without --out the JSON goes to
stdout; a summary table always goes to stderr.

Exit codes: 0 success, 1 usage or config error, 2 admissibility refusal,
3 numerical non-convergence.
"""
from __future__ import annotations

import logging
import math
import sys
from pathlib import Path
from typing import Any, Callable, List, Optional, Sequence, Tuple

import click
import typer
from rich.console import Console
from rich.markup import escape
from rich.table import Table

from .. import __version__
from ..config import ExperimentConfig, load_config
from ..engine import (
    evaluate,
    log_family_experiment,
    scaling_experiment,
    sharp_search,
    translation_experiment,
)
from ..errors import (
    ConfigError,
    DivergentIntegralError,
    GrushinError,
    InadmissibleError,
    InapplicableConstantError,
    OptimizerBudgetError,
    QuadratureError,
)
from ..log import configure
from ..reports import AdmissibilityReport, RunRecord, ScalingReport, dumps, write_csv, write_json
from ..utils import utc_timestamp

log = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_REFUSED = 2
EXIT_NUMERIC = 3

_EXIT_CODES = (
    (InadmissibleError, EXIT_REFUSED),
    (InapplicableConstantError, EXIT_REFUSED),
    (QuadratureError, EXIT_NUMERIC),
    (DivergentIntegralError, EXIT_NUMERIC),
    (OptimizerBudgetError, EXIT_NUMERIC),
)

app = typer.Typer(
    add_completion=False,
    no_args_is_help=True,
    help="Hardy, weighted Hardy-Sobolev and CKN experiments on Grushin spaces.",
)
err = Console(stderr=True)

ConfigArg = typer.Argument(..., help="Experiment config (JSON).")
OutOpt = typer.Option(None, "--out", help="Write the JSON record here and the CSV next to it.")
TolOpt = typer.Option(None, "--tol", help="Override the quadrature tolerance.")
SeedOpt = typer.Option(None, "--seed", help="Override the seed.")
VerboseOpt = typer.Option(False, "--verbose", "-v", help="Debug logging on stderr.")

Rows = List[Sequence[Any]]
Outcome = Tuple[Any, Sequence[str], Rows, int]


def exit_code_for(exc: BaseException) -> int:
    for cls, code in _EXIT_CODES:
        if isinstance(exc, cls):
            return code
    return EXIT_ERROR


def _summary(title: str, report: Any) -> None:
    table = Table(title=title, show_header=True, header_style="bold")
    if isinstance(report, AdmissibilityReport):
        table.add_column("predicate")
        table.add_column("residual", justify="right")
        table.add_column("ok")
        table.add_column("note")
        for c in report.checks:
            table.add_row(c.name, str(c.residual), "yes" if c.passed else "NO", c.note)
    elif isinstance(report, ScalingReport):
        table.add_column("integral")
        table.add_column("fitted", justify="right")
        table.add_column("predicted", justify="right")
        table.add_column("R^2", justify="right")
        table.add_column("ok")
        for f in (*report.fits, *([report.ratio_fit] if report.ratio_fit else [])):
            predicted = "" if f.predicted is None else f"{f.predicted:.6g}"
            table.add_row(f.name, f"{f.fitted:.6g}", predicted, f"{f.r_squared:.6f}", str(f.passed))
        table.caption = report.conclusion
    else:
        table.add_column("field")
        table.add_column("value", justify="right")
        for key, value in report.to_dict().items():
            if isinstance(value, (dict, list)):
                continue
            table.add_row(key, str(value))
    err.print(table)


def _run(
    command: str,
    config: Path,
    out: Optional[Path],
    tol: Optional[float],
    seed: Optional[int],
    verbose: bool,
    body: Callable[[ExperimentConfig], Outcome],
    params_tol: Optional[float] = None,
) -> None:
    configure(verbose)
    started = utc_timestamp()
    try:
        cfg = load_config(config).with_overrides(tol=tol, seed=seed, params_tol=params_tol)
        report, columns, rows, code = body(cfg)
    except GrushinError as e:
        code = exit_code_for(e)
        err.print(f"[bold red]{command} failed[/bold red] (exit {code}): {escape(str(e))}")
        partial = getattr(e, "report", None)
        if isinstance(partial, AdmissibilityReport):
            _summary("admissibility", partial)
        raise typer.Exit(code) from e

    record = RunRecord(command, __version__, cfg.raw, report.to_dict(), started, utc_timestamp())
    json_path = out or (Path(cfg.output["json"]) if "json" in cfg.output else None)
    if json_path is not None:
        write_json(record, json_path)
        csv_path = Path(cfg.output["csv"]) if "csv" in cfg.output and out is None else json_path.with_suffix(".csv")
        write_csv(columns, rows, csv_path)
        err.print(f"wrote {json_path} and {csv_path}")
    else:
        typer.echo(dumps(record), nl=False)
    _summary(command, report)
    raise typer.Exit(code)


@app.command("validate")
def cmd_validate(
    config: Path = ConfigArg,
    out: Optional[Path] = OutOpt,
    tol: Optional[float] = typer.Option(
        None, "--tol", help="Override the admissibility (params and trigger) tolerance."
    ),
    verbose: bool = VerboseOpt,
) -> None:
    """Check the parameter tuple against every hypothesis of its inequality."""

    def body(cfg: ExperimentConfig) -> Outcome:
        report = cfg.spec.admissibility(cfg.tolerances.params, cfg.tolerances.trigger)
        rows = [(c.name, c.residual, c.passed, c.note) for c in report.checks]
        return report, ("predicate", "residual", "passed", "note"), rows, EXIT_OK if report.verdict else EXIT_REFUSED

    _run("validate", config, out, None, None, verbose, body, params_tol=tol)


@app.command("eval")
def cmd_eval(
    config: Path = ConfigArg,
    out: Optional[Path] = OutOpt,
    tol: Optional[float] = TolOpt,
    seed: Optional[int] = SeedOpt,
    force: bool = typer.Option(False, "--force", help="Evaluate inadmissible tuples too."),
    verbose: bool = VerboseOpt,
) -> None:
    """Both sides of the inequality for the configured trial field."""

    def body(cfg: ExperimentConfig) -> Outcome:
        t = cfg.tolerances
        rep = evaluate(
            cfg.spec, cfg.build_field(), t.quad, force=force, params_tol=t.params, seed=cfg.seed, trigger_tol=t.trigger,
            gauss_order=t.gauss_order, exclusion=t.exclusion, fd_step=t.fd_step,
        )
        columns = (
            "kind", "form", "lhs", "rhs_grad_factor", "rhs_q_factor", "a", "rhs", "ratio",
            "constant", "satisfied_at_constant", "gradient_gap",
        )
        return rep, columns, [tuple(getattr(rep, c) for c in columns)], EXIT_OK

    _run("eval", config, out, tol, seed, verbose, body)


def _grid_rows(report: ScalingReport, names: Sequence[str]) -> Rows:
    values = {f.name: f.values for f in report.fits}
    return [(g, *(values[n][i] for n in names)) for i, g in enumerate(report.grid)]


@app.command("scale")
def cmd_scale(
    config: Path = ConfigArg,
    out: Optional[Path] = OutOpt,
    tol: Optional[float] = TolOpt,
    verbose: bool = VerboseOpt,
) -> None:
    """Dilation sweep u∘δ_λ: fitted exponents of the CKN integrals and of the ratio."""

    def body(cfg: ExperimentConfig) -> Outcome:
        t = cfg.tolerances
        rep = scaling_experiment(
            cfg.spec, cfg.build_field(), cfg.lambdas, t.quad, fit_tol=t.fit or 1e-3, gauss_order=t.gauss_order
        )
        rows = [(*row, rep.ratio_fit.values[i]) for i, row in enumerate(_grid_rows(rep, ("lhs", "grad", "q")))]
        return rep, ("lambda", "lhs", "grad", "q", "ratio"), rows, EXIT_OK

    _run("scale", config, out, tol, None, verbose, body)


@app.command("translate")
def cmd_translate(
    config: Path = ConfigArg,
    out: Optional[Path] = OutOpt,
    seed: Optional[int] = SeedOpt,
    verbose: bool = VerboseOpt,
) -> None:
    """Translation sweep u(· − δ_λ(x₀, y₀)): growth exponents for large λ."""

    def body(cfg: ExperimentConfig) -> Outcome:
        if cfg.translation is None:
            raise ConfigError("translate needs a 'translation' section with x0 and y0")
        tr = cfg.translation
        rep = translation_experiment(
            cfg.spec, cfg.build_field(), tr["x0"], tr["y0"], cfg.lambdas,
            tol=cfg.tolerances.fit or 0.05, n_samples=tr["n_samples"], seed=cfg.seed,
        )
        names = ("lhs", "grad", "q", "grad_transported")
        return rep, ("lambda", *names), _grid_rows(rep, names), EXIT_OK

    _run("translate", config, out, None, seed, verbose, body)


@app.command("logfam")
def cmd_logfam(
    config: Path = ConfigArg,
    out: Optional[Path] = OutOpt,
    tol: Optional[float] = TolOpt,
    verbose: bool = VerboseOpt,
) -> None:
    """Log-profile sweep u_ε: growth exponents in log(1/ε) on the equality trigger."""

    def body(cfg: ExperimentConfig) -> Outcome:
        t = cfg.tolerances
        rep = log_family_experiment(
            cfg.spec, cfg.eps_list, t.quad, params_tol=t.trigger, fit_tol=t.fit or 0.2, gauss_order=t.gauss_order
        )
        rows = [(e, math.log(1.0 / e), *row[1:]) for e, row in zip(rep.grid, _grid_rows(rep, ("lhs", "grad", "q")))]
        return rep, ("eps", "log_inv_eps", "lhs", "grad", "q"), rows, EXIT_OK

    _run("logfam", config, out, tol, None, verbose, body)


@app.command("sharp")
def cmd_sharp(
    config: Path = ConfigArg,
    out: Optional[Path] = OutOpt,
    tol: Optional[float] = TolOpt,
    seed: Optional[int] = SeedOpt,
    verbose: bool = VerboseOpt,
) -> None:
    """Search the near-extremal family for the largest Hardy ratio."""

    def body(cfg: ExperimentConfig) -> Outcome:
        s = cfg.search
        t = cfg.tolerances
        kw = {"method": s.get("method", "grid"), "tol": t.quad, "seed": cfg.seed, "gauss_order": t.gauss_order}
        if cfg.eps_shift_grid:
            kw["eps_shift_grid"] = cfg.eps_shift_grid
        if "bounds" in s:
            kw["bounds"] = s["bounds"]
        if "max_evals" in s:
            kw["max_evals"] = s["max_evals"]
        rep = sharp_search(cfg.spec, **kw)
        best = rep.best_so_far()
        rows = []
        for i, (params, ratio) in enumerate(rep.trace):
            padded = (*params, None, None)[:3]
            rows.append((i, *padded, ratio, best[i]))
        return rep, ("step", "eps_shift", "r_inner", "r_outer", "ratio", "best_so_far"), rows, EXIT_OK

    _run("sharp", config, out, tol, seed, verbose, body)


def main() -> None:
    try:
        code = app(standalone_mode=False)
    except click.UsageError as e:
        e.show()
        sys.exit(EXIT_ERROR)
    except click.Abort:
        sys.exit(EXIT_ERROR)
    sys.exit(code or EXIT_OK)
