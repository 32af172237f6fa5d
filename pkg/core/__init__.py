"""
grushinlab core package.

Hardy, weighted Hardy–Sobolev and Caffarelli–Kohn–Nirenberg inequalities for
Grushin-type operators: geometry, parameter admissibility, weighted quadrature,
trial fields and the experiments built on them.
"""

__version__ = "0.1.0"

__all__ = [
    "GrushinSpace",
    "Point",
    "gauge",
    "dilate",
    "grushin_gradient",
    "fd_grushin_laplacian",
    "CknParams",
    "WhsParams",
    "HardyParams",
    "check_ckn",
    "solve_balance",
    "hardy_constant",
    "p_star",
    "integrable",
    "remark_reduction",
    "WeightedIntegrand",
    "integrate_cartesian",
    "integrate_polar",
    "monte_carlo_oracle",
    "divergence_probe",
    "build_field",
    "InequalitySpec",
    "evaluate",
    "scaling_experiment",
    "translation_experiment",
    "log_family_experiment",
    "sharp_search",
    "lemma_lambda_check",
    "lemma_p_probe",
    "load_config",
    "GrushinError",
]

from .config import load_config  # noqa: E402
from .engine import (  # noqa: E402
    InequalitySpec,
    evaluate,
    lemma_lambda_check,
    lemma_p_probe,
    log_family_experiment,
    scaling_experiment,
    sharp_search,
    translation_experiment,
)
from .errors import GrushinError  # noqa: E402
from .fields import build_field  # noqa: E402
from .geometry import GrushinSpace, Point, dilate, fd_grushin_laplacian, gauge, grushin_gradient  # noqa: E402
from .params import (  # noqa: E402
    CknParams,
    HardyParams,
    WhsParams,
    check_ckn,
    hardy_constant,
    integrable,
    p_star,
    remark_reduction,
    solve_balance,
)
from .quadrature import (  # noqa: E402
    WeightedIntegrand,
    divergence_probe,
    integrate_cartesian,
    integrate_polar,
    monte_carlo_oracle,
)
