# Optimization kernels: prox maps, lasso CD, nuclear-norm ADMM, PD solves.
from .lasso import GramLasso, lasso_cd, lasso_kkt_violation
from .linalg import PDFactor, solve_pd
from .nuclear import admm_thresholds, minimize_nuclear, quad_admm_nuclear
from .options import SolverOptions
from .prox import prox_l1, soft_threshold, svd_shrink
from .results import FitResult, SolverResult
from .single import fit_single, fit_weighted

__all__ = [
    "FitResult",
    "GramLasso",
    "PDFactor",
    "SolverOptions",
    "SolverResult",
    "admm_thresholds",
    "fit_single",
    "fit_weighted",
    "lasso_cd",
    "lasso_kkt_violation",
    "minimize_nuclear",
    "prox_l1",
    "quad_admm_nuclear",
    "soft_threshold",
    "solve_pd",
    "svd_shrink",
]
