"""Regression by projection onto a fitted latent space.

A sample is mapped to latent scores by least squares against the
predictor loadings, then the response loadings map the scores to a
prediction. Works with loadings from either the robust decomposition or
a classical PLS fit.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .baselines import RANK_RCOND, PlsFactors
from .errors import DimensionError
from .linalg import as_matrix, svd
from .rpls import RplsModel

__all__ = [
    "ProjectionRegressor",
    "STABILITY_THRESHOLD",
    "from_rpls",
    "from_pls",
    "project",
    "predict_projection",
    "regression_matrix",
]

# A latent direction is kept for prediction only while the X-side error
# leverage along it stays below this multiple of its signal gain.
STABILITY_THRESHOLD = 3.0


@dataclass(frozen=True)
class ProjectionRegressor:
    """Loadings and offsets needed to predict responses by projection."""

    lambda_x: np.ndarray  # p x k
    lambda_y: np.ndarray  # r x k
    x_means: np.ndarray   # (p,)
    y_means: np.ndarray   # (r,)
    source_tag: str       # "RPLS" or "PLS"
    notes: tuple = ()


def _loading_basis(reg: ProjectionRegressor):
    """Thin SVD of the predictor loadings, keeping numerically nonzero gains."""
    f = svd(reg.lambda_x)
    smax = f.s[0] if f.s.size and f.s[0] > 0 else 0.0
    keep = f.s > RANK_RCOND * smax if smax > 0 else np.zeros(f.s.shape, dtype=bool)
    return f.u[:, keep], f.s[keep], f.v[:, keep]


def from_rpls(model: RplsModel, stability_threshold: float | None = STABILITY_THRESHOLD) -> ProjectionRegressor:
    """Build a projection regressor from a fitted robust decomposition.

    Latent directions along which the fitted sparse-error block has more
    leverage than ``stability_threshold`` times the direction's loading
    gain are removed from both loadings before prediction: the predictors
    carry too little signal there for the projected score to be
    trustworthy, while the response loading may be large (this is the
    signature of a direction captured by response corruption rather than
    shared structure). Pass None to disable the screen.
    """
    lambda_x = np.array(model.state.lambda_x, dtype=np.float64)
    lambda_y = np.array(model.state.lambda_y, dtype=np.float64)
    notes = ()
    if stability_threshold is not None and lambda_x.any():
        f = svd(lambda_x)
        leverage = np.linalg.norm(model.state.delta_x @ f.u, axis=0)
        unstable = leverage > stability_threshold * np.maximum(f.s, 1e-300)
        if unstable.any():
            keep = ~unstable
            lambda_x = (f.u[:, keep] * f.s[keep]) @ f.v[:, keep].T
            lambda_y = lambda_y @ f.v[:, keep] @ f.v[:, keep].T
            notes = (f"removed {int(unstable.sum())} unstable latent direction(s)",)
    deficient = _rank_deficient(lambda_x)
    if deficient:
        notes = notes + (deficient,)
    return ProjectionRegressor(
        lambda_x=lambda_x,
        lambda_y=lambda_y,
        x_means=np.array(model.x_means, dtype=np.float64),
        y_means=np.array(model.y_means, dtype=np.float64),
        source_tag="RPLS",
        notes=notes,
    )


def from_pls(factors: PlsFactors, x_means, y_means) -> ProjectionRegressor:
    """Build a projection regressor from classical PLS loadings."""
    lambda_x = np.array(factors.x_loadings, dtype=np.float64)
    lambda_y = np.array(factors.y_loadings, dtype=np.float64)
    notes = ()
    deficient = _rank_deficient(lambda_x)
    if deficient:
        notes = (deficient,)
    return ProjectionRegressor(
        lambda_x=lambda_x,
        lambda_y=lambda_y,
        x_means=np.asarray(x_means, dtype=np.float64),
        y_means=np.asarray(y_means, dtype=np.float64),
        source_tag="PLS",
        notes=notes,
    )


def _rank_deficient(lambda_x: np.ndarray) -> str | None:
    if lambda_x.shape[1] == 0 or not lambda_x.any():
        return "predictor loadings are zero: predictions fall back to the response offsets"
    s = np.linalg.svd(lambda_x, compute_uv=False)
    if s[-1] <= RANK_RCOND * s[0]:
        return "predictor loadings rank deficient: pseudoinverse projection"
    return None


def project(reg: ProjectionRegressor, x_new) -> np.ndarray:
    """Latent scores of new rows: least-squares fit of ``q @ lambda_x.T``.

    Computed through the pseudoinverse of the loading transpose, so
    numerically dead directions contribute zero score.
    """
    x_new = as_matrix(x_new, "x_new")
    if x_new.shape[1] != reg.lambda_x.shape[0]:
        raise DimensionError(
            f"x_new has {x_new.shape[1]} columns, regressor expects {reg.lambda_x.shape[0]}"
        )
    u, s, v = _loading_basis(reg)
    if s.size == 0:
        return np.zeros((x_new.shape[0], reg.lambda_x.shape[1]))
    return ((x_new - reg.x_means) @ (u / s)) @ v.T


def predict_projection(reg: ProjectionRegressor, x_new) -> np.ndarray:
    """Predict responses: project to latent scores, map through y-loadings."""
    return project(reg, x_new) @ reg.lambda_y.T + reg.y_means


def regression_matrix(reg: ProjectionRegressor) -> np.ndarray:
    """Explicit p x r coefficient matrix equivalent to predict_projection.

    Solves ``lambda_x^T theta = lambda_y^T`` in the minimum-norm
    least-squares sense; ``predict_projection(reg, x)`` equals
    ``(x - x_means) @ theta + y_means`` up to rounding.
    """
    u, s, v = _loading_basis(reg)
    if s.size == 0:
        return np.zeros((reg.lambda_x.shape[0], reg.lambda_y.shape[0]))
    return (u / s) @ (reg.lambda_y @ v).T
