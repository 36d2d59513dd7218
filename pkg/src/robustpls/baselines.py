"""Classical regression baselines: MLR, PCR, and iterative PLS.

All fitters center the data, optionally scale columns to unit variance,
and produce a common ``LinearModel`` whose coefficients act on raw
(uncentered) inputs through ``predict``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, DimensionError
from .linalg import as_matrix, svd

__all__ = [
    "LinearModel",
    "PlsFactors",
    "METHOD_TAGS",
    "fit_mlr",
    "fit_pcr",
    "fit_pls_nipals",
    "predict",
]

METHOD_TAGS = ("MLR", "PCR", "PLSR", "PLS_PROJ", "RPLS_PROJ")

# Relative singular-value cutoff below which directions count as rank-deficient.
RANK_RCOND = 1e-12


@dataclass(frozen=True)
class LinearModel:
    """Linear predictor ``y_hat = (x - x_means) @ theta + y_means``."""

    theta: np.ndarray     # p x r
    x_means: np.ndarray   # (p,)
    y_means: np.ndarray   # (r,)
    method_tag: str
    n_components: int = 0
    notes: tuple = ()

    def __post_init__(self):
        if self.method_tag not in METHOD_TAGS:
            raise ConfigError(f"method_tag must be one of {METHOD_TAGS}, got {self.method_tag!r}")


@dataclass(frozen=True)
class PlsFactors:
    """Latent factors extracted by the iterative PLS fit.

    Weight columns have unit Euclidean norm; scores are ``t_j = X_res w_j``
    computed on the deflated predictor residuals.
    """

    scores: np.ndarray      # n x k
    weights: np.ndarray     # p x k
    x_loadings: np.ndarray  # p x k
    y_loadings: np.ndarray  # r x k


def _center_scale(x, y, center, scale):
    x = as_matrix(x, "x")
    y = as_matrix(y, "y")
    if x.shape[0] != y.shape[0]:
        raise DimensionError(f"x has {x.shape[0]} rows but y has {y.shape[0]}")
    x_means = x.mean(axis=0) if center else np.zeros(x.shape[1])
    y_means = y.mean(axis=0) if center else np.zeros(y.shape[1])
    xc = x - x_means
    yc = y - y_means
    if scale:
        x_scale = xc.std(axis=0, ddof=1)
        y_scale = yc.std(axis=0, ddof=1)
        x_scale[x_scale == 0.0] = 1.0
        y_scale[y_scale == 0.0] = 1.0
    else:
        x_scale = np.ones(x.shape[1])
        y_scale = np.ones(y.shape[1])
    return xc / x_scale, yc / y_scale, x_means, y_means, x_scale, y_scale


def _fold_scales(theta_scaled, x_scale, y_scale):
    # Compose scaling into theta so predict stays (x - means) @ theta + means.
    return (theta_scaled / x_scale[:, None]) * y_scale[None, :]


def fit_mlr(x, y, center: bool = True, scale: bool = False) -> LinearModel:
    """Ordinary least squares on (centered) data.

    Falls back to the minimum-norm pseudoinverse solution when the
    predictor matrix is rank deficient, recording a note on the model.
    """
    xc, yc, x_means, y_means, x_scale, y_scale = _center_scale(x, y, center, scale)
    theta, _, rank, _ = np.linalg.lstsq(xc, yc, rcond=RANK_RCOND)
    notes = ()
    if rank < xc.shape[1]:
        notes = (f"rank deficient predictors (rank {rank} < {xc.shape[1]}): pseudoinverse solution",)
    return LinearModel(
        theta=_fold_scales(theta, x_scale, y_scale),
        x_means=x_means,
        y_means=y_means,
        method_tag="MLR",
        n_components=0,
        notes=notes,
    )


def fit_pcr(x, y, k: int, center: bool = True, scale: bool = False) -> LinearModel:
    """Principal component regression with the top-k score directions."""
    xc, yc, x_means, y_means, x_scale, y_scale = _center_scale(x, y, center, scale)
    n, p = xc.shape
    if not 1 <= k <= min(n, p):
        raise ConfigError(f"k must be in [1, {min(n, p)}], got {k}")
    f = svd(xc)
    s = f.s[:k]
    keep = s > RANK_RCOND * (f.s[0] if f.s[0] > 0 else 1.0)
    notes = ()
    if not keep.all():
        notes = (f"{int((~keep).sum())} of {k} score directions numerically zero: dropped",)
    # Regress on scores u*s, fold back: theta = V_k S_k^{-1} U_k^T y.
    u = f.u[:, :k][:, keep]
    v = f.v[:, :k][:, keep]
    theta = (v / s[keep]) @ (u.T @ yc)
    return LinearModel(
        theta=_fold_scales(theta, x_scale, y_scale),
        x_means=x_means,
        y_means=y_means,
        method_tag="PCR",
        n_components=k,
        notes=notes,
    )


def fit_pls_nipals(x, y, k: int, center: bool = True, scale: bool = False):
    """Iterative PLS: one covariance-maximizing component per deflation round.

    Each round takes the dominant singular direction of the residual
    cross-covariance ``X_res^T Y_res`` as the weight vector (unit norm,
    largest-magnitude entry nonnegative), scores the residuals, and
    deflates both blocks by the rank-one fit. Stops early if the
    cross-covariance vanishes before k components; the actual count is
    recorded on the model.

    Returns
    -------
    (PlsFactors, LinearModel)
    """
    xc, yc, x_means, y_means, x_scale, y_scale = _center_scale(x, y, center, scale)
    n, p = xc.shape
    r = yc.shape[1]
    if not 1 <= k <= min(n, p):
        raise ConfigError(f"k must be in [1, {min(n, p)}], got {k}")

    x_res = xc.copy()
    y_res = yc.copy()
    cov_scale = np.linalg.norm(xc.T @ yc)
    weights, scores, x_loadings, y_loadings = [], [], [], []
    notes = ()
    for j in range(k):
        cov = x_res.T @ y_res
        if np.linalg.norm(cov) <= max(1e-12 * cov_scale, 1e-300):
            notes = (f"cross-covariance vanished after {j} of {k} components",)
            break
        w = svd(cov).u[:, 0]
        t = x_res @ w
        tt = float(t @ t)
        if tt <= 0.0:
            notes = (f"zero score variance after {j} of {k} components",)
            break
        p_load = x_res.T @ t / tt
        c_load = y_res.T @ t / tt
        x_res = x_res - np.outer(t, p_load)
        y_res = y_res - np.outer(t, c_load)
        weights.append(w)
        scores.append(t)
        x_loadings.append(p_load)
        y_loadings.append(c_load)

    if not weights:
        factors = PlsFactors(
            scores=np.zeros((n, 0)),
            weights=np.zeros((p, 0)),
            x_loadings=np.zeros((p, 0)),
            y_loadings=np.zeros((r, 0)),
        )
        theta = np.zeros((p, r))
    else:
        factors = PlsFactors(
            scores=np.column_stack(scores),
            weights=np.column_stack(weights),
            x_loadings=np.column_stack(x_loadings),
            y_loadings=np.column_stack(y_loadings),
        )
        pw = factors.x_loadings.T @ factors.weights
        try:
            theta = factors.weights @ np.linalg.solve(pw, factors.y_loadings.T)
        except np.linalg.LinAlgError:
            theta = factors.weights @ np.linalg.pinv(pw, rcond=RANK_RCOND) @ factors.y_loadings.T
            notes = notes + ("singular loading-weight product: pseudoinverse composition",)

    model = LinearModel(
        theta=_fold_scales(theta, x_scale, y_scale),
        x_means=x_means,
        y_means=y_means,
        method_tag="PLSR",
        n_components=len(weights),
        notes=notes,
    )
    return factors, model


def predict(model: LinearModel, x_new) -> np.ndarray:
    """Apply a fitted linear model to new rows."""
    x_new = as_matrix(x_new, "x_new")
    if x_new.shape[1] != model.theta.shape[0]:
        raise DimensionError(
            f"x_new has {x_new.shape[1]} columns, model expects {model.theta.shape[0]}"
        )
    return (x_new - model.x_means) @ model.theta + model.y_means
