"""Robust PLS solver: joint low-rank + sparse decomposition of X and Y.

Fits ``X = Q Lx^T + Dx`` and ``Y = Q Ly^T + Dy`` with a shared
orthonormal score matrix Q, minimizing ``|Dx|_1 + |Dy|_1 +
lambda1*||Lx||_* + lambda2*||Ly||_*`` by alternating closed-form block
updates under an augmented Lagrangian with geometrically growing
penalties. Each iteration runs the update sequence
Q -> Lx -> Ly -> Dx -> Dy -> multipliers -> penalties and checks the
primal residual against the tolerance.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import ConfigError, DimensionError
from .linalg import as_matrix, procrustes_orthonormal, singular_value_threshold, soft_threshold

__all__ = [
    "CENTER_MODES",
    "RplsConfig",
    "RplsState",
    "RplsModel",
    "update_q",
    "update_loadings",
    "update_sparse",
    "update_multipliers",
    "update_penalties",
    "primal_residual",
    "augmented_lagrangian",
    "initial_state",
    "fit",
]

logger = logging.getLogger(__name__)

CENTER_MODES = ("mean", "median", "none")


@dataclass(frozen=True)
class RplsConfig:
    """Hyperparameters of the alternating solver.

    ``lambda1``, ``lambda2`` and ``tol`` may be left as None, in which
    case they are resolved against the data when fitting:
    ``lambda = 1/sqrt(max(n, p))`` and
    ``tol = 1e-6 * (||X||_F + ||Y||_F)``.

    ``center`` selects the column-location estimate removed before
    fitting: "median" (default, robust to corrupted columns), "mean",
    or "none".
    """

    k: int
    lambda1: float | None = None
    lambda2: float | None = None
    alpha1_0: float = 1.0
    alpha2_0: float = 1.0
    rho: float = 1.1
    alpha_max: float = 1e6
    tol: float | None = None
    max_iter: int = 500
    center: str = "median"

    def __post_init__(self):
        if not isinstance(self.k, (int, np.integer)) or self.k < 1:
            raise ConfigError(f"k must be a positive integer, got {self.k!r}")
        for name in ("lambda1", "lambda2", "tol"):
            v = getattr(self, name)
            if v is not None and not (math.isfinite(v) and v > 0):
                raise ConfigError(f"{name} must be positive (or None for auto), got {v!r}")
        for name in ("alpha1_0", "alpha2_0", "alpha_max"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0):
                raise ConfigError(f"{name} must be positive, got {v!r}")
        if not (math.isfinite(self.rho) and self.rho >= 1):
            raise ConfigError(f"rho must be >= 1, got {self.rho!r}")
        if self.alpha_max < self.alpha1_0 or self.alpha_max < self.alpha2_0:
            raise ConfigError("alpha_max must be >= both initial penalties")
        if not isinstance(self.max_iter, (int, np.integer)) or self.max_iter < 1:
            raise ConfigError(f"max_iter must be a positive integer, got {self.max_iter!r}")
        if self.center not in CENTER_MODES:
            raise ConfigError(f"center must be one of {CENTER_MODES}, got {self.center!r}")

    def resolve(self, x: np.ndarray, y: np.ndarray) -> "RplsConfig":
        """Bind auto hyperparameters to the data and check k against its shape."""
        n, p = x.shape
        if self.k > min(n, p):
            raise ConfigError(f"k={self.k} exceeds min(n, p)={min(n, p)}")
        lam = 1.0 / math.sqrt(max(n, p))
        tol = self.tol
        if tol is None:
            tol = 1e-6 * (np.linalg.norm(x) + np.linalg.norm(y))
            if tol <= 0.0:  # all-zero data
                tol = 1e-12
        return replace(
            self,
            lambda1=self.lambda1 if self.lambda1 is not None else lam,
            lambda2=self.lambda2 if self.lambda2 is not None else lam,
            tol=tol,
        )


@dataclass
class RplsState:
    """All block variables of one solver iteration."""

    q: np.ndarray         # n x k, orthonormal columns
    lambda_x: np.ndarray  # p x k
    lambda_y: np.ndarray  # r x k
    delta_x: np.ndarray   # n x p
    delta_y: np.ndarray   # n x r
    l: np.ndarray         # n x p multipliers, X constraint
    m: np.ndarray         # n x r multipliers, Y constraint
    alpha1: float
    alpha2: float
    iteration: int = 0


@dataclass(frozen=True)
class RplsModel:
    """Fitted decomposition plus the configuration and convergence trace."""

    state: RplsState
    config: RplsConfig
    converged: bool
    residual_trace: tuple  # ((iteration, primal_residual), ...)
    x_means: np.ndarray
    y_means: np.ndarray

    @property
    def q(self) -> np.ndarray:
        return self.state.q

    @property
    def lambda_x(self) -> np.ndarray:
        return self.state.lambda_x

    @property
    def lambda_y(self) -> np.ndarray:
        return self.state.lambda_y

    @property
    def delta_x(self) -> np.ndarray:
        return self.state.delta_x

    @property
    def delta_y(self) -> np.ndarray:
        return self.state.delta_y

    def low_rank_x(self) -> np.ndarray:
        """Denoised predictor block ``Q Lx^T`` (centered coordinates)."""
        return self.state.q @ self.state.lambda_x.T

    def low_rank_y(self) -> np.ndarray:
        """Denoised response block ``Q Ly^T`` (centered coordinates)."""
        return self.state.q @ self.state.lambda_y.T


def _check_dims(state: RplsState, x: np.ndarray, y: np.ndarray) -> None:
    n, p = x.shape
    r = y.shape[1]
    k = state.q.shape[1]
    expected = {
        "q": (n, k),
        "lambda_x": (p, k),
        "lambda_y": (r, k),
        "delta_x": (n, p),
        "delta_y": (n, r),
        "l": (n, p),
        "m": (n, r),
    }
    if y.shape[0] != n:
        raise DimensionError(f"x has {n} rows but y has {y.shape[0]}")
    for name, shape in expected.items():
        got = getattr(state, name).shape
        if got != shape:
            raise DimensionError(f"state.{name} has shape {got}, expected {shape}")


def _working_matrices(state: RplsState, x: np.ndarray, y: np.ndarray):
    """Multiplier-shifted data blocks entering the Q and loading updates."""
    b = state.l / state.alpha1 + x - state.delta_x
    a = state.m / state.alpha2 + y - state.delta_y
    return b, a


def update_q(state: RplsState, x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Score update: orthonormal maximizer for the combined fit term."""
    _check_dims(state, x, y)
    b, a = _working_matrices(state, x, y)
    d = state.alpha1 * (b @ state.lambda_x) + state.alpha2 * (a @ state.lambda_y)
    return procrustes_orthonormal(d)


def update_loadings(state: RplsState, x: np.ndarray, y: np.ndarray, cfg: RplsConfig):
    """Loading updates by singular value thresholding; uses the current q."""
    _check_dims(state, x, y)
    b, a = _working_matrices(state, x, y)
    lambda_x = singular_value_threshold(b.T @ state.q, cfg.lambda1 / state.alpha1)
    lambda_y = singular_value_threshold(a.T @ state.q, cfg.lambda2 / state.alpha2)
    return lambda_x, lambda_y


def update_sparse(state: RplsState, x: np.ndarray, y: np.ndarray):
    """Sparse-error updates by elementwise soft thresholding."""
    _check_dims(state, x, y)
    delta_x = soft_threshold(
        x - state.q @ state.lambda_x.T + state.l / state.alpha1, 1.0 / state.alpha1
    )
    delta_y = soft_threshold(
        y - state.q @ state.lambda_y.T + state.m / state.alpha2, 1.0 / state.alpha2
    )
    return delta_x, delta_y


def update_multipliers(state: RplsState, x: np.ndarray, y: np.ndarray):
    """Gradient-ascent step on the multipliers along the constraint residuals."""
    _check_dims(state, x, y)
    rx = x - state.q @ state.lambda_x.T - state.delta_x
    ry = y - state.q @ state.lambda_y.T - state.delta_y
    return state.l + state.alpha1 * rx, state.m + state.alpha2 * ry


def update_penalties(alpha1: float, alpha2: float, cfg: RplsConfig):
    """Grow both penalties geometrically, capped at alpha_max."""
    return min(cfg.rho * alpha1, cfg.alpha_max), min(cfg.rho * alpha2, cfg.alpha_max)


def primal_residual(state: RplsState, x: np.ndarray, y: np.ndarray) -> float:
    """Sum of Frobenius norms of the two constraint residuals."""
    _check_dims(state, x, y)
    rx = x - state.q @ state.lambda_x.T - state.delta_x
    ry = y - state.q @ state.lambda_y.T - state.delta_y
    return float(np.linalg.norm(rx) + np.linalg.norm(ry))


def augmented_lagrangian(state: RplsState, x: np.ndarray, y: np.ndarray, cfg: RplsConfig) -> float:
    """Value of the augmented Lagrangian at the current state.

    Diagnostic: every block update minimizes this exactly over its own
    block, so the value is nonincreasing within an iteration while the
    multipliers and penalties are held fixed.
    """
    rx = x - state.q @ state.lambda_x.T - state.delta_x
    ry = y - state.q @ state.lambda_y.T - state.delta_y
    sx = np.linalg.svd(state.lambda_x, compute_uv=False)
    sy = np.linalg.svd(state.lambda_y, compute_uv=False)
    return float(
        np.abs(state.delta_x).sum()
        + np.abs(state.delta_y).sum()
        + cfg.lambda1 * sx.sum()
        + cfg.lambda2 * sy.sum()
        + np.vdot(state.l, rx)
        + 0.5 * state.alpha1 * np.vdot(rx, rx)
        + np.vdot(state.m, ry)
        + 0.5 * state.alpha2 * np.vdot(ry, ry)
    )


def initial_state(n: int, p: int, r: int, cfg: RplsConfig) -> RplsState:
    """Identity-padded scores, all other blocks zero."""
    return RplsState(
        q=np.eye(n, cfg.k),
        lambda_x=np.zeros((p, cfg.k)),
        lambda_y=np.zeros((r, cfg.k)),
        delta_x=np.zeros((n, p)),
        delta_y=np.zeros((n, r)),
        l=np.zeros((n, p)),
        m=np.zeros((n, r)),
        alpha1=cfg.alpha1_0,
        alpha2=cfg.alpha2_0,
        iteration=0,
    )


def _column_center(m: np.ndarray, mode: str) -> np.ndarray:
    if mode == "mean":
        return m.mean(axis=0)
    if mode == "median":
        return np.median(m, axis=0)
    return np.zeros(m.shape[1])


def fit(x, y, config: RplsConfig, callback=None) -> RplsModel:
    """Run the alternating solver until the primal residual drops below tol.

    Parameters
    ----------
    x : array_like, shape (n, p)
    y : array_like, shape (n, r)
    config : RplsConfig
        Solver hyperparameters; ``config.k`` must not exceed min(n, p).
    callback : callable, optional
        Called as ``callback(state, residual)`` after every iteration.

    Returns
    -------
    RplsModel
        Final state, per-iteration residual trace, convergence flag and
        the column offsets removed before fitting. Hitting max_iter is
        not an error; the model is returned with ``converged=False``.
    """
    x = as_matrix(x, "x")
    y = as_matrix(y, "y")
    if x.shape[0] != y.shape[0]:
        raise DimensionError(f"x has {x.shape[0]} rows but y has {y.shape[0]}")

    x_means = _column_center(x, config.center)
    y_means = _column_center(y, config.center)
    xc = x - x_means
    yc = y - y_means

    cfg = config.resolve(xc, yc)
    n, p = xc.shape
    r = yc.shape[1]
    state = initial_state(n, p, r, cfg)

    trace = []
    converged = False
    for it in range(1, cfg.max_iter + 1):
        state.q = update_q(state, xc, yc)
        state.lambda_x, state.lambda_y = update_loadings(state, xc, yc, cfg)
        state.delta_x, state.delta_y = update_sparse(state, xc, yc)
        state.l, state.m = update_multipliers(state, xc, yc)
        state.alpha1, state.alpha2 = update_penalties(state.alpha1, state.alpha2, cfg)
        state.iteration = it
        residual = primal_residual(state, xc, yc)
        trace.append((it, residual))
        logger.debug("iteration %d: residual=%.6e alpha1=%.3e", it, residual, state.alpha1)
        if callback is not None:
            callback(state, residual)
        if residual < cfg.tol:
            converged = True
            break

    logger.info(
        "rpls fit %s: %s after %d iterations (residual %.3e, tol %.3e)",
        (n, p, r),
        "converged" if converged else "max_iter reached",
        state.iteration,
        trace[-1][1],
        cfg.tol,
    )
    return RplsModel(
        state=state,
        config=cfg,
        converged=converged,
        residual_trace=tuple(trace),
        x_means=x_means,
        y_means=y_means,
    )
