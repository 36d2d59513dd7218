"""Evaluation: NMSE, train/test experiments, and confidence ellipses."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from . import baselines, projection, rpls
from .errors import ConfigError, DegenerateEllipseError, DimensionError, InvalidInputError, MetricError
from .linalg import as_matrix, svd

__all__ = [
    "MethodResult",
    "ExperimentReport",
    "ConfidenceEllipse",
    "nmse",
    "chi2_quantile_2dof",
    "confidence_ellipse",
    "run_experiment",
]

logger = logging.getLogger(__name__)


def nmse(y_true, y_est) -> float:
    """Normalized error: ``||y_true - y_est||_F / ||y_true||_F``."""
    y_true = as_matrix(y_true, "y_true")
    y_est = as_matrix(y_est, "y_est")
    if y_true.shape != y_est.shape:
        raise DimensionError(f"shape mismatch: {y_true.shape} vs {y_est.shape}")
    denom = np.linalg.norm(y_true)
    if denom == 0.0:
        raise MetricError("nmse is undefined for an all-zero reference")
    return float(np.linalg.norm(y_true - y_est) / denom)


def chi2_quantile_2dof(coverage: float) -> float:
    """Chi-square quantile with 2 degrees of freedom, in closed form."""
    if not 0.0 < coverage < 1.0:
        raise ConfigError(f"coverage must be in (0, 1), got {coverage!r}")
    return -2.0 * math.log1p(-coverage)


@dataclass(frozen=True)
class ConfidenceEllipse:
    """Coverage ellipse of 2-D scores: center, semi-axes (major first), tilt."""

    center: np.ndarray
    semi_axes: np.ndarray
    rotation_angle: float


def confidence_ellipse(scores_2d, coverage: float = 0.95) -> ConfidenceEllipse:
    """Ellipse covering the given probability mass of a Gaussian score cloud.

    Built from the sample mean and covariance of the two columns,
    scaled by the 2-dof chi-square quantile at ``coverage``.
    """
    scores = as_matrix(scores_2d, "scores_2d")
    if scores.shape[1] != 2:
        raise DimensionError(f"scores_2d must have exactly 2 columns, got {scores.shape[1]}")
    if scores.shape[0] < 3:
        raise InvalidInputError(f"need at least 3 score rows, got {scores.shape[0]}")
    center = scores.mean(axis=0)
    cov = np.cov(scores, rowvar=False, ddof=1)
    evals, evecs = np.linalg.eigh(cov)  # ascending
    if evals[1] <= 0 or evals[0] <= 1e-12 * evals[1]:
        raise DegenerateEllipseError("score covariance is numerically singular")
    quantile = chi2_quantile_2dof(coverage)
    semi_axes = np.sqrt(evals[::-1] * quantile)
    major = evecs[:, 1]
    if major[0] < 0 or (major[0] == 0 and major[1] < 0):
        major = -major
    return ConfidenceEllipse(
        center=center,
        semi_axes=semi_axes,
        rotation_angle=float(math.atan2(major[1], major[0])),
    )


@dataclass
class MethodResult:
    """Outcome of one method inside an experiment."""

    predictions: np.ndarray | None = None
    nmse: float | None = None
    scores: np.ndarray | None = None  # training latent scores, when the method has them
    error: str | None = None


@dataclass
class ExperimentReport:
    """Per-method predictions and errors for one train/test split."""

    results: dict = field(default_factory=dict)  # method_tag -> MethodResult
    train_indices: np.ndarray = None
    test_indices: np.ndarray = None
    dataset_tag: str = ""


def _check_split(n, train_indices, test_indices):
    train = np.asarray(train_indices, dtype=np.intp)
    test = np.asarray(test_indices, dtype=np.intp)
    if train.ndim != 1 or test.ndim != 1 or train.size == 0 or test.size == 0:
        raise ConfigError("split indices must be non-empty 1-D sequences")
    merged = np.concatenate([train, test])
    if merged.min() < 0 or merged.max() >= n:
        raise ConfigError(f"split indices out of range for {n} rows")
    if np.intersect1d(train, test).size > 0:
        raise ConfigError("train and test indices overlap")
    if np.unique(train).size != train.size or np.unique(test).size != test.size:
        raise ConfigError("split indices contain duplicates")
    # Sorted order makes the report independent of how the caller shuffled.
    return np.sort(train), np.sort(test)


def _fit_predict(tag, x_train, y_train, x_test, k, rpls_config):
    if tag == "MLR":
        model = baselines.fit_mlr(x_train, y_train)
        return baselines.predict(model, x_test), None
    if tag == "PCR":
        model = baselines.fit_pcr(x_train, y_train, k)
        f = svd(x_train - x_train.mean(axis=0))
        return baselines.predict(model, x_test), f.u[:, :k] * f.s[:k]
    if tag == "PLSR":
        factors, model = baselines.fit_pls_nipals(x_train, y_train, k)
        return baselines.predict(model, x_test), factors.scores
    if tag == "PLS_PROJ":
        factors, model = baselines.fit_pls_nipals(x_train, y_train, k)
        reg = projection.from_pls(factors, model.x_means, model.y_means)
        return projection.predict_projection(reg, x_test), factors.scores
    if tag == "RPLS_PROJ":
        cfg = rpls_config if rpls_config is not None else rpls.RplsConfig(k=k)
        model = rpls.fit(x_train, y_train, cfg)
        reg = projection.from_rpls(model)
        return projection.predict_projection(reg, x_test), model.state.q
    raise ConfigError(f"unknown method tag {tag!r}")


def run_experiment(
    x,
    y,
    split,
    methods,
    k: int = 5,
    rpls_config: rpls.RplsConfig | None = None,
    dataset_tag: str = "",
) -> ExperimentReport:
    """Fit each method on the train rows and score it on the test rows.

    Parameters
    ----------
    x, y : array_like
        Full dataset; rows are selected by the split.
    split : (train_indices, test_indices)
        Disjoint row index sequences. Order does not matter; indices are
        sorted internally so shuffled splits give identical reports.
    methods : sequence of str
        Tags from ``baselines.METHOD_TAGS``.
    k : int
        Latent dimension for the component-based methods.
    rpls_config : RplsConfig, optional
        Overrides the default robust-solver configuration (its ``k``
        wins over the ``k`` argument for RPLS_PROJ).

    A method that raises is recorded with its error message; the other
    methods still run.
    """
    x = as_matrix(x, "x")
    y = as_matrix(y, "y")
    if x.shape[0] != y.shape[0]:
        raise DimensionError(f"x has {x.shape[0]} rows but y has {y.shape[0]}")
    train, test = _check_split(x.shape[0], *split)
    for tag in methods:
        if tag not in baselines.METHOD_TAGS:
            raise ConfigError(f"unknown method tag {tag!r}")

    x_train, y_train = x[train], y[train]
    x_test, y_test = x[test], y[test]
    report = ExperimentReport(train_indices=train, test_indices=test, dataset_tag=dataset_tag)
    for tag in methods:
        try:
            predictions, scores = _fit_predict(tag, x_train, y_train, x_test, k, rpls_config)
            report.results[tag] = MethodResult(
                predictions=predictions,
                nmse=nmse(y_test, predictions),
                scores=scores,
            )
        except Exception as exc:  # noqa: BLE001 - per-method isolation is the contract
            logger.warning("method %s failed: %s", tag, exc)
            report.results[tag] = MethodResult(error=str(exc))
    return report
