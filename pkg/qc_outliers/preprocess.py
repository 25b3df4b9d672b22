"""
Column standardization, sentinel imputation and PCA.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from qc_outliers.errors import DataError

logger = logging.getLogger(__name__)

# relative eigenvalue floor below which a component is treated as absent
RANK_TOL = 1e-12


class Standardized(NamedTuple):
    matrix: np.ndarray
    mean: np.ndarray
    std: np.ndarray
    kept: tuple[int, ...]


class Imputed(NamedTuple):
    matrix: np.ndarray
    kept: tuple[int, ...]


def _as_matrix(matrix) -> np.ndarray:
    m = np.array(matrix, dtype=float)
    if m.ndim == 1:
        m = m.reshape(-1, 1)
    if m.ndim != 2 or m.size == 0:
        raise DataError(f"expected a non-empty 2-d matrix, got shape {m.shape}")
    return m


def standardize(matrix) -> Standardized:
    """Scale every column to mean 0 and population standard deviation 1; constant columns are dropped."""
    m = _as_matrix(matrix)
    mean = m.mean(axis=0)
    std = m.std(axis=0)
    kept = tuple(int(i) for i in np.flatnonzero(std > 0))
    if len(kept) < m.shape[1]:
        dropped = sorted(set(range(m.shape[1])) - set(kept))
        logger.warning("dropping constant columns %s before standardization", dropped)
    if not kept:
        raise DataError("every column is constant, nothing left to standardize")
    cols = list(kept)
    scaled = (m[:, cols] - mean[cols]) / std[cols]
    return Standardized(scaled, mean[cols], std[cols], kept)


def impute_missing(matrix, sentinel: float) -> Imputed:
    """
    Replace entries exactly equal to `sentinel` by the mean of the other entries of their column.

    Columns made only of sentinels are dropped.
    """
    m = _as_matrix(matrix)
    missing = m == sentinel
    present = ~missing
    kept = tuple(int(i) for i in np.flatnonzero(present.any(axis=0)))
    if len(kept) < m.shape[1]:
        dropped = sorted(set(range(m.shape[1])) - set(kept))
        logger.warning("dropping columns %s, every entry is the missing sentinel %r", dropped, sentinel)
    cols = list(kept)
    m, missing, present = m[:, cols], missing[:, cols], present[:, cols]
    if missing.any():
        means = np.where(present, m, 0.0).sum(axis=0) / present.sum(axis=0)
        m = np.where(missing, means[None, :], m)
        logger.info("imputed %d sentinel entries in %d columns", int(missing.sum()), int(missing.any(axis=0).sum()))
    return Imputed(m, kept)


@dataclass(frozen=True, eq=False)
class PcaModel:
    mean: np.ndarray
    components: np.ndarray
    explained_variance_ratio: np.ndarray

    @property
    def n_components(self) -> int:
        return self.components.shape[0]

    @property
    def cumulative_ratio(self) -> float:
        return float(self.explained_variance_ratio.sum())


def pca_fit(matrix, m: int) -> PcaModel:
    """
    The top `m` eigenvectors of the sample covariance (n - 1 denominator).

    Each component's largest magnitude entry is made positive. When the covariance has rank
    below `m`, only the available components are returned.
    """
    x = _as_matrix(matrix)
    n, d = x.shape
    if not 1 <= m <= min(n - 1, d):
        raise ValueError(f"component count must be in [1, {min(n - 1, d)}], got {m}")
    mean = x.mean(axis=0)
    centered = x - mean
    cov = centered.T @ centered / (n - 1)
    eigvals, eigvecs = np.linalg.eigh(cov)
    order = np.argsort(eigvals, kind='stable')[::-1]
    eigvals = np.clip(eigvals[order], 0.0, None)
    eigvecs = eigvecs[:, order]
    total = eigvals.sum()
    if total <= 0:
        raise DataError("data has zero variance, no principal components")
    rank = int((eigvals > RANK_TOL * eigvals[0]).sum())
    if rank < m:
        logger.warning("covariance has rank %d, returning %d components instead of %d", rank, rank, m)
        m = rank
    components = eigvecs[:, :m].T.copy()
    for row in components:
        if row[np.argmax(np.abs(row))] < 0:
            row *= -1
    ratio = eigvals[:m] / total
    for a in (mean, components, ratio):
        a.setflags(write=False)
    return PcaModel(mean, components, ratio)


def pca_project(model: PcaModel, matrix) -> np.ndarray:
    x = _as_matrix(matrix)
    if x.shape[1] != model.mean.shape[0]:
        raise DataError(f"matrix has {x.shape[1]} columns, the model was fit on {model.mean.shape[0]}")
    return (x - model.mean) @ model.components.T


def pca_inverse(model: PcaModel, projected) -> np.ndarray:
    y = _as_matrix(projected)
    if y.shape[1] != model.n_components:
        raise DataError(f"projection has {y.shape[1]} columns, the model has {model.n_components} components")
    return y @ model.components + model.mean
