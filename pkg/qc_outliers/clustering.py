"""
Outlier detection by quantum clustering.

Every point is descended on the potential surface to the minimum of its basin, points that end up
together form a cluster, and clusters with fewer than `k` members are outliers.
"""
from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Annotated, Iterable, Literal, Optional, Sequence, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from qc_outliers.errors import DataError
from qc_outliers.optimizer import BfgsConfig, MinimizeOutcome, descend_point
from qc_outliers.potential import Dataset, PotentialField, PotentialMode, potentials_at_data

logger = logging.getLogger(__name__)

_CHUNK_PAIRS = 1 << 18

Width = Annotated[float, Field(gt=0, allow_inf_nan=False)]


def default_k(n: int) -> int:
    """Clusters holding less than 5% of the data are small."""
    return max(2, math.ceil(0.05 * n))


class QcParams(BaseModel):
    model_config = ConfigDict(frozen=True, extra='forbid')

    sigma: Union[Literal['auto'], Width] = 'auto'
    # None means `default_k(n)`
    k: Optional[Annotated[int, Field(ge=1)]] = None
    merge_radius: Union[Literal['auto'], Width] = 'auto'
    mode: PotentialMode = PotentialMode.DIRECT
    num_bins: Annotated[int, Field(ge=1)] = 50
    workers: Annotated[int, Field(ge=1)] = 1
    opt: BfgsConfig = BfgsConfig()

    def resolve(self, dataset: Dataset) -> tuple[QcParams, Optional[DistanceHistogram]]:
        """Replace every 'auto' by a concrete value for `dataset`."""
        histogram = None
        sigma = self.sigma
        if sigma == 'auto':
            sigma, histogram = estimate_sigma(dataset, self.num_bins)
            logger.info("estimated sigma=%g from %d-bin distance histogram", sigma, self.num_bins)
        merge_radius = sigma / 4 if self.merge_radius == 'auto' else self.merge_radius
        k = default_k(dataset.n) if self.k is None else self.k
        return self.model_copy(update={'sigma': float(sigma), 'merge_radius': float(merge_radius), 'k': k}), histogram


@dataclass(frozen=True, eq=False)
class DistanceHistogram:
    bin_edges: np.ndarray
    counts: np.ndarray
    mode_bin_center: float


@dataclass(frozen=True, eq=False)
class ClusterResult:
    converged: np.ndarray
    labels: np.ndarray
    cluster_sizes: np.ndarray
    outlier_flags: np.ndarray
    params: QcParams
    potentials: np.ndarray
    iterations: np.ndarray
    descent_converged: np.ndarray
    escaped: np.ndarray
    histogram: Optional[DistanceHistogram] = None

    @property
    def n_clusters(self) -> int:
        return len(self.cluster_sizes)

    @property
    def outlier_indices(self) -> np.ndarray:
        return np.flatnonzero(self.outlier_flags)

    @property
    def n_outliers(self) -> int:
        return int(self.outlier_flags.sum())

    @property
    def non_converged(self) -> int:
        return int((~self.descent_converged & ~self.escaped).sum())

    @property
    def n_escaped(self) -> int:
        return int(self.escaped.sum())


@dataclass(frozen=True)
class SweepPoint:
    sigma: float
    n_clusters: int
    n_outliers: int
    outlier_indices: tuple[int, ...]


@dataclass(frozen=True, eq=False)
class OutlierProfile:
    columns: tuple[str, ...]
    outlier_mean: np.ndarray
    inlier_mean: np.ndarray
    shift: np.ndarray


def _upper_distances(points: np.ndarray) -> Iterable[np.ndarray]:
    n, d = points.shape
    step = max(1, _CHUNK_PAIRS // (n * d))
    for a in range(0, n - 1, step):
        b = min(n - 1, a + step)
        diff = points[a:b, None, :] - points[None, a:, :]
        dist = np.sqrt((diff * diff).sum(axis=-1))
        # row r of the block is point a + r, keep columns j > a + r
        keep = np.arange(n - a)[None, :] > np.arange(b - a)[:, None]
        yield dist[keep]


def estimate_sigma(dataset: Dataset, num_bins: int = 50) -> tuple[float, DistanceHistogram]:
    """
    The center of the most populated bin of the pairwise distance histogram.

    Bins split [0, max distance] uniformly and are closed on the right, a distance equal to a bin
    edge counts in the lower bin. Ties go to the smaller distance.
    """
    if num_bins < 1:
        raise ValueError(f"num_bins must be at least 1, got {num_bins}")
    if dataset.n < 2:
        raise DataError(f"estimating sigma needs at least 2 points, got {dataset.n}")
    d_max = max(float(block.max()) for block in _upper_distances(dataset.points) if block.size)
    if d_max == 0.0:
        raise DataError("all points coincide, the distance histogram is empty")
    width = d_max / num_bins
    counts = np.zeros(num_bins, dtype=np.int64)
    for block in _upper_distances(dataset.points):
        idx = np.clip(np.ceil(block / width).astype(np.int64) - 1, 0, num_bins - 1)
        counts += np.bincount(idx, minlength=num_bins)
    edges = np.linspace(0.0, d_max, num_bins + 1)
    top = int(np.argmax(counts))
    center = float((edges[top] + edges[top + 1]) / 2)
    return center, DistanceHistogram(edges, counts, center)


def assign_clusters(converged: np.ndarray, merge_radius: float) -> tuple[np.ndarray, np.ndarray]:
    """
    Single-linkage grouping of converged positions.

    Two points share a label iff a chain of positions with consecutive distances <= merge_radius
    connects them. Labels are numbered in order of first appearance.
    """
    pts = np.asarray(converged, dtype=float)
    if pts.ndim == 1:
        pts = pts.reshape(-1, 1)
    if pts.ndim != 2 or not np.isfinite(pts).all():
        raise DataError("converged positions must be a finite n x d matrix")
    if not merge_radius > 0:
        raise ValueError(f"merge_radius must be positive, got {merge_radius}")
    n, d = pts.shape
    r2 = merge_radius ** 2
    labels = np.full(n, -1, dtype=np.int64)
    current = 0
    for seed in range(n):
        if labels[seed] >= 0:
            continue
        labels[seed] = current
        frontier = np.array([seed])
        while frontier.size:
            free = np.flatnonzero(labels < 0)
            if not free.size:
                break
            reached = np.zeros(free.size, dtype=bool)
            step = max(1, _CHUNK_PAIRS // (free.size * d))
            for a in range(0, frontier.size, step):
                diff = pts[frontier[a:a + step], None, :] - pts[None, free, :]
                reached |= ((diff * diff).sum(axis=-1) <= r2).any(axis=0)
            frontier = free[reached]
            labels[frontier] = current
        current += 1
    return labels, np.bincount(labels, minlength=current)


def label_outliers(labels: np.ndarray, cluster_sizes: np.ndarray, k: int) -> np.ndarray:
    return np.asarray(cluster_sizes)[np.asarray(labels)] < k


def _descend_all(field: PotentialField, params: QcParams) -> list[MinimizeOutcome]:
    def run(x):
        return descend_point(field, x, params.opt)

    if params.workers == 1:
        return [run(x) for x in field.dataset.points]
    with ThreadPoolExecutor(max_workers=params.workers) as pool:
        return list(pool.map(run, field.dataset.points))


def detect(dataset: Dataset, params: QcParams = QcParams()) -> ClusterResult:
    resolved, histogram = params.resolve(dataset)
    field = PotentialField(dataset, resolved.sigma, resolved.mode)
    outcomes = _descend_all(field, resolved)

    converged = np.vstack([o.x_star for o in outcomes])
    done = np.array([o.converged for o in outcomes], dtype=bool)
    escaped = np.array([o.escaped for o in outcomes], dtype=bool)
    stuck = int((~done & ~escaped).sum())
    if stuck:
        logger.warning("%d of %d descents stopped at max_iters=%d without converging",
                       stuck, dataset.n, resolved.opt.max_iters)
    if escaped.any():
        logger.warning("%d of %d descents left the data region", int(escaped.sum()), dataset.n)

    labels, sizes = assign_clusters(converged, resolved.merge_radius)
    flags = label_outliers(labels, sizes, resolved.k)
    logger.info("sigma=%g: %d clusters, %d outliers among %d points",
                resolved.sigma, len(sizes), int(flags.sum()), dataset.n)
    return ClusterResult(
        converged=converged,
        labels=labels,
        cluster_sizes=sizes,
        outlier_flags=flags,
        params=resolved,
        potentials=potentials_at_data(field),
        iterations=np.array([o.iterations for o in outcomes], dtype=np.int64),
        descent_converged=done,
        escaped=escaped,
        histogram=histogram,
    )


def sweep_sigma(dataset: Dataset, sigmas: Sequence[float], params: QcParams = QcParams()) -> list[SweepPoint]:
    """Detect once per sigma; smaller kernels resolve finer density structure and more outliers."""
    out = []
    for sigma in sigmas:
        result = detect(dataset, params.model_copy(update={'sigma': float(sigma)}))
        out.append(SweepPoint(float(sigma), result.n_clusters, result.n_outliers,
                              tuple(int(i) for i in result.outlier_indices)))
    return out


def outlier_profile(matrix: np.ndarray, flags: np.ndarray, columns: Optional[Sequence[str]] = None) -> OutlierProfile:
    """
    Mean of every column over the outliers and over the rest.

    `shift` is the difference of the two in units of the column's standard deviation.
    """
    m = np.asarray(matrix, dtype=float)
    flags = np.asarray(flags, dtype=bool)
    if m.ndim != 2 or m.shape[0] != flags.shape[0]:
        raise ValueError(f"matrix with shape {m.shape} does not match {flags.shape[0]} flags")
    if flags.all() or not flags.any():
        raise ValueError("an outlier profile needs both outliers and inliers")
    if columns is None:
        columns = [str(i) for i in range(m.shape[1])]
    if len(columns) != m.shape[1]:
        raise ValueError(f"{len(columns)} column names for {m.shape[1]} columns")
    out_mean = m[flags].mean(axis=0)
    in_mean = m[~flags].mean(axis=0)
    std = m.std(axis=0)
    shift = np.divide(out_mean - in_mean, std, out=np.zeros_like(std), where=std > 0)
    return OutlierProfile(tuple(columns), out_mean, in_mean, shift)
