"""
The wave function and the quantum potential derived from it.

Given data points x_i and a kernel width sigma, the wave function is the Parzen sum

    psi(x) = sum_i exp(-|x - x_i|^2 / 2 sigma^2)

and the potential (with the constant energy term dropped, it does not move minima) is

    v(x) = 1 / (2 sigma^2 psi(x)) * sum_i |x - x_i|^2 exp(-|x - x_i|^2 / 2 sigma^2)

`v` is a weighted mean of the scaled squared distances, so it is invariant under shifting every
exponent by the same amount. That is what keeps queries far away from the data answerable.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from enum import Enum
from typing import Iterator, Sequence, Union

import numpy as np

from qc_outliers.errors import DataError, OutOfSupportError

logger = logging.getLogger(__name__)

PSI_FLOOR = 1e-300
# upper bound on the number of (query, data point) pairs materialized at once
_CHUNK_PAIRS = 1 << 18

ArrayLike = Union[np.ndarray, Sequence[float], Sequence[Sequence[float]]]


class PotentialMode(str, Enum):
    DIRECT = "direct"
    INVERSE = "inverse"


def _read_only(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


def check_sigma(sigma: float) -> float:
    s = float(sigma)
    if not np.isfinite(s) or s <= 0:
        raise ValueError(f"kernel width must satisfy sigma > 0 and be finite, got {sigma!r}")
    return s


@dataclass(frozen=True, eq=False)
class Dataset:
    """
    An immutable n x d matrix of finite coordinates.

    A one dimensional input is read as n points on a line.
    """
    points: np.ndarray

    def __post_init__(self):
        pts = np.array(self.points, dtype=float)
        if pts.ndim == 1:
            pts = pts.reshape(-1, 1)
        if pts.ndim != 2:
            raise DataError(f"expected a 2-d matrix of points, got an array with shape {pts.shape}")
        if pts.shape[0] < 1 or pts.shape[1] < 1:
            raise DataError(f"a dataset needs at least one point and one dimension, got shape {pts.shape}")
        bad = np.argwhere(~np.isfinite(pts))
        if len(bad):
            r, c = bad[0]
            raise DataError(f"non-finite coordinate {pts[r, c]!r} at row {r}, column {c}")
        object.__setattr__(self, 'points', _read_only(pts))

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def d(self) -> int:
        return self.points.shape[1]

    def __len__(self):
        return self.n

    def query(self, x: ArrayLike) -> np.ndarray:
        q = np.asarray(x, dtype=float)
        if q.ndim == 0:
            q = q.reshape(1)
        if q.shape != (self.d,):
            raise DataError(f"query has shape {q.shape}, the dataset is {self.d}-dimensional")
        if not np.isfinite(q).all():
            raise DataError(f"query point {q} has non-finite coordinates")
        return q

    def queries(self, xs: ArrayLike) -> np.ndarray:
        q = np.asarray(xs, dtype=float)
        if q.ndim == 1 and self.d == 1:
            q = q.reshape(-1, 1)
        if q.ndim != 2 or q.shape[1] != self.d:
            raise DataError(f"queries have shape {q.shape}, expected (m, {self.d})")
        if not np.isfinite(q).all():
            raise DataError("query points have non-finite coordinates")
        return q


@dataclass(frozen=True, eq=False)
class PotentialGrid:
    """`values[i, j]` is the potential at `(xs[i], ys[j])`."""
    xs: np.ndarray
    ys: np.ndarray
    values: np.ndarray

    def rows(self) -> Iterator[tuple[float, float, float]]:
        for i, x in enumerate(self.xs):
            for j, y in enumerate(self.ys):
                yield float(x), float(y), float(self.values[i, j])

    def __len__(self):
        return self.values.size


@dataclass(frozen=True, eq=False)
class PotentialField:
    dataset: Dataset
    sigma: float
    mode: PotentialMode = PotentialMode.DIRECT

    def __post_init__(self):
        object.__setattr__(self, 'sigma', check_sigma(self.sigma))
        object.__setattr__(self, 'mode', PotentialMode(self.mode))

    @property
    def sign(self) -> float:
        return -1.0 if self.mode is PotentialMode.INVERSE else 1.0

    def _exponents(self, queries: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        diff = queries[:, None, :] - self.dataset.points[None, :, :]
        r2 = (diff * diff).sum(axis=-1)
        return diff, r2, -r2 / (2 * self.sigma ** 2)

    def _weights(self, expo: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        w = np.exp(expo)
        s0 = w.sum(axis=1)
        low = s0 < PSI_FLOOR
        if low.any():
            shifted = expo[low]
            shifted = shifted - shifted.max(axis=1, keepdims=True)
            w[low] = np.exp(shifted)
            s0[low] = w[low].sum(axis=1)
            if not np.isfinite(s0[low]).all():
                raise OutOfSupportError("query is too far from the data to evaluate the wave function")
        return w, s0

    def _chunks(self, m: int) -> Iterator[slice]:
        step = max(1, _CHUNK_PAIRS // (self.dataset.n * self.dataset.d))
        for start in range(0, m, step):
            yield slice(start, min(m, start + step))

    def _evaluate(self, queries: np.ndarray, with_gradient: bool) -> tuple[np.ndarray, np.ndarray | None]:
        m = queries.shape[0]
        values = np.empty(m)
        grads = np.empty((m, self.dataset.d)) if with_gradient else None
        s2 = self.sigma ** 2
        for sl in self._chunks(m):
            diff, r2, expo = self._exponents(queries[sl])
            w, s0 = self._weights(expo)
            v = (r2 * w).sum(axis=1) / (2 * s2 * s0)
            values[sl] = v
            if with_gradient:
                coeff = w * (1 + v[:, None] - r2 / (2 * s2))
                grads[sl] = (coeff[:, :, None] * diff).sum(axis=1) / (s2 * s0[:, None])
        if not np.isfinite(values).all() or (with_gradient and not np.isfinite(grads).all()):
            raise OutOfSupportError("potential is not finite at the query; it is too far from the data")
        if self.mode is PotentialMode.INVERSE:
            values = -values
            if with_gradient:
                grads = -grads
        return values, grads

    def wave_function(self, x: ArrayLike) -> float:
        q = self.dataset.query(x)
        _, _, expo = self._exponents(q[None, :])
        psi = float(np.exp(expo).sum())
        if psi == 0.0:
            raise OutOfSupportError(f"wave function underflows to zero at {q}, use log_wave_function")
        return psi

    def log_wave_function(self, x: ArrayLike) -> float:
        q = self.dataset.query(x)
        _, _, expo = self._exponents(q[None, :])
        top = expo.max()
        return float(top + np.log(np.exp(expo - top).sum()))

    def potential(self, x: ArrayLike) -> float:
        values, _ = self._evaluate(self.dataset.query(x)[None, :], with_gradient=False)
        return float(values[0])

    def potential_gradient(self, x: ArrayLike) -> np.ndarray:
        _, grads = self._evaluate(self.dataset.query(x)[None, :], with_gradient=True)
        return grads[0]

    def value_and_gradient(self, x: ArrayLike) -> tuple[float, np.ndarray]:
        values, grads = self._evaluate(self.dataset.query(x)[None, :], with_gradient=True)
        return float(values[0]), grads[0]

    def potential_many(self, xs: ArrayLike) -> np.ndarray:
        values, _ = self._evaluate(self.dataset.queries(xs), with_gradient=False)
        return values

    def support_box(self, margin: float) -> tuple[np.ndarray, np.ndarray]:
        pad = margin * self.sigma
        pts = self.dataset.points
        return pts.min(axis=0) - pad, pts.max(axis=0) + pad

    def grid(self, bounds: Sequence[Sequence[float]], resolution: Sequence[int]) -> PotentialGrid:
        if self.dataset.d != 2:
            raise DataError(f"potential grids need 2-dimensional data, got d={self.dataset.d}")
        bounds = np.asarray(bounds, dtype=float)
        if bounds.shape != (2, 2):
            raise ValueError(f"expected bounds as two (lo, hi) pairs, got {bounds.tolist()}")
        if not np.isfinite(bounds).all() or not (bounds[:, 0] < bounds[:, 1]).all():
            raise ValueError(f"degenerate grid bounds {bounds.tolist()}, need lo < hi on every axis")
        resolution = tuple(int(r) for r in resolution)
        if len(resolution) != 2 or min(resolution) < 2:
            raise ValueError(f"grid resolution must be at least 2 per axis, got {resolution}")
        xs = np.linspace(bounds[0, 0], bounds[0, 1], resolution[0])
        ys = np.linspace(bounds[1, 0], bounds[1, 1], resolution[1])
        lattice = np.stack(np.meshgrid(xs, ys, indexing='ij'), axis=-1).reshape(-1, 2)
        values = self.potential_many(lattice).reshape(resolution)
        logger.debug("evaluated %dx%d potential grid over %s", resolution[0], resolution[1], bounds.tolist())
        return PotentialGrid(_read_only(xs), _read_only(ys), _read_only(values))


def wave_function(x: ArrayLike, field: PotentialField) -> float:
    return field.wave_function(x)


def potential(x: ArrayLike, field: PotentialField) -> float:
    return field.potential(x)


def potential_gradient(x: ArrayLike, field: PotentialField) -> np.ndarray:
    return field.potential_gradient(x)


def potential_grid(field: PotentialField, bounds: Sequence[Sequence[float]],
                   resolution: Sequence[int]) -> PotentialGrid:
    return field.grid(bounds, resolution)


def potentials_at_data(field: PotentialField) -> np.ndarray:
    """The potential at every data point, the O(n^2) part of the algorithm."""
    return field.potential_many(field.dataset.points)
