"""
Seeded synthetic scenarios with planted outliers.

Every scenario is two dimensional. Randomness comes from numpy's Philox counter-based generator
keyed directly by the seed, so a given (scenario, seed, params) triple yields the same bytes on
every platform.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import Any, Callable, Mapping, Optional, Union

import numpy as np
import pandas as pd
from pydantic import BaseModel, ConfigDict, Field

from qc_outliers.potential import Dataset

logger = logging.getLogger(__name__)

SEED_LIMIT = 1 << 64


class ScenarioId(str, Enum):
    A = "A"  # normal data surrounded by separated outliers
    B = "B"  # separated outliers surrounded by normal data
    C = "C"  # clustered outliers far from normal data
    D = "D"  # point next to a dense blob, a sparse blob elsewhere
    E = "E"  # two dense micro-clusters on the edge of a blob
    F = "F"  # sparse points inside a hole of dense data


class _Params(BaseModel):
    model_config = ConfigDict(frozen=True, extra='forbid')


class ParamsA(_Params):
    n_blob: int = Field(200, ge=2)
    spread: float = Field(1.0, gt=0)
    n_outliers: int = Field(5, ge=1)
    # radii of the planted points, in spreads
    min_radius: float = Field(8.0, ge=6.0)
    max_radius: float = Field(12.0, ge=6.0)


class ParamsB(_Params):
    n_ring: int = Field(200, ge=10)
    ring_radius: float = Field(5.0, gt=0)
    ring_width: float = Field(0.4, gt=0)
    n_outliers: int = Field(4, ge=1)
    # interior points lie within this fraction of the ring radius
    inner_fraction: float = Field(0.4, gt=0, lt=1)


class ParamsC(_Params):
    n_blob: int = Field(200, ge=2)
    spread: float = Field(1.0, gt=0)
    micro_size: int = Field(8, ge=1)
    micro_spread: float = Field(0.1, gt=0)
    # distance of the micro-cluster center from the blob center, in spreads
    micro_distance: float = Field(10.0, ge=4.0)


class ParamsD(_Params):
    n_dense: int = Field(150, ge=2)
    dense_spread: float = Field(1.0, gt=0)
    n_sparse: int = Field(100, ge=2)
    sparse_factor: float = Field(8.0, gt=1)
    # center distance between the two blobs, in dense spreads
    separation: float = Field(40.0, gt=0)
    # distance of the planted point from the dense center, in dense spreads
    offset: float = Field(3.0, gt=0)


class ParamsE(_Params):
    n_blob: int = Field(200, ge=2)
    spread: float = Field(1.0, gt=0)
    n_micro: int = Field(2, ge=1)
    micro_size: int = Field(10, ge=1)
    micro_spread: float = Field(0.05, gt=0)
    # radius of the micro-cluster centers, in spreads, just past the outer edge of the blob
    micro_radius: float = Field(5.5, gt=0)


class ParamsF(_Params):
    n_dense: int = Field(400, ge=10)
    side: float = Field(8.0, gt=0)
    hole_radius: float = Field(2.0, gt=0)
    n_sparse: int = Field(6, ge=1)
    # sparse points lie within this fraction of the hole radius
    sparse_fraction: float = Field(0.6, gt=0, lt=1)


SCENARIO_PARAMS: dict[ScenarioId, type[_Params]] = {
    ScenarioId.A: ParamsA, ScenarioId.B: ParamsB, ScenarioId.C: ParamsC,
    ScenarioId.D: ParamsD, ScenarioId.E: ParamsE, ScenarioId.F: ParamsF,
}


@dataclass(frozen=True, eq=False)
class Scenario:
    id: ScenarioId
    dataset: Dataset
    truth: np.ndarray
    seed: int
    params: _Params

    @property
    def n_planted(self) -> int:
        return int(self.truth.sum())

    def to_frame(self) -> pd.DataFrame:
        frame = pd.DataFrame(self.dataset.points, columns=[f"x{i}" for i in range(self.dataset.d)])
        frame["truth"] = self.truth.astype(int)
        return frame


def rng_for(seed: int) -> np.random.Generator:
    if not 0 <= seed < SEED_LIMIT:
        raise ValueError(f"seed must be a 64-bit unsigned integer, got {seed}")
    return np.random.Generator(np.random.Philox(key=seed))


def _ring_points(rng: np.random.Generator, count: int, r_lo: float, r_hi: float) -> np.ndarray:
    """Uniform in the annulus r_lo <= r <= r_hi."""
    theta = rng.uniform(0.0, 2 * math.pi, count)
    r = np.sqrt(rng.uniform(r_lo ** 2, r_hi ** 2, count))
    return np.column_stack([r * np.cos(theta), r * np.sin(theta)])


def _gen_a(rng: np.random.Generator, p: ParamsA) -> tuple[np.ndarray, np.ndarray]:
    if p.max_radius < p.min_radius:
        raise ValueError("max_radius must not be below min_radius")
    blob = rng.normal(0.0, p.spread, (p.n_blob, 2))
    planted = _ring_points(rng, p.n_outliers, p.min_radius * p.spread, p.max_radius * p.spread)
    return blob, planted


def _gen_b(rng: np.random.Generator, p: ParamsB) -> tuple[np.ndarray, np.ndarray]:
    theta = rng.uniform(0.0, 2 * math.pi, p.n_ring)
    r = p.ring_radius + rng.normal(0.0, p.ring_width, p.n_ring)
    ring = np.column_stack([r * np.cos(theta), r * np.sin(theta)])
    # evenly spread angles keep the interior points apart from each other
    angles = 2 * math.pi * (np.arange(p.n_outliers) + rng.uniform(0.0, 0.5, p.n_outliers)) / p.n_outliers
    radii = p.inner_fraction * p.ring_radius * rng.uniform(0.5, 1.0, p.n_outliers)
    if p.n_outliers == 1:
        radii = np.zeros(1)
    planted = np.column_stack([radii * np.cos(angles), radii * np.sin(angles)])
    return ring, planted


def _gen_c(rng: np.random.Generator, p: ParamsC) -> tuple[np.ndarray, np.ndarray]:
    blob = rng.normal(0.0, p.spread, (p.n_blob, 2))
    theta = rng.uniform(0.0, 2 * math.pi)
    center = p.micro_distance * p.spread * np.array([math.cos(theta), math.sin(theta)])
    planted = center + rng.normal(0.0, p.micro_spread, (p.micro_size, 2))
    return blob, planted


def _gen_d(rng: np.random.Generator, p: ParamsD) -> tuple[np.ndarray, np.ndarray]:
    s = p.dense_spread
    dense = rng.normal(0.0, s, (p.n_dense, 2))
    sparse = np.array([p.separation * s, 0.0]) + rng.normal(0.0, p.sparse_factor * s, (p.n_sparse, 2))
    # on the side facing away from the sparse blob
    planted = np.array([[-p.offset * s, 0.0]])
    return np.vstack([dense, sparse]), planted


def _gen_e(rng: np.random.Generator, p: ParamsE) -> tuple[np.ndarray, np.ndarray]:
    blob = rng.normal(0.0, p.spread, (p.n_blob, 2))
    theta0 = rng.uniform(0.0, 2 * math.pi)
    micros = []
    for j in range(p.n_micro):
        theta = theta0 + 2 * math.pi * j / p.n_micro
        center = p.micro_radius * p.spread * np.array([math.cos(theta), math.sin(theta)])
        micros.append(center + rng.normal(0.0, p.micro_spread, (p.micro_size, 2)))
    return blob, np.vstack(micros)


def _gen_f(rng: np.random.Generator, p: ParamsF) -> tuple[np.ndarray, np.ndarray]:
    if 2 * p.hole_radius >= p.side:
        raise ValueError("the hole must fit inside the square")
    half = p.side / 2
    dense = np.empty((0, 2))
    while len(dense) < p.n_dense:
        batch = rng.uniform(-half, half, (2 * p.n_dense, 2))
        batch = batch[np.hypot(batch[:, 0], batch[:, 1]) > p.hole_radius]
        dense = np.vstack([dense, batch])
    dense = dense[:p.n_dense]
    planted = _ring_points(rng, p.n_sparse, 0.0, p.sparse_fraction * p.hole_radius)
    return dense, planted


_GENERATORS: dict[ScenarioId, Callable[[np.random.Generator, Any], tuple[np.ndarray, np.ndarray]]] = {
    ScenarioId.A: _gen_a, ScenarioId.B: _gen_b, ScenarioId.C: _gen_c,
    ScenarioId.D: _gen_d, ScenarioId.E: _gen_e, ScenarioId.F: _gen_f,
}


def scenario_params(id: Union[ScenarioId, str], params: Optional[Union[Mapping[str, Any], _Params]] = None) -> _Params:
    sid = ScenarioId(id)
    model = SCENARIO_PARAMS[sid]
    if isinstance(params, model):
        return params
    if isinstance(params, _Params):
        raise TypeError(f"scenario {sid.value} takes {model.__name__}, got {type(params).__name__}")
    return model.model_validate(dict(params or {}))


def generate(id: Union[ScenarioId, str], seed: int,
             params: Optional[Union[Mapping[str, Any], _Params]] = None) -> Scenario:
    """
    Build scenario `id`. Normal points come first, planted outliers last.

    Raises `pydantic.ValidationError` for unknown or out of range params.
    """
    sid = ScenarioId(id)
    p = scenario_params(sid, params)
    normal, planted = _GENERATORS[sid](rng_for(seed), p)
    points = np.vstack([normal, planted])
    truth = np.concatenate([np.zeros(len(normal), dtype=bool), np.ones(len(planted), dtype=bool)])
    truth.setflags(write=False)
    logger.debug("scenario %s seed %d: %d points, %d planted", sid.value, seed, len(points), len(planted))
    return Scenario(sid, Dataset(points), truth, seed, p)

