"""
Reading numeric tables, writing reports, grids and generated scenarios.

The report is JSON whose keys follow the field order of `RunReport` and its nested models:

    version, command, input,
    params {sigma, k, merge_radius, mode, seed, num_bins, standardized, pca_components},
    n, d, n_clusters, cluster_sizes, n_outliers,
    points [{index, label, outlier, potential, converged}],
    diagnostics {non_converged, escaped, dropped_columns, explained_variance_ratio},
    profile [{column, outlier_mean, inlier_mean, shift}] or null
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence, Union

import numpy as np
import pandas as pd
from pydantic import BaseModel, ConfigDict, Field, model_validator

from qc_outliers import __version__
from qc_outliers.clustering import ClusterResult, OutlierProfile
from qc_outliers.datagen import Scenario
from qc_outliers.errors import DataError
from qc_outliers.potential import Dataset, PotentialGrid, PotentialMode
from qc_outliers.preprocess import impute_missing, standardize

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]
ColumnRef = Union[int, str]

AIR_QUALITY_FILENAME = "AirQualityUCI.csv"
AIR_QUALITY_SENTINEL = -200.0


class CsvOptions(BaseModel):
    model_config = ConfigDict(frozen=True, extra='forbid')

    delimiter: str = Field(',', min_length=1, max_length=1)
    decimal: str = Field('.', min_length=1, max_length=1)
    # None: the first row is a header iff one of its cells is not a number
    header: Optional[bool] = None
    columns: Optional[tuple[ColumnRef, ...]] = None
    exclude: tuple[ColumnRef, ...] = ()
    sentinel: Optional[float] = None
    drop_empty_columns: bool = False

    @model_validator(mode='after')
    def _distinct_marks(self):
        if self.delimiter == self.decimal:
            raise ValueError(f"delimiter and decimal mark are both {self.delimiter!r}")
        return self


AIR_QUALITY_OPTIONS = CsvOptions(delimiter=';', decimal=',', header=True, exclude=(0, 1),
                                 sentinel=AIR_QUALITY_SENTINEL, drop_empty_columns=True)


@dataclass(frozen=True, eq=False)
class LoadedTable:
    matrix: np.ndarray
    columns: tuple[str, ...]
    dropped: tuple[str, ...] = ()

    def dataset(self) -> Dataset:
        return Dataset(self.matrix)


def _cell_number(text: str) -> float:
    # must round correctly, pd.to_numeric can land one ulp off
    if '_' in text:
        return math.nan
    try:
        return float(text)
    except ValueError:
        return math.nan


def _to_numbers(cells: pd.Series, decimal: str) -> pd.Series:
    text = cells.str.strip()
    if decimal != '.':
        text = text.str.replace(decimal, '.', regex=False)
    return text.map(_cell_number).astype(float)


def _is_numeric_row(cells: Sequence[str], decimal: str) -> bool:
    values = _to_numbers(pd.Series(list(cells), dtype=object).astype(str), decimal)
    return bool(np.isfinite(values.to_numpy(dtype=float)).all())


def _select(names: list[str], options: CsvOptions) -> list[int]:
    def position(ref: ColumnRef, strict: bool) -> Optional[int]:
        if isinstance(ref, int):
            if 0 <= ref < len(names):
                return ref
        elif ref in names:
            return names.index(ref)
        if strict:
            raise DataError(f"column {ref!r} not found, the table has columns {names}")
        return None

    chosen = list(range(len(names))) if options.columns is None else [position(c, True) for c in options.columns]
    excluded = {position(c, False) for c in options.exclude}
    return [i for i in chosen if i not in excluded]


def read_table(path: PathLike, options: CsvOptions = CsvOptions()) -> LoadedTable:
    """
    Read a delimited numeric table.

    Cells that are not numbers are reported with their 1-based line number and column name.
    Lines whose cells are all empty are skipped.
    """
    try:
        frame = pd.read_csv(path, sep=options.delimiter, header=None, dtype=str, na_filter=False,
                            skip_blank_lines=False, engine='c')
    except pd.errors.EmptyDataError:
        raise DataError(f"{path}: file is empty") from None
    except pd.errors.ParserError as e:
        raise DataError(f"{path}: inconsistent number of fields: {e}") from None

    lines = np.arange(1, len(frame) + 1)
    short = frame.isna().any(axis=1) & ~frame.isna().all(axis=1)
    if short.any():
        row = int(np.flatnonzero(short.to_numpy())[0])
        raise DataError(f"{path}: line {lines[row]} has fewer than {frame.shape[1]} fields")
    frame = frame.fillna('')
    blank = (frame.apply(lambda col: col.str.strip()) == '').all(axis=1).to_numpy()
    frame, lines = frame[~blank], lines[~blank]
    if frame.empty:
        raise DataError(f"{path}: file holds no data")

    header = options.header
    if header is None:
        header = not _is_numeric_row(frame.iloc[0].tolist(), options.decimal)
    if header:
        names = [str(c).strip() or str(i) for i, c in enumerate(frame.iloc[0])]
        frame, lines = frame.iloc[1:], lines[1:]
    else:
        names = [str(i) for i in range(frame.shape[1])]
    if frame.empty:
        raise DataError(f"{path}: file has a header but no data rows")

    chosen = _select(names, options)
    dropped = [names[i] for i in range(len(names)) if i not in chosen]
    if options.drop_empty_columns:
        empty = [i for i in chosen if (frame.iloc[:, i].str.strip() == '').all()]
        chosen = [i for i in chosen if i not in empty]
        dropped += [names[i] for i in empty]
    if not chosen:
        raise DataError(f"{path}: no columns left after selection")

    columns = []
    for i in chosen:
        values = _to_numbers(frame.iloc[:, i], options.decimal)
        bad = ~np.isfinite(values.to_numpy(dtype=float))
        if bad.any():
            row = int(np.flatnonzero(bad)[0])
            raise DataError(f"{path}: line {lines[row]}, column {names[i]!r}: "
                            f"can not parse {frame.iloc[row, i]!r} as a number")
        columns.append(values.to_numpy(dtype=float))
    matrix = np.column_stack(columns)
    kept = [names[i] for i in chosen]

    if options.sentinel is not None:
        imputed = impute_missing(matrix, options.sentinel)
        dropped += [kept[i] for i in range(len(kept)) if i not in imputed.kept]
        matrix, kept = imputed.matrix, [kept[i] for i in imputed.kept]
    logger.info("read %d rows x %d columns from %s", matrix.shape[0], matrix.shape[1], path)
    return LoadedTable(matrix, tuple(kept), tuple(dropped))


def load_csv(path: PathLike, options: CsvOptions = CsvOptions()) -> Dataset:
    return read_table(path, options).dataset()


def read_air_quality(path: PathLike) -> LoadedTable:
    """
    The UCI air quality file (`AirQualityUCI.csv`) with Date and Time removed and -200 imputed.

    The file is semicolon delimited with comma decimals, two empty trailing columns and blank
    trailing lines.
    """
    return read_table(path, AIR_QUALITY_OPTIONS)


def load_air_quality(path: PathLike, standardized: bool = True) -> Dataset:
    table = read_air_quality(path)
    if standardized:
        return Dataset(standardize(table.matrix).matrix)
    return table.dataset()


class ReportParams(BaseModel):
    sigma: float
    k: int
    merge_radius: float
    mode: PotentialMode
    seed: Optional[int] = None
    num_bins: int
    standardized: bool = False
    pca_components: Optional[int] = None


class PointRecord(BaseModel):
    index: int
    label: int
    outlier: bool
    potential: float
    converged: list[float]


class Diagnostics(BaseModel):
    non_converged: int
    escaped: int
    dropped_columns: list[str] = []
    explained_variance_ratio: Optional[list[float]] = None


class ProfileRecord(BaseModel):
    column: str
    outlier_mean: float
    inlier_mean: float
    shift: float


class RunReport(BaseModel):
    model_config = ConfigDict(frozen=True)

    version: str
    command: str
    input: Optional[str] = None
    params: ReportParams
    n: int
    d: int
    n_clusters: int
    cluster_sizes: list[int]
    n_outliers: int
    points: list[PointRecord]
    diagnostics: Diagnostics
    profile: Optional[list[ProfileRecord]] = None


def build_report(result: ClusterResult, command: str, input: Optional[str] = None, seed: Optional[int] = None,
                 standardized: bool = False, pca_ratio: Optional[Sequence[float]] = None,
                 dropped_columns: Sequence[str] = (), profile: Optional[OutlierProfile] = None) -> RunReport:
    p = result.params
    n, d = result.converged.shape
    points = [
        PointRecord(index=i, label=int(result.labels[i]), outlier=bool(result.outlier_flags[i]),
                    potential=float(result.potentials[i]), converged=[float(v) for v in result.converged[i]])
        for i in range(n)
    ]
    profile_records = None
    if profile is not None:
        profile_records = [
            ProfileRecord(column=c, outlier_mean=float(o), inlier_mean=float(m), shift=float(s))
            for c, o, m, s in zip(profile.columns, profile.outlier_mean, profile.inlier_mean, profile.shift)
        ]
    return RunReport(
        version=__version__,
        command=command,
        input=input,
        params=ReportParams(sigma=p.sigma, k=p.k, merge_radius=p.merge_radius, mode=p.mode, seed=seed,
                            num_bins=p.num_bins, standardized=standardized,
                            pca_components=None if pca_ratio is None else len(pca_ratio)),
        n=n,
        d=d,
        n_clusters=result.n_clusters,
        cluster_sizes=[int(s) for s in result.cluster_sizes],
        n_outliers=result.n_outliers,
        points=points,
        diagnostics=Diagnostics(non_converged=result.non_converged, escaped=result.n_escaped,
                                dropped_columns=list(dropped_columns),
                                explained_variance_ratio=None if pca_ratio is None else [float(r) for r in pca_ratio]),
        profile=profile_records,
    )


def write_report(report: RunReport, path: PathLike) -> None:
    Path(path).write_text(report.model_dump_json(indent=2) + "\n", encoding='utf-8')


def read_report(path: PathLike) -> RunReport:
    return RunReport.model_validate_json(Path(path).read_text(encoding='utf-8'))


def grid_frame(grid: PotentialGrid) -> pd.DataFrame:
    return pd.DataFrame(list(grid.rows()), columns=['x', 'y', 'v'])


def write_grid(grid: PotentialGrid, path: PathLike) -> None:
    grid_frame(grid).to_csv(path, index=False)


def write_scenario(scenario: Scenario, path: PathLike) -> None:
    scenario.to_frame().to_csv(path, index=False)
