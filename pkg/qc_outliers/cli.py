"""
Command line interface.

    qc-outliers detect data.csv --sigma auto --k 5 --out report.json
    qc-outliers grid data.csv --sigma 0.8 --bounds "-5:5, -5:5" --resolution "80, 80" --out grid.csv
    qc-outliers gen --scenario A --seed 1 --params "n_blob=300" --out a.csv
    qc-outliers sigma data.csv --bins 50
    qc-outliers sweep data.csv --sigmas "1, 0.5, 0.3"
    qc-outliers airquality AirQualityUCI.csv --sigma 6

Exit codes: 0 on success, 1 on usage errors, 2 on data errors.
"""
from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path
from typing import Optional, Sequence, Union

from pydantic import TypeAdapter, ValidationError

from qc_outliers import __version__
from qc_outliers.arguments import parse_assignments, parse_bounds, parse_numbers, parse_resolution
from qc_outliers.clustering import QcParams, SweepPoint, detect, estimate_sigma, outlier_profile, sweep_sigma
from qc_outliers.data_io import (AIR_QUALITY_FILENAME, CsvOptions, build_report, read_air_quality, read_table,
                                 write_grid, write_report, write_scenario)
from qc_outliers.datagen import ScenarioId, generate
from qc_outliers.errors import DataError, NonFiniteError
from qc_outliers.potential import Dataset, PotentialField, PotentialMode
from qc_outliers.preprocess import pca_fit, pca_project, standardize

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2

_sweep_adapter = TypeAdapter(list[SweepPoint])


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def _width(name: str, allow_auto: bool):
    def convert(text: str) -> Union[str, float]:
        if allow_auto and text == 'auto':
            return text
        try:
            value = float(text)
        except ValueError:
            raise argparse.ArgumentTypeError(f"{name} must be a number{' or auto' if allow_auto else ''}, "
                                             f"got {text!r}") from None
        if not value > 0 or value == float('inf'):
            raise argparse.ArgumentTypeError(f"{name} must satisfy {name} > 0, got {text}")
        return value

    return convert


def _positive_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected an integer >= 1, got {value}")
    return value


def _column_refs(text: str) -> tuple[Union[int, str], ...]:
    refs = [c.strip() for c in text.split(',') if c.strip()]
    return tuple(int(c) if c.isdigit() else c for c in refs)


def _add_csv_options(p: argparse.ArgumentParser):
    p.add_argument('input', type=Path, help="delimited numeric table")
    p.add_argument('--delimiter', default=',')
    p.add_argument('--decimal', default='.')
    header = p.add_mutually_exclusive_group()
    header.add_argument('--header', dest='header', action='store_true', default=None,
                        help="the first row holds column names (default: detected)")
    header.add_argument('--no-header', dest='header', action='store_false')
    p.add_argument('--columns', type=_column_refs, default=None, help="comma separated names or 0-based indices")
    p.add_argument('--exclude', type=_column_refs, default=('truth',),
                   help="columns to leave out (default: truth)")
    p.add_argument('--sentinel', type=float, default=None, help="value marking a missing entry")


def _csv_options(args) -> CsvOptions:
    return CsvOptions(delimiter=args.delimiter, decimal=args.decimal, header=args.header, columns=args.columns,
                      exclude=args.exclude, sentinel=args.sentinel)


def _add_qc_options(p: argparse.ArgumentParser, sigma_default: Union[str, float] = 'auto'):
    p.add_argument('--sigma', type=_width('sigma', True), default=sigma_default)
    p.add_argument('--k', type=_positive_int, default=None, help="outlier cluster size threshold (default 5%% of n)")
    p.add_argument('--merge-radius', type=_width('merge_radius', True), default='auto')
    p.add_argument('--mode', type=PotentialMode, choices=list(PotentialMode), default=PotentialMode.DIRECT)
    p.add_argument('--bins', type=_positive_int, default=50, help="histogram bins of the sigma estimate")
    p.add_argument('--workers', type=_positive_int, default=1)


def _qc_params(args) -> QcParams:
    return QcParams(sigma=args.sigma, k=args.k, merge_radius=args.merge_radius, mode=args.mode,
                    num_bins=args.bins, workers=args.workers)


def _emit_report(report, out: Optional[Path]):
    if out is None:
        sys.stdout.write(report.model_dump_json(indent=2) + "\n")
    else:
        write_report(report, out)
        print(f"{report.n_outliers} outliers in {report.n_clusters} clusters, report written to {out}")


def run_detect(args) -> int:
    table = read_table(args.input, _csv_options(args))
    matrix, dropped = table.matrix, list(table.dropped)
    if args.standardize:
        scaled = standardize(matrix)
        dropped += [table.columns[i] for i in range(len(table.columns)) if i not in scaled.kept]
        matrix = scaled.matrix
    ratio = None
    if args.pca is not None:
        model = pca_fit(matrix, args.pca)
        matrix, ratio = pca_project(model, matrix), model.explained_variance_ratio
        logger.info("%d principal components keep %.1f%% of the variance", model.n_components,
                    100 * model.cumulative_ratio)
    result = detect(Dataset(matrix), _qc_params(args))
    report = build_report(result, 'detect', input=str(args.input), seed=args.seed, standardized=args.standardize,
                          pca_ratio=ratio, dropped_columns=dropped)
    _emit_report(report, args.out)
    return EXIT_OK


def run_grid(args) -> int:
    dataset = read_table(args.input, _csv_options(args)).dataset()
    sigma = args.sigma
    if sigma == 'auto':
        sigma, _ = estimate_sigma(dataset, args.bins)
    field = PotentialField(dataset, sigma, args.mode)
    if args.bounds is None:
        lo, hi = field.support_box(3.0)
        bounds = list(zip(lo.tolist(), hi.tolist()))
    else:
        bounds = parse_bounds(args.bounds)
    grid = field.grid(bounds, parse_resolution(args.resolution))
    write_grid(grid, sys.stdout if args.out is None else args.out)
    return EXIT_OK


def run_gen(args) -> int:
    params = parse_assignments(args.params) if args.params else None
    scenario = generate(args.scenario, args.seed, params)
    write_scenario(scenario, sys.stdout if args.out is None else args.out)
    return EXIT_OK


def run_sigma(args) -> int:
    dataset = read_table(args.input, _csv_options(args)).dataset()
    sigma, histogram = estimate_sigma(dataset, args.bins)
    print(f"sigma={sigma!r}")
    for lo, hi, count in zip(histogram.bin_edges[:-1], histogram.bin_edges[1:], histogram.counts):
        print(f"{lo:.6g}\t{hi:.6g}\t{count}")
    return EXIT_OK


def run_sweep(args) -> int:
    dataset = read_table(args.input, _csv_options(args)).dataset()
    sigmas = parse_numbers(args.sigmas)
    params = _qc_params(args)
    points = sweep_sigma(dataset, sigmas, params)
    for p in points:
        print(f"sigma={p.sigma!r}\tclusters={p.n_clusters}\toutliers={p.n_outliers}")
    if args.out is not None:
        args.out.write_bytes(_sweep_adapter.dump_json(points, indent=2) + b"\n")
    return EXIT_OK


def run_airquality(args) -> int:
    table = read_air_quality(args.input)
    matrix, dropped = table.matrix, list(table.dropped)
    if args.standardize:
        scaled = standardize(matrix)
        dropped += [table.columns[i] for i in range(len(table.columns)) if i not in scaled.kept]
        matrix = scaled.matrix
    model = pca_fit(matrix, args.components)
    logger.info("%d principal components keep %.1f%% of the variance", model.n_components,
                100 * model.cumulative_ratio)
    result = detect(Dataset(pca_project(model, matrix)), _qc_params(args))
    try:
        profile = outlier_profile(table.matrix, result.outlier_flags, table.columns)
    except ValueError as e:
        logger.warning("no outlier profile: %s", e)
        profile = None
    report = build_report(result, 'airquality', input=str(args.input), standardized=args.standardize,
                          pca_ratio=model.explained_variance_ratio, dropped_columns=dropped, profile=profile)
    _emit_report(report, args.out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog='qc-outliers', description="Outlier detection by quantum clustering.")
    parser.add_argument('--version', action='version', version=f"%(prog)s {__version__}")
    parser.add_argument('-v', '--verbose', action='count', default=0, help="-v for progress, -vv for every descent")
    sub = parser.add_subparsers(dest='command', required=True)

    p = sub.add_parser('detect', help="flag the points of small clusters")
    _add_csv_options(p)
    _add_qc_options(p)
    p.add_argument('--pca', type=_positive_int, default=None, metavar='M', help="project on M principal components")
    p.add_argument('--standardize', action='store_true', help="scale columns to mean 0 and variance 1")
    p.add_argument('--seed', type=int, default=None, help="recorded in the report")
    p.add_argument('--out', type=Path, default=None, help="report file (default: stdout)")
    p.set_defaults(run=run_detect)

    p = sub.add_parser('grid', help="sample a 2-d potential surface")
    _add_csv_options(p)
    p.add_argument('--sigma', type=_width('sigma', True), default='auto')
    p.add_argument('--bins', type=_positive_int, default=50)
    p.add_argument('--mode', type=PotentialMode, choices=list(PotentialMode), default=PotentialMode.DIRECT)
    p.add_argument('--bounds', default=None, help='"xlo:xhi, ylo:yhi" (default: data box padded by 3 sigma)')
    p.add_argument('--resolution', default="50, 50")
    p.add_argument('--out', type=Path, default=None)
    p.set_defaults(run=run_grid)

    p = sub.add_parser('gen', help="generate a synthetic scenario with planted outliers")
    p.add_argument('--scenario', type=ScenarioId, choices=list(ScenarioId), required=True)
    p.add_argument('--seed', type=int, default=0)
    p.add_argument('--params', default=None, help='e.g. "n_blob=300, spread=1.5"')
    p.add_argument('--out', type=Path, default=None)
    p.set_defaults(run=run_gen)

    p = sub.add_parser('sigma', help="estimate sigma from the pairwise distance histogram")
    _add_csv_options(p)
    p.add_argument('--bins', type=_positive_int, default=50)
    p.set_defaults(run=run_sigma)

    p = sub.add_parser('sweep', help="detect for several sigmas")
    _add_csv_options(p)
    _add_qc_options(p)
    p.add_argument('--sigmas', required=True, help='e.g. "1, 0.5, 0.3"')
    p.add_argument('--out', type=Path, default=None, help="JSON file")
    p.set_defaults(run=run_sweep)

    p = sub.add_parser('airquality', help=f"standardize, project and detect on {AIR_QUALITY_FILENAME}")
    p.add_argument('input', type=Path)
    _add_qc_options(p, sigma_default=6.0)
    p.add_argument('--no-standardize', dest='standardize', action='store_false')
    p.add_argument('--components', type=_positive_int, default=2)
    p.add_argument('--out', type=Path, default=None)
    p.set_defaults(run=run_airquality)
    return parser


def _configure_logging(verbosity: int):
    level = logging.WARNING if verbosity <= 0 else logging.INFO if verbosity == 1 else logging.DEBUG
    logging.basicConfig(level=level, stream=sys.stderr, format="%(levelname)s %(name)s: %(message)s", force=True)


def cli(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as e:
        print(e, file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as e:
        # --help and --version
        return e.code if isinstance(e.code, int) else EXIT_OK
    _configure_logging(args.verbose)
    try:
        return args.run(args)
    except (DataError, NonFiniteError, OSError) as e:
        print(f"qc-outliers {args.command}: {e}", file=sys.stderr)
        return EXIT_DATA
    except (ValidationError, ValueError, TypeError) as e:
        print(f"qc-outliers {args.command}: error: {e}", file=sys.stderr)
        return EXIT_USAGE


def main():
    sys.exit(cli())
