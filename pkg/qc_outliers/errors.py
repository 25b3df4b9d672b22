from __future__ import annotations


class QcError(Exception):
    """Base class of every error raised on purpose by `qc_outliers`."""


class DataError(QcError, ValueError):
    """The input data can not be used: wrong shape, non-finite entries, unparsable cells..."""


class OutOfSupportError(DataError):
    """A query point is so far from every data point that the wave function vanishes."""


class NonFiniteError(QcError, ArithmeticError):
    """The optimizer met a non-finite objective or gradient value."""
