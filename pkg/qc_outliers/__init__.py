from __future__ import annotations

__version__ = "0.1.0"

from .potential import Dataset, PotentialField, PotentialMode, potential, potential_gradient, wave_function
from .clustering import ClusterResult, QcParams, detect, estimate_sigma
from .errors import DataError, NonFiniteError, OutOfSupportError, QcError
