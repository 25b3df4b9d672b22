"""
Checks on the UCI air quality data. The file is not shipped: point QC_AIRQUALITY_CSV at it, or put it at
tests/data/AirQualityUCI.csv.
"""
from __future__ import annotations

import os
import unittest
from pathlib import Path
from unittest import TestCase

from qc_outliers.clustering import QcParams, detect
from qc_outliers.data_io import AIR_QUALITY_FILENAME, read_air_quality
from qc_outliers.potential import Dataset
from qc_outliers.preprocess import pca_fit, pca_project, standardize

AIR_QUALITY_PATH = Path(os.environ.get('QC_AIRQUALITY_CSV', Path(__file__).parent / 'data' / AIR_QUALITY_FILENAME))
DOCUMENTED_INSTANCES = 9358


@unittest.skipUnless(AIR_QUALITY_PATH.is_file(), f"{AIR_QUALITY_PATH} not found, set QC_AIRQUALITY_CSV")
class TestAirQuality(TestCase):
    @classmethod
    def setUpClass(cls):
        cls.table = read_air_quality(AIR_QUALITY_PATH)
        matrix = standardize(cls.table.matrix).matrix
        cls.model = pca_fit(matrix, 2)
        cls.projected = Dataset(pca_project(cls.model, matrix))

    def test_shape(self):
        n, d = self.table.matrix.shape
        # the published file holds one record less than the documented instance count
        self.assertLessEqual(abs(n - DOCUMENTED_INSTANCES), 1)
        self.assertEqual(d, 13)

    def test_explained_variance(self):
        self.assertGreaterEqual(self.model.cumulative_ratio, 0.80)

    def test_wide_and_narrow_kernels(self):
        wide = detect(self.projected, QcParams(sigma=6.0, workers=os.cpu_count() or 1))
        self.assertGreaterEqual(wide.n_clusters, 2)
        flagged_sizes = wide.cluster_sizes[wide.cluster_sizes < wide.params.k]
        self.assertTrue(len(flagged_sizes))
        self.assertLess(int(flagged_sizes.min()), 0.1 * self.projected.n)

        narrow = detect(self.projected, QcParams(sigma=1.0, workers=os.cpu_count() or 1))
        self.assertGreater(narrow.n_outliers, wide.n_outliers)


if __name__ == '__main__':
    unittest.main()
