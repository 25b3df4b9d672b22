"""
End to end checks on the synthetic scenarios: planted outliers must be found, and not drowned in false alarms.
"""
from __future__ import annotations

import math
import statistics
import time
import unittest
from unittest import TestCase

import numpy as np

from qc_outliers.clustering import ClusterResult, QcParams, detect, sweep_sigma
from qc_outliers.datagen import ParamsD, ParamsF, Scenario, generate
from qc_outliers.potential import Dataset, PotentialField, PotentialMode, potentials_at_data

SEEDS = range(20)


class TestRecall(TestCase):
    def check(self, scenario: str, params: QcParams = QcParams(),
              max_flagged_ratio=None) -> list[tuple[Scenario, ClusterResult]]:
        runs = []
        for seed in SEEDS:
            s = generate(scenario, seed)
            result = detect(s.dataset, params)
            with self.subTest(scenario=scenario, seed=seed):
                self.assertTrue(result.outlier_flags[s.truth].all(),
                                f"missed {np.flatnonzero(s.truth & ~result.outlier_flags).tolist()}")
                if max_flagged_ratio is not None:
                    self.assertLessEqual(result.n_outliers, max_flagged_ratio * s.n_planted)
            runs.append((s, result))
        return runs

    def test_separated_outliers(self):
        self.check('A', max_flagged_ratio=1.5)

    def test_clustered_outliers(self):
        self.check('C', max_flagged_ratio=1.5)

    def test_micro_clusters(self):
        self.check('E', max_flagged_ratio=1.5)

    def test_point_next_to_dense_blob(self):
        # the estimated width is on the scale of the dense blob, a narrower kernel separates the planted point
        p = ParamsD()
        for s, result in self.check('D', QcParams(sigma=0.5 * p.dense_spread)):
            with self.subTest(seed=s.seed):
                self.assertLessEqual(int(result.outlier_flags[:p.n_dense].sum()), p.n_dense // 3)

    def test_points_in_hole(self):
        p = ParamsF()
        k = math.ceil(0.1 * (p.n_dense + p.n_sparse))
        for s, result in self.check('F', QcParams(sigma=p.hole_radius / 4, k=k, mode=PotentialMode.INVERSE)):
            with self.subTest(seed=s.seed):
                # hole points settle on potential maxima inside the hole
                self.assertFalse(result.escaped[s.truth].any())
                self.assertTrue(result.descent_converged[s.truth].all())
                self.assertTrue((np.hypot(*result.converged[s.truth].T) < p.hole_radius).all())


class TestSigmaSweep(TestCase):
    def test_narrower_flags_more(self):
        for seed in range(10):
            s = generate('A', seed)
            wide, narrow = sweep_sigma(s.dataset, [0.5, 0.3])
            with self.subTest(seed=seed):
                self.assertTrue(set(wide.outlier_indices) <= set(narrow.outlier_indices))
                self.assertGreater(narrow.n_outliers, wide.n_outliers)


class TestDeterminism(TestCase):
    def test_repeatable(self):
        s = generate('C', 11)
        a, b = detect(s.dataset), detect(s.dataset)
        self.assertEqual(a.converged.tobytes(), b.converged.tobytes())
        np.testing.assert_array_equal(a.labels, b.labels)


class TestComplexity(TestCase):
    @staticmethod
    def seconds(n: int) -> float:
        rng = np.random.default_rng(n)
        field = PotentialField(Dataset(rng.normal(size=(n, 2))), 0.5)
        runs = []
        for _ in range(3):
            start = time.perf_counter()
            potentials_at_data(field)
            runs.append(time.perf_counter() - start)
        return statistics.median(runs)

    def test_quadratic(self):
        ratio = self.seconds(4000) / self.seconds(2000)
        self.assertTrue(3.0 <= ratio <= 5.0, f"time ratio {ratio:.2f}")


if __name__ == '__main__':
    unittest.main()
