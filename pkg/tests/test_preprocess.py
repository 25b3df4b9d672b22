from __future__ import annotations

import unittest
from unittest import TestCase

import numpy as np

from qc_outliers.errors import DataError
from qc_outliers.preprocess import impute_missing, pca_fit, pca_inverse, pca_project, standardize


class TestStandardize(TestCase):
    def test_moments(self):
        rng = np.random.default_rng(0)
        out = standardize(rng.normal(5.0, 3.0, (100, 4)))
        np.testing.assert_allclose(out.matrix.mean(axis=0), 0.0, atol=1e-12)
        np.testing.assert_allclose(out.matrix.std(axis=0), 1.0, rtol=1e-12)
        self.assertEqual(out.kept, (0, 1, 2, 3))

    def test_closed_form(self):
        out = standardize([[1.0], [2.0], [3.0]])
        np.testing.assert_allclose(out.matrix[:, 0], [-1.224745, 0.0, 1.224745], atol=1e-6)
        np.testing.assert_allclose(standardize(out.matrix).matrix, out.matrix, atol=1e-12)

    def test_constant_column(self):
        m = np.array([[1.0, 7.0], [2.0, 7.0], [3.0, 7.0]])
        with self.assertLogs('qc_outliers.preprocess', 'WARNING'):
            out = standardize(m)
        self.assertEqual(out.kept, (0,))
        self.assertEqual(out.matrix.shape, (3, 1))

    def test_all_constant(self):
        with self.assertRaises(DataError):
            standardize(np.ones((4, 2)))


class TestImpute(TestCase):
    def test_column_mean(self):
        m = np.array([[1.0, -200.0], [3.0, 4.0], [-200.0, 6.0]])
        out = impute_missing(m, -200.0)
        np.testing.assert_array_equal(out.matrix, [[1.0, 5.0], [3.0, 4.0], [2.0, 6.0]])
        self.assertEqual(out.kept, (0, 1))

    def test_all_missing_column(self):
        m = np.array([[1.0, -200.0], [3.0, -200.0]])
        with self.assertLogs('qc_outliers.preprocess', 'WARNING'):
            out = impute_missing(m, -200.0)
        self.assertEqual(out.kept, (0,))
        np.testing.assert_array_equal(out.matrix, [[1.0], [3.0]])

    def test_no_missing(self):
        m = np.arange(6.0).reshape(3, 2)
        np.testing.assert_array_equal(impute_missing(m, -200.0).matrix, m)


class TestPca(TestCase):
    def stretched(self, seed=0):
        rng = np.random.default_rng(seed)
        return rng.normal(size=(500, 3)) * [10.0, 3.0, 0.5] + [1.0, -2.0, 4.0]

    def test_axes(self):
        model = pca_fit(self.stretched(), 2)
        self.assertEqual(model.n_components, 2)
        np.testing.assert_allclose(np.abs(model.components), [[1, 0, 0], [0, 1, 0]], atol=0.05)
        np.testing.assert_allclose(model.components @ model.components.T, np.eye(2), atol=1e-12)
        self.assertGreater(model.explained_variance_ratio[0], model.explained_variance_ratio[1])
        self.assertTrue(0.9 < model.cumulative_ratio < 1.0)

    def test_sign_convention(self):
        model = pca_fit(-self.stretched(), 3)
        for row in model.components:
            self.assertGreater(row[np.argmax(np.abs(row))], 0)

    def test_sample_covariance(self):
        x = self.stretched(1)
        model = pca_fit(x, 3)
        eigvals = np.sort(np.linalg.eigvalsh(np.cov(x, rowvar=False)))[::-1]
        np.testing.assert_allclose(model.explained_variance_ratio, eigvals / eigvals.sum(), rtol=1e-10)
        np.testing.assert_allclose(pca_project(model, x).var(axis=0, ddof=1), eigvals, rtol=1e-10)

    def test_reconstruction(self):
        x = self.stretched(2)
        model = pca_fit(x, 3)
        np.testing.assert_allclose(pca_inverse(model, pca_project(model, x)), x, atol=1e-10)
        np.testing.assert_allclose(pca_project(model, model.mean[None, :]), 0.0, atol=1e-12)

    def test_projection_shrinks_distances(self):
        rng = np.random.default_rng(4)
        x = rng.normal(size=(80, 5)) * [4.0, 2.0, 1.0, 0.5, 0.1]
        for m in (1, 2, 5):
            y = pca_project(pca_fit(x, m), x)
            original = np.linalg.norm(x[:, None, :] - x[None, :, :], axis=-1)
            projected = np.linalg.norm(y[:, None, :] - y[None, :, :], axis=-1)
            with self.subTest(components=m):
                self.assertTrue((projected <= original + 1e-10).all())
                if m == 5:
                    np.testing.assert_allclose(projected, original, atol=1e-10)

    def test_line_y_equals_x(self):
        t = np.array([-2.0, -1.0, 0.5, 3.0])
        with self.assertLogs('qc_outliers.preprocess', 'WARNING'):
            model = pca_fit(np.column_stack([t, t]), 2)
        np.testing.assert_allclose(model.components, [[2 ** -0.5, 2 ** -0.5]], atol=1e-12)
        np.testing.assert_allclose(model.explained_variance_ratio, [1.0], atol=1e-12)
        np.testing.assert_allclose(pca_project(model, np.column_stack([t, t]))[:, 0], np.sqrt(2) * (t - t.mean()),
                                   atol=1e-12)

    def test_axis_aligned(self):
        x = np.array([[2.0, 0.0], [-2.0, 0.0], [0.0, 1.0], [0.0, -1.0]])
        model = pca_fit(x, 2)
        np.testing.assert_allclose(model.components[0], [1.0, 0.0], atol=1e-12)
        self.assertAlmostEqual(float(model.explained_variance_ratio[0]), 0.8, places=12)

    def test_eigensolver_oracle(self):
        rng = np.random.default_rng(3)
        x = rng.normal(size=(50, 6))
        model = pca_fit(x, 6)
        _, _, vt = np.linalg.svd(x - x.mean(axis=0))
        np.testing.assert_allclose(np.abs(model.components), np.abs(vt), atol=1e-8)

    def test_rank_deficient(self):
        t = np.linspace(-1, 1, 20)
        with self.assertLogs('qc_outliers.preprocess', 'WARNING'):
            model = pca_fit(np.column_stack([t, 2 * t]), 2)
        self.assertEqual(model.n_components, 1)
        self.assertAlmostEqual(model.cumulative_ratio, 1.0, places=12)

    def test_component_range(self):
        x = self.stretched()
        for m in (0, 4):
            with self.assertRaises(ValueError):
                pca_fit(x, m)
        with self.assertRaises(ValueError):
            pca_fit(x[:2], 2)

    def test_read_only(self):
        model = pca_fit(self.stretched(), 1)
        self.assertFalse(model.components.flags.writeable)

    def test_shape_mismatch(self):
        model = pca_fit(self.stretched(), 2)
        with self.assertRaises(DataError):
            pca_project(model, np.zeros((3, 2)))
        with self.assertRaises(DataError):
            pca_inverse(model, np.zeros((3, 3)))


if __name__ == '__main__':
    unittest.main()
