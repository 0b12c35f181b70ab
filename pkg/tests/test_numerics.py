import math
import unittest

import numpy as np
import numpy.testing as npt

from core.errors import ShapeMismatch
from core.numerics import flatten, global_norm, grad_check, log_sum_exp, matmul, softmax, unflatten


def _naive_matmul(A, B):
    out = np.zeros((A.shape[0], B.shape[1]))
    for i in range(A.shape[0]):
        for j in range(B.shape[1]):
            for k in range(A.shape[1]):
                out[i, j] += A[i, k] * B[k, j]
    return out


class TestMatmul(unittest.TestCase):
    def test_small_cases(self):
        B = np.arange(6.0).reshape(3, 2)
        npt.assert_array_equal(matmul(np.eye(3), B), B)
        npt.assert_array_equal(matmul([[1.0, 2.0]], [[3.0], [4.0]]), [[11.0]])

    def test_against_triple_loop(self):
        rng = np.random.default_rng(5)
        A = rng.normal(size=(5, 7))
        B = rng.normal(size=(7, 3))
        npt.assert_allclose(matmul(A, B), _naive_matmul(A, B), rtol=0, atol=1e-12)

    def test_associativity(self):
        rng = np.random.default_rng(6)
        for _ in range(20):
            A, B, C = rng.normal(size=(4, 5)), rng.normal(size=(5, 3)), rng.normal(size=(3, 6))
            npt.assert_allclose(matmul(matmul(A, B), C), matmul(A, matmul(B, C)), rtol=1e-9, atol=1e-12)

    def test_shape_mismatch(self):
        with self.assertRaises(ShapeMismatch):
            matmul(np.ones((2, 3)), np.ones((2, 3)))


class TestStableOps(unittest.TestCase):
    def test_log_sum_exp(self):
        self.assertAlmostEqual(log_sum_exp([0.0, 0.0]), math.log(2), places=15)
        self.assertEqual(log_sum_exp([-np.inf, 3.5]), 3.5)
        self.assertAlmostEqual(log_sum_exp([1000.0, 1000.0]), 1000.0 + math.log(2), places=10)
        with np.errstate(divide="ignore"):
            self.assertEqual(log_sum_exp([-np.inf, -np.inf]), -np.inf)

    def test_softmax(self):
        npt.assert_allclose(softmax([0.0, 0.0, 0.0]), [1 / 3, 1 / 3, 1 / 3], atol=1e-15)
        for c in (-4.0, 0.0, 12.5):
            npt.assert_allclose(softmax([c, c + math.log(3)]), [0.25, 0.75], atol=1e-12)

    def test_softmax_is_probability_vector(self):
        rng = np.random.default_rng(7)
        for _ in range(100):
            v = rng.uniform(-50, 50, size=int(rng.integers(1, 12)))
            p = softmax(v)
            self.assertTrue((p > 0).all())
            self.assertAlmostEqual(p.sum(), 1.0, places=12)
            npt.assert_allclose(softmax(v + 17), p, atol=1e-12)


class TestGradCheck(unittest.TestCase):
    def test_quadratic(self):
        theta = np.random.default_rng(8).normal(size=6)
        self.assertLess(grad_check(lambda t: 0.5 * np.dot(t, t), theta, theta, eps=1e-5), 1e-9)

    def test_sine(self):
        theta = np.random.default_rng(9).normal(size=6)
        self.assertLess(grad_check(lambda t: np.sin(t).sum(), theta, np.cos(theta)), 1e-8)

    def test_wrong_gradient_detected(self):
        theta = np.array([1.0, 2.0, -3.0])
        err = grad_check(lambda t: 0.5 * np.dot(t, t), theta, 2 * theta)
        self.assertAlmostEqual(err, 0.5, places=6)


class TestParameterVectors(unittest.TestCase):
    def test_flatten_unflatten(self):
        params = {"a": np.arange(6.0).reshape(2, 3), "b": np.array([7.0, 8.0])}
        vec = flatten(params)
        npt.assert_array_equal(vec, [0, 1, 2, 3, 4, 5, 7, 8])
        back = unflatten(vec, params)
        for k in params:
            npt.assert_array_equal(back[k], params[k])
        self.assertAlmostEqual(global_norm(params), np.linalg.norm(vec), places=12)


if __name__ == "__main__":
    unittest.main()
