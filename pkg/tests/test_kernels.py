import math

import numpy as np
import pytest

from stovk.errors import DimensionMismatch, UnsupportedFamily
from stovk.kernels import (
    SEPARABLE,
    TIME_ALIGNED,
    OperatorKernel,
    ScalarKernel,
    eval_dt_dtprime,
    eval_dt_operator,
    eval_operator,
    eval_scalar,
    operator_gram,
    operator_gram_dt,
    scalar_gram,
)

FD_STEP = 1e-4


def fd_dt_operator(spec, p, q, step=FD_STEP):
    """Central difference of eval_operator in the first time argument."""
    (x, t), (xp, tp) = p, q
    return (eval_operator(spec, (x, t + step), q) - eval_operator(spec, (x, t - step), q)) / (2 * step)


def fd_dt_dtprime(spec, t, tp, step=FD_STEP):
    """Central cross difference of eval_scalar over (t, t')."""
    return (
        eval_scalar(spec, t + step, tp + step)
        - eval_scalar(spec, t + step, tp - step)
        - eval_scalar(spec, t - step, tp + step)
        + eval_scalar(spec, t - step, tp - step)
    ) / (4 * step * step)


class TestScalarKernel:
    def test_diagonal_is_one(self):
        k = ScalarKernel(0.7)
        assert eval_scalar(k, 0.3, 0.3) == 1.0
        assert eval_scalar(k, [0.1, 0.2], [0.1, 0.2]) == 1.0

    def test_one_bandwidth_apart(self):
        k = ScalarKernel(0.7)
        assert eval_scalar(k, 0.0, 0.7) == pytest.approx(math.exp(-1.0), rel=1e-12)

    def test_hand_value(self):
        k = ScalarKernel(0.5)
        # |u-v|^2 / sigma^2 = 0.0625 / 0.25 = 0.25
        assert eval_scalar(k, 0.0, 0.25) == pytest.approx(math.exp(-0.25), rel=1e-12)

    def test_symmetry_and_range(self):
        k = ScalarKernel(0.4)
        rng = np.random.default_rng(0)
        for _ in range(20):
            u, v = rng.uniform(size=2)
            assert eval_scalar(k, u, v) == eval_scalar(k, v, u)
            assert 0.0 < eval_scalar(k, u, v) <= 1.0

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatch):
            eval_scalar(ScalarKernel(1.0), [0.1, 0.2], [0.1])

    def test_rejects_nonpositive_bandwidth(self):
        with pytest.raises(ValueError):
            ScalarKernel(0.0)

    def test_unknown_family_raises_on_eval(self):
        k = ScalarKernel(1.0, family="matern")
        with pytest.raises(UnsupportedFamily):
            eval_scalar(k, 0.0, 0.1)
        with pytest.raises(UnsupportedFamily):
            eval_dt_dtprime(k, 0.0, 0.1)


class TestCrossDerivative:
    def test_diagonal_value(self):
        assert eval_dt_dtprime(ScalarKernel(1.0), 0.4, 0.4) == pytest.approx(2.0, rel=1e-12)

    def test_zero_crossing(self):
        sigma = 0.8
        k = ScalarKernel(sigma)
        assert eval_dt_dtprime(k, 0.0, sigma / math.sqrt(2.0)) == pytest.approx(0.0, abs=1e-12)

    def test_symmetry_and_positive_diagonal(self):
        k = ScalarKernel(0.6)
        rng = np.random.default_rng(1)
        for _ in range(10):
            t, tp = rng.uniform(size=2)
            assert eval_dt_dtprime(k, t, tp) == eval_dt_dtprime(k, tp, t)
        assert eval_dt_dtprime(k, 0.2, 0.2) > 0

    def test_matches_finite_differences(self):
        k = ScalarKernel(1.0)
        exact = eval_dt_dtprime(k, 0.0, 0.3)
        approx = fd_dt_dtprime(k, 0.0, 0.3)
        assert abs(approx - exact) <= 1e-5 * abs(exact)


class TestOperatorKernel:
    def make(self, mode=SEPARABLE, alpha=0.0, sx=0.3, st=1.0):
        return OperatorKernel(ScalarKernel(sx), ScalarKernel(st), mode=mode, alpha=alpha)

    def test_separable_diagonal(self):
        assert eval_operator(self.make(), (0.2, 0.5), (0.2, 0.5)) == 1.0

    def test_time_aligned_diagonal(self):
        spec = self.make(mode=TIME_ALIGNED, alpha=0.5, st=1.0)
        assert eval_operator(spec, (0.2, 0.5), (0.2, 0.5)) == pytest.approx(2.0, rel=1e-12)

    def test_alpha_zero_degeneracy(self):
        sep = self.make()
        aligned = self.make(mode=TIME_ALIGNED, alpha=0.0)
        rng = np.random.default_rng(2)
        for _ in range(20):
            p = (rng.uniform(), rng.uniform())
            q = (rng.uniform(), rng.uniform())
            assert eval_operator(sep, p, q) == eval_operator(aligned, p, q)

    def test_swap_symmetry(self):
        spec = self.make(mode=TIME_ALIGNED, alpha=1.5)
        rng = np.random.default_rng(3)
        for _ in range(20):
            p = (rng.uniform(), rng.uniform())
            q = (rng.uniform(), rng.uniform())
            assert eval_operator(spec, p, q) == eval_operator(spec, q, p)

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatch):
            eval_operator(self.make(), ([0.1, 0.2], 0.0), ([0.1], 0.0))

    def test_validation(self):
        with pytest.raises(ValueError):
            self.make(mode="other")
        with pytest.raises(ValueError):
            self.make(mode=TIME_ALIGNED, alpha=-1.0)


class TestOperatorDerivative:
    def test_separable_zero_at_equal_times(self):
        spec = OperatorKernel(ScalarKernel(0.3), ScalarKernel(0.5))
        assert eval_dt_operator(spec, (0.1, 0.4), (0.7, 0.4)) == 0.0

    def test_hand_value_separable(self):
        spec = OperatorKernel(ScalarKernel(0.3), ScalarKernel(1.0))
        # k_x = 1 at x = x'; d/dt k_t = -2(t-t') e^{-(t-t')^2} = e^{-0.25} at t-t' = -0.5
        value = eval_dt_operator(spec, (0.1, 0.0), (0.1, 0.5))
        assert value == pytest.approx(math.exp(-0.25), rel=1e-12)

    @pytest.mark.parametrize("mode,alpha", [(SEPARABLE, 0.0), (TIME_ALIGNED, 0.7)])
    def test_matches_finite_differences(self, mode, alpha):
        spec = OperatorKernel(ScalarKernel(0.4), ScalarKernel(0.6), mode=mode, alpha=alpha)
        rng = np.random.default_rng(4)
        for _ in range(20):
            p = (rng.uniform(), rng.uniform())
            q = (rng.uniform(), rng.uniform())
            exact = eval_dt_operator(spec, p, q)
            approx = fd_dt_operator(spec, p, q)
            assert abs(approx - exact) <= 1e-5 * max(abs(exact), 1e-3)


class TestGramMatrices:
    def test_matrix_matches_pointwise(self):
        spec = OperatorKernel(ScalarKernel(0.3), ScalarKernel(0.5), mode=TIME_ALIGNED, alpha=0.8)
        rng = np.random.default_rng(5)
        xs, ts = rng.uniform(size=6), rng.uniform(size=6)
        gram = operator_gram(spec, xs, ts)
        for i in range(6):
            for j in range(6):
                assert gram[i, j] == pytest.approx(
                    eval_operator(spec, (xs[i], ts[i]), (xs[j], ts[j])), rel=1e-14
                )

    def test_dt_matrix_matches_pointwise(self):
        spec = OperatorKernel(ScalarKernel(0.3), ScalarKernel(0.5), mode=TIME_ALIGNED, alpha=0.8)
        rng = np.random.default_rng(6)
        xa, ta = rng.uniform(size=4), rng.uniform(size=4)
        xb, tb = rng.uniform(size=5), rng.uniform(size=5)
        mat = operator_gram_dt(spec, xa, ta, xb, tb)
        for i in range(4):
            for j in range(5):
                assert mat[i, j] == pytest.approx(
                    eval_dt_operator(spec, (xa[i], ta[i]), (xb[j], tb[j])), rel=1e-14
                )

    def test_gram_is_exactly_symmetric(self):
        spec = OperatorKernel(ScalarKernel(0.2), ScalarKernel(0.4), mode=TIME_ALIGNED, alpha=2.0)
        rng = np.random.default_rng(7)
        gram = operator_gram(spec, rng.uniform(size=15), rng.uniform(size=15))
        assert np.array_equal(gram, gram.T)


class TestPositiveDefiniteness:
    @pytest.mark.parametrize("mode,alpha", [
        (SEPARABLE, 0.0),
        (TIME_ALIGNED, 0.1),
        (TIME_ALIGNED, 1.0),
        (TIME_ALIGNED, 10.0),
    ])
    def test_operator_gram_psd(self, mode, alpha):
        spec = OperatorKernel(ScalarKernel(0.3), ScalarKernel(0.3), mode=mode, alpha=alpha)
        rng = np.random.default_rng(8)
        for _ in range(30):
            n = rng.integers(2, 41)
            gram = operator_gram(spec, rng.uniform(size=n), rng.uniform(size=n))
            assert np.linalg.eigvalsh(gram).min() >= -1e-8

    def test_derivative_kernel_gram_psd(self):
        # this is the check that pins the cross-derivative sign
        k = ScalarKernel(0.5)
        rng = np.random.default_rng(9)
        for _ in range(30):
            n = rng.integers(2, 41)
            ts = rng.uniform(size=n)
            gram = np.array([[eval_dt_dtprime(k, a, b) for b in ts] for a in ts])
            assert np.linalg.eigvalsh(gram).min() >= -1e-8

    def test_scalar_gram_psd(self):
        k = ScalarKernel(0.25)
        rng = np.random.default_rng(10)
        pts = rng.uniform(size=(30, 2))
        assert np.linalg.eigvalsh(scalar_gram(k, pts)).min() >= -1e-8
