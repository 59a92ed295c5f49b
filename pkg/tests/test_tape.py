import numpy as np
import pytest

from formlink.nn import (
    ShapeError,
    Tensor,
    absolute,
    add,
    concat,
    constant,
    elu,
    gather_rows,
    grad_check,
    hadamard,
    leaf,
    leaky_relu,
    log,
    matmul,
    mean,
    pairwise_bilinear,
    reshape,
    scalar_mul,
    softmax,
    transpose,
    tsum,
)


def rand(rng, *shape):
    return leaf(rng.normal(size=shape), dtype=np.float64)


class TestForwardValues:
    def test_softmax_symmetry(self):
        out = softmax(constant([0.0, 0.0]), axis=0)
        np.testing.assert_allclose(out.value, [0.5, 0.5])

    def test_softmax_rows_sum_to_one(self):
        rng = np.random.default_rng(0)
        x = constant(rng.normal(size=(5, 7)) * 50)
        out = softmax(x, axis=1).value
        assert np.all(out >= 0)
        np.testing.assert_allclose(out.sum(axis=1), np.ones(5), atol=1e-12)

    def test_elu_definition(self):
        x = constant([-1.0, 0.0, 2.5])
        np.testing.assert_allclose(elu(x).value, [np.exp(-1.0) - 1, 0.0, 2.5])

    def test_leaky_relu_slope(self):
        x = constant([-2.0, 3.0])
        np.testing.assert_allclose(leaky_relu(x, slope=0.2).value, [-0.4, 3.0])

    def test_mean_gradient_is_uniform(self):
        x = leaf(np.arange(6.0).reshape(2, 3))
        mean(x).backward()
        np.testing.assert_allclose(x.grad, np.full((2, 3), 1.0 / 6.0))

    def test_matmul_shape_error_names_shapes(self):
        with pytest.raises(ShapeError, match=r"matmul"):
            matmul(constant(np.zeros((2, 3))), constant(np.zeros((4, 2))))

    def test_add_shape_error(self):
        with pytest.raises(ShapeError, match=r"add"):
            add(constant(np.zeros((2, 3))), constant(np.zeros((4,))))


class TestGradCheckPerOp:
    """Every registered op matches central finite differences in isolation."""

    TOL = 1e-6

    def check(self, build, *tensors):
        named = [(f"p{i}", t) for i, t in enumerate(tensors)]
        assert grad_check(build, named) <= self.TOL

    def test_quadratic_hand_value(self):
        w = leaf(np.array([3.0]))
        f = lambda: tsum(hadamard(w, w))
        f().backward()
        np.testing.assert_allclose(w.grad, [6.0])
        w.zero_grad()
        assert grad_check(f, [("w", w)]) <= 1e-8

    def test_constant_function_zero_grad(self):
        w = leaf(np.array([1.0, 2.0]))
        c = constant(np.array([4.0]))
        assert grad_check(lambda: tsum(c), [("w", w)]) == 0.0

    def test_add_broadcast(self):
        rng = np.random.default_rng(1)
        a, b = rand(rng, 4, 3), rand(rng, 3)
        self.check(lambda: mean(hadamard(add(a, b), add(a, b))), a, b)

    def test_hadamard(self):
        rng = np.random.default_rng(2)
        a, b = rand(rng, 3, 4), rand(rng, 3, 4)
        self.check(lambda: tsum(hadamard(a, b)), a, b)

    def test_matmul(self):
        rng = np.random.default_rng(3)
        a, b = rand(rng, 3, 4), rand(rng, 4, 2)
        self.check(lambda: mean(hadamard(matmul(a, b), matmul(a, b))), a, b)

    def test_concat_axis0_and_axis1(self):
        rng = np.random.default_rng(4)
        a, b = rand(rng, 2, 3), rand(rng, 2, 3)
        self.check(lambda: tsum(hadamard(concat([a, b], axis=0), concat([a, b], axis=0))), a, b)
        self.check(lambda: tsum(hadamard(concat([a, b], axis=1), concat([a, b], axis=1))), a, b)

    def test_leaky_relu(self):
        a = leaf(np.array([-1.7, -0.3, 0.4, 2.0]))
        self.check(lambda: tsum(leaky_relu(a, slope=0.2)), a)

    def test_elu(self):
        a = leaf(np.array([-1.7, -0.3, 0.4, 2.0]))
        self.check(lambda: tsum(hadamard(elu(a), elu(a))), a)

    def test_softmax(self):
        rng = np.random.default_rng(5)
        a = rand(rng, 3, 4)
        w = constant(rng.normal(size=(3, 4)))
        self.check(lambda: tsum(hadamard(softmax(a, axis=1), w)), a)
        self.check(lambda: tsum(hadamard(softmax(a, axis=0), w)), a)

    def test_log(self):
        a = leaf(np.array([0.2, 1.0, 3.7]))
        self.check(lambda: tsum(log(a)), a)

    def test_abs(self):
        a = leaf(np.array([-2.0, -0.5, 0.7, 1.1]))
        self.check(lambda: tsum(absolute(a)), a)

    def test_mean(self):
        rng = np.random.default_rng(6)
        a = rand(rng, 5, 2)
        self.check(lambda: mean(hadamard(a, a)), a)

    def test_scalar_mul(self):
        rng = np.random.default_rng(7)
        a = rand(rng, 4)
        self.check(lambda: tsum(scalar_mul(-2.5, hadamard(a, a))), a)

    def test_sum_with_axis(self):
        rng = np.random.default_rng(8)
        a = rand(rng, 3, 5)
        w = constant(rng.normal(size=(3,)))
        self.check(lambda: tsum(hadamard(tsum(a, axis=1), w)), a)

    def test_transpose(self):
        rng = np.random.default_rng(9)
        a, b = rand(rng, 3, 4), rand(rng, 3, 2)
        self.check(lambda: tsum(hadamard(matmul(transpose(a), b), matmul(transpose(a), b))), a, b)

    def test_reshape(self):
        rng = np.random.default_rng(10)
        a = rand(rng, 2, 6)
        w = constant(rng.normal(size=(3, 4)))
        self.check(lambda: tsum(hadamard(reshape(a, (3, 4)), w)), a)

    def test_gather_rows_with_repeats(self):
        rng = np.random.default_rng(11)
        a = rand(rng, 4, 3)
        idx = np.array([0, 2, 2, 3, 0])
        w = constant(rng.normal(size=(5, 3)))
        self.check(lambda: tsum(hadamard(gather_rows(a, idx), w)), a)

    def test_pairwise_bilinear(self):
        rng = np.random.default_rng(12)
        q, u, a = rand(rng, 5, 3), rand(rng, 3, 2, 4), rand(rng, 5, 4)
        w = constant(rng.normal(size=(5, 2)))
        self.check(lambda: tsum(hadamard(pairwise_bilinear(q, u, a), w)), q, u, a)


class TestGraphMechanics:
    def test_diamond_graph_accumulates_once(self):
        # f = sum(x*x + x*x) = 2*sum(x^2) -> df/dx = 4x
        x = leaf(np.array([1.0, -2.0]))
        y = hadamard(x, x)
        tsum(add(y, y)).backward()
        np.testing.assert_allclose(x.grad, [4.0, -8.0])

    def test_grad_accumulates_across_backwards_until_zeroed(self):
        x = leaf(np.array([2.0]))
        tsum(hadamard(x, x)).backward()
        tsum(hadamard(x, x)).backward()
        np.testing.assert_allclose(x.grad, [8.0])
        x.zero_grad()
        assert x.grad is None

    def test_forward_determinism(self):
        rng = np.random.default_rng(13)
        a = constant(rng.normal(size=(6, 6)))
        b = constant(rng.normal(size=(6, 6)))
        one = softmax(matmul(a, b), axis=1).value
        two = softmax(matmul(a, b), axis=1).value
        assert np.array_equal(one, two)

    def test_constants_collect_no_grad(self):
        c = constant(np.ones(3))
        x = leaf(np.ones(3))
        tsum(hadamard(c, x)).backward()
        assert c.grad is None
        np.testing.assert_allclose(x.grad, np.ones(3))
