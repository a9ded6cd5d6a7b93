import numpy as np
import numpy.testing as npt
import pytest

from diedat import tensor
from diedat.errors import ConfigError, ContractError, GradCheckError


def test_softmax_symmetry():
    npt.assert_allclose(tensor.softmax(np.array([0.0, 0.0])), [0.5, 0.5])


def test_softmax_closed_form():
    npt.assert_allclose(tensor.softmax(np.log(np.array([1.0, 3.0]))), [0.25, 0.75])


def test_softmax_shift_invariance_and_sum():
    rng = tensor.make_rng(0)
    for _ in range(50):
        v = rng.normal(scale=5.0, size=rng.integers(1, 9))
        p = tensor.softmax(v)
        assert abs(p.sum() - 1.0) < 1e-12
        assert (p > 0).all()
        npt.assert_allclose(tensor.softmax(v + 123.456), p, rtol=1e-12)


def test_softmax_large_values_stable():
    p = tensor.softmax(np.array([1000.0, 1000.0, 999.0]))
    assert np.isfinite(p).all() and abs(p.sum() - 1.0) < 1e-12


def test_linear_identity():
    npt.assert_allclose(tensor.linear(np.array([1.0, 2.0]), np.eye(2), np.zeros(2)),
                        [1.0, 2.0])


def test_linear_zero_weights():
    out = tensor.linear(np.array([4.0, 5.0]), np.zeros((1, 2)), np.array([3.0]))
    npt.assert_allclose(out, [3.0])


def test_linear_against_elementwise_dot():
    rng = tensor.make_rng(1)
    for _ in range(20):
        d_in, d_out = rng.integers(1, 7, size=2)
        x = rng.normal(size=d_in)
        W = rng.normal(size=(d_out, d_in))
        b = rng.normal(size=d_out)
        expected = np.array([sum(W[i, j] * x[j] for j in range(d_in)) + b[i]
                             for i in range(d_out)])
        npt.assert_allclose(tensor.linear(x, W, b), expected, rtol=1e-12)


def test_linear_shape_mismatch():
    with pytest.raises(ContractError):
        tensor.linear(np.zeros(3), np.zeros((2, 2)), np.zeros(2))


def test_maxpool_columnwise():
    npt.assert_allclose(tensor.maxpool_over_time(np.array([[1.0, 5.0], [3.0, 2.0]])),
                        [3.0, 5.0])


def test_maxpool_single_row_identity():
    row = np.array([[0.5, -1.0, 2.0]])
    npt.assert_allclose(tensor.maxpool_over_time(row), row[0])


def test_maxpool_permutation_invariant():
    rng = tensor.make_rng(2)
    H = rng.normal(size=(6, 4))
    perm = rng.permutation(6)
    npt.assert_allclose(tensor.maxpool_over_time(H[perm]), tensor.maxpool_over_time(H))


def test_maxpool_empty_rejected():
    with pytest.raises(ContractError):
        tensor.maxpool_over_time(np.zeros((0, 3)))


def test_dropout_eval_identity():
    x = np.arange(10.0)
    npt.assert_array_equal(tensor.dropout(x, 0.5, training=False), x)


def test_dropout_p_zero_identity():
    x = np.arange(10.0)
    npt.assert_array_equal(tensor.dropout(x, 0.0, training=True, rng=tensor.make_rng(0)), x)


def test_dropout_zero_fraction_and_mean():
    x = np.ones(100_000)
    y = tensor.dropout(x, 0.5, training=True, rng=tensor.make_rng(3))
    assert abs(np.mean(y == 0.0) - 0.5) < 0.01
    # inverted dropout keeps the expected value
    assert abs(y.mean() - 1.0) < 0.01
    npt.assert_allclose(np.unique(y), [0.0, 2.0])


def test_dropout_invalid_p():
    with pytest.raises(ConfigError):
        tensor.dropout(np.ones(3), 1.0, training=True, rng=tensor.make_rng(0))
    with pytest.raises(ConfigError):
        tensor.dropout(np.ones(3), -0.1, training=True, rng=tensor.make_rng(0))


def test_sigmoid_identities():
    npt.assert_allclose(tensor.sigmoid(0.0), 0.5)
    x = tensor.make_rng(4).normal(size=100)
    npt.assert_allclose(tensor.sigmoid(x) + tensor.sigmoid(-x), np.ones(100), rtol=1e-12)
    assert tensor.sigmoid(1000.0) == 1.0 and tensor.sigmoid(-1000.0) == 0.0


def test_elementwise_and_concat():
    a, b = np.array([1.0, 2.0]), np.array([3.0, 4.0])
    npt.assert_allclose(tensor.add(a, b), [4.0, 6.0])
    npt.assert_allclose(tensor.multiply(a, b), [3.0, 8.0])
    npt.assert_allclose(tensor.concat([a, b]), [1.0, 2.0, 3.0, 4.0])
    npt.assert_allclose(tensor.tanh(np.array([0.0])), [0.0])


def test_uniform_init_bounds_and_determinism():
    a = tensor.uniform_init(tensor.make_rng(5), (100, 10), 0.3)
    b = tensor.uniform_init(tensor.make_rng(5), (100, 10), 0.3)
    npt.assert_array_equal(a, b)
    assert (np.abs(a) <= 0.3).all()
    assert a.std() > 0


def test_rng_identical_streams():
    r1, r2 = tensor.make_rng(42), tensor.make_rng(42)
    npt.assert_array_equal(r1.random(100), r2.random(100))


def test_grad_check_quadratic():
    params = {"theta": np.array([3.0])}

    def f(p):
        return float(p["theta"][0] ** 2), {"theta": 2.0 * p["theta"]}

    res = tensor.grad_check(f, params)
    assert res.max_rel_error < 1e-8
    npt.assert_allclose(params["theta"], [3.0])  # restored


def test_grad_check_constant():
    params = {"theta": np.arange(4.0)}

    def f(p):
        return 1.0, {"theta": np.zeros(4)}

    assert tensor.grad_check(f, params).max_rel_error == 0.0


def test_grad_check_nonfinite():
    params = {"theta": np.array([0.0])}

    def f(p):
        v = p["theta"][0]
        return float("nan") if v != 0.0 else 0.0, {"theta": np.zeros(1)}

    with pytest.raises(GradCheckError):
        tensor.grad_check(f, params)
