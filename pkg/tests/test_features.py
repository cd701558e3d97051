import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from rffbounds.errors import DimensionMismatch, UnsupportedOrder
from rffbounds.features import (embed, estimate_derivative, estimate_derivative_at, estimate_kernel,
                                fd_derivative, phase, target_derivative, target_derivative_at,
                                target_gradient_at)
from rffbounds.multiindex import MultiIndex
from rffbounds.spectral import (Discrete, FeatureSet, GaussianIso, UniformBox, characteristic_fn,
                                sample_frequencies)

finite = st.floats(-10, 10, allow_nan=False, allow_infinity=False)


def fs(*omegas):
    return FeatureSet(np.array(omegas, dtype=float))


def indices(d, max_total):
    """Strategy for (p, q) with |p+q| <= max_total."""
    comp = st.lists(st.integers(0, max_total), min_size=2 * d, max_size=2 * d)
    return comp.filter(lambda v: sum(v) <= max_total).map(
        lambda v: (MultiIndex(tuple(v[:d])), MultiIndex(tuple(v[d:]))))


# phase

def test_phase_table():
    t = np.linspace(-7, 7, 101)
    assert np.array_equal(phase(0, t), np.cos(t))
    assert phase(1, 0.0) == 0.0
    assert phase(2, 0.0) == -1.0
    assert phase(3, 0.0) == 0.0
    assert phase(1, math.pi / 2) == -1.0


@given(st.integers(0, 40), finite)
def test_phase_matches_shifted_cosine_and_is_periodic(a, t):
    assert phase(a, t) == pytest.approx(math.cos(math.pi * a / 2 + t), abs=1e-12)
    assert abs(phase(a + 4, t) - phase(a, t)) <= 1e-15


# embed

def test_embed_examples():
    assert np.array_equal(embed(fs([0.0]), (0,), [3.3]), [1.0, 0.0])
    assert np.allclose(embed(fs([2.0]), (1,), [0.0]), [0.0, 2.0], atol=1e-15)


@given(st.integers(0, 2**32), arrays(float, 3, elements=finite))
def test_zero_order_embedding_has_unit_norm(seed, x):
    f = sample_frequencies(GaussianIso(3, 1.0), 64, seed)
    assert np.sum(embed(f, (0, 0, 0), x) ** 2) == pytest.approx(1.0, rel=1e-13)


def test_embed_batch_matches_rows():
    f = sample_frequencies(UniformBox(2, 1.5), 20, 4)
    X = np.random.default_rng(0).normal(size=(7, 2))
    B = embed(f, (1, 2), X)
    assert B.shape == (7, 40)
    for i in range(7):
        assert np.array_equal(B[i], embed(f, (1, 2), X[i]))


def test_dimension_mismatch():
    f = sample_frequencies(GaussianIso(2, 1.0), 5, 0)
    with pytest.raises(DimensionMismatch):
        embed(f, (0, 0), [1.0, 2.0, 3.0])
    with pytest.raises(DimensionMismatch):
        estimate_kernel(f, [1.0, 2.0], [1.0])


# estimators

def test_estimator_examples():
    f = fs([1.0], [2.0])
    assert estimate_kernel(f, [math.pi], [0.0]) == pytest.approx(0.0, abs=1e-15)
    assert estimate_derivative(fs([2.0]), (1,), (1,), [math.pi / 4], [0.0]) == pytest.approx(0.0, abs=1e-15)
    g = sample_frequencies(GaussianIso(1, 1.0), 30, 1)
    assert estimate_derivative(g, (1,), (0,), [0.4], [0.4]) == 0.0


@given(st.integers(0, 2**32), arrays(float, 2, elements=finite))
def test_kernel_on_diagonal_is_one(seed, x):
    f = sample_frequencies(GaussianIso(2, 1.0), 50, seed)
    assert estimate_kernel(f, x, x) == 1.0


@given(st.integers(0, 2**32), arrays(float, 2, elements=finite), arrays(float, 2, elements=finite))
def test_zero_order_derivative_is_kernel(seed, x, y):
    f = sample_frequencies(GaussianIso(2, 1.0), 50, seed)
    assert estimate_derivative(f, (0, 0), (0, 0), x, y) == pytest.approx(
        float(embed(f, (0, 0), x) @ embed(f, (0, 0), y)), abs=1e-15)
    assert estimate_derivative(f, (0, 0), (0, 0), x, y) == estimate_kernel(f, x, y)


@given(arrays(float, 2, elements=finite), arrays(float, 2, elements=finite), st.integers(1, 30))
def test_single_atom_estimate_is_exact(x, y, m):
    meas = Discrete(2, [[0.3, -1.2]])
    f = sample_frequencies(meas, m, seed=m)
    # a sum of m equal terms divided by m is exact up to m ulps
    assert estimate_kernel(f, x, y) == pytest.approx(characteristic_fn(meas, x - y), abs=1e-14)


@given(st.integers(0, 2**32), indices(2, 3), arrays(float, 2, elements=finite),
       arrays(float, 2, elements=finite))
def test_inner_product_identity(seed, pq, x, y):
    p, q = pq
    f = sample_frequencies(UniformBox(2, 2.0), 40, seed)
    lhs = float(embed(f, p, x) @ embed(f, q, y))
    rhs = estimate_derivative(f, p, q, x, y)
    scale = float(np.mean(np.abs((p + q).monomial(f.omegas))))
    assert abs(lhs - rhs) <= 1e-10 * max(abs(rhs), scale, 1e-300)


@given(st.integers(0, 2**32), arrays(float, 2, elements=finite), arrays(float, 2, elements=finite),
       arrays(float, 2, elements=finite))
def test_shift_invariance(seed, x, y, c):
    f = sample_frequencies(GaussianIso(2, 1.0), 30, seed)
    assert estimate_kernel(f, x + c, y + c) == pytest.approx(estimate_kernel(f, x, y), abs=1e-12)


@given(st.integers(0, 2**32), indices(1, 4), finite, finite)
def test_symmetry_under_swap(seed, pq, x, y):
    p, q = pq
    f = sample_frequencies(UniformBox(1, 1.5), 30, seed)
    sign = (-1.0) ** (p + q).order
    a = estimate_derivative(f, p, q, [x], [y])
    assert a == pytest.approx(sign * estimate_derivative(f, q, p, [x], [y]), abs=1e-12)
    assert a == pytest.approx(estimate_derivative(f, q, p, [y], [x]), abs=1e-12)
    assert estimate_kernel(f, [x], [y]) == pytest.approx(estimate_kernel(f, [y], [x]), abs=1e-15)


@given(st.integers(0, 2**32), indices(2, 4), arrays(float, 2, elements=finite))
def test_estimator_bounded_by_mean_monomial(seed, pq, z):
    p, q = pq
    f = sample_frequencies(GaussianIso(2, 0.8), 25, seed)
    bound = float(np.mean(np.abs((p + q).monomial(f.omegas))))
    assert abs(estimate_derivative_at(f, p, q, z)[0]) <= bound * (1 + 1e-12)


def test_unbiasedness():
    meas = UniformBox(1, 2.0)
    z = np.array([[0.7]])
    vals = np.array([estimate_derivative_at(sample_frequencies(meas, 10, s), (1,), (1,), z)[0]
                     for s in range(4000)])
    target = target_derivative_at(meas, (1,), (1,), z)[0]
    assert abs(vals.mean() - target) <= 3 * vals.std(ddof=1) / math.sqrt(vals.size)


# target derivative

def test_target_examples():
    g = GaussianIso(1, 1.0)
    assert target_derivative(g, (1,), (0,), [1.0], [0.0]) == pytest.approx(-math.exp(-0.5), rel=1e-14)
    assert target_derivative(Discrete(1, [[2.0]]), (1,), (1,), [0.3], [0.3]) == pytest.approx(4.0)
    x, y = np.array([0.2, -0.4]), np.array([1.0, 0.5])
    assert target_derivative(GaussianIso(2, 1.3), (0, 0), (0, 0), x, y) == pytest.approx(
        characteristic_fn(GaussianIso(2, 1.3), x - y), rel=1e-15)


def test_order_cap():
    with pytest.raises(UnsupportedOrder):
        target_derivative(GaussianIso(1, 1.0), (3,), (2,), [0.0], [0.0])
    with pytest.raises(UnsupportedOrder):
        fd_derivative(GaussianIso(1, 1.0), (5,), (0,), [0.0])


FD_TOL = {0: 1e-14, 1: 1e-8, 2: 1e-7, 3: 1e-6, 4: 5e-5}


@pytest.mark.parametrize("measure", [GaussianIso(1, 1.0), GaussianIso(2, 0.8), UniformBox(1, 2.0),
                                     UniformBox(2, 1.0), Discrete(2, [[1.0, 0.5], [0.2, -1.0]], [0.4, 0.6])],
                         ids=lambda m: m.measure_id)
@given(data=st.data())
def test_closed_form_matches_finite_differences(measure, data):
    p, q = data.draw(indices(measure.d, 4))
    z = data.draw(arrays(float, measure.d, elements=st.floats(-3, 3)))
    exact = target_derivative_at(measure, p, q, z)[0]
    approx = fd_derivative(measure, p, q, z)[0]
    assert abs(exact - approx) <= FD_TOL[(p + q).order] * max(1.0, abs(exact))


def test_uniform_closed_form_large_argument():
    """Trigonometric moments above the series cutoff agree with the finite differences."""
    meas = UniformBox(1, 3.0)
    z = np.array([[4.1], [9.7], [-25.0]])
    for n in range(5):
        exact = target_derivative_at(meas, (n,), (0,), z)
        approx = fd_derivative(meas, (n,), (0,), z)
        assert np.allclose(exact, approx, atol=FD_TOL[n] * 10)


@given(arrays(float, 2, elements=st.floats(-3, 3)), indices(2, 3))
def test_gradient_matches_finite_differences(z, pq):
    p, q = pq
    meas = GaussianIso(2, 1.0)
    grad = target_gradient_at(meas, p, q, z)[0]
    h = 1e-5
    for i in range(2):
        e = np.zeros(2)
        e[i] = h
        num = (target_derivative_at(meas, p, q, z + e)[0] - target_derivative_at(meas, p, q, z - e)[0]) / (2 * h)
        assert grad[i] == pytest.approx(num, abs=1e-6 * max(1.0, abs(num)))


def test_batched_evaluation_is_deterministic_under_chunking(monkeypatch):
    import rffbounds.features as F

    f = sample_frequencies(GaussianIso(2, 1.0), 300, 9)
    Z = np.random.default_rng(1).normal(size=(5000, 2))
    full = estimate_derivative_at(f, (1, 0), (0, 1), Z)
    monkeypatch.setattr(F, "_CHUNK_ELEMENTS", 1000)
    chunked = estimate_derivative_at(f, (1, 0), (0, 1), Z)
    assert np.array_equal(full, chunked)


@given(st.integers(0, 2**32), indices(2, 3))
def test_mean_deviation_equals_target_minus_estimate(seed, pq):
    from rffbounds.features import mean_deviation_at

    p, q = pq
    meas = UniformBox(2, 1.0)
    f = sample_frequencies(meas, 40, seed)
    Z = np.random.default_rng(seed).uniform(-2, 2, size=(50, 2))
    tgt = target_derivative_at(meas, p, q, Z)
    assert np.allclose(mean_deviation_at(f, p, q, Z, tgt), tgt - estimate_derivative_at(f, p, q, Z),
                       rtol=0, atol=1e-13)
