"""Random Fourier features for a kernel and its partial derivatives.

The feature map pairs a cosine and a sine block per frequency,

    phi^p(u) = m^-1/2 (omega_j^p h_|p|(omega_j^T u), omega_j^p h_{3+|p|}(omega_j^T u))_j,

so that <phi^p(x), phi^q(y)> equals the derivative estimator s^{p,q}(x, y).
The single-cosine variant cos(omega^T x + b) is deliberately not offered: its
product estimator is not shift invariant.
"""
from __future__ import annotations

import numpy as np

from .errors import DimensionMismatch, UnsupportedOrder
from .multiindex import IndexLike, MultiIndex, as_multi_index
from ._trig import phase, project as _project
from .spectral import FeatureSet, SpectralMeasure, sample_frequencies  # noqa: F401

MAX_ORACLE_ORDER = 4
_CHUNK_ELEMENTS = 1 << 21

def _points(x, d: int) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.ndim == 0:
        x = x.reshape(1, 1)
    elif x.ndim == 1:
        x = x.reshape(1, -1) if (d != 1 or x.shape[0] == 1) else x.reshape(-1, 1)
    if x.shape[-1] != d:
        raise DimensionMismatch(f"points of dimension {x.shape[-1]} for features of dimension {d}")
    return x


def _chunks(n_rows: int, m: int):
    step = max(1, _CHUNK_ELEMENTS // max(m, 1))
    for start in range(0, n_rows, step):
        yield slice(start, min(n_rows, start + step))


def derivative_coefficients(features: FeatureSet, p: MultiIndex, q: MultiIndex) -> np.ndarray:
    """omega_j^p (-omega_j)^q, with the sign applied as (-1)^|q|."""
    sign = -1.0 if q.order % 2 else 1.0
    return sign * (p + q).monomial(features.omegas)


def embed(features: FeatureSet, p: IndexLike, x) -> np.ndarray:
    """phi^p(x): shape (2m,) for one point, (n, 2m) for a batch."""
    p = as_multi_index(p, features.d)
    single = np.asarray(x).ndim <= 1 and not (features.d == 1 and np.asarray(x).size > 1)
    X = _points(x, features.d)
    t = _project(X, features.omegas)
    w = p.monomial(features.omegas) / np.sqrt(features.m)
    out = np.concatenate([w * phase(p.order, t), w * phase(3 + p.order, t)], axis=1)
    return out[0] if single else out


def estimate_derivative_at(features: FeatureSet, p: IndexLike, q: IndexLike, z) -> np.ndarray:
    """s^{p,q} as a function of the difference z = x - y, batched over rows of z."""
    p = as_multi_index(p, features.d)
    q = as_multi_index(q, features.d)
    Z = _points(z, features.d)
    coef = derivative_coefficients(features, p, q)
    a = (p + q).order
    out = np.empty(Z.shape[0])
    for sl in _chunks(Z.shape[0], features.m):
        out[sl] = (phase(a, _project(Z[sl], features.omegas)) * coef).sum(axis=1) / features.m
    return out


def mean_deviation_at(features: FeatureSet, p: IndexLike, q: IndexLike, z, target) -> np.ndarray:
    """(1/m) sum_j (target - summand_j): the error target - s^{p,q}, averaged term by term.

    Equal to ``target - estimate_derivative_at(...)`` in exact arithmetic; every
    term vanishes exactly when the frequencies are the atoms of a point mass.
    """
    p = as_multi_index(p, features.d)
    q = as_multi_index(q, features.d)
    Z = _points(z, features.d)
    target = np.broadcast_to(np.asarray(target, dtype=float), (Z.shape[0],))
    coef = derivative_coefficients(features, p, q)
    a = (p + q).order
    out = np.empty(Z.shape[0])
    for sl in _chunks(Z.shape[0], features.m):
        terms = target[sl, None] - phase(a, _project(Z[sl], features.omegas)) * coef
        out[sl] = terms.sum(axis=1) / features.m
    return out


def _pair(features_d: int, x, y):
    X = _points(x, features_d)
    Y = _points(y, features_d)
    if X.shape != Y.shape:
        if X.shape[0] == 1 or Y.shape[0] == 1:
            X, Y = np.broadcast_arrays(X, Y)
        else:
            raise DimensionMismatch(f"x has shape {X.shape}, y has shape {Y.shape}")
    single = np.asarray(x).ndim <= 1 and np.asarray(y).ndim <= 1 and X.shape[0] == 1
    return X - Y, single


def estimate_derivative(features: FeatureSet, p: IndexLike, q: IndexLike, x, y):
    """s^{p,q}(x, y) = (1/m) sum_j omega_j^p (-omega_j)^q h_|p+q|(omega_j^T (x - y))."""
    Z, single = _pair(features.d, x, y)
    out = estimate_derivative_at(features, p, q, Z)
    return float(out[0]) if single else out


def estimate_kernel(features: FeatureSet, x, y):
    """k_hat(x, y) = (1/m) sum_j cos(omega_j^T (x - y))."""
    zero = MultiIndex.zeros(features.d)
    return estimate_derivative(features, zero, zero, x, y)


def _check_order(p: MultiIndex, q: MultiIndex):
    if (p + q).order > MAX_ORACLE_ORDER:
        raise UnsupportedOrder(f"|p+q| = {(p + q).order} exceeds the supported order {MAX_ORACLE_ORDER}")


def target_derivative_at(measure: SpectralMeasure, p: IndexLike, q: IndexLike, z,
                         check_order: bool = True) -> np.ndarray:
    """d^{p,q} k as a function of z = x - y, i.e. (-1)^|q| psi^(p+q)(z)."""
    p = as_multi_index(p, measure.d)
    q = as_multi_index(q, measure.d)
    if check_order:
        _check_order(p, q)
    n = p + q
    sign = -1.0 if q.order % 2 else 1.0
    return sign * measure.integral(n, n.order, _points(z, measure.d))


def target_gradient_at(measure: SpectralMeasure, p: IndexLike, q: IndexLike, z) -> np.ndarray:
    """Gradient in z of d^{p,q} k(z); shape (n, d)."""
    p = as_multi_index(p, measure.d)
    q = as_multi_index(q, measure.d)
    Z = _points(z, measure.d)
    n = p + q
    sign = -1.0 if q.order % 2 else 1.0
    cols = [sign * measure.integral(n + MultiIndex.unit(measure.d, i), n.order + 1, Z)
            for i in range(measure.d)]
    return np.stack(cols, axis=1)


def target_derivative(measure: SpectralMeasure, p: IndexLike, q: IndexLike, x, y):
    """Exact d^{p,q} k(x, y) for |p+q| <= 4.

    Discrete measures use the finite sum; Gaussian and uniform-box measures
    factor over coordinates into Hermite and trigonometric-moment closed forms.
    """
    Z, single = _pair(measure.d, x, y)
    out = target_derivative_at(measure, p, q, Z)
    return float(out[0]) if single else out


_STENCILS = {
    0: ((0,), (1.0,)),
    1: ((-1, 1), (-0.5, 0.5)),
    2: ((-1, 0, 1), (1.0, -2.0, 1.0)),
    3: ((-2, -1, 1, 2), (-0.5, 1.0, -1.0, 0.5)),
    4: ((-2, -1, 0, 1, 2), (1.0, -4.0, 6.0, -4.0, 1.0)),
}


def _fd_once(measure: SpectralMeasure, n: MultiIndex, Z: np.ndarray, h: float) -> np.ndarray:
    out = np.zeros(Z.shape[0])
    grids = [_STENCILS[k] for k in n.entries]
    for combo in np.ndindex(*[len(g[0]) for g in grids]):
        shift = np.array([grids[i][0][c] for i, c in enumerate(combo)], dtype=float) * h
        w = np.prod([grids[i][1][c] for i, c in enumerate(combo)])
        out += w * measure.characteristic(Z + shift)
    return out / h ** n.order


def fd_derivative(measure: SpectralMeasure, p: IndexLike, q: IndexLike, z) -> np.ndarray:
    """Finite-difference oracle for d^{p,q} k(z): central differences of psi
    with one Richardson step.  Independent of the closed forms above."""
    p = as_multi_index(p, measure.d)
    q = as_multi_index(q, measure.d)
    _check_order(p, q)
    n = p + q
    Z = _points(z, measure.d)
    sign = -1.0 if q.order % 2 else 1.0
    if n.is_zero():
        return sign * measure.characteristic(Z)
    h = 1e-3 if n.order <= 2 else 1e-2
    coarse = _fd_once(measure, n, Z, h)
    fine = _fd_once(measure, n, Z, h / 2)
    return sign * (4.0 * fine - coarse) / 3.0
