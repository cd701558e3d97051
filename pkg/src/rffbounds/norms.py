"""Error norms of the random-feature estimators over compact sets.

Both k and its estimators depend on (x, y) only through z = x - y, so the
sup over S x S is a sup over the difference set S_D = {x - y}.  The sup is
certified: the error is evaluated on a grid over S_D and a Lipschitz bound
of the error field turns the grid max into an upper bound on the true sup.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Union

import numpy as np
from scipy.signal import correlate
from scipy.special import gammaln

from .errors import DimensionMismatch, GridBudgetExceeded, UnsupportedDimension, ValidationError
from .features import mean_deviation_at, target_derivative_at, target_gradient_at
from .multiindex import IndexLike, as_multi_index
from .spectral import FeatureSet, GaussianIso, SpectralMeasure

DEFAULT_TARGET_SLACK = 1e-3
DEFAULT_MAX_POINTS = 2**24
GRADIENT_GRID = 65


@dataclass(frozen=True, eq=False)
class Box:
    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        lo = np.atleast_1d(np.array(self.lower, dtype=float))
        hi = np.atleast_1d(np.array(self.upper, dtype=float))
        if lo.shape != hi.shape or lo.ndim != 1:
            raise DimensionMismatch("lower and upper must be vectors of equal length")
        if np.any(lo > hi):
            raise ValidationError("box needs lower <= upper coordinatewise")
        lo.setflags(write=False)
        hi.setflags(write=False)
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)

    @property
    def d(self) -> int:
        return self.lower.shape[0]

    @property
    def diameter(self) -> float:
        return float(np.linalg.norm(self.upper - self.lower))

    @property
    def volume(self) -> float:
        return float(np.prod(self.upper - self.lower))

    @property
    def center(self) -> np.ndarray:
        return 0.5 * (self.lower + self.upper)

    def difference_set(self) -> "Box":
        w = self.upper - self.lower
        return Box(-w, w)

    def translated(self, c) -> "Box":
        return Box(self.lower + c, self.upper + c)

    def scaled_to_diameter(self, diam: float) -> "Box":
        """Same center and aspect ratio, diameter ``diam``."""
        if self.diameter == 0:
            raise ValidationError("cannot rescale a degenerate box")
        half = 0.5 * (self.upper - self.lower) * diam / self.diameter
        return Box(self.center - half, self.center + half)

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        return rng.uniform(self.lower, self.upper, size=(n, self.d))

    def bounding_box(self) -> "Box":
        return self

    def project(self, z: np.ndarray) -> np.ndarray:
        return np.clip(z, self.lower, self.upper)

    def contains(self, z: np.ndarray) -> np.ndarray:
        return np.all((z >= self.lower) & (z <= self.upper), axis=-1)


@dataclass(frozen=True, eq=False)
class Ball:
    center: np.ndarray
    radius: float

    def __post_init__(self):
        c = np.atleast_1d(np.array(self.center, dtype=float))
        if c.ndim != 1:
            raise DimensionMismatch("center must be a vector")
        if not self.radius > 0:
            raise ValidationError("ball radius must be > 0")
        c.setflags(write=False)
        object.__setattr__(self, "center", c)
        object.__setattr__(self, "radius", float(self.radius))

    @property
    def d(self) -> int:
        return self.center.shape[0]

    @property
    def diameter(self) -> float:
        return 2.0 * self.radius

    @property
    def volume(self) -> float:
        d = self.d
        return float(np.exp(0.5 * d * np.log(np.pi) + d * np.log(self.radius) - gammaln(d / 2 + 1)))

    def difference_set(self) -> "Ball":
        return Ball(np.zeros(self.d), 2.0 * self.radius)

    def translated(self, c) -> "Ball":
        return Ball(self.center + c, self.radius)

    def scaled_to_diameter(self, diam: float) -> "Ball":
        return Ball(self.center, 0.5 * diam)

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        g = rng.standard_normal((n, self.d))
        g /= np.linalg.norm(g, axis=1, keepdims=True)
        r = self.radius * rng.uniform(size=(n, 1)) ** (1.0 / self.d)
        return self.center + r * g

    def bounding_box(self) -> Box:
        return Box(self.center - self.radius, self.center + self.radius)

    def project(self, z: np.ndarray) -> np.ndarray:
        off = z - self.center
        nrm = np.linalg.norm(off, axis=-1, keepdims=True)
        scale = np.where(nrm > self.radius, self.radius / np.where(nrm > 0, nrm, 1.0), 1.0)
        return self.center + off * scale

    def contains(self, z: np.ndarray) -> np.ndarray:
        return np.linalg.norm(z - self.center, axis=-1) <= self.radius


CompactSet = Union[Box, Ball]


def difference_set(s: CompactSet) -> CompactSet:
    """S_D = {x - y : x, y in S}, convex and symmetric about 0."""
    return s.difference_set()


@dataclass(frozen=True)
class ErrorReport:
    value: float
    certificate_slack: float
    grid_points: int
    lipschitz_bound: Optional[float]
    norm_kind: str

    @property
    def upper(self) -> float:
        """Certified upper bound on the true norm."""
        return self.value + self.certificate_slack


def _max_radius(sd: CompactSet) -> float:
    if isinstance(sd, Ball):
        return sd.radius
    return float(np.linalg.norm(sd.upper))


def _symmetric_grid(sd: CompactSet, intervals: np.ndarray, half: bool) -> np.ndarray:
    """Uniform grid over the bounding box of S_D with ``intervals`` cells per axis.

    With ``half`` only points with z_1 >= 0 are kept (the error is even in z).
    Points outside a ball are projected onto it, which never increases their
    distance to points of the ball.
    """
    box = sd.bounding_box()
    axes = []
    for i in range(sd.d):
        n = int(intervals[i])
        ax = np.linspace(box.lower[i], box.upper[i], n + 1) if n > 0 else np.array([0.0])
        if half and i == 0 and n > 0:
            ax = ax[n // 2:] if n % 2 == 0 else ax[(n + 1) // 2:]
        axes.append(ax)
    mesh = np.meshgrid(*axes, indexing="ij")
    pts = np.stack([m.reshape(-1) for m in mesh], axis=1)
    if isinstance(sd, Ball):
        pts = sd.project(pts)
    return pts


def _grid_size(intervals: np.ndarray, half: bool) -> int:
    sizes = [int(n) + 1 if n > 0 else 1 for n in intervals]
    if half and intervals[0] > 0:
        n0 = int(intervals[0])
        sizes[0] = n0 - (n0 // 2 if n0 % 2 == 0 else (n0 + 1) // 2) + 1
    return int(np.prod(sizes, dtype=float))


def gradient_sup(measure: SpectralMeasure, p: IndexLike, q: IndexLike, s: CompactSet,
                 max_points: int = DEFAULT_MAX_POINTS) -> tuple[float, bool]:
    """D = sup over conv(S_D) of ||grad_z d^{p,q} k(z)||_2.

    Returns ``(value, exact)``.  The Gaussian kernel itself has a radial closed
    form; everything else is a grid maximization with one refinement pass,
    which is an estimate from below.
    """
    p = as_multi_index(p, measure.d)
    q = as_multi_index(q, measure.d)
    sd = difference_set(s)
    if isinstance(measure, GaussianIso) and (p + q).is_zero():
        g = measure.gamma
        r = min(g, _max_radius(sd))
        return r / g**2 * math.exp(-0.5 * r * r / g**2), True

    def grad_norm(Z):
        return np.linalg.norm(target_gradient_at(measure, p, q, Z), axis=1)

    if GRADIENT_GRID ** sd.d > max_points:
        raise GridBudgetExceeded(f"gradient grid needs {GRADIENT_GRID}^{sd.d} points")
    intervals = np.full(sd.d, GRADIENT_GRID - 1)
    Z = _symmetric_grid(sd, intervals, half=False)
    vals = grad_norm(Z)
    k = int(np.argmax(vals))
    best = float(vals[k])
    box = sd.bounding_box()
    step = (box.upper - box.lower) / (GRADIENT_GRID - 1)
    local = Box(np.maximum(Z[k] - step, box.lower), np.minimum(Z[k] + step, box.upper))
    Zl = _symmetric_grid(local, intervals, half=False)
    if isinstance(sd, Ball):
        Zl = sd.project(Zl)
    best = max(best, float(np.max(grad_norm(Zl))))
    return best, False


def _empirical_gradient_term(features: FeatureSet, p, q) -> float:
    om = features.omegas
    return float(np.mean(np.abs((p + q).monomial(om)) * np.linalg.norm(om, axis=1)))


def lipschitz_terms(features: FeatureSet, p: IndexLike, q: IndexLike, measure: SpectralMeasure,
                    s: CompactSet, D: Optional[float] = None) -> tuple[float, float]:
    """(D term, empirical term) of the Lipschitz bound of z -> d^{p,q}k(z) - s^{p,q}(z).

    A grid estimate of D is doubled; a closed form or caller-supplied D is used as is.
    """
    p = as_multi_index(p, features.d)
    q = as_multi_index(q, features.d)
    if D is None:
        D, exact = gradient_sup(measure, p, q, s)
        if not exact:
            D *= 2.0
    return float(D), _empirical_gradient_term(features, p, q)


def empirical_lipschitz(features: FeatureSet, p: IndexLike, q: IndexLike, measure: SpectralMeasure,
                        s: CompactSet, D: Optional[float] = None) -> float:
    """D + (1/m) sum_j |omega_j^(p+q)| ||omega_j||_2."""
    return sum(lipschitz_terms(features, p, q, measure, s, D))


def error_field(features: FeatureSet, p, q, measure: SpectralMeasure) -> Callable[[np.ndarray], np.ndarray]:
    """z -> d^{p,q}k(z) - s^{p,q}(z)."""
    def f(Z):
        return mean_deviation_at(features, p, q, Z, target_derivative_at(measure, p, q, Z))
    return f


def sup_grid(s: CompactSet, lipschitz: float, target_slack: float,
             max_points: int = DEFAULT_MAX_POINTS, refine: int = 1) -> tuple[np.ndarray, float]:
    """Half grid over S_D fine enough that lipschitz * covering radius <= target_slack.

    Cells per axis are powers of two so that grids for smaller slacks (or a
    larger ``refine`` factor) contain the coarser ones.  Returns the points and
    the achieved certificate slack.
    """
    if not target_slack > 0:
        raise ValidationError("target_slack must be > 0")
    sd = difference_set(s)
    box = sd.bounding_box()
    width = box.upper - box.lower
    d = sd.d
    if lipschitz <= 0:
        intervals = np.zeros(d, dtype=int)
    else:
        h = 2.0 * target_slack / (lipschitz * math.sqrt(d))
        intervals = np.array([0 if w == 0 else 2 ** max(0, math.ceil(math.log2(w / h))) for w in width])
        intervals = intervals * int(refine)
    npts = _grid_size(intervals, half=True)
    if npts > max_points:
        raise GridBudgetExceeded(
            f"certificate needs {npts} grid points (cap {max_points}); raise target_slack"
        )
    spacing = np.where(intervals > 0, width / np.maximum(intervals, 1), width)
    slack = 0.0 if lipschitz <= 0 else lipschitz * 0.5 * float(np.linalg.norm(spacing))
    return _symmetric_grid(sd, intervals, half=True), slack


def sup_error_certified(features: FeatureSet, p: IndexLike, q: IndexLike, measure: SpectralMeasure,
                        s: CompactSet, target_slack: float = DEFAULT_TARGET_SLACK,
                        max_points: int = DEFAULT_MAX_POINTS, D: Optional[float] = None,
                        refine: int = 1) -> ErrorReport:
    """Certified sup over S x S of |d^{p,q}k - s^{p,q}|.

    ``value`` is the grid max (a lower bound on the true sup) and
    ``value + certificate_slack`` an upper bound.
    """
    p = as_multi_index(p, features.d)
    q = as_multi_index(q, features.d)
    if s.d != features.d:
        raise DimensionMismatch(f"set of dimension {s.d} for features of dimension {features.d}")
    L = empirical_lipschitz(features, p, q, measure, s, D)
    Z, slack = sup_grid(s, L, target_slack, max_points, refine)
    err = np.abs(error_field(features, p, q, measure)(Z))
    return ErrorReport(float(err.max()), slack, Z.shape[0], L, "sup")


@dataclass(frozen=True)
class Quadrature:
    """``grid``: tensor midpoint rule with n nodes per axis; ``mc``: n uniform pairs."""

    kind: str = "grid"
    n: int = 64
    seed: int = 0

    @classmethod
    def default(cls, d: int) -> "Quadrature":
        if d == 1:
            return cls("grid", 64)
        if d == 2:
            return cls("grid", 32)
        if d == 3:
            return cls("grid", 12)
        return cls("mc", 200_000)


def _midpoint_lattice(s: CompactSet, n: int):
    """Distinct differences of midpoint nodes in S and their multiplicities."""
    box = s.bounding_box()
    h = (box.upper - box.lower) / n
    centers = [box.lower[i] + (np.arange(n) + 0.5) * h[i] for i in range(s.d)]
    if isinstance(s, Box):
        ks = [np.arange(-(n - 1), n) for _ in range(s.d)]
        mesh = np.meshgrid(*ks, indexing="ij")
        mult = np.ones(mesh[0].shape)
        for k in mesh:
            mult = mult * (n - np.abs(k))
        n_nodes = n**s.d
    else:
        mesh_c = np.meshgrid(*centers, indexing="ij")
        pts = np.stack([m.reshape(-1) for m in mesh_c], axis=1)
        mask = s.contains(pts).reshape((n,) * s.d).astype(float)
        mult = np.rint(correlate(mask, mask, mode="full", method="auto"))
        ks = [np.arange(-(n - 1), n) for _ in range(s.d)]
        mesh = np.meshgrid(*ks, indexing="ij")
        n_nodes = int(mask.sum())
    Z = np.stack([mesh[i].reshape(-1) * h[i] for i in range(s.d)], axis=1)
    w = mult.reshape(-1)
    keep = w > 0
    return Z[keep], w[keep], float(np.prod(h)), n_nodes


def lr_norm_of_field(field: Callable[[np.ndarray], np.ndarray], s: CompactSet, r: float,
                     quadrature: Optional[Quadrature] = None) -> ErrorReport:
    """(int_S int_S |e(x - y)|^r dx dy)^(1/r) for an error field e of the difference."""
    if not r >= 1:
        raise ValidationError("r must be >= 1")
    quad = quadrature or Quadrature.default(s.d)
    kind = f"Lr({r:g})"
    if quad.kind == "grid":
        if s.d > 3:
            raise UnsupportedDimension("tensor-grid quadrature supports d <= 3")
        Z, w, cell, n_nodes = _midpoint_lattice(s, int(quad.n))
        vals = np.abs(field(Z)) ** r
        integral = float(np.sum(w * vals)) * cell**2
        return ErrorReport(integral ** (1.0 / r), 0.0, n_nodes, None, kind)
    if quad.kind == "mc":
        rng = np.random.default_rng(quad.seed)
        x = s.sample(rng, int(quad.n))
        y = s.sample(rng, int(quad.n))
        vals = np.abs(field(x - y)) ** r
        vol2 = s.volume**2
        integral = vol2 * float(vals.mean())
        se = vol2 * float(vals.std(ddof=1)) / math.sqrt(quad.n)
        value = integral ** (1.0 / r)
        slack = value / (r * integral) * se if integral > 0 else 0.0
        return ErrorReport(value, slack, int(quad.n), None, kind)
    raise ValidationError(f"unknown quadrature kind {quad.kind!r}")


def lr_error(features: FeatureSet, p: IndexLike, q: IndexLike, measure: SpectralMeasure,
             s: CompactSet, r: float, quadrature: Optional[Quadrature] = None) -> ErrorReport:
    """L^r(S x S) norm of d^{p,q}k - s^{p,q}."""
    p = as_multi_index(p, features.d)
    q = as_multi_index(q, features.d)
    return lr_norm_of_field(error_field(features, p, q, measure), s, r, quadrature)
