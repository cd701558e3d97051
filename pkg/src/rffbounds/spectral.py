"""Spectral measures of shift-invariant kernels.

A shift-invariant kernel k(x, y) = psi(x - y) is the Fourier transform of a
probability measure Lambda on R^d.  This module holds the three shipped
families of Lambda, their characteristic functions psi, the frequency sampler
and the moment functionals consumed by the error bounds.

Cauchy/Laplace spectral measures are intentionally absent: their second
moment is infinite, which makes the uniform bound vacuous.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.special import gammaln

from ._trig import phase, project
from .errors import DimensionMismatch, UnboundedSupport, ValidationError
from .multiindex import IndexLike, MultiIndex, as_multi_index

_SERIES_CUTOFF = 5.0
_SERIES_TERMS = 40


def _as_points(z, d: int) -> np.ndarray:
    z = np.asarray(z, dtype=float)
    if z.ndim == 0:
        z = z.reshape(1, 1)
    elif z.ndim == 1:
        z = z.reshape(1, -1) if d != 1 or z.shape[0] == 1 else z.reshape(-1, 1)
    if z.shape[-1] != d:
        raise DimensionMismatch(f"expected points of dimension {d}, got shape {z.shape}")
    return z


def _re_i_power(k: int) -> float:
    """Real part of i**k."""
    return (1.0, 0.0, -1.0, 0.0)[k % 4]


def _trig_moment(n: int, t: np.ndarray) -> np.ndarray:
    """int_0^1 u^n cos(u t) du for even n, int_0^1 u^n sin(u t) du for odd n."""
    t = np.asarray(t, dtype=float)
    out = np.empty_like(t)
    small = np.abs(t) <= _SERIES_CUTOFF

    ts = t[small]
    acc = np.zeros_like(ts)
    odd = n % 2
    for k in range(_SERIES_TERMS):
        j = 2 * k + odd
        acc += (-1) ** k * ts**j / (math.factorial(j) * (n + j + 1))
    out[small] = acc

    tl = t[~small]
    if tl.size:
        s, c = np.sin(tl), np.cos(tl)
        C = s / tl
        S = (1.0 - c) / tl
        for k in range(1, n + 1):
            C, S = s / tl - (k / tl) * S, -c / tl + (k / tl) * C
        out[~small] = C if n % 2 == 0 else S
    return out


def _abs_moment_gaussian(k: int, scale: float) -> float:
    """E|X|^k for X ~ N(0, scale^2)."""
    if k == 0:
        return 1.0
    return float(np.exp(k * np.log(scale) + 0.5 * k * np.log(2.0) + gammaln((k + 1) / 2) - 0.5 * np.log(np.pi)))


def _abs_moment_uniform(k: int, R: float) -> float:
    """E|X|^k for X ~ U[-R, R]."""
    return R**k / (k + 1)


@dataclass(frozen=True)
class MomentReport:
    """Moment functionals of a spectral measure for a derivative pair (p, q).

    ``T`` is ``math.inf`` for unbounded support with p+q != 0.  Entries that
    were not requested are ``None``.  ``exact`` is False when any entry came
    from Monte Carlo, in which case ``mc_samples`` and ``stderr`` are set.
    """

    sigma2: Optional[float] = None
    T: Optional[float] = None
    C: Optional[float] = None
    E: Optional[float] = None
    exact: bool = True
    mc_samples: Optional[int] = None
    stderr: Optional[float] = None

    def to_dict(self) -> dict:
        return {
            "sigma2": self.sigma2,
            "T": self.T,
            "C": self.C,
            "E": self.E,
            "exact": self.exact,
            "mc_samples": self.mc_samples,
            "stderr": self.stderr,
        }


class SpectralMeasure:
    """Base class; concrete variants are frozen dataclasses below."""

    d: int
    bounded_support: bool = False

    @property
    def measure_id(self) -> str:
        raise NotImplementedError

    def sample(self, rng: np.random.Generator, m: int) -> np.ndarray:
        raise NotImplementedError

    def characteristic(self, z: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def integral(self, n: MultiIndex, a: int, z: np.ndarray) -> np.ndarray:
        """E[omega^n h_a(omega^T z)] for each row of z, h_a = cos(pi a/2 + .)."""
        raise NotImplementedError

    def abs_moment_1d(self, k: int) -> float:
        """E|omega_1|^k for product measures."""
        raise NotImplementedError


@dataclass(frozen=True)
class GaussianIso(SpectralMeasure):
    """N(0, gamma^-2 I): the spectral measure of the Gaussian kernel of length-scale gamma."""

    d: int
    gamma: float = 1.0

    def __post_init__(self):
        if self.d < 1:
            raise ValidationError("dimension must be >= 1")
        if not self.gamma > 0:
            raise ValidationError("gamma must be > 0")

    @property
    def measure_id(self) -> str:
        return f"gaussian(d={self.d},gamma={self.gamma!r})"

    def sample(self, rng, m):
        return rng.standard_normal((m, self.d)) / self.gamma

    def characteristic(self, z):
        z = _as_points(z, self.d)
        return np.exp(-0.5 * np.sum(z * z, axis=-1) / self.gamma**2)

    def integral(self, n, a, z):
        z = _as_points(z, self.d)
        sign = _re_i_power(a + n.order)
        if sign == 0.0:
            return np.zeros(z.shape[:-1])
        u = z / self.gamma
        out = sign * self.gamma ** (-n.order) * self.characteristic(z)
        for i, k in enumerate(n.entries):
            if k:
                coef = np.zeros(k + 1)
                coef[k] = 1.0
                out = out * np.polynomial.hermite_e.hermeval(u[..., i], coef)
        return out

    def abs_moment_1d(self, k):
        return _abs_moment_gaussian(k, 1.0 / self.gamma)


@dataclass(frozen=True)
class UniformBox(SpectralMeasure):
    """Uniform distribution on [-R, R]^d (a product of sinc kernels)."""

    d: int
    R: float = 1.0
    bounded_support = True

    def __post_init__(self):
        if self.d < 1:
            raise ValidationError("dimension must be >= 1")
        if not self.R > 0:
            raise ValidationError("R must be > 0")

    @property
    def measure_id(self) -> str:
        return f"uniform(d={self.d},R={self.R!r})"

    def sample(self, rng, m):
        return rng.uniform(-self.R, self.R, size=(m, self.d))

    def characteristic(self, z):
        z = _as_points(z, self.d)
        return np.prod(np.sinc(self.R * z / np.pi), axis=-1)

    def integral(self, n, a, z):
        z = _as_points(z, self.d)
        parity = sum(k % 2 for k in n.entries)
        sign = _re_i_power(a + parity)
        if sign == 0.0:
            return np.zeros(z.shape[:-1])
        out = np.full(z.shape[:-1], sign)
        for i, k in enumerate(n.entries):
            out = out * self.R**k * _trig_moment(k, self.R * z[..., i])
        return out

    def abs_moment_1d(self, k):
        return _abs_moment_uniform(k, self.R)


@dataclass(frozen=True, eq=False)
class Discrete(SpectralMeasure):
    """Finitely supported measure sum_i w_i delta_{atoms_i}.

    Only symmetric atom sets give a real-valued characteristic function that
    equals the cosine average used here; the kernel is defined through that
    cosine average either way.
    """

    d: int
    atoms: np.ndarray = field(default=None)
    weights: Optional[np.ndarray] = None
    bounded_support = True

    def __post_init__(self):
        atoms = np.array(self.atoms, dtype=float)
        if atoms.ndim == 1:
            atoms = atoms.reshape(-1, self.d)
        if atoms.ndim != 2 or atoms.shape[1] != self.d or atoms.shape[0] == 0:
            raise DimensionMismatch(f"atoms must be a non-empty (n, {self.d}) array")
        if self.weights is None:
            w = np.full(atoms.shape[0], 1.0 / atoms.shape[0])
        else:
            w = np.array(self.weights, dtype=float).reshape(-1)
        if w.shape[0] != atoms.shape[0]:
            raise ValidationError("weights and atoms differ in length")
        if np.any(w < 0) or abs(w.sum() - 1.0) > 1e-12:
            raise ValidationError("weights must be nonnegative and sum to 1")
        atoms.setflags(write=False)
        w.setflags(write=False)
        object.__setattr__(self, "atoms", atoms)
        object.__setattr__(self, "weights", w)

    @property
    def support(self) -> np.ndarray:
        return self.atoms[self.weights > 0]

    @property
    def measure_id(self) -> str:
        pts = ";".join(",".join(repr(float(v)) for v in row) for row in self.atoms)
        ws = ",".join(repr(float(v)) for v in self.weights)
        return f"discrete(d={self.d},atoms={pts},weights={ws})"

    def sample(self, rng, m):
        idx = rng.choice(self.atoms.shape[0], size=m, p=self.weights)
        return self.atoms[idx].copy()

    def characteristic(self, z):
        z = _as_points(z, self.d)
        return (np.cos(project(z, self.atoms)) * self.weights).sum(axis=1)

    def integral(self, n, a, z):
        z = _as_points(z, self.d)
        coef = n.monomial(self.atoms) * self.weights
        return (phase(a, project(z, self.atoms)) * coef).sum(axis=1)


def second_moment(measure: SpectralMeasure) -> float:
    """sigma^2 = E ||omega||^2."""
    if isinstance(measure, GaussianIso):
        return measure.d / measure.gamma**2
    if isinstance(measure, UniformBox):
        return measure.d * measure.R**2 / 3.0
    if isinstance(measure, Discrete):
        return float(np.sum(measure.weights * np.sum(measure.atoms**2, axis=1)))
    return math.inf


def _pair_index(measure: SpectralMeasure, p: IndexLike, q: IndexLike) -> MultiIndex:
    return as_multi_index(p, measure.d) + as_multi_index(q, measure.d)


def sup_moment_T(measure: SpectralMeasure, p: IndexLike, q: IndexLike) -> float:
    """sup over supp(Lambda) of |omega^(p+q)|."""
    n = _pair_index(measure, p, q)
    if n.is_zero():
        return 1.0
    if isinstance(measure, UniformBox):
        return measure.R ** n.order
    if isinstance(measure, Discrete):
        return float(np.max(np.abs(n.monomial(measure.support))))
    raise UnboundedSupport(f"{measure.measure_id} has unbounded support; T is infinite for p+q={n}")


def _product_moment(measure: SpectralMeasure, n: MultiIndex, extra: int) -> float:
    """E[|omega^n| sum_i |omega_i|^extra] for measures with i.i.d. coordinates."""
    base = [measure.abs_moment_1d(k) for k in n.entries]
    total = 0.0
    for i, k in enumerate(n.entries):
        term = measure.abs_moment_1d(k + extra)
        for j, b in enumerate(base):
            if j != i:
                term *= b
        total += term
    return total


def _mc_moment(measure, n: MultiIndex, power: float, mc_samples: Optional[int], seed: int):
    if mc_samples is None or mc_samples < 2:
        raise ValidationError(
            f"no closed form for this moment of {measure.measure_id}; pass mc_samples >= 2"
        )
    rng = np.random.default_rng(seed)
    om = measure.sample(rng, int(mc_samples))
    vals = np.abs(n.monomial(om)) * np.linalg.norm(om, axis=1) ** power
    return float(vals.mean()), float(vals.std(ddof=1) / math.sqrt(mc_samples))


def _moment(measure, n: MultiIndex, power: int, mc_samples, seed):
    """Returns (value, exact, stderr) for E[|omega^n| ||omega||_2^power]."""
    if isinstance(measure, Discrete):
        vals = np.abs(n.monomial(measure.atoms)) * np.linalg.norm(measure.atoms, axis=1) ** power
        return float(vals @ measure.weights), True, None
    if isinstance(measure, (GaussianIso, UniformBox)):
        if power == 2:
            return _product_moment(measure, n, 2), True, None
        if measure.d == 1:
            return measure.abs_moment_1d(n.entries[0] + power), True, None
    value, se = _mc_moment(measure, n, power, mc_samples, seed)
    return value, False, se


def moment_C(measure: SpectralMeasure, p: IndexLike, q: IndexLike,
             mc_samples: Optional[int] = None, seed: int = 0) -> MomentReport:
    """C_{p,q} = E[|omega^(p+q)| ||omega||_2^2]."""
    value, exact, se = _moment(measure, _pair_index(measure, p, q), 2, mc_samples, seed)
    return MomentReport(C=value, exact=exact, mc_samples=None if exact else mc_samples, stderr=se)


def moment_E(measure: SpectralMeasure, p: IndexLike, q: IndexLike,
             mc_samples: Optional[int] = None, seed: int = 0) -> MomentReport:
    """E_{p,q} = E[|omega^(p+q)| ||omega||_2]."""
    value, exact, se = _moment(measure, _pair_index(measure, p, q), 1, mc_samples, seed)
    return MomentReport(E=value, exact=exact, mc_samples=None if exact else mc_samples, stderr=se)


def moment_report(measure: SpectralMeasure, p: IndexLike, q: IndexLike,
                  mc_samples: Optional[int] = None, seed: int = 0) -> MomentReport:
    """All moment functionals for (p, q) in one report."""
    try:
        T = sup_moment_T(measure, p, q)
    except UnboundedSupport:
        T = math.inf
    c = moment_C(measure, p, q, mc_samples, seed)
    e = moment_E(measure, p, q, mc_samples, seed)
    exact = c.exact and e.exact
    return MomentReport(
        sigma2=second_moment(measure), T=T, C=c.C, E=e.E, exact=exact,
        mc_samples=None if exact else mc_samples,
        stderr=None if exact else max(s for s in (c.stderr, e.stderr) if s is not None),
    )


def characteristic_fn(measure: SpectralMeasure, z) -> np.ndarray | float:
    """psi(z) = int cos(omega^T z) dLambda(omega); k(x, y) = psi(x - y)."""
    z_arr = np.asarray(z, dtype=float)
    out = measure.characteristic(z_arr)
    if z_arr.ndim <= 1:
        return float(out[0]) if out.size == 1 else out
    return out


@dataclass(frozen=True, eq=False)
class FeatureSet:
    """m frequencies drawn i.i.d. from a spectral measure, with provenance."""

    omegas: np.ndarray
    measure_id: str = ""
    seed: Optional[int] = None

    def __post_init__(self):
        om = np.array(self.omegas, dtype=float)
        if om.ndim == 1:
            om = om.reshape(-1, 1)
        if om.ndim != 2 or om.shape[0] < 1:
            raise ValidationError("omegas must be a non-empty (m, d) array")
        om.setflags(write=False)
        object.__setattr__(self, "omegas", om)

    @property
    def m(self) -> int:
        return self.omegas.shape[0]

    @property
    def d(self) -> int:
        return self.omegas.shape[1]

    def save(self, path) -> None:
        """Write a CSV dump: a one-line header then the row-major omega matrix."""
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(f"# m={self.m} d={self.d} seed={self.seed} measure_id={self.measure_id}\n")
            for row in self.omegas:
                fh.write(",".join(f"{v:.17g}" for v in row) + "\n")

    @classmethod
    def load(cls, path) -> "FeatureSet":
        with open(path, "r", encoding="utf-8") as fh:
            header = fh.readline()
            rows = [[float(v) for v in line.split(",")] for line in fh if line.strip()]
        if not header.startswith("#"):
            raise ValidationError(f"{path}: missing feature-set header")
        meta = {}
        rest = header[1:].strip()
        head, _, mid = rest.partition(" measure_id=")
        for tok in head.split():
            k, _, v = tok.partition("=")
            meta[k] = v
        d = int(meta["d"])
        om = np.array(rows, dtype=float).reshape(-1, d)
        if om.shape[0] != int(meta["m"]):
            raise ValidationError(f"{path}: header says m={meta['m']}, found {om.shape[0]} rows")
        seed = None if meta.get("seed") in (None, "None") else int(meta["seed"])
        return cls(om, measure_id=mid, seed=seed)


def sample_frequencies(measure: SpectralMeasure, m: int, seed: int) -> FeatureSet:
    """Draw m i.i.d. frequencies; a pure function of (measure, m, seed)."""
    if int(m) < 1:
        raise ValidationError("m must be >= 1")
    seed = int(seed) % 2**64
    rng = np.random.default_rng(seed)
    return FeatureSet(measure.sample(rng, int(m)), measure_id=measure.measure_id, seed=seed)
