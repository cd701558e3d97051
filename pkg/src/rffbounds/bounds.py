"""Closed-form finite-sample bounds for random Fourier feature approximations.

Every function evaluates a formula literally; nothing is clamped.  Reports
whose value exceeds the trivial cap are flagged ``vacuous`` instead.

Constant provenance: the additive sqrt(2 tau)/sqrt(m) terms come from the
bounded-difference (McDiarmid) inequality with per-coordinate constant
2T/m, giving deviation T sqrt(2 tau / m) at confidence 1 - e^-tau.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import NamedTuple, Optional

from scipy.special import gammaln

from .errors import InvalidA, InvalidDiameter, InvalidR, UnboundedSupport, ValidationError
from .multiindex import IndexLike, as_multi_index
from .spectral import SpectralMeasure, moment_C, second_moment, sup_moment_T


@dataclass
class BoundReport:
    bound_value: float
    constituents: dict = field(default_factory=dict)
    theorem_tag: str = ""
    confidence: dict = field(default_factory=dict)
    vacuous: bool = False

    def to_dict(self) -> dict:
        return {
            "bound_value": self.bound_value,
            "constituents": dict(self.constituents),
            "theorem_tag": self.theorem_tag,
            "confidence": dict(self.confidence),
            "vacuous": self.vacuous,
        }

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)


def _check_m(m):
    if int(m) < 1:
        raise ValidationError("m must be >= 1")


def _check_tau(tau):
    if not tau > 0:
        raise ValidationError("tau must be > 0")


def thm1_h(d: int, diam: float, sigma: float) -> float:
    """h(d, |S|, sigma), the constant of the uniform kernel bound."""
    if not diam > 0:
        raise InvalidDiameter(f"diameter must be > 0, got {diam}")
    if sigma < 0:
        raise ValidationError("sigma must be >= 0")
    ls = math.log(2.0 * diam + 1.0)
    return (32.0 * math.sqrt(2.0 * d * ls)
            + 32.0 * math.sqrt(2.0 * d * math.log(sigma + 1.0))
            + 16.0 * math.sqrt(2.0 * d / ls))


def thm1_bound(d: int, diam: float, sigma: float, m: int, tau: float) -> BoundReport:
    """(h + sqrt(2 tau)) / sqrt(m): holds with probability >= 1 - e^-tau."""
    _check_m(m)
    _check_tau(tau)
    h = thm1_h(d, diam, sigma)
    value = (h + math.sqrt(2.0 * tau)) / math.sqrt(m)
    return BoundReport(value, {"h": h, "sigma2": sigma**2}, "T1", {"tau": tau}, value > 2.0)


def vol_factor(d: int, diam: float, r: float) -> float:
    """(volume of a ball of diameter diam)^(2/r), through log-gamma."""
    if not r >= 1:
        raise InvalidR("r must be >= 1")
    if diam <= 0:
        return 0.0
    log_vol = 0.5 * d * math.log(math.pi) + d * math.log(diam) - d * math.log(2.0) - gammaln(d / 2 + 1)
    expo = 2.0 / r * log_vol
    return math.inf if expo > 709.0 else math.exp(expo)


def cor1_bound(d: int, diam: float, sigma: float, m: int, tau: float, r: float) -> BoundReport:
    """L^r(S) bound obtained from the uniform bound through the volume of S."""
    base = thm1_bound(d, diam, sigma, m, tau)
    vf = vol_factor(d, diam, r)
    value = vf * base.bound_value
    cons = dict(base.constituents, vol_factor=vf)
    return BoundReport(value, cons, "C1", {"tau": tau, "r": r}, value > 2.0 * vf)


def khintchine(r: float) -> float:
    """C'_r: 1 on (1, 2], sqrt(2) (Gamma((r+1)/2) / sqrt(pi))^(1/r) on [2, inf)."""
    if not r > 1:
        raise InvalidR(f"Khintchine constant needs r > 1, got {r}")
    if r <= 2:
        return 1.0
    return math.sqrt(2.0) * math.exp((gammaln((r + 1) / 2) - 0.5 * math.log(math.pi)) / r)


def thm2_bound(d: int, diam: float, m: int, tau: float, r: float) -> BoundReport:
    """Direct L^r(S) bound via the type of L^r; no sigma and no log|S| factor."""
    _check_m(m)
    _check_tau(tau)
    c = khintchine(r)
    vf = vol_factor(d, diam, r)
    expo = 1.0 - max(0.5, 1.0 / r)
    value = vf * (c / m**expo + math.sqrt(2.0 * tau) / math.sqrt(m))
    return BoundReport(value, {"C_prime_r": c, "vol_factor": vf}, "T2", {"tau": tau, "r": r},
                       value > 2.0 * vf)


def thm3_H(d: int, p: IndexLike, q: IndexLike, diam: float, measure: SpectralMeasure) -> BoundReport:
    """H(d, p, q, |S|) with its constituents U, T_{2p,2q}, C_{2p,2q}.

    ``bound_value`` holds H.  For p = q = 0 this equals thm1_h with
    sigma = sqrt(E||omega||^2).
    """
    if not diam > 0:
        raise InvalidDiameter(f"diameter must be > 0, got {diam}")
    p = as_multi_index(p, measure.d)
    q = as_multi_index(q, measure.d)
    p2, q2 = p.scaled(2), q.scaled(2)
    T2 = sup_moment_T(measure, p2, q2)
    C2 = moment_C(measure, p2, q2).C
    U = math.log(2.0 * diam / math.sqrt(T2) + 1.0)
    H = 32.0 * math.sqrt(2.0 * d * T2) * (
        math.sqrt(U) + 1.0 / (2.0 * math.sqrt(U)) + math.sqrt(math.log(math.sqrt(C2) + 1.0))
    )
    return BoundReport(H, {"H": H, "U": U, "T_2p2q": T2, "C_2p2q": C2}, "T3", {})


def thm3_bound(d: int, p: IndexLike, q: IndexLike, diam: float, measure: SpectralMeasure,
               m: int, tau: float) -> BoundReport:
    """(H + T_{p,q} sqrt(2 tau)) / sqrt(m) for the sup error of s^{p,q}."""
    _check_m(m)
    _check_tau(tau)
    rep = thm3_H(d, p, q, diam, measure)
    T = sup_moment_T(measure, p, q)
    value = (rep.bound_value + T * math.sqrt(2.0 * tau)) / math.sqrt(m)
    cons = dict(rep.constituents, T_pq=T)
    return BoundReport(value, cons, "T3", {"tau": tau}, value > 2.0 * T)


class BernsteinParams(NamedTuple):
    sigma: float
    L: float

    @property
    def sigma2(self) -> float:
        return self.sigma**2


def bernstein_params(measure: SpectralMeasure, p: IndexLike, q: IndexLike) -> BernsteinParams:
    """A certified (sigma, L) for the Bernstein moment condition on bounded support.

    |f| <= 2 T_{p,q} = L / 2 and E f^2 <= T_{2p,2q} = sigma^2.
    """
    if not measure.bounded_support:
        raise UnboundedSupport(f"{measure.measure_id}: Bernstein parameters need bounded support")
    p = as_multi_index(p, measure.d)
    q = as_multi_index(q, measure.d)
    T = sup_moment_T(measure, p, q)
    T2 = sup_moment_T(measure, p.scaled(2), q.scaled(2))
    return BernsteinParams(math.sqrt(T2), 4.0 * T)


def F_d(d: int) -> float:
    return d ** (-d / (d + 1)) + d ** (1.0 / (d + 1))


def thm4_failure_prob(d: int, p: IndexLike, q: IndexLike, eps: float, m: int,
                      measure: Optional[SpectralMeasure], s, sigma_b: float, L_b: float,
                      D: float, E: float) -> BoundReport:
    """Right-hand side bounding P(||d^{p,q}k - s^{p,q}||_{SxS} >= eps).

    ``s`` is the compact set, or directly its diameter |S|.  ``sigma_b`` and
    ``L_b`` must satisfy the Bernstein moment condition; ``D`` is the gradient
    sup and ``E`` the first-order cross moment.  ``p``, ``q`` and ``measure``
    enter only through D, E and the Bernstein pair.
    """
    _check_m(m)
    diam = float(getattr(s, "diameter", s))
    if not eps > 0:
        raise ValidationError("eps must be > 0")
    if not (sigma_b > 0 and L_b > 0):
        raise ValidationError("Bernstein sigma and L must be > 0")
    if diam < 0 or D < 0 or E < 0:
        raise ValidationError("diam, D and E must be >= 0")
    s2 = sigma_b**2
    denom = 8.0 * s2 * (1.0 + eps * L_b / (2.0 * s2))
    expo = m * eps**2 / denom
    fd = F_d(d)
    first = 2.0 ** (d - 1) * math.exp(-expo)
    second = (fd * 2.0 ** ((4 * d - 1) / (d + 1)) * (diam * (D + E) / eps) ** (d / (d + 1))
              * math.exp(-expo / (d + 1)))
    value = first + second
    cons = {"D": D, "E": E, "F_d": fd, "sigma_bernstein": sigma_b, "L_bernstein": L_b}
    return BoundReport(value, cons, "T4", {"eps": eps}, value > 1.0)


def covering_upper(R: float, eps: float, d: int) -> float:
    """(4R/eps + 1)^d, an upper bound on the eps-covering number of a radius-R ball."""
    if not eps > 0:
        raise ValidationError("eps must be > 0")
    return (4.0 * R / eps + 1.0) ** d


def entropy_integral_upper(a: float) -> float:
    """sqrt(log a) + 1/(2 sqrt(log a)), which dominates int_0^1 sqrt(log(a/e)) de."""
    if not a > 1:
        raise InvalidA(f"need a > 1, got {a}")
    la = math.log(a)
    return math.sqrt(la) + 1.0 / (2.0 * math.sqrt(la))


def sigma_of(measure: SpectralMeasure) -> float:
    return math.sqrt(second_moment(measure))
