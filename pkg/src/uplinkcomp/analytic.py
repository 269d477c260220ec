"""Closed-form outage probabilities of UE1 without external interference.

The building block is the probability that UE1 fails at one BS with a single
SIC attempt on the interferer, ``P(A^c)``. With desired attenuation ``a``,
interferer attenuation ``b``, interferer threshold ``c``, desired threshold
``x`` and power ``P`` it takes one of two forms, ``f`` when ``c x >= 1`` and
``g`` otherwise. Outages of the cooperative schemes are products and
corrections of these per-BS terms because the fading at the two BSs is
independent.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .channel import LinkAttenuations, ScenarioGeometry, attenuations, apply_power_control
from .events import Scheme


class Regime(str, Enum):
    HIGH = "high-threshold"  # theta1 * theta2 >= 1
    LOW = "low-threshold"


@dataclass(frozen=True)
class OutageValue:
    p: float | np.ndarray
    high_threshold: bool | np.ndarray

    @property
    def regime(self):
        if np.ndim(self.high_threshold) == 0:
            return Regime.HIGH if self.high_threshold else Regime.LOW
        return np.where(self.high_threshold, Regime.HIGH.value, Regime.LOW.value)

    def __float__(self):
        return float(self.p)


class QuadratureError(RuntimeError):
    def __init__(self, message, estimate, error):
        super().__init__(f"{message} (estimate={estimate!r}, error bound={error!r})")
        self.estimate = estimate
        self.error = error


def f_base(a, b, c, x, P):
    """``P(A^c)`` in the high-threshold regime ``c x >= 1``."""
    a, b, c, x, P = np.broadcast_arrays(*(np.asarray(v, dtype=float) for v in (a, b, c, x, P)))
    return (1.0
            - b / (a * x + b) * np.exp(-a * x / P)
            - a / (a + b * c) * np.exp(-(a * x + b * c * (1.0 + x)) / P))


def g_base(a, b, c, x, P):
    """``P(A^c)`` in the low-threshold regime ``c x < 1``."""
    cx = np.asarray(c, dtype=float) * np.asarray(x, dtype=float)
    if np.any(cx >= 1.0):
        raise ValueError("g_base requires c * x < 1")
    a, b, c, x, P = np.broadcast_arrays(*(np.asarray(v, dtype=float) for v in (a, b, c, x, P)))
    w = (b * c * (1.0 + x) + a * x * (1.0 + c)) / (1.0 - c * x)
    extra = a * b * (1.0 - c * x) / ((a + b * c) * (a * x + b)) * np.exp(-w / P)
    return f_base(a, b, c, x, P) + extra


def a_complement(a, b, c, x, P):
    """``P(A^c)`` with the regime picked per element (boundary goes to ``f``)."""
    a, b, c, x, P = np.broadcast_arrays(*(np.asarray(v, dtype=float) for v in (a, b, c, x, P)))
    high = c * x >= 1.0
    out = f_base(a, b, c, x, P)
    low = ~high
    if np.any(low):
        out = np.array(out, copy=True)
        out[low] = g_base(a[low], b[low], c[low], x[low], P[low])
    return out[()] if out.ndim == 0 else out


def e_func(a, b, c, x, P):
    """``P(interferer decodable treating desired as noise, P|h_desired|^2 < x)``.

    ``a``/``b`` are the desired/interferer attenuations at the BS, ``c`` the
    interferer threshold and ``x`` the desired threshold.
    """
    a, b, c, x, P = (np.asarray(v, dtype=float) for v in (a, b, c, x, P))
    k = a + b * c
    return a / k * np.exp(-b * c / P) * -np.expm1(-k * x / P)


def _p0(lam, theta, P):
    # P(P |h|^2 < theta) for |h|^2 ~ Exp(lam)
    return -np.expm1(-np.asarray(lam, dtype=float) * theta / P)


def _value(p, theta1, theta2):
    high = np.asarray(theta1) * np.asarray(theta2) >= 1.0
    p = np.asarray(p, dtype=float)
    if p.ndim == 0:
        return OutageValue(float(p), bool(high))
    return OutageValue(p, high)


def _bs1_fail(la, P, t1, t2):
    return a_complement(la.l11, la.l21, t2, t1, P)


def _bs2_fail(la, P, t1, t2):
    return a_complement(la.l12, la.l22, t2, t1, P)


def outage_marp(la: LinkAttenuations, P, theta1, theta2) -> OutageValue:
    return _value(_bs1_fail(la, P, theta1, theta2), theta1, theta2)


def outage_dis(la: LinkAttenuations, P, theta1, theta2) -> OutageValue:
    f11 = _bs1_fail(la, P, theta1, theta2)
    # UE2 at its own BS: desired threshold theta2, interferer (UE1) threshold theta1
    f22 = a_complement(la.l22, la.l12, theta1, theta2, P)
    p0 = _p0(la.l11, theta1, P)
    return _value(f11 * f22 + p0 * (1.0 - f22), theta1, theta2)


def outage_aw_sic(la: LinkAttenuations, P, theta1, theta2) -> OutageValue:
    return _value(_bs1_fail(la, P, theta1, theta2) * _bs2_fail(la, P, theta1, theta2),
                  theta1, theta2)


def outage_aw_dis(la: LinkAttenuations, P, theta1, theta2) -> OutageValue:
    """AW+DIS: UE1 also succeeds whenever UE2 is decoded at either BS and
    UE1's interference-free SNR clears its threshold at either BS."""
    f1 = _bs1_fail(la, P, theta1, theta2)
    f2 = _bs2_fail(la, P, theta1, theta2)
    e1 = e_func(la.l11, la.l21, theta2, theta1, P)
    e2 = e_func(la.l12, la.l22, theta2, theta1, P)
    p01 = _p0(la.l11, theta1, P)
    p02 = _p0(la.l12, theta1, P)
    return _value(f1 * f2 - e1 * (f2 - p02) - e2 * (f1 - p01), theta1, theta2)


def outage_aw_dis_home_forwarding(la: LinkAttenuations, P, theta1, theta2) -> OutageValue:
    """Outage when only UE2's home BS may forward UE2's message to BS1."""
    f1 = _bs1_fail(la, P, theta1, theta2)
    f2 = _bs2_fail(la, P, theta1, theta2)
    e2 = e_func(la.l12, la.l22, theta2, theta1, P)
    return _value(f1 * f2 - e2 * (f1 - _p0(la.l11, theta1, P)), theta1, theta2)


def _sic_slope(lam_int, theta2, P):
    q = np.exp(-lam_int * theta2 / P)
    return (1.0 - q) / lam_int + (1.0 - theta2 * q) / P


def outage_marp_asymptotic(la: LinkAttenuations, P, theta1, theta2):
    """Leading term of the MARP outage as ``theta1 -> 0`` with ``theta2`` fixed."""
    return _sic_slope(la.l21, theta2, P) * la.l11 * theta1


def outage_marp_asymptotic_symmetric(la: LinkAttenuations, P, theta):
    return la.l11 * theta / P


def outage_aw_sic_asymptotic(la: LinkAttenuations, P, theta1, theta2):
    """Leading term of the AW+SIC outage as ``theta1 -> 0`` with ``theta2`` fixed."""
    return (_sic_slope(la.l21, theta2, P) * _sic_slope(la.l22, theta2, P)
            * la.l11 * la.l12 * theta1 ** 2)


def outage_aw_sic_asymptotic_symmetric(la: LinkAttenuations, P, theta):
    return la.l11 * la.l12 * theta ** 2 / P ** 2


CLOSED_FORMS = {
    Scheme.MARP: outage_marp,
    Scheme.DIS: outage_dis,
    Scheme.AW_SIC: outage_aw_sic,
    Scheme.AW_DIS: outage_aw_dis,
}


def closed_form(scheme):
    try:
        return CLOSED_FORMS[Scheme.parse(scheme)]
    except KeyError:
        raise ValueError(f"no closed form for {scheme}; use the Monte Carlo harness") from None


# -- averaging over random UE positions ---------------------------------------

def _pieces(lo, hi):
    # split at 0 where |x|**alpha may be non-smooth
    if lo < 0.0 < hi:
        return [(lo, 0.0), (0.0, hi)]
    return [(lo, hi)]


def _nodes(interval, n):
    lo, hi = interval if isinstance(interval, tuple) else (interval, interval)
    if lo == hi:
        return np.array([float(lo)]), np.array([1.0])
    xs, ws = [], []
    x, w = np.polynomial.legendre.leggauss(n)
    for a, b in _pieces(lo, hi):
        xs.append(0.5 * (b - a) * x + 0.5 * (b + a))
        ws.append(0.5 * (b - a) * w / (hi - lo))
    return np.concatenate(xs), np.concatenate(ws)


def average_over_locations(integrand, geometry: ScenarioGeometry, rtol=1e-6, atol=1e-14,
                           n_start=8, n_max=256):
    """Mean of ``integrand(z, t)`` over independent uniform UE positions.

    ``integrand`` takes broadcastable arrays ``z``, ``t``. Tensor Gauss-Legendre
    rules are doubled until two successive estimates agree to ``rtol``, or to
    ``atol`` for values so small that rounding in the closed forms dominates.
    """
    prev = None
    n = n_start
    while n <= n_max:
        zs, wz = _nodes(geometry.z, n)
        ts, wt = _nodes(geometry.t, n)
        vals = np.asarray(integrand(zs[:, None], ts[None, :]), dtype=float)
        est = float(np.einsum("i,ij,j->", wz, vals, wt))
        if prev is not None:
            err = abs(est - prev)
            if err <= max(rtol * abs(est), atol):
                return est
        if geometry.is_fixed:
            return est
        prev = est
        n *= 2
    raise QuadratureError("location average did not converge", est, err)


def outage_location_averaged(scheme, geometry: ScenarioGeometry, P, theta1, theta2,
                             power_control: bool = True, rtol: float = 1e-6, ppp=None) -> float:
    """Outage averaged over uniform UE positions.

    With ``power_control`` the attenuations are transformed for full path-loss
    compensation and ``P`` is the target received power. ``ppp`` (a
    :class:`uplinkcomp.ppp.PppModel`) switches to the closed forms with an
    external interferer field.
    """
    if ppp is None:
        form = closed_form(scheme)

        def cf(la):
            return form(la, P, theta1, theta2).p
    else:
        from .ppp import ppp_closed_form
        form = ppp_closed_form(scheme)

        def cf(la):
            return form(la, P, theta1, theta2, ppp).p

    def integrand(z, t):
        z, t = np.broadcast_arrays(z, t)
        la = attenuations(z, t, geometry.d, geometry.alpha)
        if power_control:
            la = apply_power_control(la)
        return cf(la)

    return average_over_locations(integrand, geometry, rtol=rtol)
