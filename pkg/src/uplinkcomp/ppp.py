"""Outage with an external Poisson field of interferers on the line.

Interferers form a homogeneous Poisson process of the given intensity on
``|x| > 2d`` (outside the two-cell cluster), each transmitting with
``power_scale`` times unit power through unit-mean Rayleigh fading. The
aggregate interference at BS1 (at ``-d``) and BS2 (at ``+d``) is

    I_1 = power_scale * sum_k g_k / (1 + |x_k + d|**alpha)
    I_2 = power_scale * sum_k g'_k / (1 + |x_k - d|**alpha)

Both are driven by the same points, so they are correlated. Everything is
expressed through their (joint) Laplace transform and its first derivatives,
computed with adaptive quadrature over the untruncated field.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad_vec

from .analytic import OutageValue, _value
from .channel import LinkAttenuations
from .events import Scheme


@dataclass(frozen=True)
class PppModel:
    intensity: float
    d: float = 2.0
    alpha: float = 4.0
    power_scale: float = 1.0
    rtol: float = 1e-8

    def __post_init__(self):
        if self.intensity < 0:
            raise ValueError("intensity must be non-negative")
        if self.alpha <= 1:
            raise ValueError("the interference integrals need alpha > 1")
        if self.power_scale < 1:
            raise ValueError("power_scale must be at least 1")
        if self.d <= 0:
            raise ValueError("d must be positive")

    # -- raw integrals over the field -------------------------------------

    def _field_integral(self, fn, shape):
        """``int_{|x| > 2d} fn(A1(x), A2(x)) dx`` for an array-valued ``fn``.

        Each half-line is mapped onto ``(0, 1]`` with ``x = +-2d / u``.
        """
        x0, a = 2.0 * self.d, self.alpha
        d = self.d

        def integrand(u):
            x = x0 / u
            jac = x0 / (u * u)
            right = fn(1.0 + (x + d) ** a, 1.0 + (x - d) ** a)
            left = fn(1.0 + (x - d) ** a, 1.0 + (x + d) ** a)  # mirror point -x
            with np.errstate(invalid="ignore"):
                out = (right + left) * jac
            return np.nan_to_num(np.broadcast_to(out, shape), nan=0.0, posinf=0.0)

        val, _ = quad_vec(integrand, 0.0, 1.0, epsrel=self.rtol, epsabs=1e-15, norm="max")
        return val

    def _joint_integrals(self, s1, s2):
        """Exponent and derivative integrals of the joint Laplace transform."""
        c = self.power_scale
        s1, s2 = np.broadcast_arrays(np.asarray(s1, float), np.asarray(s2, float))
        shape = (4,) + s1.shape

        def fn(A1, A2):
            d1 = c * s1 + A1
            d2 = c * s2 + A2
            r = A1 * A2 / (d1 * d2)
            return np.stack([1.0 - r, c * r / d1, c * r / d2, c * c * r / (d1 * d2)])

        return self._field_integral(fn, shape)

    # -- Laplace transforms ---------------------------------------------------

    def laplace_I1(self, s):
        """``E[exp(-s I_1)]``."""
        c = self.power_scale
        s = np.asarray(s, dtype=float)
        val = self._field_integral(lambda A1, A2: c * s / (c * s + A1), s.shape)
        return np.exp(-self.intensity * val)

    def laplace_I2(self, s):
        """``E[exp(-s I_2)]``."""
        c = self.power_scale
        s = np.asarray(s, dtype=float)
        val = self._field_integral(lambda A1, A2: c * s / (c * s + A2), s.shape)
        return np.exp(-self.intensity * val)

    def laplace_joint(self, s1, s2):
        """``E[exp(-s1 I_1 - s2 I_2)]``."""
        return np.exp(-self.intensity * self._joint_integrals(s1, s2)[0])

    def joint_moment(self, m: int, n: int, s1, s2):
        """``E[I_1**m I_2**n exp(-s1 I_1 - s2 I_2)]`` for ``m, n`` in ``{0, 1}``."""
        if m not in (0, 1) or n not in (0, 1):
            raise ValueError("only first-order moments are supported")
        lam = self.intensity
        phi, d1, d2, d12 = self._joint_integrals(s1, s2)
        L = np.exp(-lam * phi)
        if (m, n) == (0, 0):
            return L
        if (m, n) == (1, 0):
            return L * lam * d1
        if (m, n) == (0, 1):
            return L * lam * d2
        return L * (lam * d1 * lam * d2 + lam * d12)

    # -- moments ------------------------------------------------------------

    def mean_I1(self) -> float:
        c = self.power_scale
        return float(self.intensity * c * self._field_integral(lambda A1, A2: 1.0 / A1, ()))

    def mean_I2(self) -> float:
        c = self.power_scale
        return float(self.intensity * c * self._field_integral(lambda A1, A2: 1.0 / A2, ()))

    def mean_I1I2(self) -> float:
        c = self.power_scale
        cross = self._field_integral(lambda A1, A2: 1.0 / (A1 * A2), ())
        return float(self.intensity * c * c * cross + self.mean_I1() * self.mean_I2())

    def horizontal_shift_db(self, P) -> float:
        """Low-threshold shift of the single-BS outage curve caused by the field."""
        return float(10.0 * np.log10(P * self.mean_I1() + 1.0))


# -- outage closed forms -------------------------------------------------------

def _k_w(a, b, theta1, theta2):
    """Laplace arguments ``(K, W)`` for desired/interferer attenuations ``a``/``b``.

    ``W`` is only defined for ``theta1 * theta2 < 1`` and is NaN elsewhere.
    """
    a, b, t1, t2 = np.broadcast_arrays(*(np.asarray(v, float) for v in (a, b, theta1, theta2)))
    K = a * t1 + b * t2 * (1.0 + t1)
    with np.errstate(divide="ignore", invalid="ignore"):
        W = np.where(t1 * t2 < 1.0,
                     (b * t2 * (1.0 + t1) + a * t1 * (1.0 + t2)) / (1.0 - t1 * t2), np.nan)
    return K, W


@dataclass(frozen=True)
class ThresholdFunctionals:
    """Laplace arguments of the two per-BS failure terms.

    ``K``/``W`` belong to the BS with attenuations ``(desired1, interferer1)``
    and ``L``/``V`` to the one with ``(desired2, interferer2)``. ``W`` and ``V``
    exist only in the low-threshold regime ``theta1 * theta2 < 1``.
    """

    K: float
    L: float
    _W: float
    _V: float
    low_threshold: bool

    @property
    def W(self):
        if not self.low_threshold:
            raise ValueError("W is only defined for theta1 * theta2 < 1")
        return self._W

    @property
    def V(self):
        if not self.low_threshold:
            raise ValueError("V is only defined for theta1 * theta2 < 1")
        return self._V


def threshold_functionals(desired1, interferer1, desired2, interferer2,
                          theta1, theta2) -> ThresholdFunctionals:
    K, W = _k_w(desired1, interferer1, theta1, theta2)
    L, V = _k_w(desired2, interferer2, theta1, theta2)
    low = bool(np.all(np.asarray(theta1) * np.asarray(theta2) < 1.0))
    out = [v[()] if v.ndim == 0 else v for v in (K, L, W, V)]
    return ThresholdFunctionals(*out, low)


def _bs_terms(a, b, theta1, theta2, P):
    """Failure at one BS written as ``1 - sum_k coef_k exp(-s_k I)``."""
    a, b, t1, t2 = np.broadcast_arrays(*(np.asarray(v, float) for v in (a, b, theta1, theta2)))
    K, W = _k_w(a, b, t1, t2)
    terms = [
        (b / (a * t1 + b) * np.exp(-a * t1 / P), a * t1),
        (a / (a + b * t2) * np.exp(-K / P), K),
    ]
    low = t1 * t2 < 1.0
    if np.any(low):
        coef = np.where(low, -a * b * (1.0 - t1 * t2) / ((a + b * t2) * (a * t1 + b))
                        * np.exp(-np.where(low, W, 0.0) / P), 0.0)
        terms.append((coef, np.where(low, W, 0.0)))
    return terms


def outage_marp_ppp(la: LinkAttenuations, P, theta1, theta2, model: PppModel) -> OutageValue:
    p = 1.0
    for coef, s in _bs_terms(la.l11, la.l21, theta1, theta2, P):
        p = p - coef * model.laplace_I1(s)
    return _value(p, theta1, theta2)


def outage_aw_ppp(la: LinkAttenuations, P, theta1, theta2, model: PppModel) -> OutageValue:
    """AW+SIC outage; the two per-BS failures are coupled through the shared field."""
    t1 = _bs_terms(la.l11, la.l21, theta1, theta2, P)
    t2 = _bs_terms(la.l12, la.l22, theta1, theta2, P)
    p = 1.0
    for coef, s in t1:
        p = p - coef * model.laplace_I1(s)
    for coef, s in t2:
        p = p - coef * model.laplace_I2(s)
    for c1, s1 in t1:
        for c2, s2 in t2:
            p = p + c1 * c2 * model.laplace_joint(s1, s2)
    return _value(p, theta1, theta2)


PPP_CLOSED_FORMS = {
    Scheme.MARP: outage_marp_ppp,
    Scheme.AW_SIC: outage_aw_ppp,
}


def ppp_closed_form(scheme):
    try:
        return PPP_CLOSED_FORMS[Scheme.parse(scheme)]
    except KeyError:
        raise ValueError(f"no interference-field closed form for {scheme}") from None


# -- low-threshold behaviour ---------------------------------------------------

def _slope_terms(lam_int, theta2, P):
    # per-BS slope as alpha0 + alpha1 I + exp(-s I) (beta0 + beta1 I)
    q = np.exp(-lam_int * theta2 / P)
    return (1.0 / lam_int + 1.0 / P, 1.0, -q * (1.0 / lam_int + theta2 / P), -theta2 * q,
            lam_int * theta2)


def asymptotic_marp_ppp(la: LinkAttenuations, P, theta1, theta2, model: PppModel):
    """Leading term of the MARP outage as ``theta1 -> 0`` with ``theta2`` fixed."""
    a0, a1, b0, b1, s = _slope_terms(la.l21, theta2, P)
    mean = (a0 + a1 * model.joint_moment(1, 0, 0.0, 0.0)
            + b0 * model.joint_moment(0, 0, s, 0.0) + b1 * model.joint_moment(1, 0, s, 0.0))
    return mean * la.l11 * theta1


def asymptotic_aw_ppp(la: LinkAttenuations, P, theta1, theta2, model: PppModel):
    """Leading term of the AW+SIC outage as ``theta1 -> 0`` with ``theta2`` fixed."""
    a0, a1, b0, b1, s = _slope_terms(la.l21, theta2, P)
    c0, c1, e0, e1, r = _slope_terms(la.l22, theta2, P)
    bs1 = [(a0, 0, 0.0), (a1, 1, 0.0), (b0, 0, s), (b1, 1, s)]
    bs2 = [(c0, 0, 0.0), (c1, 1, 0.0), (e0, 0, r), (e1, 1, r)]
    total = 0.0
    for k1, m, s1 in bs1:
        for k2, n, s2 in bs2:
            total = total + k1 * k2 * model.joint_moment(m, n, s1, s2)
    return total * la.l11 * la.l12 * theta1 ** 2


def asymptotic_marp_ppp_symmetric(la: LinkAttenuations, P, theta, model: PppModel):
    return la.l11 * theta * (1.0 + P * model.mean_I1()) / P


def asymptotic_aw_ppp_symmetric(la: LinkAttenuations, P, theta, model: PppModel):
    m1, m2, m12 = model.mean_I1(), model.mean_I2(), model.mean_I1I2()
    return la.l11 * la.l12 * theta ** 2 * (1.0 + P * (m1 + m2) + P * P * m12) / P ** 2
