"""Two-cell line geometry, path loss, power control and random channel draws.

BS1 sits at ``-d`` and BS2 at ``+d``; each cell covers ``2d``. UE1 is displaced
by ``z`` from BS1 and UE2 by ``t`` from BS2, both in ``[-d, d]``.

Everything here works on scalars or on numpy arrays of draws. Indices in
array-valued fields follow ``[ue, bs, ...]`` with 0 for cell 1.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Union

import numpy as np

ArrayLike = Union[float, np.ndarray]
Placement = Union[float, tuple]


@dataclass(frozen=True)
class ScenarioGeometry:
    """Cell half-length, path-loss exponent and UE placements.

    ``z`` and ``t`` are either a point value or a ``(low, high)`` interval for
    a uniformly distributed displacement.
    """

    d: float = 2.0
    alpha: float = 4.0
    z: Placement = 2.0
    t: Placement = -2.0

    def __post_init__(self):
        if self.d <= 0:
            raise ValueError("cell half-length d must be positive")
        if self.alpha <= 0:
            raise ValueError("path-loss exponent must be positive")
        for name in ("z", "t"):
            value = getattr(self, name)
            ends = value if isinstance(value, tuple) else (value,)
            if isinstance(value, tuple):
                if len(value) != 2 or not value[0] <= value[1]:
                    raise ValueError(f"{name} interval must be (low, high) with low <= high")
            for v in ends:
                if not -self.d <= v <= self.d:
                    raise ValueError(f"{name}={v} outside [-d, d] = [{-self.d}, {self.d}]")

    @property
    def is_fixed(self) -> bool:
        return not (self._random(self.z) or self._random(self.t))

    @staticmethod
    def _random(value) -> bool:
        return isinstance(value, tuple) and value[0] < value[1]

    def point(self, z: float, t: float) -> "ScenarioGeometry":
        return ScenarioGeometry(self.d, self.alpha, float(z), float(t))

    def sample_locations(self, n: int, rng: np.random.Generator):
        """Draw ``n`` UE displacement pairs; point placements are broadcast."""
        return self._draw(self.z, n, rng), self._draw(self.t, n, rng)

    @staticmethod
    def _draw(value, n, rng):
        if isinstance(value, tuple):
            lo, hi = value
            if lo == hi:
                return np.full(n, float(lo))
            return rng.uniform(lo, hi, n)
        return np.full(n, float(value))


@dataclass(frozen=True)
class LinkAttenuations:
    """Attenuations ``lambda_ij = 1 + d_ij**alpha`` (UE i to BS j).

    ``|h_ij|^2`` is exponential with mean ``1/lambda_ij``.
    """

    l11: ArrayLike
    l12: ArrayLike
    l21: ArrayLike
    l22: ArrayLike

    def as_array(self, n: int | None = None) -> np.ndarray:
        """Stack as ``[ue, bs, ...]``, broadcasting to ``n`` draws if given."""
        return _lam_array(self, n)

    def mirrored(self) -> "LinkAttenuations":
        """Swap the roles of cell 1 and cell 2."""
        return LinkAttenuations(self.l22, self.l21, self.l12, self.l11)


def attenuations(z: ArrayLike, t: ArrayLike, d: float, alpha: float) -> LinkAttenuations:
    """Vectorised attenuations for displacements ``z`` (UE1) and ``t`` (UE2)."""
    z = np.asarray(z, dtype=float)
    t = np.asarray(t, dtype=float)
    d11 = np.abs(z)
    d22 = np.abs(t)
    d12 = 2 * d - z
    d21 = 2 * d + t
    out = [1.0 + dist ** alpha for dist in (d11, d12, d21, d22)]
    if out[0].ndim == 0:
        out = [float(v) for v in out]
    return LinkAttenuations(*out)


def link_attenuations(geom: ScenarioGeometry) -> LinkAttenuations:
    """Attenuations for a geometry with point placements."""
    if isinstance(geom.z, tuple) or isinstance(geom.t, tuple):
        raise ValueError("link_attenuations needs point values for z and t")
    if not (-geom.d <= geom.z <= geom.d and -geom.d <= geom.t <= geom.d):
        raise ValueError("z and t must lie in [-d, d]")
    return attenuations(geom.z, geom.t, geom.d, geom.alpha)


def apply_power_control(la: LinkAttenuations) -> LinkAttenuations:
    """Fold full path-loss compensation into the attenuations.

    Each UE inverts the path loss to its own BS, so the equivalent system keeps
    transmit power fixed at the target received power and rescales the cross
    links by the own-link attenuation.
    """
    # x / x is exactly 1.0 in IEEE arithmetic, for scalars and arrays alike
    return LinkAttenuations(la.l11 / la.l11, la.l12 / la.l11, la.l21 / la.l22, la.l22 / la.l22)


@dataclass(frozen=True)
class PowerConfig:
    """Transmit power model; noise power is normalised to one.

    In ``"fixed"`` mode ``P`` is the common transmit power. In
    ``"compensation"`` mode ``P`` is the target received power at the serving
    BS (full path-loss compensation).
    """

    P: float
    theta1: float
    theta2: float
    mode: str = "fixed"

    def __post_init__(self):
        if self.mode not in ("fixed", "compensation"):
            raise ValueError(f"unknown power mode {self.mode!r}")
        if self.P <= 0 or self.theta1 <= 0 or self.theta2 <= 0:
            raise ValueError("P, theta1 and theta2 must be positive")

    @classmethod
    def from_db(cls, power_db, theta1_db, theta2_db=None, mode="fixed"):
        theta2_db = theta1_db if theta2_db is None else theta2_db
        return cls(db_to_linear(power_db), db_to_linear(theta1_db),
                   db_to_linear(theta2_db), mode)

    def equivalent_attenuations(self, la: LinkAttenuations) -> LinkAttenuations:
        return apply_power_control(la) if self.mode == "compensation" else la


def db_to_linear(x):
    return 10.0 ** (np.asarray(x, dtype=float) / 10.0) if np.ndim(x) else 10.0 ** (float(x) / 10.0)


def linear_to_db(x):
    return 10.0 * np.log10(x)


def rate_to_threshold(rate):
    """SINR threshold ``2**R - 1`` for a rate in bit/s/Hz."""
    return 2.0 ** rate - 1.0


@dataclass(frozen=True)
class FadingDraw:
    """Joint realisation(s) of the four channel coefficients.

    ``g`` holds unit-variance circularly-symmetric complex Gaussians indexed
    ``[ue, bs, ...]``; ``h = g / sqrt(lambda)``.
    """

    g: np.ndarray
    lam: np.ndarray

    @property
    def h(self) -> np.ndarray:
        return self.g / np.sqrt(self.lam)

    @cached_property
    def hsq(self) -> np.ndarray:
        return (self.g.real ** 2 + self.g.imag ** 2) / self.lam

    def mirrored(self) -> "FadingDraw":
        """Relabel cell 1 <-> cell 2 (swaps both UE and BS indices)."""
        return FadingDraw(self.g[::-1, ::-1], self.lam[::-1, ::-1])

    @classmethod
    def from_hsq(cls, hsq) -> "FadingDraw":
        """Build a draw with given squared magnitudes (zero phase, unit lambda)."""
        hsq = np.asarray(hsq, dtype=float)
        return cls(np.sqrt(hsq).astype(complex), np.ones_like(hsq))


def _lam_array(la: LinkAttenuations, n: int | None) -> np.ndarray:
    vals = np.broadcast_arrays(*(np.asarray(v, float) for v in (la.l11, la.l12, la.l21, la.l22)))
    if n is not None:
        vals = [np.broadcast_to(v, (n,)) for v in vals]
    return np.stack(vals).reshape((2, 2) + np.shape(vals[0]))


def sample_fading(la: LinkAttenuations, rng: np.random.Generator, n: int | None = None) -> FadingDraw:
    """Draw one (``n=None``) or ``n`` independent fading realisations."""
    shape = (2, 2) if n is None else (2, 2, n)
    g = (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2.0)
    return FadingDraw(g, _lam_array(la, n))


def default_x_max(d: float, alpha: float) -> float:
    """Truncation radius for sampling the interferer field on a finite window."""
    return 2 * d + (1e6) ** (1.0 / alpha) * (2 * d)


@dataclass(frozen=True)
class PppRealization:
    points: np.ndarray
    marks: np.ndarray  # shape (n_points, 2): fading to BS1, BS2
    I1: float
    I2: float


def _interference(points, marks, d, alpha, power_scale):
    i1 = power_scale * np.sum(marks[:, 0] / (1.0 + np.abs(points + d) ** alpha))
    i2 = power_scale * np.sum(marks[:, 1] / (1.0 + np.abs(points - d) ** alpha))
    return float(i1), float(i2)


def _uniform_on_window(u, inner, x_max):
    # maps u in [0, 1) onto [-x_max, -inner) U [inner, x_max)
    half = x_max - inner
    s = u * 2 * half
    return np.where(s < half, -x_max + s, inner + (s - half))


def sample_ppp(geom: ScenarioGeometry, intensity: float, rng: np.random.Generator,
               x_max: float | None = None, power_scale: float = 1.0) -> PppRealization:
    """One realisation of the interferer field outside ``(-2d, 2d)``.

    Interferers have unit transmit power times ``power_scale`` and
    independent unit-mean exponential fading to each BS.
    """
    d, alpha = geom.d, geom.alpha
    x_max = default_x_max(d, alpha) if x_max is None else x_max
    if x_max <= 2 * d:
        raise ValueError("x_max must exceed 2d")
    if intensity < 0:
        raise ValueError("intensity must be non-negative")
    count = rng.poisson(intensity * 2 * (x_max - 2 * d))
    points = _uniform_on_window(rng.random(count), 2 * d, x_max)
    marks = rng.exponential(1.0, (count, 2))
    return PppRealization(points, marks, *_interference(points, marks, d, alpha, power_scale))


def sample_interference(n: int, d: float, alpha: float, intensity: float,
                        rng: np.random.Generator, x_max: float | None = None,
                        power_scale: float = 1.0):
    """Aggregate interference ``(I1, I2)`` for ``n`` independent field realisations."""
    x_max = default_x_max(d, alpha) if x_max is None else x_max
    if x_max <= 2 * d:
        raise ValueError("x_max must exceed 2d")
    counts = rng.poisson(intensity * 2 * (x_max - 2 * d), n)
    total = int(counts.sum())
    owner = np.repeat(np.arange(n), counts)
    points = _uniform_on_window(rng.random(total), 2 * d, x_max)
    marks = rng.exponential(1.0, (2, total))
    c1 = marks[0] / (1.0 + np.abs(points + d) ** alpha)
    c2 = marks[1] / (1.0 + np.abs(points - d) ** alpha)
    i1 = power_scale * np.bincount(owner, weights=c1, minlength=n)
    i2 = power_scale * np.bincount(owner, weights=c2, minlength=n)
    return i1, i2
