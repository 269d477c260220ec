"""Monte Carlo outage estimation with common random numbers.

Draws are generated in fixed-size chunks, each from its own Philox stream
seeded by ``(seed, chunk_index)``, so results do not depend on the number of
worker processes. Within a chunk the same locations, fading and interference
are reused for every scheme and every threshold.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.interpolate import PchipInterpolator
from scipy.optimize import brentq
from scipy.stats import beta

from .channel import (ScenarioGeometry, apply_power_control, attenuations, db_to_linear,
                      sample_fading, sample_interference)
from .events import LinkState, Scheme, effective_powers, mmse_sic_sinr, ue1_decoded
from .ppp import PppModel

Z95 = 1.959963984540054


@dataclass(frozen=True)
class Scenario:
    """Everything needed to reproduce one Monte Carlo sweep.

    ``power_db`` is the common transmit power in ``"fixed"`` mode and the
    target received power in ``"compensation"`` mode. ``theta2_db`` pins UE2's
    threshold; by default both UEs share the swept threshold.
    """

    geometry: ScenarioGeometry = field(default_factory=ScenarioGeometry)
    power_db: float = 20.0
    mode: str = "fixed"
    theta_db: tuple = (0.0,)
    theta2_db: float | None = None
    schemes: tuple = (Scheme.MARP, Scheme.AW_SIC)
    n_draws: int = 1_000_000
    seed: int = 0
    chunk_size: int = 250_000
    n_workers: int = 1
    ppp: PppModel | None = None
    x_max: float | None = None

    def __post_init__(self):
        if self.mode not in ("fixed", "compensation"):
            raise ValueError(f"unknown power mode {self.mode!r}")
        if self.n_draws <= 0 or self.chunk_size <= 0:
            raise ValueError("n_draws and chunk_size must be positive")
        schemes = tuple(Scheme.parse(s) for s in self.schemes)
        object.__setattr__(self, "schemes", schemes)
        object.__setattr__(self, "theta_db", tuple(float(t) for t in np.atleast_1d(self.theta_db)))
        if self.ppp is not None:
            if Scheme.MMSE_SIC in schemes:
                raise ValueError("MMSE-SIC is only defined without external interference")
            if (self.ppp.d, self.ppp.alpha) != (self.geometry.d, self.geometry.alpha):
                raise ValueError("interference field and geometry disagree on d or alpha")

    @property
    def P(self) -> float:
        return db_to_linear(self.power_db)

    def thetas(self):
        t1 = db_to_linear(np.asarray(self.theta_db))
        t2 = t1 if self.theta2_db is None else np.full_like(t1, db_to_linear(self.theta2_db))
        return t1, t2

    def chunks(self):
        full, rest = divmod(self.n_draws, self.chunk_size)
        sizes = [self.chunk_size] * full + ([rest] if rest else [])
        return list(enumerate(sizes))


def chunk_rng(seed: int, index: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, index])))


def _run_chunk(scenario: Scenario, index: int, n: int):
    rng = chunk_rng(scenario.seed, index)
    geom = scenario.geometry
    z, t = geom.sample_locations(n, rng)
    la = attenuations(z, t, geom.d, geom.alpha)
    if scenario.mode == "compensation":
        la = apply_power_control(la)
    draw = sample_fading(la, rng, n)
    P = scenario.P
    if scenario.ppp is not None:
        m = scenario.ppp
        i1, i2 = sample_interference(n, geom.d, geom.alpha, m.intensity, rng,
                                     x_max=scenario.x_max, power_scale=m.power_scale)
        powers = effective_powers(P, i1, i2)
    else:
        powers = P
    h = draw.h if Scheme.MMSE_SIC in scenario.schemes else None
    t1s, t2s = scenario.thetas()
    S, T = len(scenario.schemes), len(t1s)
    fails = np.zeros((S, T), dtype=np.int64)
    joint = np.zeros((S, S, T), dtype=np.int64)
    for k, (t1, t2) in enumerate(zip(t1s, t2s)):
        st = LinkState(draw.hsq, powers, (t1, t2))
        out = np.empty((S, n), dtype=bool)
        for s, scheme in enumerate(scenario.schemes):
            if scheme is Scheme.MMSE_SIC:
                out[s] = mmse_sic_sinr(h, P, t2) < t1
            else:
                out[s] = ~ue1_decoded(scheme, st)
        fails[:, k] = out.sum(axis=1)
        o = out.astype(np.int64)
        joint[:, :, k] = o @ o.T
    return fails, joint


@dataclass(frozen=True)
class EstimateRow:
    scheme: Scheme
    theta_db: float
    p_hat: float
    half_width: float
    ci_low: float
    ci_high: float
    n_draws: int
    seed: int


def confidence_interval(k: int, n: int):
    """95% interval: Wald, or Clopper-Pearson when fewer than 10 events are seen."""
    p = k / n
    if k < 10:
        lo = 0.0 if k == 0 else float(beta.ppf(0.025, k, n - k + 1))
        hi = 1.0 if k == n else float(beta.ppf(0.975, k + 1, n - k))
        return lo, hi, max(p - lo, hi - p)
    hw = Z95 * np.sqrt(p * (1.0 - p) / n)
    return max(p - hw, 0.0), min(p + hw, 1.0), float(hw)


@dataclass
class OutageEstimate:
    scenario: Scenario
    failures: np.ndarray  # [scheme, theta]
    joint: np.ndarray  # [scheme, scheme, theta]

    @property
    def n(self) -> int:
        return self.scenario.n_draws

    @property
    def theta_db(self) -> np.ndarray:
        return np.asarray(self.scenario.theta_db)

    def _index(self, scheme) -> int:
        return self.scenario.schemes.index(Scheme.parse(scheme))

    def p(self, scheme) -> np.ndarray:
        return self.failures[self._index(scheme)] / self.n

    def rows(self):
        out = []
        for s, scheme in enumerate(self.scenario.schemes):
            for k, th in enumerate(self.scenario.theta_db):
                cnt = int(self.failures[s, k])
                lo, hi, hw = confidence_interval(cnt, self.n)
                out.append(EstimateRow(scheme, th, cnt / self.n, hw, lo, hi,
                                       self.n, self.scenario.seed))
        return out

    def reduction(self, base, other):
        """``1 - p_other / p_base`` per threshold with a delta-method 95% half-width."""
        i, j = self._index(base), self._index(other)
        n = self.n
        px = self.failures[i] / n
        py = self.failures[j] / n
        pxy = self.joint[i, j] / n
        with np.errstate(divide="ignore", invalid="ignore"):
            r = py / px
            var = (py * (1 - py) - 2 * r * (pxy - px * py) + r * r * px * (1 - px)) / (n * px * px)
        return 1.0 - r, Z95 * np.sqrt(np.maximum(var, 0.0))

    def db_gap(self, worse, better, target: float) -> float:
        return curve_gap_db(self.theta_db, self.p(worse), self.p(better), target)


def estimate_outage(scenario: Scenario) -> OutageEstimate:
    """Run the sweep; identical counts for any ``n_workers``."""
    chunks = scenario.chunks()
    S, T = len(scenario.schemes), len(scenario.theta_db)
    fails = np.zeros((S, T), dtype=np.int64)
    joint = np.zeros((S, S, T), dtype=np.int64)
    if scenario.n_workers > 1 and len(chunks) > 1:
        with ProcessPoolExecutor(scenario.n_workers) as pool:
            results = list(pool.map(_run_chunk, [scenario] * len(chunks),
                                    *zip(*chunks)))
    else:
        results = (_run_chunk(scenario, i, n) for i, n in chunks)
    for f, j in results:
        fails += f
        joint += j
    return OutageEstimate(scenario, fails, joint)


def estimate_reduction(scenario: Scenario, base=Scheme.MARP, other=Scheme.AW_SIC):
    sc = replace(scenario, schemes=tuple(dict.fromkeys((base, other) + scenario.schemes)))
    return estimate_outage(sc).reduction(base, other)


def threshold_at_outage(theta_db, p, target: float) -> float:
    """Threshold (dB) at which an increasing outage curve crosses ``target``.

    Interpolates ``log10 p`` against the threshold with a monotone cubic.
    """
    theta_db = np.asarray(theta_db, dtype=float)
    p = np.asarray(p, dtype=float)
    keep = p > 0
    x, y = theta_db[keep], np.log10(p[keep])
    if len(x) < 2:
        raise ValueError("need at least two thresholds with nonzero outage")
    ly = np.log10(target)
    if not (y.min() <= ly <= y.max()):
        raise ValueError(f"target outage {target} outside the simulated range "
                         f"[{10 ** y.min():.3g}, {10 ** y.max():.3g}]")
    order = np.argsort(x)
    x, y = x[order], np.maximum.accumulate(y[order])
    lo = x[np.searchsorted(y, ly, side="left") - 1] if y[0] < ly else x[0]
    hi = x[np.searchsorted(y, ly, side="left")]
    if lo == hi:
        return float(lo)
    curve = PchipInterpolator(x, y)
    return float(brentq(lambda v: curve(v) - ly, lo, hi))


def curve_gap_db(theta_db, p_worse, p_better, target: float) -> float:
    """Horizontal distance in dB between two outage curves at ``target``."""
    return (threshold_at_outage(theta_db, p_better, target)
            - threshold_at_outage(theta_db, p_worse, target))


def estimate_db_gap(scenario: Scenario, worse=Scheme.AW_SIC, better=Scheme.MMSE_SIC,
                    target: float = 1e-3) -> float:
    sc = replace(scenario, schemes=tuple(dict.fromkeys((worse, better) + scenario.schemes)))
    return estimate_outage(sc).db_gap(worse, better, target)
