"""Declarative experiment runs: curve CSVs, a JSON report and protocol traces."""

from __future__ import annotations

import csv
import json
from collections import Counter
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np
from scipy.optimize import brentq

from .analytic import closed_form, outage_location_averaged
from .channel import ScenarioGeometry, PowerConfig, apply_power_control, attenuations, sample_fading
from .events import LinkState, Scheme
from .montecarlo import Scenario, estimate_outage
from .ppp import PppModel, ppp_closed_form
from .protocol import TABLES, _run, run_protocol_batch, verify_protocol_equivalence

CSV_SCHEMA = "uplinkcomp-curve/1"
CSV_COLUMNS = ("theta_db", "outage", "ci_half_width", "mode", "scheme", "seed")
MODES = ("analytic", "montecarlo")
ALL_SCHEMES = tuple(Scheme)


@dataclass(frozen=True)
class ThetaGrid:
    start_db: float = -30.0
    stop_db: float = 15.0
    step_db: float = 0.5

    def __post_init__(self):
        if not (np.isfinite(self.start_db) and np.isfinite(self.stop_db)
                and np.isfinite(self.step_db)):
            raise ValueError("theta grid values must be finite")
        if self.step_db <= 0 or self.stop_db < self.start_db:
            raise ValueError("theta grid needs step > 0 and stop >= start")

    def values(self) -> np.ndarray:
        n = int(np.floor((self.stop_db - self.start_db) / self.step_db + 1e-9)) + 1
        return np.round(self.start_db + self.step_db * np.arange(n), 10)

    @classmethod
    def parse(cls, text: str) -> "ThetaGrid":
        """``"start:stop:step"`` in dB."""
        try:
            start, stop, step = (float(v) for v in text.split(":"))
        except ValueError:
            raise ValueError(f"malformed theta grid {text!r}; expected start:stop:step") from None
        return cls(start, stop, step)


@dataclass(frozen=True)
class ExperimentConfig:
    """One figure-style experiment.

    ``variants`` pairs a tag with an optional interferer field; every variant
    is run on the same geometry, power and grid.
    """

    name: str
    geometry: ScenarioGeometry
    power_db: float
    power_mode: str = "fixed"
    schemes: tuple = ALL_SCHEMES
    variants: tuple = (("nofield", None),)
    modes: tuple = MODES
    grid: ThetaGrid = field(default_factory=ThetaGrid)
    theta2_db: float | None = None
    n_draws: int = 100_000
    seed: int = 0
    out_dir: str = "results"
    x_max: float | None = None
    workers: int = 1
    chunk_size: int = 250_000

    def __post_init__(self):
        modes = tuple(self.modes)
        if not modes or any(m not in MODES for m in modes):
            raise ValueError(f"modes must be a non-empty subset of {MODES}")
        object.__setattr__(self, "modes", modes)
        object.__setattr__(self, "schemes", tuple(Scheme.parse(s) for s in self.schemes))
        if self.power_mode not in ("fixed", "compensation"):
            raise ValueError(f"unknown power mode {self.power_mode!r}")


def _field(intensity, power_scale=1.0, d=2.0, alpha=4.0):
    return PppModel(intensity, d, alpha, power_scale)


def preset(name: str) -> ExperimentConfig:
    d, alpha = 2.0, 4.0
    if name == "fig3":
        return ExperimentConfig("fig3", ScenarioGeometry(d, alpha, d, -d), 20.0)
    if name == "fig4":
        return ExperimentConfig("fig4", ScenarioGeometry(d, alpha, (d / 2, d), (-d, -d / 2)),
                                10.0, "compensation")
    if name == "fig5":
        return ExperimentConfig("fig5", ScenarioGeometry(d, alpha, d, -d), 20.0,
                                schemes=(Scheme.MARP, Scheme.AW_SIC),
                                variants=(("nofield", None), ("ppp", _field(0.25, 1.0, d, alpha))))
    if name == "fig6":
        return ExperimentConfig("fig6", ScenarioGeometry(d, alpha, (0.0, d), (-d, 0.0)), 10.0,
                                "compensation", schemes=(Scheme.MARP, Scheme.AW_SIC),
                                variants=(("nofield", None),
                                          ("ppp", _field(0.25, 1.0 + d ** alpha, d, alpha))))
    raise ValueError(f"unknown preset {name!r}; choose from fig3, fig4, fig5, fig6")


PRESETS = ("fig3", "fig4", "fig5", "fig6")


def config_from_dict(data: dict) -> ExperimentConfig:
    """Build a config from a JSON-style mapping.

    Either ``"preset"`` names a base config, or ``"scenario"`` gives one inline
    with keys ``d``, ``alpha``, ``z``, ``t`` (lists for uniform intervals),
    ``power_db``, ``power_mode``, ``schemes`` and optional ``ppp`` with
    ``intensity`` (per unit length) and ``power_scale`` (linear).
    """
    data = dict(data)
    if "preset" in data:
        cfg = preset(data.pop("preset"))
    elif "scenario" in data:
        sc = dict(data.pop("scenario"))

        def place(v):
            return tuple(float(x) for x in v) if isinstance(v, (list, tuple)) else float(v)

        geom = ScenarioGeometry(float(sc.get("d", 2.0)), float(sc.get("alpha", 4.0)),
                                place(sc.get("z", 2.0)), place(sc.get("t", -2.0)))
        variants = (("nofield", None),)
        if sc.get("ppp"):
            p = sc["ppp"]
            variants += (("ppp", PppModel(float(p["intensity"]), geom.d, geom.alpha,
                                          float(p.get("power_scale", 1.0)))),)
        cfg = ExperimentConfig(sc.get("name", "custom"), geom, float(sc.get("power_db", 20.0)),
                               sc.get("power_mode", "fixed"),
                               tuple(sc.get("schemes", ALL_SCHEMES)), variants)
    else:
        raise ValueError("config needs either 'preset' or 'scenario'")
    if "grid" in data:
        g = data.pop("grid")
        data["grid"] = ThetaGrid.parse(g) if isinstance(g, str) else ThetaGrid(
            float(g["start_db"]), float(g["stop_db"]), float(g["step_db"]))
    if "modes" in data:
        data["modes"] = tuple(data["modes"])
    unknown = set(data) - set(ExperimentConfig.__dataclass_fields__)
    if unknown:
        raise ValueError(f"unknown config keys: {sorted(unknown)}")
    return replace(cfg, **data)


def load_config(path) -> ExperimentConfig:
    with open(path) as fh:
        return config_from_dict(json.load(fh))


# -- analytic curves -----------------------------------------------------------

def _analytic_point(scheme, cfg: ExperimentConfig, model, theta1, theta2):
    P = 10.0 ** (cfg.power_db / 10.0)
    pc = cfg.power_mode == "compensation"
    if cfg.geometry.is_fixed:
        la = attenuations(_point(cfg.geometry.z), _point(cfg.geometry.t),
                          cfg.geometry.d, cfg.geometry.alpha)
        if pc:
            la = apply_power_control(la)
        if model is None:
            return float(closed_form(scheme)(la, P, theta1, theta2).p)
        return float(ppp_closed_form(scheme)(la, P, theta1, theta2, model).p)
    return outage_location_averaged(scheme, cfg.geometry, P, theta1, theta2,
                                    power_control=pc, ppp=model)


def _point(v):
    return v[0] if isinstance(v, tuple) else v


def _has_closed_form(scheme, model) -> bool:
    if model is None:
        return scheme in (Scheme.MARP, Scheme.DIS, Scheme.AW_SIC, Scheme.AW_DIS)
    return scheme in (Scheme.MARP, Scheme.AW_SIC)


def analytic_curve(scheme, cfg: ExperimentConfig, model, theta_db) -> np.ndarray:
    t2 = None if cfg.theta2_db is None else 10.0 ** (cfg.theta2_db / 10.0)
    out = []
    for th in np.atleast_1d(theta_db):
        t1 = 10.0 ** (th / 10.0)
        out.append(_analytic_point(scheme, cfg, model, t1, t1 if t2 is None else t2))
    return np.asarray(out)


def fitted_slope(theta_db, p) -> float:
    """Least-squares slope of ``log10 p`` against ``log10 theta``."""
    x = np.asarray(theta_db) / 10.0
    return float(np.polyfit(x, np.log10(p), 1)[0])


def threshold_at_analytic_outage(scheme, cfg: ExperimentConfig, model, target: float,
                                 lo_db: float = -40.0, hi_db: float = 20.0) -> float:
    """Threshold (dB) at which the analytic outage curve reaches ``target``."""
    log_target = np.log10(target)

    def gap(th):
        return np.log10(analytic_curve(scheme, cfg, model, [th])[0]) - log_target

    return float(brentq(gap, lo_db, hi_db, xtol=1e-6))


def extracted_shift_db(scheme, cfg: ExperimentConfig, model, target: float = 1e-3) -> float:
    """Horizontal distance between the analytic curves with and without the field."""
    return (threshold_at_analytic_outage(scheme, cfg, None, target)
            - threshold_at_analytic_outage(scheme, cfg, model, target))


# -- running -------------------------------------------------------------------

def _fmt(x) -> str:
    return "" if x is None else format(float(x), ".10g")


def _write_csv(path: Path, rows):
    with open(path, "w", newline="") as fh:
        fh.write(f"# schema={CSV_SCHEMA}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for r in rows:
            w.writerow(r)


def _slug(scheme: Scheme) -> str:
    return scheme.value.lower().replace("+", "-")


def _mc_scenario(cfg: ExperimentConfig, model, theta_db, schemes) -> Scenario:
    return Scenario(cfg.geometry, cfg.power_db, cfg.power_mode, tuple(theta_db), cfg.theta2_db,
                    schemes, cfg.n_draws, cfg.seed, cfg.chunk_size, cfg.workers, model, cfg.x_max)


def _at(theta_db, values, th=0.0):
    k = np.flatnonzero(np.isclose(theta_db, th))
    return float(values[k[0]]) if len(k) else None


def run_experiment(cfg: ExperimentConfig) -> dict:
    """Write the curve CSVs and ``<name>_report.json``; returns the report."""
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    grid = cfg.grid.values()
    report = {"experiment": cfg.name, "seed": cfg.seed, "n_draws": cfg.n_draws,
              "power_db": cfg.power_db, "power_mode": cfg.power_mode,
              "theta_grid_db": [cfg.grid.start_db, cfg.grid.stop_db, cfg.grid.step_db],
              "variants": {}, "files": []}
    for tag, model in cfg.variants:
        schemes = tuple(s for s in cfg.schemes if not (model is not None and s is Scheme.MMSE_SIC))
        entry = {"reduction_at_0db": {}, "db_gap_at_1e-3": {}, "slopes": {}}
        curves = {}
        if "analytic" in cfg.modes:
            for s in schemes:
                if not _has_closed_form(s, model):
                    continue
                p = analytic_curve(s, cfg, model, grid)
                curves[("analytic", s)] = p
                rows = [(_fmt(th), _fmt(v), "", "analytic", s.value, "") for th, v in zip(grid, p)]
                path = out / f"{cfg.name}_{tag}_analytic_{_slug(s)}.csv"
                _write_csv(path, rows)
                report["files"].append(path.name)
        if "montecarlo" in cfg.modes:
            est = estimate_outage(_mc_scenario(cfg, model, grid, schemes))
            for s in schemes:
                rows = [(_fmt(r.theta_db), _fmt(r.p_hat), _fmt(r.half_width), "montecarlo",
                         s.value, str(cfg.seed)) for r in est.rows() if r.scheme is s]
                curves[("montecarlo", s)] = est.p(s)
                path = out / f"{cfg.name}_{tag}_montecarlo_{_slug(s)}.csv"
                _write_csv(path, rows)
                report["files"].append(path.name)
            if Scheme.MARP in schemes:
                for s in schemes:
                    if s is Scheme.MARP:
                        continue
                    r, hw = est.reduction(Scheme.MARP, s)
                    k = np.flatnonzero(np.isclose(grid, 0.0))
                    if len(k):
                        entry["reduction_at_0db"][f"montecarlo:{s.value}"] = {
                            "value": float(r[k[0]]), "ci_half_width": float(hw[k[0]])}
            if Scheme.MMSE_SIC in schemes and Scheme.AW_SIC in schemes:
                try:
                    entry["db_gap_at_1e-3"]["montecarlo:AW+SIC->MMSE-SIC"] = est.db_gap(
                        Scheme.AW_SIC, Scheme.MMSE_SIC, 1e-3)
                except ValueError as exc:
                    entry["db_gap_at_1e-3"]["montecarlo:AW+SIC->MMSE-SIC"] = {"error": str(exc)}
        base = curves.get(("analytic", Scheme.MARP))
        if base is not None:
            for s in schemes:
                other = curves.get(("analytic", s))
                if s is Scheme.MARP or other is None:
                    continue
                b0, o0 = _at(grid, base), _at(grid, other)
                if b0 is not None:
                    entry["reduction_at_0db"][f"analytic:{s.value}"] = 1.0 - o0 / b0
        if "analytic" in cfg.modes:
            low = np.linspace(-40.0, -30.0, 11)
            for s in (Scheme.MARP, Scheme.AW_SIC):
                if s in schemes:
                    entry["slopes"][s.value] = fitted_slope(low, analytic_curve(s, cfg, model, low))
        if model is not None and "analytic" in cfg.modes:
            P = 10.0 ** (cfg.power_db / 10.0)
            entry["shift_db"] = {"expected": model.horizontal_shift_db(P)}
            for s in schemes:
                entry["shift_db"][s.value] = extracted_shift_db(s, cfg, model)
        report["variants"][tag] = entry
    path = out / f"{cfg.name}_report.json"
    report["files"].append(path.name)
    with open(path, "w") as fh:
        json.dump(report, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return report


# -- protocol traces -------------------------------------------------------------

def dump_protocol_trace(cfg: ExperimentConfig, n: int, seed: int, path, theta_db: float = 0.0,
                        scheme=Scheme.AW_DIS) -> dict:
    """Write ``n`` per-draw controller traces plus a histogram and an equivalence line."""
    scheme = Scheme.parse(scheme)
    if scheme not in TABLES:
        raise ValueError(f"no controller table for {scheme.value}")
    geom = cfg.geometry
    power = PowerConfig.from_db(cfg.power_db, theta_db, cfg.theta2_db, cfg.power_mode)
    rng = np.random.default_rng(seed)
    z, t = geom.sample_locations(n, rng)
    la = power.equivalent_attenuations(attenuations(z, t, geom.d, geom.alpha))
    draw = sample_fading(la, rng, n)
    thetas = (power.theta1, power.theta2)
    st = LinkState(draw.hsq, power.P, thetas)
    batch = run_protocol_batch(scheme, st)
    hist = Counter(zip(batch.steps.tolist(), batch.bits.tolist()))
    check = verify_protocol_equivalence(n, geom, power, seed=seed)
    mism = check["aw_sic_mismatches" if scheme is Scheme.AW_SIC else "aw_dis_mismatches"]
    with open(path, "w") as fh:
        fh.write(f"# scheme={scheme.value} theta_db={theta_db:g} draws={n} seed={seed}\n")
        for k in range(n):
            tr = _run(TABLES[scheme], LinkState(draw.hsq[:, :, k], power.P, thetas), scheme, 1)
            fh.write(f"## draw {k}\n{tr.to_text()}\n")
        fh.write("# histogram steps,bits,count\n")
        for (s, b), c in sorted(hist.items()):
            fh.write(f"{s},{b},{c}\n")
        fh.write(f"# equivalence mismatches={mism} max_steps={check['max_steps']} "
                 f"max_bits={check['max_bits']}\n")
    return {"histogram": {f"{s},{b}": c for (s, b), c in sorted(hist.items())},
            "mismatches": mism, "max_steps": check["max_steps"], "max_bits": check["max_bits"]}
