"""Declarative scenario runner: config in, CSV/JSON series out.

A scenario file describes a lattice window, an initial state, a drive (or
a band dispersion), a time grid, and the quantities to emit. Two
encodings of the same schema are accepted: INI-style sections

    [scenario]
    name = bloch_oscillation
    seed = 0

    [lattice]
    window = -64 64

    [state]
    kind = gaussian
    center = 0
    sigma = 8
    kappa0 = 0.0

    [drive]
    kind = dc
    f0 = 1.0
    g0 = 1.0

    [time]
    t_max = 12.566
    samples = 128

    [output]
    quantities = observables state_snapshots

    [oracle]
    enabled = true
    tolerance = 1e-6

or a JSON object with the same sections as keys. Outputs are deterministic
(sampling is seeded from [scenario] seed) and every CSV starts with a
comment line carrying the scenario name and config hash.
"""

from __future__ import annotations

import configparser
import hashlib
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import classical as cls
from . import observables as obs
from .drives import DCDrive, FourierDrive, HarmonicDrive, TabulatedDrive
from .floquet import invariant_expectation, quasienergy_band
from .lattice import bloch_grid, coherence_parameters, make_state
from .oracle import OracleConfig, integrate_series
from .propagator import SingleBandDispersion, evolve, evolve_single_band

__all__ = ["ConfigError", "Scenario", "load_scenario", "run_scenario",
           "compare_with_oracle", "localization_map", "band_table"]

_QUANTITIES = ("phase_integrals", "observables", "state_snapshots", "band",
               "invariant", "classical", "localization_report")


class ConfigError(ValueError):
    """A scenario file failed validation; the message names section and key."""


def _fail(section: str, key: str, why: str):
    raise ConfigError(f"[{section}] {key}: {why}")


def _parse_ini(text: str) -> dict:
    parser = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"config parse error: {exc}") from exc
    out: dict = {}
    for section in parser.sections():
        out[section] = dict(parser.items(section))
    return out


def _coerce(section: str, key: str, raw, kind):
    """Coerce an INI string (or JSON value) to the requested type."""
    try:
        if kind is bool:
            if isinstance(raw, bool):
                return raw
            val = str(raw).strip().lower()
            if val in ("true", "yes", "on", "1"):
                return True
            if val in ("false", "no", "off", "0"):
                return False
            raise ValueError(f"not a boolean: {raw!r}")
        if kind is float:
            return float(raw)
        if kind is int:
            value = float(raw)
            if value != int(value):
                raise ValueError(f"not an integer: {raw!r}")
            return int(value)
        if kind is str:
            return str(raw).strip()
        if kind == "floats":
            if isinstance(raw, (list, tuple)):
                return [float(x) for x in raw]
            return [float(x) for x in str(raw).replace(",", " ").split()]
        if kind == "strings":
            if isinstance(raw, (list, tuple)):
                return [str(x) for x in raw]
            return str(raw).split()
    except (TypeError, ValueError) as exc:
        _fail(section, key, str(exc))
    raise AssertionError(f"unknown coercion {kind!r}")


class _Section:
    def __init__(self, name: str, data: dict):
        self.name = name
        self.data = dict(data or {})
        self.seen: set = set()

    def get(self, key, kind, default=None, required=False):
        self.seen.add(key)
        if key not in self.data:
            if required:
                _fail(self.name, key, "required key missing")
            return default
        return _coerce(self.name, key, self.data[key], kind)

    def reject_unknown(self):
        unknown = set(self.data) - self.seen
        if unknown:
            _fail(self.name, sorted(unknown)[0], "unknown key")


@dataclass
class Scenario:
    """A validated scenario, ready to run."""

    name: str
    seed: int
    window: tuple
    ring: bool
    state_spec: dict
    drive: object
    dispersion: object | None
    convention: str
    t_max: float
    samples: int
    quantities: tuple
    snapshot_times: tuple
    oracle_enabled: bool
    oracle_config: OracleConfig
    tolerance: float
    kappa_points: int
    map_range: tuple
    config_hash: str

    @property
    def times(self) -> np.ndarray:
        return np.linspace(0.0, self.t_max, self.samples)

    def initial_state(self):
        state = make_state(self.state_spec, self.window)
        if self.ring:
            from dataclasses import replace
            state = replace(state, ring=True)
        return state

    def evolve_to(self, state, t: float):
        if self.dispersion is not None:
            return evolve_single_band(state, self.dispersion, self.drive, t,
                                      convention=self.convention)
        return evolve(state, self.drive, t)


def _build_drive(sec: _Section, base_dir: Path):
    kind = sec.get("kind", str, required=True)
    if kind == "dc":
        drive = DCDrive(sec.get("f0", float, required=True),
                        sec.get("g0", float, required=True))
    elif kind == "harmonic":
        drive = HarmonicDrive(sec.get("f0", float, required=True),
                              sec.get("f1", float, required=True),
                              sec.get("omega", float, required=True),
                              sec.get("g0", float, required=True))
    elif kind == "fourier":
        drive = FourierDrive(sec.get("f0", float, required=True),
                             tuple(sec.get("modes", "floats", required=True)),
                             sec.get("omega", float, required=True),
                             sec.get("g0", float, required=True))
    elif kind == "tabulated":
        f_file = sec.get("f_file", str, required=True)
        g_file = sec.get("g_file", str, required=True)
        periodic = sec.get("periodic", bool, default=False)
        try:
            drive = TabulatedDrive.from_files(base_dir / f_file, base_dir / g_file,
                                              periodic=periodic)
        except (OSError, ValueError) as exc:
            _fail("drive", "f_file", str(exc))
    else:
        _fail("drive", "kind", f"unknown drive kind {kind!r}")
    sec.reject_unknown()
    return drive


def load_scenario(path) -> Scenario:
    """Parse and validate a scenario file (INI sections or a JSON object)."""
    path = Path(path)
    text = path.read_text()
    if text.lstrip().startswith("{"):
        try:
            raw = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config parse error: {exc}") from exc
        if not isinstance(raw, dict):
            raise ConfigError("JSON config must be an object of sections")
    else:
        raw = _parse_ini(text)
    unknown_sections = set(raw) - {"scenario", "lattice", "state", "drive",
                                   "dispersion", "time", "output", "oracle",
                                   "band", "localization_map"}
    if unknown_sections:
        raise ConfigError(f"unknown section [{sorted(unknown_sections)[0]}]")

    digest = hashlib.sha256(
        json.dumps(raw, sort_keys=True, default=str).encode()).hexdigest()[:12]

    sec_scen = _Section("scenario", raw.get("scenario", {}))
    name = sec_scen.get("name", str, default=path.stem)
    seed = sec_scen.get("seed", int, default=0)
    sec_scen.reject_unknown()

    sec_lat = _Section("lattice", raw.get("lattice", {}))
    win = sec_lat.get("window", "floats", required=True)
    if len(win) != 2 or win[0] != int(win[0]) or win[1] != int(win[1]):
        _fail("lattice", "window", "expected two integers n_min n_max")
    window = (int(win[0]), int(win[1]))
    if window[1] < window[0]:
        _fail("lattice", "window", "n_max below n_min")
    ring = sec_lat.get("ring", bool, default=False)
    sec_lat.reject_unknown()

    sec_state = _Section("state", raw.get("state", {}))
    kind = sec_state.get("kind", str, required=True)
    if kind == "single_site":
        state_spec = {"kind": kind, "site": sec_state.get("site", int, default=0)}
    elif kind == "gaussian":
        state_spec = {"kind": kind,
                      "center": sec_state.get("center", float, default=0.0),
                      "sigma": sec_state.get("sigma", float, required=True),
                      "kappa0": sec_state.get("kappa0", float, default=0.0)}
        if state_spec["sigma"] <= 0:
            _fail("state", "sigma", "must be positive")
    elif kind == "amplitudes":
        values = sec_state.get("values", "floats", required=True)
        if len(values) % 2 != 0:
            _fail("state", "values", "expected re im pairs")
        state_spec = {"kind": kind,
                      "values": [complex(values[i], values[i + 1])
                                 for i in range(0, len(values), 2)]}
    else:
        _fail("state", "kind", f"unknown state kind {kind!r}")
    sec_state.reject_unknown()

    if "drive" not in raw:
        raise ConfigError("[drive] section is required")
    drive = _build_drive(_Section("drive", raw["drive"]), path.parent)

    dispersion = None
    convention = "index"
    if "dispersion" in raw:
        sec_disp = _Section("dispersion", raw["dispersion"])
        couplings = sec_disp.get("couplings", "floats", required=True)
        convention = sec_disp.get("convention", str, default="index")
        if convention not in ("index", "power2"):
            _fail("dispersion", "convention", "must be 'index' or 'power2'")
        sec_disp.reject_unknown()
        try:
            dispersion = SingleBandDispersion(tuple(couplings))
        except ValueError as exc:
            _fail("dispersion", "couplings", str(exc))

    sec_time = _Section("time", raw.get("time", {}))
    t_max = sec_time.get("t_max", float, required=True)
    samples = sec_time.get("samples", int, required=True)
    if t_max <= 0:
        _fail("time", "t_max", "must be positive")
    if samples < 2:
        _fail("time", "samples", "need at least 2 samples")
    sec_time.reject_unknown()

    sec_out = _Section("output", raw.get("output", {}))
    quantities = tuple(sec_out.get("quantities", "strings",
                                   default=["observables"]))
    for q in quantities:
        if q not in _QUANTITIES:
            _fail("output", "quantities", f"unknown quantity {q!r}")
    snapshot_times = tuple(sec_out.get("snapshot_times", "floats",
                                       default=[0.0, t_max]))
    sec_out.reject_unknown()

    if dispersion is not None:
        allowed = {"phase_integrals", "state_snapshots"}
        bad = [q for q in quantities if q not in allowed]
        if bad:
            _fail("output", "quantities",
                  f"{bad[0]!r} is unavailable with a [dispersion] section "
                  "(closed-form moments are tight-binding only)")

    sec_orc = _Section("oracle", raw.get("oracle", {}))
    oracle_enabled = sec_orc.get("enabled", bool, default=False)
    boundary = sec_orc.get("boundary", str, default="ring" if ring else "open")
    dt = sec_orc.get("dt", float, default=None)
    err_pt = sec_orc.get("error_per_time", float, default=1e-8)
    leak_tol = sec_orc.get("leak_tolerance", float, default=1e-8)
    tolerance = sec_orc.get("tolerance", float, default=1e-6)
    sec_orc.reject_unknown()
    try:
        oracle_config = OracleConfig(boundary=boundary, dt=dt,
                                     error_per_time=err_pt,
                                     leak_tolerance=leak_tol)
    except ValueError as exc:
        _fail("oracle", "boundary", str(exc))

    sec_band = _Section("band", raw.get("band", {}))
    kappa_points = sec_band.get("kappa_points", int, default=64)
    sec_band.reject_unknown()

    sec_map = _Section("localization_map", raw.get("localization_map", {}))
    map_range = (sec_map.get("x_min", float, default=0.0),
                 sec_map.get("x_max", float, default=6.0),
                 sec_map.get("steps", int, default=121))
    sec_map.reject_unknown()

    return Scenario(name=name, seed=seed, window=window, ring=ring,
                    state_spec=state_spec, drive=drive, dispersion=dispersion,
                    convention=convention, t_max=t_max, samples=samples,
                    quantities=quantities, snapshot_times=snapshot_times,
                    oracle_enabled=oracle_enabled, oracle_config=oracle_config,
                    tolerance=tolerance, kappa_points=kappa_points,
                    map_range=map_range, config_hash=digest)


def _write_csv(path: Path, scenario: Scenario, header: list, rows):
    with open(path, "w") as fh:
        fh.write(f"# scenario={scenario.name} hash={scenario.config_hash}\n")
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(f"{v:.17g}" for v in row) + "\n")


def _emit_observables(scenario: Scenario, out_dir: Path) -> str:
    state = scenario.initial_state()
    coh = coherence_parameters(state)
    series = obs.observable_series(coh, scenario.drive, scenario.times)
    rows = zip(series.times, series.eta, series.chi.real, series.chi.imag,
               series.u, series.v, series.expect_N, series.var_N,
               series.expect_K.real, series.expect_K.imag)
    _write_csv(out_dir / "observables.csv", scenario,
               ["t", "eta", "re_chi", "im_chi", "u", "v", "expect_N", "var_N",
                "re_expect_K", "im_expect_K"], rows)
    return "observables.csv"


def _emit_snapshots(scenario: Scenario, out_dir: Path) -> list:
    state = scenario.initial_state()
    names = []
    for i, t in enumerate(scenario.snapshot_times):
        snap = scenario.evolve_to(state, float(t))
        name = f"snapshot_{i:04d}.csv"
        path = out_dir / name
        with open(path, "w") as fh:
            fh.write(f"# scenario={scenario.name} hash={scenario.config_hash} "
                     f"t={t:.17g} leak={snap.leak:.3e}\n")
            fh.write("n,re_c,im_c,prob\n")
            for n, c in zip(snap.sites, snap.amplitudes):
                fh.write(f"{n},{c.real:.17g},{c.imag:.17g},{abs(c) ** 2:.17g}\n")
        names.append(name)
    return names


def band_table(scenario: Scenario):
    """(kappa, quasienergy) closed-form rows for the scenario's drive."""
    band = quasienergy_band(scenario.drive)
    kappa = np.sort(bloch_grid(scenario.kappa_points))
    return kappa, band.epsilon(kappa)


def _emit_band(scenario: Scenario, out_dir: Path) -> str:
    try:
        kappa, eps = band_table(scenario)
    except ValueError as exc:
        raise ConfigError(f"[drive] kind: {exc}") from exc
    _write_csv(out_dir / "band.csv", scenario, ["kappa", "quasienergy"],
               zip(kappa, eps))
    return "band.csv"


def _emit_invariant(scenario: Scenario, out_dir: Path) -> str:
    state = scenario.initial_state()
    n0 = coherence_parameters(state).n_mean
    rows = []
    for t in scenario.times:
        rows.append((t, invariant_expectation(state, scenario.drive, float(t)),
                     n0))
    _write_csv(out_dir / "invariant.csv", scenario,
               ["t", "invariant", "n_mean_initial"], rows)
    return "invariant.csv"


def _emit_classical(scenario: Scenario, out_dir: Path, n_samples: int = 20000):
    state = scenario.initial_state()
    ens = cls.ensemble_from_state(state, n_samples, seed=scenario.seed)
    _write_csv(out_dir / "ensemble.csv", scenario, ["p", "q", "weight"],
               zip(ens.p, ens.q, ens.weights))
    rows = []
    for t in scenario.times:
        mean, var = cls.ensemble_moments(ens, scenario.drive, float(t))
        rows.append((t, mean, var))
    _write_csv(out_dir / "classical.csv", scenario, ["t", "mean_N", "var_N"], rows)
    return ["classical.csv", "ensemble.csv"]


def _emit_localization(scenario: Scenario, out_dir: Path) -> str:
    state = scenario.initial_state()
    try:
        report = obs.localization_report(scenario.drive,
                                         coherence_parameters(state))
    except ValueError as exc:
        raise ConfigError(f"[drive] kind: {exc}") from exc
    payload = {"order": report.order, "gamma": report.gamma,
               "localized": report.localized, "degenerate": report.degenerate,
               "var_slope_coefficient": report.var_slope_coefficient,
               "nearest_zeros": list(report.nearest_zeros),
               "scenario": scenario.name, "hash": scenario.config_hash}
    path = out_dir / "localization_report.json"
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
    return "localization_report.json"


def run_scenario(config_path, out_dir=None, seed=None, tolerance=None) -> dict:
    """Execute a scenario; returns the summary dict (also written as JSON)."""
    scenario = load_scenario(config_path)
    if seed is not None:
        scenario.seed = int(seed)
    if tolerance is not None:
        scenario.tolerance = float(tolerance)
    out = Path(out_dir) if out_dir is not None else Path.cwd() / "driventb-out"
    out.mkdir(parents=True, exist_ok=True)

    produced: list = []
    wants = set(scenario.quantities)
    if wants & {"phase_integrals", "observables"}:
        produced.append(_emit_observables(scenario, out))
    if "state_snapshots" in wants:
        produced.extend(_emit_snapshots(scenario, out))
    if "band" in wants:
        produced.append(_emit_band(scenario, out))
    if "invariant" in wants:
        produced.append(_emit_invariant(scenario, out))
    if "classical" in wants:
        produced.extend(_emit_classical(scenario, out))
    if "localization_report" in wants:
        produced.append(_emit_localization(scenario, out))

    summary = {"scenario": scenario.name, "hash": scenario.config_hash,
               "seed": scenario.seed, "outputs": produced, "status": "ok"}
    if scenario.oracle_enabled:
        report = compare_with_oracle(config_path, out_dir=out,
                                     tolerance=scenario.tolerance)
        summary["oracle"] = {
            "max_amplitude_deviation": report["max_amplitude_deviation"],
            "passed": report["passed"]}
        if not report["passed"]:
            summary["status"] = "oracle-divergence"
    (out / "summary.json").write_text(
        json.dumps(summary, indent=2, sort_keys=True) + "\n")
    return summary


def compare_with_oracle(config_path, out_dir=None, tolerance=None) -> dict:
    """Closed form vs brute-force integration over the scenario's time grid.

    Returns (and writes) a report with per-time maximum amplitude deviation
    and moment deviations, plus a pass/fail verdict at the tolerance.
    """
    scenario = load_scenario(config_path)
    if tolerance is not None:
        scenario.tolerance = float(tolerance)
    out = Path(out_dir) if out_dir is not None else Path.cwd() / "driventb-out"
    out.mkdir(parents=True, exist_ok=True)

    state = scenario.initial_state()
    times = scenario.times
    oracle_states = integrate_series(state, scenario.drive, times,
                                     config=scenario.oracle_config,
                                     dispersion=scenario.dispersion)
    per_time = []
    for t, ref in zip(times, oracle_states):
        closed = scenario.evolve_to(state, float(t))
        amp_dev = float(np.max(np.abs(closed.amplitudes - ref.amplitudes)))
        p_ref = ref.probabilities
        n_ref = float(np.sum(ref.sites * p_ref))
        n2_ref = float(np.sum(ref.sites.astype(float) ** 2 * p_ref))
        p_cl = closed.probabilities
        n_cl = float(np.sum(closed.sites * p_cl))
        n2_cl = float(np.sum(closed.sites.astype(float) ** 2 * p_cl))
        per_time.append({"t": float(t), "amplitude": amp_dev,
                         "mean_N": abs(n_cl - n_ref),
                         "var_N": abs((n2_cl - n_cl ** 2) - (n2_ref - n_ref ** 2)),
                         "leak": closed.leak})
    max_amp = max(row["amplitude"] for row in per_time)
    max_mean = max(row["mean_N"] for row in per_time)
    max_var = max(row["var_N"] for row in per_time)
    report = {"scenario": scenario.name, "hash": scenario.config_hash,
              "tolerance": scenario.tolerance, "per_time": per_time,
              "max_amplitude_deviation": max_amp,
              "max_mean_N_deviation": max_mean,
              "max_var_N_deviation": max_var,
              "passed": bool(max_amp <= scenario.tolerance)}
    (out / "comparison.json").write_text(
        json.dumps(report, indent=2, sort_keys=True) + "\n")
    return report


def localization_map(config_path, out_dir=None) -> dict:
    """Sweep f1/omega for the scenario's harmonic drive, emitting gamma_n."""
    scenario = load_scenario(config_path)
    drive = scenario.drive
    if not isinstance(drive, HarmonicDrive):
        raise ConfigError("[drive] kind: localization map requires a harmonic drive")
    if drive.resonance_order() is None:
        raise ConfigError("[drive] f0: localization map requires a resonant drive")
    out = Path(out_dir) if out_dir is not None else Path.cwd() / "driventb-out"
    out.mkdir(parents=True, exist_ok=True)
    x_min, x_max, steps = scenario.map_range
    xs = np.linspace(x_min, x_max, int(steps))
    gammas = [HarmonicDrive(drive.f0, x * drive.omega, drive.omega,
                            drive.g0).drift_rate() for x in xs]
    _write_csv(out / "localization_map.csv", scenario,
               ["f1_over_omega", "gamma"], zip(xs, gammas))
    return {"scenario": scenario.name, "points": int(steps),
            "file": "localization_map.csv"}
