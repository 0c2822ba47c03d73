"""Named experiment runners that write CSV, summary and manifest files.

Each experiment takes a flat configuration (see :data:`KEYS`) and produces

* ``results.csv``: one row per grid point, 9 significant digits, ``NA``
  only in rows whose feasibility flag is false
* ``summary.txt``: derived numbers (crossover distances, reach, savings,
  Monte Carlo agreement)
* ``manifest.txt``: the fully resolved configuration
"""
from __future__ import annotations

import csv
import io
import math
import os
from dataclasses import dataclass, replace

import numpy as np

from . import __version__
from .energy import EnergyProfile, cooperation_gain
from .errors import AccuracyError, DfRelayError, DomainError
from .link import FadingParams, Geometry, LinkBudget, noise_power
from .modulation import Modulation
from .optimize import (OpaProblem, SweepRow, crossover_distance, direct_max_reach, direct_row,
                       solve_opa)
from .ser import ser_coop_asymptotic, ser_coop_exact, ser_direct_exact
from .simulate import McConfig, simulate_df_link

__all__ = ["KEYS", "EXPERIMENTS", "ConfigError", "resolve_config", "run_experiment",
           "format_number"]


class ConfigError(DfRelayError, ValueError):
    """Unknown key or malformed value in an experiment configuration."""


# key -> (parser, is_list)
KEYS = {
    "m": (float, True),
    "m_sr": (float, False),
    "m_dt": (float, False),
    "omega_sd": (float, False),
    "omega_sr": (float, False),
    "omega_rd": (float, False),
    "rho": (float, True),
    "f": (float, True),
    "target_ber": (float, True),
    "d_start_m": (float, False),
    "d_stop_m": (float, False),
    "d_step_m": (float, False),
    "d_range_m": (float, True),
    "snr_start_db": (float, False),
    "snr_stop_db": (float, False),
    "snr_step_db": (float, False),
    "family": (str, False),
    "order": (int, False),
    "n0_dbm_hz": (float, False),
    "noise_figure_db": (float, False),
    "p_ctx": (float, False),
    "p_crx": (float, False),
    "p_lo": (float, False),
    "eta": (float, False),
    "t_tr": (float, False),
    "packet_bits": (int, False),
    "bandwidth": (float, False),
    "p_maxt": (float, False),
    "mc_symbols": (int, False),
    "seed": (int, False),
    "workers": (int, False),
}

BASE_DEFAULTS = {
    "m": [1.25], "m_sr": None, "m_dt": None,
    "omega_sd": 1.0, "omega_sr": 1.0, "omega_rd": 1.0,
    "rho": [0.0], "f": [0.5], "target_ber": [1e-2],
    "d_start_m": 50.0, "d_stop_m": 600.0, "d_step_m": 25.0,
    "snr_start_db": 130.0, "snr_stop_db": 175.0, "snr_step_db": 5.0,
    "family": "QAM", "order": 4,
    "n0_dbm_hz": -174.0, "noise_figure_db": 6.0,
    "p_ctx": 0.1, "p_crx": 0.15, "p_lo": 0.05, "eta": 0.35, "t_tr": 5e-6,
    "packet_bits": 2000, "bandwidth": 2e5, "p_maxt": 1.0,
    "mc_symbols": 0, "seed": 0, "workers": 1,
}

EXPERIMENT_DEFAULTS = {
    "fig2-ser": {"m": [0.75, 1.25], "rho": [0.0, 0.5, 0.9], "d_start_m": 600.0,
                 "d_stop_m": 600.0, "mc_symbols": 100_000},
    "fig5-relay-location": {"f": [0.1, 0.5, 0.9]},
    "fig6-ber-targets": {"target_ber": [1e-2, 1e-3], "rho": [0.0, 0.5, 0.9]},
    "fig7-m075": {"m": [0.75], "rho": [0.0, 0.5, 0.9]},
    "fig8-m-sweep": {"m": [0.75, 1.25, 1.75, 2.25], "m_dt": 2.25, "target_ber": [1e-3]},
    "fig9-coopgain": {"rho": [0.0, 0.5, 0.9], "d_stop_m": 390.0},
    "table-opa": {"rho": [0.0, 0.5, 0.9], "d_start_m": 100.0, "d_stop_m": 600.0,
                  "d_step_m": 100.0},
    "custom-sweep": {},
}

EXPERIMENTS = tuple(EXPERIMENT_DEFAULTS)


def normalize_key(key: str) -> str:
    return key.strip().lstrip("-").replace("-", "_").lower()


def parse_value(key: str, raw) -> object:
    if key not in KEYS:
        raise ConfigError(f"unknown configuration key {key!r}")
    conv, is_list = KEYS[key]
    if not isinstance(raw, str):
        return raw
    try:
        if is_list:
            return [conv(v) for v in raw.split(",") if v.strip()]
        return conv(raw)
    except ValueError as exc:
        raise ConfigError(f"bad value {raw!r} for {key}: {exc}") from None


def read_config_file(path: str) -> dict:
    """Flat ``key = value`` file; ``#`` starts a comment."""
    out = {}
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected key = value")
            k, v = line.split("=", 1)
            k = normalize_key(k)
            out[k] = parse_value(k, v.strip())
    return out


def resolve_config(experiment: str, file_values: dict | None = None,
                   overrides: dict | None = None) -> dict:
    """Merge defaults, file values and command-line overrides (later wins)."""
    if experiment not in EXPERIMENT_DEFAULTS:
        raise ConfigError(f"unknown experiment {experiment!r}; choose from {', '.join(EXPERIMENTS)}")
    cfg = dict(BASE_DEFAULTS)
    cfg.update(EXPERIMENT_DEFAULTS[experiment])
    for src in (file_values or {}), (overrides or {}):
        for k, v in src.items():
            k = normalize_key(k)
            cfg[k] = parse_value(k, v)
    _apply_range(cfg)
    _validate(cfg)
    return cfg


def _apply_range(cfg: dict):
    """Expand ``d_range_m = start,stop[,step]`` into the three distance keys."""
    rng = cfg.pop("d_range_m", None)
    if rng is None:
        return
    if len(rng) not in (2, 3):
        raise ConfigError("d_range_m takes start,stop or start,stop,step")
    cfg["d_start_m"], cfg["d_stop_m"] = rng[0], rng[1]
    if len(rng) == 3:
        cfg["d_step_m"] = rng[2]


def _validate(cfg: dict):
    try:
        Modulation(cfg["family"], cfg["order"])
        _profile(cfg)
        for m in cfg["m"]:
            for rho in cfg["rho"]:
                FadingParams.uniform(m, rho)
        for f in cfg["f"]:
            Geometry(1.0, f)
    except DomainError as exc:
        raise ConfigError(str(exc)) from None
    if cfg["d_start_m"] <= 0 or cfg["d_stop_m"] < cfg["d_start_m"] or cfg["d_step_m"] <= 0:
        raise ConfigError("need 0 < d_start_m <= d_stop_m and d_step_m > 0")
    if cfg["snr_step_db"] <= 0 or cfg["snr_stop_db"] < cfg["snr_start_db"]:
        raise ConfigError("need snr_start_db <= snr_stop_db and snr_step_db > 0")
    if any(not 0 < p < 0.5 for p in cfg["target_ber"]):
        raise ConfigError("target_ber values must lie in (0, 0.5)")
    if cfg["mc_symbols"] and cfg["mc_symbols"] < 10_000:
        raise ConfigError("mc_symbols must be 0 (off) or >= 10000")
    if cfg["workers"] < 1:
        raise ConfigError("workers must be >= 1")


def _profile(cfg) -> EnergyProfile:
    return EnergyProfile(cfg["p_ctx"], cfg["p_crx"], cfg["p_lo"], cfg["eta"], cfg["t_tr"],
                         cfg["packet_bits"], cfg["bandwidth"], cfg["p_maxt"])


def _n0(cfg) -> float:
    return noise_power(cfg["n0_dbm_hz"], cfg["bandwidth"], cfg["noise_figure_db"])


def _fading(cfg, m, rho) -> FadingParams:
    m_sr = cfg["m_sr"] if cfg["m_sr"] is not None else m
    return FadingParams(m, m_sr, m, cfg["omega_sd"], cfg["omega_sr"], cfg["omega_rd"], rho)


def _distances_km(cfg) -> list[float]:
    start, stop, step = cfg["d_start_m"], cfg["d_stop_m"], cfg["d_step_m"]
    n = int(math.floor((stop - start) / step + 1e-9)) + 1
    return [(start + k * step) / 1000.0 for k in range(n)]


# --------------------------------------------------------------------------
# formatting
# --------------------------------------------------------------------------

def format_number(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if v is None or (isinstance(v, float) and not math.isfinite(v)):
        return "NA"
    return f"{float(v):.9g}"


@dataclass
class ExperimentOutput:
    columns: list
    rows: list
    summary: list
    accuracy_errors: int = 0

    def csv_text(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.columns)
        for row in self.rows:
            w.writerow([format_number(row.get(c)) for c in self.columns])
        return buf.getvalue()


# --------------------------------------------------------------------------
# experiment bodies
# --------------------------------------------------------------------------

SER_COLUMNS = ["d_m", "f", "m", "rho", "snr_db", "p_s_w", "p_r_w", "ser_direct",
               "ser_exact", "ser_asym", "ser_mc", "mc_stderr", "feasible_ct"]

ENERGY_COLUMNS = ["d_m", "f", "m", "m_dt", "rho", "target_ber", "p_s_w", "p_r_w", "p_dt_w",
                  "energy_dt_j_per_bit", "energy_ct_j_per_bit", "cg", "savings",
                  "ber_ct", "kkt_residual", "active_power_cap", "feasible_dt", "feasible_ct"]


def _run_ser(cfg) -> ExperimentOutput:
    mod = Modulation(cfg["family"], cfg["order"])
    n0 = _n0(cfg)
    snrs = np.arange(cfg["snr_start_db"], cfg["snr_stop_db"] + 1e-9, cfg["snr_step_db"])
    rows, worst_z, n_err = [], 0.0, 0
    row_index = 0
    for m in cfg["m"]:
        for rho in cfg["rho"]:
            fading = _fading(cfg, m, rho)
            for f in cfg["f"]:
                for d_km in _distances_km(cfg):
                    geo = Geometry(d_km, f)
                    for snr_db in snrs:
                        p_tot = n0 * 10.0 ** (snr_db / 10.0)
                        bud = LinkBudget.from_geometry(geo, p_tot / 2, p_tot / 2, n0=n0)
                        row = {"d_m": d_km * 1000, "f": f, "m": m, "rho": rho,
                               "snr_db": float(snr_db), "p_s_w": bud.p_s, "p_r_w": bud.p_r}
                        try:
                            ex = ser_coop_exact(bud, fading, mod)
                            row.update(ser_direct=ser_direct_exact(bud, fading, mod).ser,
                                       ser_exact=ex.ser,
                                       ser_asym=ser_coop_asymptotic(bud, fading, mod).ser,
                                       feasible_ct=True)
                        except AccuracyError:
                            n_err += 1
                            row["feasible_ct"] = False
                        if cfg["mc_symbols"]:
                            seed = int(np.random.SeedSequence([cfg["seed"], row_index])
                                       .generate_state(1)[0])
                            mc = simulate_df_link(bud, fading, mod,
                                                  McConfig(cfg["mc_symbols"], seed,
                                                           workers=cfg["workers"]))
                            row.update(ser_mc=mc.ser_hat, mc_stderr=mc.std_err)
                            if row.get("ser_exact") is not None and mc.std_err > 0:
                                worst_z = max(worst_z, abs(mc.ser_hat - row["ser_exact"])
                                              / mc.std_err)
                        rows.append(row)
                        row_index += 1
    cols = [c for c in SER_COLUMNS if cfg["mc_symbols"] or c not in ("ser_mc", "mc_stderr")]
    summary = [f"rows = {len(rows)}", f"modulation = {mod}"]
    if cfg["mc_symbols"]:
        summary.append(f"max |mc - exact| / stderr = {worst_z:.3f}")
    return ExperimentOutput(cols, rows, summary, n_err)


def _energy_curves(cfg):
    """Yield (label, problem_template, dt_template) for every parameter combination."""
    mod = Modulation(cfg["family"], cfg["order"])
    prof = _profile(cfg)
    n0 = _n0(cfg)
    for p_star in cfg["target_ber"]:
        for m in cfg["m"]:
            for rho in cfg["rho"]:
                for f in cfg["f"]:
                    fading = _fading(cfg, m, rho)
                    prob = OpaProblem(p_star, Geometry(cfg["d_start_m"] / 1000, f), fading,
                                      prof, mod, n0)
                    m_dt = cfg["m_dt"] if cfg["m_dt"] is not None else m
                    dt_prob = replace(prob, fading=_fading(cfg, m_dt, rho))
                    yield (p_star, m, m_dt, rho, f), prob, dt_prob


def _run_energy(cfg, with_cg: bool = True) -> ExperimentOutput:
    rows, summary, n_err = [], [], 0
    for (p_star, m, m_dt, rho, f), prob, dt_prob in _energy_curves(cfg):
        curve = []
        for d_km in _distances_km(cfg):
            p = prob.at_distance(d_km)
            dp = dt_prob.at_distance(d_km)
            row = {"d_m": d_km * 1000, "f": f, "m": m, "m_dt": m_dt, "rho": rho,
                   "target_ber": p_star}
            p_dt, e_dt, ok_dt = direct_row(dp)
            row.update(p_dt_w=p_dt if ok_dt else None,
                       energy_dt_j_per_bit=e_dt if ok_dt else None, feasible_dt=ok_dt)
            try:
                opa = solve_opa(p)
            except AccuracyError:
                n_err += 1
                row.update(feasible_ct=False)
                rows.append(row)
                continue
            ok_ct = opa.feasible
            row.update(p_s_w=opa.p_s_opt if ok_ct else None,
                       p_r_w=opa.p_r_opt if ok_ct else None,
                       energy_ct_j_per_bit=opa.energy_per_bit if ok_ct else None,
                       ber_ct=opa.achieved_ber if ok_ct else None,
                       kkt_residual=opa.kkt_residual if ok_ct else None,
                       active_power_cap=opa.active_power_cap, feasible_ct=ok_ct)
            if ok_ct and ok_dt:
                row["savings"] = 1.0 - opa.energy_per_bit / e_dt
                if with_cg:
                    row["cg"] = cooperation_gain(e_dt, p_star, opa.energy_per_bit,
                                                 opa.achieved_ber)
            rows.append(row)
            curve.append(SweepRow(d_km, rho, p_dt, e_dt, ok_dt, opa, p_star))
        summary.extend(_curve_summary(p_star, m, m_dt, rho, f, curve, dt_prob))
    return ExperimentOutput(ENERGY_COLUMNS, rows, summary, n_err)


def _curve_summary(p_star, m, m_dt, rho, f, curve, dt_prob):
    label = f"target_ber={p_star:g} m={m:g} m_dt={m_dt:g} rho={rho:g} f={f:g}"
    feas_ct = [r.d_km for r in curve if r.opa.feasible]
    reach_ct = max(feas_ct) if feas_ct else math.nan
    both = [r for r in curve if r.feasible_dt and r.opa.feasible]
    last = both[-1] if both else None
    return [
        f"[{label}]",
        f"crossover_m = {format_number(crossover_distance(curve) * 1000)}",
        f"dt_max_reach_m = {format_number(direct_max_reach(dt_prob) * 1000)}",
        f"ct_last_feasible_grid_m = {format_number(reach_ct * 1000)}",
        f"savings_at_last_common_grid_m = "
        f"{format_number(last.d_km * 1000 if last else None)} "
        f"{format_number(last.savings if last else None)}",
    ]


RUNNERS = {
    "fig2-ser": _run_ser,
    "fig5-relay-location": _run_energy,
    "fig6-ber-targets": _run_energy,
    "fig7-m075": _run_energy,
    "fig8-m-sweep": _run_energy,
    "fig9-coopgain": _run_energy,
    "table-opa": _run_energy,
    "custom-sweep": _run_energy,
}


def run_experiment(experiment: str, cfg: dict, out_dir: str) -> ExperimentOutput:
    """Run ``experiment`` with resolved ``cfg`` and write the three artifacts."""
    out = RUNNERS[experiment](cfg)
    os.makedirs(out_dir, exist_ok=True)
    with open(os.path.join(out_dir, "results.csv"), "w", newline="") as fh:
        fh.write(out.csv_text())
    with open(os.path.join(out_dir, "summary.txt"), "w") as fh:
        fh.write(f"experiment = {experiment}\n")
        fh.write("\n".join(out.summary) + "\n")
        fh.write(f"accuracy_error_rows = {out.accuracy_errors}\n")
    with open(os.path.join(out_dir, "manifest.txt"), "w") as fh:
        fh.write(f"experiment = {experiment}\n")
        fh.write(f"package_version = {__version__}\n")
        for k in sorted(cfg):
            v = cfg[k]
            if isinstance(v, list):
                v = ",".join(format_number(x) for x in v)
            else:
                v = format_number(v) if not isinstance(v, str) else v
            fh.write(f"{k} = {v}\n")
    return out
