"""Study runners: one ensemble experiment per config kind.

Each runner executes replicates through the shared scheduler, aggregates with
the package's own moment and slope kernels, evaluates the config-declared
thresholds, and (when out_dir is set) writes replicate CSV, per-scale series
CSV, and a JSON summary. Aggregation always happens in the parent in replicate
order, so output bytes are independent of the worker count.

Fitted slopes are only reported when the ladder has at least four points;
thresholds naming a missing slope fail loudly instead of silently passing.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field as dc_field
from pathlib import Path

import numpy as np

from .config import ExperimentConfig, validate
from .ensemble import EnsembleResult, run_replicates
from .errors import ConfigurationError, ConfigurationWarning
from .fluctuations import (
    conditional_variance,
    increment_sample,
    lil_statistic,
    martingale_decomposition,
)
from .heat import solve_coupled_heat_linearization
from .lattice import spatial_shell_area
from .linearize import heat_defect_samples, wave_defect_samples
from .noise import make_noise, render_grid
from .quadvar import (
    SpatialPartition,
    TemporalPartition,
    naive_qv_prediction,
    spatial_qv,
    spatial_qv_limit,
    temporal_qv_decomposition,
    temporal_qv_ladder,
    temporal_qv_limit,
)
from .reports import (
    ensure_out_dir,
    summary_report,
    write_ensemble_csv,
    write_field_csv,
    write_json_report,
    write_noise_snapshot,
    write_table_csv,
    write_wave_snapshot,
)
from .sigma import SigmaSpec
from .stats import ks_critical_value, ks_distance, loglog_slope, quantiles, summarize
from .wave import field_at, solve_coupled_linearization, solve_wave

__all__ = ["StudyOutput", "run_study", "STUDY_RUNNERS"]

MIN_SLOPE_POINTS = 4


@dataclass(frozen=True)
class StudyOutput:
    report: dict
    ensemble: EnsembleResult
    # series tables: name -> (columns, rows); written as <label>_<name>.csv
    series: dict = dc_field(default_factory=dict)
    files: tuple = ()


def _sigmas(gap: float, se: float) -> float:
    if se > 0:
        return abs(gap) / se
    return 0.0 if gap == 0 else float("inf")


def _maybe_slope(stats: dict, prefix: str, xs, ys) -> None:
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    if len(xs) < MIN_SLOPE_POINTS or np.any(ys <= 0) or np.any(xs <= 0):
        return
    fit = loglog_slope(xs, ys)
    stats[prefix] = fit.slope
    stats[prefix + "_se"] = fit.slope_std_error


def _wave_inputs(seed: int, cfg: ExperimentConfig):
    noise = make_noise(seed, cfg.lattice)
    return noise, solve_wave(cfg.sigma, noise)


# -- simulate ------------------------------------------------------------------


def _rep_simulate(seed: int, cfg: ExperimentConfig) -> dict[str, float]:
    _, f = _wave_inputs(seed, cfg)
    p = cfg.params
    out: dict[str, float] = {}
    for i, pt in enumerate(p.get("probes", [])):
        u = field_at(f, float(pt[0]), float(pt[1]))
        out[f"probe{i}_u"] = u
        out[f"probe{i}_u_sq"] = u * u
    block = p.get("temporal_lags")
    if block:
        t0, x0 = float(block["t"]), float(block["x"])
        base = field_at(f, t0, x0)
        for j, lag in enumerate(sorted(float(v) for v in block["lags"])):
            out[f"dt{j}_sq"] = (field_at(f, t0 + lag, x0) - base) ** 2
    block = p.get("spatial_lags")
    if block:
        t0, x0 = float(block["t"]), float(block["x"])
        base = field_at(f, t0, x0)
        for j, lag in enumerate(sorted(float(v) for v in block["lags"])):
            out[f"dx{j}_sq"] = (field_at(f, t0, x0 + lag) - base) ** 2
    return out


def _agg_simulate(cfg: ExperimentConfig, ens: EnsembleResult):
    p = cfg.params
    stats: dict[str, float] = {}
    series: dict = {}
    for i in range(len(p.get("probes", []))):
        s = summarize(ens.column(f"probe{i}_u"))
        q = summarize(ens.column(f"probe{i}_u_sq"))
        stats[f"probe{i}_mean"] = s.mean
        stats[f"probe{i}_se"] = s.std_error
        stats[f"probe{i}_sq_mean"] = q.mean
        stats[f"probe{i}_sq_se"] = q.std_error
    for key, col in (("temporal_lags", "dt"), ("spatial_lags", "dx")):
        block = p.get(key)
        if not block:
            continue
        lags = sorted(float(v) for v in block["lags"])
        msq = [float(np.mean(ens.column(f"{col}{j}_sq"))) for j in range(len(lags))]
        rows = [(lag, m) for lag, m in zip(lags, msq)]
        series[f"{col}_lags"] = (("lag", "mean_sq_increment"), rows)
        for j, m in enumerate(msq):
            stats[f"{col}{j}_msq"] = m
        _maybe_slope(stats, f"{'temporal' if col == 'dt' else 'spatial'}_sq_slope",
                     lags, msq)
    return stats, series


# -- temporal quadratic variation ---------------------------------------------


def _rep_qv_time(seed: int, cfg: ExperimentConfig) -> dict[str, float]:
    noise, f = _wave_inputs(seed, cfg)
    p = cfg.params
    t, x = float(p["t"]), float(p["x"])
    part = TemporalPartition(t, x, int(p["n_pieces"]))
    dec = temporal_qv_decomposition(f, noise, part)
    lim = temporal_qv_limit(f, t, x)
    u = field_at(f, t, x)
    return {
        "u_at": u,
        "u_sq": u * u,
        "qv": dec.direct,
        "frozen_noise": dec.frozen_noise,
        "frozen_area": dec.frozen_area,
        "cone_integral": dec.cone_integral,
        "limit": lim,
        "limit_gap": dec.direct - lim,
    }


def _agg_qv_time(cfg: ExperimentConfig, ens: EnsembleResult):
    stats: dict[str, float] = {}
    for name in ("u_at", "u_sq", "qv", "cone_integral", "limit", "limit_gap"):
        s = summarize(ens.column(name))
        key = "u" if name == "u_at" else name
        stats[f"{key}_mean"] = s.mean
        stats[f"{key}_se"] = s.std_error
    stats["qv_vs_limit_sigmas"] = _sigmas(stats["limit_gap_mean"], stats["limit_gap_se"])
    if cfg.sigma.is_constant:
        c = cfg.sigma.scalar(1.0)
        t = float(cfg.params["t"])
        stats["exact_mean"] = c * c * t * t
        stats["qv_vs_exact_sigmas"] = _sigmas(
            stats["qv_mean"] - stats["exact_mean"], stats["qv_se"]
        )
    return stats, {}


# -- spatial quadratic variation ----------------------------------------------


def _rep_qv_space(seed: int, cfg: ExperimentConfig) -> dict[str, float]:
    _, f = _wave_inputs(seed, cfg)
    p = cfg.params
    t = float(p["t"])
    x_lo, x_hi = float(p["x_lo"]), float(p["x_hi"])
    part = SpatialPartition(t, x_lo, x_hi, int(p["n_pieces"]))
    v = spatial_qv(f, part)
    lim = spatial_qv_limit(f, t, x_lo, x_hi)
    nv = naive_qv_prediction(f, t, x_lo, x_hi)
    return {"qv": v, "limit": lim, "naive": nv,
            "limit_gap": v - lim, "naive_gap": v - nv}


def _agg_qv_space(cfg: ExperimentConfig, ens: EnsembleResult):
    p = cfg.params
    span = float(p["x_hi"]) - float(p["x_lo"])
    stats: dict[str, float] = {}
    for name in ("qv", "limit", "naive", "limit_gap", "naive_gap"):
        s = summarize(ens.column(name))
        stats[f"{name}_mean"] = s.mean
        stats[f"{name}_se"] = s.std_error
    stats["qv_vs_limit_sigmas"] = _sigmas(stats["limit_gap_mean"], stats["limit_gap_se"])
    stats["qv_vs_naive_sigmas"] = _sigmas(stats["naive_gap_mean"], stats["naive_gap_se"])
    stats["qv_over_naive"] = stats["qv_mean"] / stats["naive_mean"]
    stats["limit_per_unit"] = stats["limit_mean"] / span
    stats["naive_per_unit"] = stats["naive_mean"] / span
    if cfg.sigma.is_constant:
        c = cfg.sigma.scalar(1.0)
        n = int(p["n_pieces"])
        delta = span / n
        # per piece: symmetric difference of neighbor cones, twice one lune
        stats["exact_mean"] = c * c * n * 2.0 * spatial_shell_area(float(p["t"]), delta)
        stats["qv_vs_exact_sigmas"] = _sigmas(
            stats["qv_mean"] - stats["exact_mean"], stats["qv_se"]
        )
    return stats, {}


# -- dyadic refinement ladder --------------------------------------------------


def _rep_ladder(seed: int, cfg: ExperimentConfig) -> dict[str, float]:
    noise, f = _wave_inputs(seed, cfg)
    p = cfg.params
    counts = sorted(int(n) for n in p["counts"])
    t = float(p["t"])
    if p.get("axis", "time") == "time":
        x = float(p["x"])
        decs = temporal_qv_ladder(f, noise, t, x, counts)
        out = {"limit": temporal_qv_limit(f, t, x)}
        for n, dec in zip(counts, decs):
            out[f"a_{n}"] = dec.direct
            out[f"b_{n}"] = dec.frozen_noise
            out[f"c_{n}"] = dec.frozen_area
            out[f"d_{n}"] = dec.cone_integral
        return out
    x_lo, x_hi = float(p["x_lo"]), float(p["x_hi"])
    out = {"limit": spatial_qv_limit(f, t, x_lo, x_hi),
           "naive": naive_qv_prediction(f, t, x_lo, x_hi)}
    for n in counts:
        out[f"v_{n}"] = spatial_qv(f, SpatialPartition(t, x_lo, x_hi, n))
    return out


def _agg_ladder(cfg: ExperimentConfig, ens: EnsembleResult):
    p = cfg.params
    counts = sorted(int(n) for n in p["counts"])
    lim = ens.column("limit")
    stats: dict[str, float] = {}
    if p.get("axis", "time") == "time":
        msq, m4, rms_ab, rms_cd, msq_bc = [], [], [], [], []
        rows = []
        for n in counts:
            gap = ens.column(f"a_{n}") - lim
            ab = ens.column(f"a_{n}") - ens.column(f"b_{n}")
            cd = ens.column(f"c_{n}") - ens.column(f"d_{n}")
            bc = ens.column(f"b_{n}") - ens.column(f"c_{n}")
            msq.append(float(np.mean(gap ** 2)))
            m4.append(float(np.mean(gap ** 4)))
            rms_ab.append(float(np.sqrt(np.mean(ab ** 2))))
            rms_cd.append(float(np.sqrt(np.mean(cd ** 2))))
            msq_bc.append(float(np.mean(bc ** 2)))
            rows += [
                (n, 2, "limit_gap_moment", msq[-1]),
                (n, 4, "limit_gap_moment", m4[-1]),
                (n, 2, "direct_vs_frozen_noise_rms", rms_ab[-1]),
                (n, 2, "frozen_area_vs_cone_rms", rms_cd[-1]),
                (n, 2, "frozen_noise_vs_area_msq", msq_bc[-1]),
            ]
        series = {"ladder": (("n_pieces", "p", "statistic", "value"), rows)}
        _maybe_slope(stats, "rate_l2", counts, np.sqrt(msq))
        _maybe_slope(stats, "rate_l4", counts, np.power(m4, 0.25))
        _maybe_slope(stats, "slope_rms_ab", counts, rms_ab)
        _maybe_slope(stats, "slope_rms_cd", counts, rms_cd)
        _maybe_slope(stats, "slope_msq_bc", counts, msq_bc)
        stats["lp2_inversions"] = float(sum(
            1 for i in range(len(msq) - 1) if msq[i + 1] > msq[i]
        ))
        stats["lp4_inversions"] = float(sum(
            1 for i in range(len(m4) - 1) if m4[i + 1] > m4[i]
        ))
        stats["lyapunov_min_ratio"] = float(min(
            q / (s * s) for q, s in zip(m4, msq)
        ))
        return stats, series
    naive = ens.column("naive")
    msq, rows = [], []
    for n in counts:
        v = ens.column(f"v_{n}")
        gap = v - lim
        ngap = v - naive
        s_gap = summarize(ngap)
        msq.append(float(np.mean(gap ** 2)))
        rows += [
            (n, 2, "limit_gap_moment", msq[-1]),
            (n, 2, "qv_mean", float(np.mean(v))),
            (n, 2, "naive_gap_mean", s_gap.mean),
            (n, 2, "naive_gap_sigmas", _sigmas(s_gap.mean, s_gap.std_error)),
        ]
    series = {"ladder": (("n_pieces", "p", "statistic", "value"), rows)}
    _maybe_slope(stats, "rate_l2", counts, np.sqrt(msq))
    stats["lp2_inversions"] = float(sum(
        1 for i in range(len(msq) - 1) if msq[i + 1] > msq[i]
    ))
    return stats, series


# -- central limit harness -----------------------------------------------------


def _rep_clt(seed: int, cfg: ExperimentConfig) -> dict[str, float]:
    _, f = _wave_inputs(seed, cfg)
    p = cfg.params
    t, x = float(p["t"]), float(p["x"])
    scales = sorted((float(s) for s in p["scales"]), reverse=True)
    std = p.get("standardization", "trace")
    out: dict[str, float] = {}
    for i, s in enumerate(scales):
        sample = increment_sample(f, t, x, s, standardization=std)
        out[f"std_{i}"] = sample.standardized
        out[f"inc_{i}"] = sample.increment
        if i == 0:
            out["vhat"] = sample.variance_hat
    return out


def _agg_clt(cfg: ExperimentConfig, ens: EnsembleResult):
    p = cfg.params
    scales = sorted((float(s) for s in p["scales"]), reverse=True)
    ks = [ks_distance(ens.column(f"std_{i}")) for i in range(len(scales))]
    critical = ks_critical_value(ens.n, 0.05)
    rows = [(s, k, ens.n, critical) for s, k in zip(scales, ks)]
    stats = {
        "ks_final": ks[-1],
        "ks_critical": critical,
        "ks_violations": float(sum(
            1 for i in range(len(ks) - 1) if ks[i + 1] > ks[i]
        )),
        "vhat_mean": float(np.mean(ens.column("vhat"))),
    }
    for i, k in enumerate(ks):
        stats[f"ks_{i}"] = k
    return stats, {"ks": (("scale", "ks", "n", "critical_5pct"), rows)}


# -- iterated-logarithm probe --------------------------------------------------


def _rep_lil(seed: int, cfg: ExperimentConfig) -> dict[str, float]:
    _, f = _wave_inputs(seed, cfg)
    p = cfg.params
    t, x = float(p["t"]), float(p["x"])
    scales = sorted(float(s) for s in p["scales"])
    out = {"stat": lil_statistic(f, t, x, scales)}
    vhat = conditional_variance(f, t, x)
    for i, s in enumerate(scales):
        inc = increment_sample(f, t, x, s).increment
        out[f"norm_{i}"] = abs(inc) / np.sqrt(
            2.0 * s * np.log(np.log(1.0 / s)) * vhat
        )
    return out


def _agg_lil(cfg: ExperimentConfig, ens: EnsembleResult):
    scales = sorted(float(s) for s in cfg.params["scales"])
    q1, med, q3 = quantiles(ens.column("stat"))
    stats = {"median": med, "q1": q1, "q3": q3}
    rows = []
    for i, s in enumerate(scales):
        c1, cm, c3 = quantiles(ens.column(f"norm_{i}"))
        rows.append((s, cm, c1, c3))
    return stats, {"scales": (("scale", "median", "q1", "q3"), rows)}


# -- martingale split ----------------------------------------------------------


def _rep_mart(seed: int, cfg: ExperimentConfig) -> dict[str, float]:
    noise, f = _wave_inputs(seed, cfg)
    p = cfg.params
    t, x = float(p["t"]), float(p["x"])
    scales = sorted(float(s) for s in p["scales"])
    probe = martingale_decomposition(f, noise, t, x, scales)
    out = {"vhat": probe.variance_hat}
    for i in range(len(scales)):
        out[f"m_{i}"] = probe.martingale[i]
        out[f"r_{i}"] = probe.remainder[i]
        out[f"inc_{i}"] = probe.increments[i]
    return out


def _agg_mart(cfg: ExperimentConfig, ens: EnsembleResult):
    scales = sorted(float(s) for s in cfg.params["scales"])
    vhat_mean = float(np.mean(ens.column("vhat")))
    m_rms, r_rms, ratios, rows = [], [], [], []
    worst = 0.0
    for i, s in enumerate(scales):
        m = ens.column(f"m_{i}")
        r = ens.column(f"r_{i}")
        sm = summarize(m)
        m2 = float(np.mean(m ** 2))
        m_rms.append(np.sqrt(m2))
        r_rms.append(float(np.sqrt(np.mean(r ** 2))))
        ratios.append(m2 / (s * vhat_mean) if vhat_mean > 0 else float("inf"))
        worst = max(worst, _sigmas(sm.mean, sm.std_error))
        rows.append((s, m_rms[-1], r_rms[-1], sm.mean, sm.std_error, ratios[-1]))
    stats = {
        "vhat_mean": vhat_mean,
        "m_mean_max_sigmas": worst,
        "qv_law_ratio_final": ratios[0],
    }
    _maybe_slope(stats, "m_exponent", scales, m_rms)
    _maybe_slope(stats, "r_exponent", scales, r_rms)
    if "m_exponent" in stats and "r_exponent" in stats:
        stats["exponent_gap"] = stats["r_exponent"] - stats["m_exponent"]
    series = {"scales": (
        ("scale", "m_rms", "r_rms", "m_mean", "m_mean_se", "qv_law_ratio"), rows
    )}
    return stats, series


# -- linearization defects -----------------------------------------------------


def _rep_linearize(seed: int, cfg: ExperimentConfig) -> dict[str, float]:
    p = cfg.params
    t, x = float(p["t"]), float(p["x"])
    lags = sorted(float(v) for v in p["lags"])
    if cfg.equation == "wave":
        u, lin = solve_coupled_linearization(cfg.sigma, make_noise(seed, cfg.lattice))
        samples = wave_defect_samples(u, lin, t, x, lags)
    else:
        v, lin = solve_coupled_heat_linearization(cfg.sigma, seed, cfg.heat_grid)
        samples = heat_defect_samples(v, lin, t, x, lags)
    out: dict[str, float] = {}
    for i, s in enumerate(samples):
        out[f"du_{i}"] = s.field_increment
        out[f"dl_{i}"] = s.linear_increment
        out[f"defect_{i}"] = s.defect
    return out


def _agg_linearize(cfg: ExperimentConfig, ens: EnsembleResult):
    lags = sorted(float(v) for v in cfg.params["lags"])
    ratios, rows = [], []
    for i, lag in enumerate(lags):
        inc_rms = float(np.sqrt(np.mean(ens.column(f"dl_{i}") ** 2)))
        defect_rms = float(np.sqrt(np.mean(ens.column(f"defect_{i}") ** 2)))
        if inc_rms <= 0:
            raise ConfigurationError(
                f"linearized increment norm vanished at lag {lag}; ratio undefined"
            )
        ratios.append(defect_rms / inc_rms)
        rows.append((lag, inc_rms, defect_rms, ratios[-1]))
    stats = {
        "ratio_smallest": ratios[0],
        "ratio_largest": ratios[-1],
        "ratio_smallest_over_largest": ratios[0] / ratios[-1]
        if ratios[-1] > 0 else float("inf"),
        "ratio_min": min(ratios),
    }
    _maybe_slope(stats, "ratio_slope", lags, ratios)
    return stats, {"scales": (
        ("scale", "increment_norm", "defect_norm", "ratio"), rows
    )}


# -- dispatch ------------------------------------------------------------------


STUDY_RUNNERS = {
    "simulate": (_rep_simulate, _agg_simulate),
    "qv-time": (_rep_qv_time, _agg_qv_time),
    "qv-space": (_rep_qv_space, _agg_qv_space),
    "ladder": (_rep_ladder, _agg_ladder),
    "clt": (_rep_clt, _agg_clt),
    "lil": (_rep_lil, _agg_lil),
    "mart": (_rep_mart, _agg_mart),
    "linearize": (_rep_linearize, _agg_linearize),
}


def _study_warnings(cfg: ExperimentConfig) -> list[str]:
    out = []
    if cfg.kind == "clt" and cfg.replicates < 500:
        out.append(f"{cfg.replicates} replicates: KS power too low, 500+ recommended")
    if cfg.kind == "ladder" and cfg.replicates < 100:
        out.append(f"{cfg.replicates} replicates: rate fits will be noisy, 100+ recommended")
    return out


def _write_snapshots(cfg: ExperimentConfig, out: Path) -> list[Path]:
    noise = make_noise(cfg.base_seed, cfg.lattice)
    f = solve_wave(cfg.sigma, noise)
    paths = [out / f"{cfg.label}_field.bin", out / f"{cfg.label}_field.csv",
             out / f"{cfg.label}_noise.bin"]
    write_wave_snapshot(paths[0], f)
    write_field_csv(paths[1], f)
    write_noise_snapshot(paths[2], cfg.lattice, render_grid(cfg.lattice, cfg.base_seed))
    return paths


def run_study(cfg: ExperimentConfig) -> StudyOutput:
    errors, notes = validate(cfg)
    if errors:
        raise ConfigurationError("invalid config:\n  - " + "\n  - ".join(errors))
    warn = _study_warnings(cfg)
    for w in warn:
        warnings.warn(w, ConfigurationWarning, stacklevel=2)
    rep_fn, agg_fn = STUDY_RUNNERS[cfg.kind]
    ens = run_replicates(rep_fn, cfg, base_seed=cfg.base_seed,
                         replicates=cfg.replicates, workers=cfg.workers)
    stats, series = agg_fn(cfg, ens)
    report = summary_report(cfg, stats, extra={"notes": notes, "warnings": warn})
    files: list[Path] = []
    if cfg.out_dir is not None:
        out = ensure_out_dir(cfg.out_dir)
        p = out / f"{cfg.label}_replicates.csv"
        write_ensemble_csv(p, ens)
        files.append(p)
        for name, (columns, rows) in series.items():
            p = out / f"{cfg.label}_{name}.csv"
            write_table_csv(p, columns, rows)
            files.append(p)
        if cfg.kind == "simulate" and cfg.params.get("snapshot"):
            files += _write_snapshots(cfg, out)
        p = out / f"{cfg.label}_report.json"
        write_json_report(p, report)
        files.append(p)
    return StudyOutput(report, ens, series, tuple(files))
