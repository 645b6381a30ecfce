"""Pump-power sweeps and deterministic CSV serialization."""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .aggregate import (TwinBeamState, aggregate_summary, build_twinbeam,
                        spectral_correlations)
from .config import RunConfig, config_hash
from .dynamics import TripletParams, assemble_UV, transfer_matrices
from .errors import TwinbeamError
from .features import fwhm_interpolated, two_scale_features
from .interference import (default_time_grid, hom_from_state, photon_flux,
                           sfg_from_state, temporal_modes)
from .schmidt import SchmidtBasis, build_basis, dominant_drive
from .statistics import derived_measures, propagate_state

__all__ = ["SweepResult", "run_sweep", "triplet_sweep", "power_grid",
           "write_csv", "format_float", "basis_from_config"]


def format_float(x) -> str:
    """Fixed 12-significant-digit rendering used by every CSV writer."""
    if x is None:
        return "nan"
    x = float(x)
    if math.isnan(x):
        return "nan"
    return f"{x:.12g}"


def write_csv(path, header, rows, provenance):
    """Write a CSV with '#'-prefixed provenance lines and fixed formatting."""
    lines = [f"# {key}: {value}" for key, value in provenance.items()]
    lines.append(",".join(header))
    for row in rows:
        lines.append(",".join(
            format_float(v) if isinstance(v, (int, float, np.floating)) or v is None
            else str(v)
            for v in row
        ))
    text = "\n".join(lines) + "\n"
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)
    return path


def power_grid(cfg: RunConfig) -> np.ndarray:
    sw = cfg.power_sweep
    if sw.n_points == 1:
        return np.array([sw.min])
    if sw.scale == "log":
        return np.geomspace(sw.min, sw.max, sw.n_points)
    return np.linspace(sw.min, sw.max, sw.n_points)


def basis_from_config(cfg: RunConfig) -> SchmidtBasis:
    sc, gr = cfg.schmidt, cfg.grids
    return build_basis(
        cfg.pump, sc.mu_spectral, sc.mu_transverse, sc.n_q, sc.n_m, sc.n_l,
        n_omega=gr.n_omega, half_span_sigmas=gr.half_span_sigmas,
    )


def evaluate_cell(basis: SchmidtBasis, cfg: RunConfig, gamma: float,
                  power: float) -> dict:
    """All whole-beam observables of one (gamma, power) cell."""
    tb = build_twinbeam(basis, power, gamma)
    summ = aggregate_summary(tb)
    pump_in = float(np.sum(tb.drive.normal_amplitude**2))
    row = {
        "gamma": gamma,
        "power_W": power,
    }
    for f in ("s", "i", "p"):
        fs = summ[f]
        row[f"I_{f}"] = fs.mean
        row[f"I_{f}_coherent"] = fs.coherent
        row[f"I_{f}_chaotic"] = fs.chaotic
        row[f"var_{f}"] = fs.variance
        row[f"r_{f}"] = fs.r
    row["R_si"] = summ["R_si"]
    row["r_si"] = summ["s"].r_cross["si"]
    row["r_sp"] = summ["s"].r_cross["sp"]
    row["r_ip"] = summ["i"].r_cross["ip"]
    row["K"] = summ["K"]
    row["K_n"] = summ["K_n"]
    row["conversion_efficiency"] = summ["s"].mean / pump_in if pump_in > 0 else float("nan")
    row["fwhm_auto_rad_s"] = spectral_correlations(tb, "auto").fwhm
    row["fwhm_cross_rad_s"] = spectral_correlations(tb, "cross").fwhm
    if cfg.outputs.interference:
        row.update(interference_features(tb, cfg))
    return row


def interference_features(tb: TwinBeamState, cfg: RunConfig) -> dict:
    """Width and visibility scalars from the SFG and HOM profiles."""
    n_time = cfg.grids.n_time
    out = {}
    grid = default_time_grid(tb.basis.signal, n_points=n_time)
    tm = temporal_modes(tb.basis.signal, grid, flux_weighted=True)
    times, flux = photon_flux(tb, tm)
    out["flux_fwhm_s"] = fwhm_interpolated(times, flux["s"])

    sfg = sfg_from_state(tb, n_time=n_time)
    f = sfg.features
    out["sfg_broad_fwhm_s"] = f.broad_fwhm
    out["sfg_narrow_fwhm_s"] = f.narrow_fwhm
    out["sfg_visibility"] = f.visibility

    hom = hom_from_state(tb, n_time=n_time)
    rnd = hom["R_n_delta"]
    out["hom_visibility"] = _range_visibility(rnd)
    dip = two_scale_features(hom["tau"], 1.0 - rnd)
    out["hom_broad_fwhm_s"] = dip.broad_fwhm
    out["hom_narrow_fwhm_s"] = dip.narrow_fwhm
    r0d = hom["R0_delta"]
    for key, name in (("coherent", "coh"), ("pair", "pair")):
        prof = 1.0 - 2.0 * hom["rho_terms"][key] / r0d
        out[f"hom_vis_{name}"] = _range_visibility(prof)
        out[f"hom_narrow_{name}_fwhm_s"] = fwhm_interpolated(
            hom["tau"], np.abs(1.0 - prof))
    return out


def _range_visibility(profile: np.ndarray) -> float:
    hi, lo = float(np.max(profile)), float(np.min(profile))
    return (hi - lo) / hi if hi > 0 else float("nan")


@dataclass
class SweepResult:
    """Rows keyed by (gamma, power) plus provenance and failures."""

    columns: list
    rows: list
    provenance: dict
    failures: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.failures


def run_sweep(cfg: RunConfig, threads: int = 1) -> SweepResult:
    """Evaluate the configured (gamma, power) table.

    Cells run independently (optionally threaded); rows are assembled in a
    fixed order so the serialized output is identical for any thread count.
    Cell errors are collected, not raised; the sweep continues.
    """
    basis = basis_from_config(cfg)
    powers = power_grid(cfg)
    cells = [(g, p) for g in cfg.gamma_list for p in powers]

    def work(cell):
        gamma, power = cell
        try:
            return evaluate_cell(basis, cfg, gamma, float(power)), None
        except TwinbeamError as exc:
            return None, (gamma, float(power), str(exc))

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(work, cells))
    else:
        results = [work(c) for c in cells]

    rows, failures = [], []
    columns: list = []
    for (gamma, power), (row, err) in zip(cells, results):
        if err is not None:
            failures.append(err)
            continue
        if not columns:
            columns = list(row.keys())
        rows.append([row.get(c) for c in columns])
    provenance = {
        "config_hash": config_hash(cfg),
        "code_version": __version__,
    }
    return SweepResult(columns=columns, rows=rows, provenance=provenance,
                       failures=failures)


def write_sweep(result: SweepResult, out_dir: str) -> list:
    """Serialize a sweep to CSV files; returns the written paths."""
    os.makedirs(out_dir, exist_ok=True)
    paths = [write_csv(
        os.path.join(out_dir, "sweep_summary.csv"),
        result.columns, result.rows, result.provenance,
    )]
    if result.failures:
        paths.append(write_csv(
            os.path.join(out_dir, "sweep_failures.csv"),
            ["gamma", "power_W", "error"],
            [[g, p, msg.replace(",", ";")] for g, p, msg in result.failures],
            result.provenance,
        ))
    return paths


def triplet_row(cfg: RunConfig, gamma: float, power: float) -> dict:
    """Observables of the strongest triplet alone at one power."""
    kl, amp = dominant_drive(cfg.pump, power)
    params = TripletParams(
        coupling=kl / cfg.pump.crystal_length,
        pump_input=math.sqrt(amp**2 + 0.5),
        gamma=gamma,
        length=cfg.pump.crystal_length,
    )
    ev = assemble_UV(transfer_matrices(params, cfg.pump.crystal_length))
    st = propagate_state(ev, np.array([0.0, 0.0, amp]))
    obs = derived_measures(st)
    return {
        "gamma": gamma,
        "power_W": power,
        "i_s": obs.intensity["s"],
        "i_p": obs.intensity["p"],
        "c_s": (obs.coherent["s"] / obs.intensity["s"]
                if obs.intensity["s"] > 0 else float("nan")),
        "c_p": (obs.coherent["p"] / obs.intensity["p"]
                if obs.intensity["p"] > 0 else float("nan")),
        "r_s": obs.r["s"],
        "r_p": obs.r["p"],
        "lambda_s": obs.squeeze["s"],
        "lambda_p": obs.squeeze["p"],
        "R_si": obs.R_si,
        "r_si": obs.r_cross["si"],
        "r_sp": obs.r_cross["sp"],
    }


def triplet_sweep(cfg: RunConfig, gammas=None, powers=None) -> SweepResult:
    """Power sweep of the strongest triplet (single-triplet observables)."""
    gammas = cfg.gamma_list if gammas is None else gammas
    powers = power_grid(cfg) if powers is None else powers
    rows = []
    columns: list = []
    for g in gammas:
        for p in powers:
            row = triplet_row(cfg, float(g), float(p))
            if not columns:
                columns = list(row.keys())
            rows.append([row[c] for c in columns])
    provenance = {"config_hash": config_hash(cfg), "code_version": __version__}
    return SweepResult(columns=columns, rows=rows, provenance=provenance)
