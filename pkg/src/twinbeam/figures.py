"""Figure recipes: one CSV bundle per published-figure layout.

Each recipe emits the curves of its figure with the same axes and
normalizations as the corresponding caption.  Rendering lives in the
separate plotting package; this module only computes and serializes.
"""

from __future__ import annotations

import math
import os

import numpy as np

from .aggregate import build_twinbeam, pump_transferred_spectrum, spectral_correlations
from .config import RunConfig, config_hash
from .errors import ConfigError
from .interference import hom_from_state, sfg_from_state
from .sweep import (basis_from_config, evaluate_cell, format_float, power_grid,
                    triplet_row, write_csv)
from . import __version__

__all__ = ["figure", "FIGURE_IDS"]

GAMMAS_MAIN = (1.0, 0.5, 0.1, 0.0)
GAMMAS_SUB = (1.0, 0.5, 0.1, 0.01)
GAMMAS_THREE = (1.0, 0.5, 0.0)

FIGURE_IDS = tuple(range(1, 22))


def _provenance(cfg):
    return {"config_hash": config_hash(cfg), "code_version": __version__}


def _table(path, cfg, first_col, rows_by_x, series):
    header = [first_col] + [name for name, _ in series]
    rows = [[x] + [vals[i] for _, vals in series] for i, x in enumerate(rows_by_x)]
    return write_csv(path, header, rows, _provenance(cfg))


def _triplet_curves(cfg, gammas, keys, powers=None):
    powers = power_grid(cfg) if powers is None else powers
    curves = {}
    for g in gammas:
        rows = [triplet_row(cfg, g, float(p)) for p in powers]
        for key in keys:
            curves[(key, g)] = [r[key] for r in rows]
    return powers, curves


def _beam_curves(cfg, gammas, keys, powers=None):
    basis = basis_from_config(cfg)
    powers = power_grid(cfg) if powers is None else powers
    curves = {}
    for g in gammas:
        rows = [evaluate_cell(basis, cfg, g, float(p)) for p in powers]
        for key in keys:
            curves[(key, g)] = [r[key] for r in rows]
    return powers, curves


def _series(curves, keys, gammas):
    return [(f"{key}[gamma={format_float(g)}]", curves[(key, g)])
            for key in keys for g in gammas]


def _triplet_figure(cfg, out_dir, name, keys, gammas):
    powers, curves = _triplet_curves(cfg, gammas, keys)
    return [_table(os.path.join(out_dir, name), cfg, "power_W", powers,
                   _series(curves, keys, gammas))]


def _beam_figure(cfg, out_dir, name, keys, gammas, interference=False):
    if not interference:
        cfg = _without_interference(cfg)
    powers, curves = _beam_curves(cfg, gammas, keys)
    return [_table(os.path.join(out_dir, name), cfg, "power_W", powers,
                   _series(curves, keys, gammas))]


def _without_interference(cfg: RunConfig) -> RunConfig:
    from dataclasses import replace
    return replace(cfg, outputs=replace(cfg.outputs, interference=False))


def fig01(cfg, out_dir):
    return _triplet_figure(cfg, out_dir, "fig01_triplet_intensities.csv",
                           ["i_s", "i_p"], GAMMAS_MAIN)


def fig02(cfg, out_dir):
    return _triplet_figure(cfg, out_dir, "fig02_coherent_weights.csv",
                           ["c_s", "c_p"], GAMMAS_MAIN)


def fig03(cfg, out_dir):
    return _triplet_figure(cfg, out_dir, "fig03_reduced_moments.csv",
                           ["r_s", "r_p"], GAMMAS_MAIN)


def fig04(cfg, out_dir):
    return _triplet_figure(cfg, out_dir, "fig04_pump_squeeze.csv",
                           ["lambda_p"], GAMMAS_MAIN)


def fig05(cfg, out_dir):
    return _triplet_figure(cfg, out_dir, "fig05_subshot_parameter.csv",
                           ["R_si"], GAMMAS_SUB)


def fig06(cfg, out_dir):
    return _triplet_figure(cfg, out_dir, "fig06_fluct_moments.csv",
                           ["r_si", "r_sp"], GAMMAS_MAIN)


def fig07(cfg, out_dir):
    basis = basis_from_config(cfg)
    w0 = cfg.pump.omega0
    paths = []
    for name, modes, grid, omega0 in (
        ("signal", basis.signal.values, basis.signal.grid, w0 / 2.0),
        ("pump", basis.pump.values, basis.pump.grid, w0),
    ):
        series = []
        for q in range(min(3, modes.shape[0])):
            prof = np.abs(modes[q]) ** 2
            scale = np.sum(prof) * grid.step / omega0
            series.append((f"mode_{q}", list(prof / scale)))
        paths.append(_table(
            os.path.join(out_dir, f"fig07_{name}_profiles.csv"), cfg,
            "omega_rad_s", list(grid.omegas), series,
        ))
    return paths


def fig08(cfg, out_dir):
    return _beam_figure(cfg, out_dir, "fig08_beam_intensity.csv",
                        ["I_s", "conversion_efficiency"], GAMMAS_MAIN)


def fig09(cfg, out_dir):
    cfg2 = _without_interference(cfg)
    powers, curves = _beam_curves(cfg2, GAMMAS_MAIN,
                                  ["I_s", "I_s_coherent", "I_p", "I_p_chaotic"])
    share_s = {("share", g): [
        c / t if t > 0 else float("nan")
        for c, t in zip(curves[("I_s_coherent", g)], curves[("I_s", g)])
    ] for g in GAMMAS_MAIN}
    share_p = {("share", g): [
        c / t if t > 0 else float("nan")
        for c, t in zip(curves[("I_p_chaotic", g)], curves[("I_p", g)])
    ] for g in GAMMAS_MAIN}
    sa = [(f"coherent_share_s[gamma={format_float(g)}]", share_s[("share", g)])
          for g in GAMMAS_MAIN]
    sb = [(f"chaotic_share_p[gamma={format_float(g)}]", share_p[("share", g)])
          for g in GAMMAS_MAIN]
    return [_table(os.path.join(out_dir, "fig09_component_shares.csv"), cfg,
                   "power_W", powers, sa + sb)]


def fig10(cfg, out_dir):
    basis = basis_from_config(cfg)
    paths = []
    series = []
    pump_profile = None
    omegas = None
    for power in (1e-8, 0.17):
        for g in (0.0, 1.0):
            tb = build_twinbeam(basis, power, g)
            omegas, prof = pump_transferred_spectrum(tb, normalized=True)
            series.append((
                f"I_tr[P={format_float(power)};gamma={format_float(g)}]",
                list(prof),
            ))
    # incident pump spectral profile: dominant-mode envelope, same norm
    prof0 = np.abs(basis.pump.values[0]) ** 2
    scale = np.sum(prof0) * basis.pump.grid.step / cfg.pump.omega0
    pump_profile = list(prof0 / scale)
    series.insert(0, ("I_pump", pump_profile))
    paths.append(_table(os.path.join(out_dir, "fig10_pump_transfer.csv"), cfg,
                        "omega_rad_s", list(omegas), series))
    return paths


def fig11(cfg, out_dir):
    return _beam_figure(cfg, out_dir, "fig11_mode_counts.csv",
                        ["K", "K_n"], GAMMAS_THREE)


def fig12(cfg, out_dir):
    return _beam_figure(cfg, out_dir, "fig12_spectral_widths.csv",
                        ["fwhm_auto_rad_s", "fwhm_cross_rad_s"], GAMMAS_THREE)


def fig13(cfg, out_dir, power=0.17):
    basis = basis_from_config(cfg)
    series = []
    omegas = None
    for g in (1.0, 0.8, 0.0):
        tb = build_twinbeam(basis, power, g)
        corr = spectral_correlations(tb, "cross")
        peak = float(np.max(corr.values))
        series.append((f"C_rel[gamma={format_float(g)}]",
                       list(corr.values / peak if peak != 0 else corr.values)))
        omegas = corr.omegas
    rel = list(np.asarray(omegas) / (cfg.pump.omega0 / 2.0))
    return [_table(os.path.join(out_dir, "fig13_cross_sections.csv"), cfg,
                   "omega_over_omega0", rel, series)]


def fig14(cfg, out_dir):
    return _beam_figure(cfg, out_dir, "fig14_subshot_beam.csv",
                        ["R_si"], GAMMAS_SUB)


def fig15(cfg, out_dir):
    return _beam_figure(cfg, out_dir, "fig15_fluct_moment_beam.csv",
                        ["r_si"], GAMMAS_MAIN)


def fig16(cfg, out_dir, power=0.17):
    basis = basis_from_config(cfg)
    paths = []
    series_total, series_coh = [], []
    tau = None
    for g in GAMMAS_THREE:
        tb = build_twinbeam(basis, power, g)
        prof = sfg_from_state(tb, n_time=cfg.grids.n_time, normalized=True)
        tau = prof.tau
        series_total.append((f"I_sfg[gamma={format_float(g)}]", list(prof.values)))
        series_coh.append((f"I_sfg_coherent_term[gamma={format_float(g)}]",
                           list(prof.terms["coherent"])))
    paths.append(_table(os.path.join(out_dir, "fig16_sfg_profile.csv"), cfg,
                        "tau_s", list(tau), series_total + series_coh))
    return paths


def fig17(cfg, out_dir):
    return _beam_figure(cfg, out_dir, "fig17_sfg_widths.csv",
                        ["sfg_broad_fwhm_s", "flux_fwhm_s", "sfg_narrow_fwhm_s"],
                        GAMMAS_THREE, interference=True)


def fig18(cfg, out_dir):
    return _beam_figure(cfg, out_dir, "fig18_sfg_visibility.csv",
                        ["sfg_visibility"], GAMMAS_THREE, interference=True)


def fig19(cfg, out_dir, power=0.17):
    basis = basis_from_config(cfg)
    series = []
    tau = None
    for g in GAMMAS_THREE:
        tb = build_twinbeam(basis, power, g)
        hom = hom_from_state(tb, n_time=cfg.grids.n_time)
        tau = hom["tau"]
        series.append((f"R_n_delta[gamma={format_float(g)}]",
                       list(hom["R_n_delta"])))
    return [_table(os.path.join(out_dir, "fig19_hom_profile.csv"), cfg,
                   "tau_s", list(tau), series)]


def fig20(cfg, out_dir):
    return _beam_figure(cfg, out_dir, "fig20_hom_visibility.csv",
                        ["hom_visibility", "hom_vis_coh", "hom_vis_pair"],
                        GAMMAS_THREE, interference=True)


def fig21(cfg, out_dir):
    return _beam_figure(cfg, out_dir, "fig21_hom_widths.csv",
                        ["hom_broad_fwhm_s", "hom_narrow_coh_fwhm_s",
                         "hom_narrow_pair_fwhm_s"], GAMMAS_THREE,
                        interference=True)


_RECIPES = {
    1: fig01, 2: fig02, 3: fig03, 4: fig04, 5: fig05, 6: fig06, 7: fig07,
    8: fig08, 9: fig09, 10: fig10, 11: fig11, 12: fig12, 13: fig13, 14: fig14,
    15: fig15, 16: fig16, 17: fig17, 18: fig18, 19: fig19, 20: fig20, 21: fig21,
}


def figure(cfg: RunConfig, fig_id: int, out_dir: str) -> list:
    """Emit the CSV files of one figure recipe; returns the written paths."""
    if fig_id not in _RECIPES:
        raise ConfigError([f"unknown figure id {fig_id}; valid ids are 1..21"])
    os.makedirs(out_dir, exist_ok=True)
    return _RECIPES[fig_id](cfg, out_dir)
