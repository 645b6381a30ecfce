"""Acceptance gate: one test per release criterion, each printing a
[PASS]/[FAIL] line with the measured numbers.

Run with `pytest tests/test_acceptance.py -v -s` to see every line.
"""

import math
import time

import numpy as np
import pytest

from twinbeam.aggregate import aggregate_summary, build_twinbeam, mode_counts
from twinbeam.config import from_dict
from twinbeam.dynamics import (TripletParams, assemble_UV,
                               classical_amplitudes, half_period_z0,
                               symplectic_residual, transfer_matrices,
                               _integrate_blocks)
from twinbeam.features import two_scale_features
from twinbeam.fock import oracle_compare
from twinbeam.interference import hom_from_state, sfg_from_state
from twinbeam.sweep import basis_from_config, run_sweep, triplet_row, write_sweep


def report(name, ok, detail):
    tag = "PASS" if ok else "FAIL"
    print(f"[{tag}] {name}: {detail}")
    assert ok, f"{name}: {detail}"


@pytest.fixture(scope="module")
def cfg():
    return from_dict({})


@pytest.fixture(scope="module")
def basis(cfg):
    return basis_from_config(cfg)


@pytest.fixture(scope="module")
def threshold_curves(cfg):
    """Single-triplet i_s(P) curves for the reference coupling."""
    t0 = time.perf_counter()
    powers = np.geomspace(1e-3, 0.5, 160)
    curves = {}
    for gamma in (0.0, 0.1, 0.5, 1.0):
        curves[gamma] = np.array(
            [triplet_row(cfg, gamma, float(p))["i_s"] for p in powers])
    return powers, curves, time.perf_counter() - t0


def test_c01_symplectic_suite(rng):
    from twinbeam.dynamics import EvolutionMatrices, evolution_batch

    t0 = time.perf_counter()
    n = 1000
    gammas = rng.uniform(0.0, 1.0, size=n)
    pick = rng.random(n) < 0.3
    gammas[pick] = rng.choice([0.0, 1.0], size=int(pick.sum()))
    couplings = rng.uniform(0.2, 2.5, size=n)
    pumps = rng.uniform(1.0, 1e3, size=n)
    z_over_z0 = rng.uniform(0.05, 2.5, size=n)  # includes z > z0
    aps = np.hypot(pumps, math.sqrt(0.5))
    h_p = np.log((aps + pumps) / math.sqrt(0.5))
    h_s = np.log((aps + math.sqrt(0.5)) / pumps)
    z0 = (h_p - h_s) / (couplings * aps)
    kl = couplings * z_over_z0 * z0
    U, V = evolution_batch(gammas, kl, pumps)
    worst = 0.0
    for i in range(n):
        ev = EvolutionMatrices(U=U[i], V=V[i])
        worst = max(worst, symplectic_residual(ev))
    elapsed = time.perf_counter() - t0
    n_past = int(np.sum(z_over_z0 > 1.0))
    report("C01 symplectic suite",
           worst < 1e-10 and elapsed < 10.0,
           f"worst normalized residual {worst:.2e} (limit 1e-10), "
           f"1000 draws ({n_past} with z > z0) in {elapsed:.1f}s (limit 10s)")


def test_c02_closed_form_cross_check(rng):
    worst = 0.0
    for _ in range(100):
        gamma = float(rng.choice([0.0, 1.0]))
        p = TripletParams(coupling=float(rng.uniform(0.3, 2.0)),
                          pump_input=float(rng.uniform(2.0, 300.0)),
                          gamma=gamma, length=10.0)
        z = float(rng.uniform(0.05, 1.0)) * half_period_z0(p)
        t = transfer_matrices(p, z)
        aps = p.total_amplitude
        x0, x1 = -p.h_pump, p.coupling * aps * z - p.h_pump
        fq, fp = _integrate_blocks(gamma, x0, x1, rtol=1e-12, atol=1e-12)
        scale = max(1.0, np.max(np.abs(t.F_q)), np.max(np.abs(t.F_p)))
        worst = max(worst,
                    float(np.max(np.abs(t.F_q - fq))) / scale,
                    float(np.max(np.abs(t.F_p - fp))) / scale)
    report("C02 closed-form cross-check",
           worst < 1e-8,
           f"integrator vs closed forms at both mixing limits: "
           f"max normalized entry error {worst:.2e} (limit 1e-8, 100 draws)")


def test_c03_classical_conservation(rng):
    worst = 0.0
    for _ in range(200):
        p = TripletParams(coupling=float(rng.uniform(0.2, 3.0)),
                          pump_input=float(rng.uniform(1.0, 1e4)),
                          gamma=0.0, length=1.0)
        z0 = half_period_z0(p)
        zs = np.linspace(0.0, 3.4 * z0, 160)  # crosses two mirror points
        ap, as_ = classical_amplitudes(p, zs)
        total = ap**2 + as_**2
        worst = max(worst, float(np.max(np.abs(total / p.total_amplitude**2 - 1.0))))
    report("C03 classical conservation",
           worst < 1e-10,
           f"max relative drift of A_p^2 + A_s^2 across mirrors {worst:.2e} "
           "(limit 1e-10)")


def test_c04_oracle_agreement():
    t0 = time.perf_counter()
    rows = []
    ok = True
    for n_p0 in (5, 10):
        for frac in (1.0, 0.5):
            z = frac * 0.3 / math.sqrt(n_p0)
            rep = oracle_compare(1.0, n_p0, z, gamma=1.0)
            e_ns = rep["n_s"]["rel_error"]
            e_np = rep["n_p"]["rel_error"]
            rows.append((n_p0, z, e_ns, e_np))
            ok = ok and e_ns < 0.05 and e_np < 0.05
    elapsed = time.perf_counter() - t0
    detail = "; ".join(
        f"n_p0={n}, Kz={z:.3f}: <n_s> err {a*100:.0f}%, <n_p> err {b*100:.2f}%"
        for n, z, a, b in rows)
    report("C04 oracle agreement (5% on <n_s> and <n_p>)",
           ok and elapsed < 30.0,
           detail + f" [runtime {elapsed:.1f}s/30s]. The <n_p> half holds; "
           "the <n_s> overshoot at gamma=1 is intrinsic to the linearized "
           "model at small photon numbers (see decisions ledger)")


def test_c05_perfect_pairing(cfg, basis):
    powers = np.geomspace(cfg.power_sweep.min, cfg.power_sweep.max,
                          cfg.power_sweep.n_points)
    worst = 0.0
    for p in powers:
        summ = aggregate_summary(build_twinbeam(basis, float(p), 0.0))
        worst = max(worst, abs(summ["R_si"]))
    report("C05 perfect pairing at gamma=0",
           worst < 1e-9,
           f"max |R_si| over {len(powers)} swept powers {worst:.2e} (limit 1e-9)")


def test_c06_single_triplet_threshold(threshold_curves):
    powers, curves, elapsed = threshold_curves
    peaks = {g: float(powers[int(np.argmax(v))]) for g, v in curves.items()}
    ok = all(0.19 <= p <= 0.29 for p in peaks.values())
    detail = ", ".join(f"gamma={g:g}: {p*1e3:.0f} mW" for g, p in peaks.items())
    report("C06 single-triplet threshold in [190, 290] mW",
           ok and elapsed < 60.0,
           detail + f" [curve evaluation {elapsed:.1f}s/60s]")


def test_c07_coherent_share_floor(cfg, threshold_curves):
    powers, curves, _ = threshold_curves
    p_th = float(powers[int(np.argmax(curves[0.0]))])
    test_powers = [p for p in np.geomspace(p_th, 0.5, 12)]
    shares = [triplet_row(cfg, 1.0, float(p))["c_s"] for p in test_powers]
    ok = all(s > 0.30 for s in shares)
    report("C07 coherent-share floor (gamma=1, P >= P_th)",
           ok,
           f"min c_s = {min(shares):.3f} over P in [{p_th*1e3:.0f}, 500] mW "
           "(floor 0.30)")


def test_c08_pump_squeezing(cfg, threshold_curves):
    powers, curves, _ = threshold_curves
    p_th = float(powers[int(np.argmax(curves[0.0]))])
    window = np.linspace(0.5 * p_th, 1.5 * p_th, 25)
    lam = [triplet_row(cfg, 1.0, float(p))["lambda_p"] for p in window]
    ok = min(lam) < 0.5
    report("C08 pump squeezing (gamma=1 near threshold)",
           ok,
           f"min principal squeeze variance {min(lam):.4f} in "
           f"[{0.5*p_th*1e3:.0f}, {1.5*p_th*1e3:.0f}] mW (needs < 0.5)")


def test_c09_chaotic_coherent_statistics(cfg, threshold_curves):
    powers, curves, _ = threshold_curves
    p_th = float(powers[int(np.argmax(curves[0.0]))])
    r_low = triplet_row(cfg, 0.0, 1e-6)["r_s"]
    r_th = triplet_row(cfg, 1.0, p_th)["r_s"]
    ok = abs(r_low - 2.0) < 1e-6 and r_th < 2.0
    report("C09 chaotic/coherent statistics",
           ok,
           f"gamma=0 low-power r_s = {r_low:.9f} (2 within 1e-6); "
           f"gamma=1 r_s at P_th = {r_th:.3f} (< 2)")


def test_c10_hom_qualitative_flip(cfg, basis):
    t0 = time.perf_counter()
    results = {}
    for gamma in (0.0, 1.0):
        tb = build_twinbeam(basis, 0.17, gamma)
        hom = hom_from_state(tb, n_time=cfg.grids.n_time)
        rnd = hom["R_n_delta"]
        tau = hom["tau"]
        # central narrow feature: value at zero delay against the ring a few
        # coherence times out (well inside the broad dip)
        tau_c = 1.0 / (math.sqrt(2.0 * basis.n_q + 1.0)
                       * basis.signal.width_sigma)
        ring = (np.abs(tau) > 2.0 * tau_c) & (np.abs(tau) < 6.0 * tau_c)
        k0 = int(np.argmin(np.abs(tau)))
        excess = rnd[k0] - float(np.mean(rnd[ring]))
        vis = (rnd.max() - rnd.min()) / rnd.max()
        results[gamma] = (excess, vis)
    elapsed = time.perf_counter() - t0
    excess0, vis0 = results[0.0]
    excess1, _ = results[1.0]
    ok = excess0 < 0 and vis0 > 0.99 and excess1 > 0 and elapsed < 120.0
    report("C10 HOM qualitative flip at 170 mW",
           ok,
           f"gamma=0: central excess {excess0:+.3f} (dip), V_HOM = {vis0:.4f} "
           f"(> 0.99); gamma=1: central excess {excess1:+.3f} (peak) "
           f"[runtime {elapsed:.0f}s/120s]")


def test_c11_sfg_visibility_suppression(cfg, basis, threshold_curves):
    powers, curves, _ = threshold_curves
    p_th = float(powers[int(np.argmax(curves[0.0]))])
    ratios = {}
    for p in (0.05, 0.11, 0.17, p_th):
        vis = {}
        for gamma in (0.0, 1.0):
            prof = sfg_from_state(build_twinbeam(basis, float(p), gamma),
                                  n_time=cfg.grids.n_time)
            vis[gamma] = prof.features.visibility
        ratios[p] = vis[1.0] / vis[0.0]
    best = min(ratios.values())
    ok = best <= 0.25
    detail = ", ".join(f"P={p*1e3:.0f} mW: {r:.2f}" for p, r in ratios.items())
    report("C11 SFG visibility suppression (ratio <= 1/4 at P <= P_th)",
           ok,
           f"V(gamma=1)/V(gamma=0): {detail}; best {best:.2f}. The literal "
           "model keeps the coherent pair products phase-locked, which "
           "sustains the narrow peak (see decisions ledger)")


def test_c12_mode_count_non_monotonic(cfg, basis):
    powers = np.geomspace(cfg.power_sweep.min, cfg.power_sweep.max, 25)
    ks = np.array([mode_counts(build_twinbeam(basis, float(p), 0.0))[1]
                   for p in powers])
    i_min = int(np.argmin(ks))
    ok = 0 < i_min < len(ks) - 1 and ks[0] > ks[i_min] and ks[-1] > ks[i_min]
    report("C12 mode-count non-monotonicity (gamma=0)",
           ok,
           f"K: {ks[0]:.1f} at {powers[0]:.1e} W -> min {ks[i_min]:.2f} at "
           f"{powers[i_min]*1e3:.0f} mW -> {ks[-1]:.2f} at 500 mW")


def test_c13_determinism(tmp_path):
    cfg = from_dict({
        "power_sweep": {"min": 1e-6, "max": 0.3, "n_points": 4},
        "gamma_list": [0.0, 0.5, 1.0],
        "schmidt": {"n_q": 6, "n_m": 5, "n_l": 2},
        "grids": {"n_omega": 161, "n_time": 1024},
    })
    bytes_by_threads = {}
    for threads in (1, 4):
        out = tmp_path / f"t{threads}"
        write_sweep(run_sweep(cfg, threads=threads), str(out))
        bytes_by_threads[threads] = (out / "sweep_summary.csv").read_bytes()
    ok = bytes_by_threads[1] == bytes_by_threads[4] and len(bytes_by_threads[1]) > 0
    report("C13 determinism across thread counts",
           ok,
           f"sweep CSV identical for 1 and 4 threads "
           f"({len(bytes_by_threads[1])} bytes)")
