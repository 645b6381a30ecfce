"""Temporal modes, sum-frequency interference and Hong-Ou-Mandel profiles.

All temporal quantities are evaluated in the rotating frame of the carrier
frequency; every observable below is carrier-phase free, so the envelope
description is exact up to the explicit sqrt(w/w0) photon-flux factor.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .aggregate import TwinBeamState
from .errors import ConfigError, ResolutionError
from .features import ProfileFeatures, fwhm_interpolated, two_scale_features
from .schmidt import SpectralModeSet

__all__ = [
    "TimeGrid",
    "TemporalModeSet",
    "InterferenceProfile",
    "default_time_grid",
    "temporal_modes",
    "photon_flux",
    "sfg_profile",
    "mode_overlap_g",
    "hom_profiles",
    "extract_features",
]


@dataclass(frozen=True)
class TimeGrid:
    """Uniform, centred time grid."""

    step: float
    n_points: int

    @property
    def times(self) -> np.ndarray:
        half = (self.n_points - 1) / 2.0
        return (np.arange(self.n_points) - half) * self.step

    @property
    def lags(self) -> np.ndarray:
        n = self.n_points
        return np.arange(-(n - 1), n) * self.step


def default_time_grid(spec: SpectralModeSet, n_points: int = 4096) -> TimeGrid:
    """Time grid spanning exactly one replica period of the sampled spectrum.

    Envelopes synthesized from a discrete frequency grid repeat with period
    2 pi / dw; covering exactly that period makes the discrete Parseval
    identity exact and keeps lag correlations free of replica leakage.
    """
    period = 2.0 * math.pi / spec.grid.step
    dt = period / n_points
    if dt > math.pi / spec.grid.half_span:
        raise ResolutionError(
            f"{n_points} samples cannot cover one replica period at the "
            "Nyquist rate; increase n_time"
        )
    return TimeGrid(step=dt, n_points=n_points)


@dataclass(frozen=True)
class TemporalModeSet:
    """Envelope temporal modes (complex) on a shared time grid."""

    grid: TimeGrid
    values: np.ndarray           # (n_q, n_t)
    omega0: float
    flux_weighted: bool          # True when the sqrt(w/w0) factor is included

    @property
    def count(self) -> int:
        return self.values.shape[0]


def _check_aliasing(spec: SpectralModeSet):
    mass = np.abs(spec.values) ** 2 * spec.grid.step
    edge = float(mass[:, :3].sum() + mass[:, -3:].sum())
    if edge > 1e-6:
        raise ResolutionError(
            f"spectral mass {edge:.2e} within 3 samples of the grid edge"
        )


def temporal_modes(spec: SpectralModeSet, grid: TimeGrid,
                   flux_weighted: bool = True) -> TemporalModeSet:
    """Fourier transforms of the spectral modes on the time grid.

    With flux_weighted=True each mode carries the sqrt(w/w0) photon-flux
    factor; without it the transform is the plain mode envelope.
    """
    _check_aliasing(spec)
    span = grid.n_points * grid.step
    sigma_t = 1.0 / spec.width_sigma
    if span < 6.0 * sigma_t:
        raise ResolutionError(
            f"time grid spans {span:.2e}s < 6 coherence times {6*sigma_t:.2e}s"
        )
    det = spec.grid.detunings
    omega = spec.grid.omegas
    weight = np.sqrt(omega / spec.grid.center) if flux_weighted else 1.0
    kernel = np.exp(-1j * np.outer(det, grid.times))
    values = ((spec.values * weight) @ kernel) * (spec.grid.step / math.sqrt(2.0 * math.pi))
    return TemporalModeSet(grid=grid, values=values, omega0=spec.grid.center,
                           flux_weighted=flux_weighted)


def photon_flux(tb: TwinBeamState, tm: TemporalModeSet):
    """Photon flux vs time: sum_q |f_q(t)|^2 * sum_ml b_mlq (signal, idler)."""
    if tm.count != tb.drive.n_q:
        raise ConfigError(["temporal mode count does not match the basis"])
    prof2 = np.abs(tm.values) ** 2
    b = tb.ensemble.b
    out = {}
    for name, col in (("s", 0), ("i", 1)):
        per_q = tb.per_ml_q(b[:, col]).sum(axis=0)
        out[name] = per_q @ prof2
    return tm.grid.times, out


def _lag_correlations(u: np.ndarray, v: np.ndarray, dt: float) -> np.ndarray:
    """C[..., k] = sum_j u[..., j+k] * v[..., j] * dt for all lags.

    u, v have shape (..., n); the result has shape (..., 2n-1) ordered from
    lag -(n-1) to +(n-1).
    """
    n = u.shape[-1]
    size = 2 * n
    fu = np.fft.fft(u, size, axis=-1)
    fv = np.fft.fft(np.conj(v), size, axis=-1)
    raw = np.fft.ifft(fu * np.conj(fv), axis=-1)
    # non-negative lags live at [0, n); negative lags wrap at the end
    out = np.concatenate((raw[..., size - (n - 1):], raw[..., :n]), axis=-1)
    return out * dt


@dataclass(frozen=True)
class InterferenceProfile:
    """Delay-dependent interference profile plus its per-term split."""

    tau: np.ndarray
    values: np.ndarray
    terms: dict = field(default_factory=dict)
    features: ProfileFeatures | None = None


def _sfg_coefficient_tables(tb: TwinBeamState):
    ens = tb.ensemble
    w = tb.weights_flat_ml
    b_s = tb.per_ml_q(ens.b[:, 0])
    b_i = tb.per_ml_q(ens.b[:, 1])
    d = tb.per_ml_q(ens.d[:, 0])
    dbar = tb.per_ml_q(ens.dbar[:, 0])
    xi2 = tb.per_ml_q(np.abs(ens.xi[:, 0] * ens.xi[:, 1]) ** 2)
    W1 = np.einsum("m,mq,mp->qp", w, b_s, b_i)
    W2 = np.einsum("m,mq,mp->qp", w, d, d)
    W3 = np.einsum("m,mq->q", w, np.abs(dbar) ** 2)
    W4 = np.einsum("m,mq->q", w, xi2)
    return W1, W2, W3, W4


def sfg_profile(
    tb: TwinBeamState,
    tm_s: TemporalModeSet,
    tm_i: TemporalModeSet,
    normalized: bool = False,
    with_features: bool = True,
) -> InterferenceProfile:
    """Sum-frequency intensity vs signal-idler delay.

    Exposes the four contributions: "background" (product of independent
    fluxes), "pair" (photon-pair interference), "linear" (linear-coupling
    term) and "coherent" (negative coherent-component correction).
    """
    if tm_s.grid.step != tm_i.grid.step or tm_s.grid.n_points != tm_i.grid.n_points:
        raise ConfigError(["signal and idler temporal grids must match"])
    dt = tm_s.grid.step
    S, I = tm_s.values, tm_i.values
    n_q = S.shape[0]
    absS2 = np.abs(S) ** 2
    absI2 = np.abs(I) ** 2
    # X1[q, p, k] = int |S_q(t+tau)|^2 |I_p(t)|^2 dt
    X1 = np.real(_lag_correlations(absS2[:, None, :], absI2[None, :, :], dt))
    u = S[:, None, :] * np.conj(S[None, :, :])
    v = I[:, None, :] * np.conj(I[None, :, :])
    P = _lag_correlations(u, v, dt)
    W1, W2, W3, W4 = _sfg_coefficient_tables(tb)
    diag = np.arange(n_q)
    term_bg = np.einsum("qp,qpk->k", W1, X1)
    term_pair = np.real(np.einsum("qp,qpk->k", W2, P))
    term_lin = np.einsum("q,qk->k", W3, X1[diag, diag])
    term_coh = -2.0 * np.einsum("q,qk->k", W4, X1[diag, diag])
    values = term_bg + term_pair + term_lin + term_coh
    if float(values.min()) < -1e-12 * max(1.0, float(np.abs(values).max())):
        raise ConfigError([f"sum-frequency intensity fell below zero: {values.min():.3e}"])
    values = np.clip(values, 0.0, None)
    tau = tm_s.grid.lags
    terms = {"background": term_bg, "pair": term_pair,
             "linear": term_lin, "coherent": term_coh}
    if normalized:
        scale = float(np.trapezoid(values, tau))
        if scale > 0:
            values = values / scale
            terms = {k: t / scale for k, t in terms.items()}
    feats = extract_features(tau, values) if with_features else None
    return InterferenceProfile(tau=tau, values=values, terms=terms, features=feats)


def mode_overlap_g(spec_s: SpectralModeSet, spec_i: SpectralModeSet, taus):
    """g_qq'(tau) = int conj(f_i,q)(w) f_s,q'(w) exp(i w tau) dw (envelope).

    Returns an array of shape (n_q, n_q, n_tau); the carrier phase
    exp(i w0 tau) is dropped (it cancels in every observable below).
    """
    if spec_s.grid.n_points != spec_i.grid.n_points:
        raise ConfigError(["signal and idler mode sets need a shared grid"])
    taus = np.atleast_1d(np.asarray(taus, dtype=float))
    det = spec_s.grid.detunings
    pairs = np.einsum("qw,pw->qpw", np.conj(spec_i.values), spec_s.values)
    kernel = np.exp(1j * np.outer(det, taus))
    return (pairs @ kernel) * spec_s.grid.step


def _overlap_lags(tm_s: TemporalModeSet, tm_i: TemporalModeSet) -> np.ndarray:
    """g_qq' on the full lag grid via the temporal envelopes (plain modes)."""
    if tm_s.flux_weighted or tm_i.flux_weighted:
        raise ConfigError(["overlap needs plain (non flux-weighted) envelopes"])
    dt = tm_s.grid.step
    # int conj(fi_q(t)) fs_p(t + tau) dt = g_qp(-tau); flip the lag axis
    corr = _lag_correlations(tm_s.values[None, :, :], np.conj(tm_i.values)[:, None, :], dt)
    return corr[..., ::-1]


def _hom_coefficient_tables(tb: TwinBeamState):
    ens = tb.ensemble
    b_s = tb.per_ml_q(ens.b[:, 0])
    b_i = tb.per_ml_q(ens.b[:, 1])
    d = tb.per_ml_q(ens.d[:, 0])
    xi2 = tb.per_ml_q(np.abs(ens.xi[:, 0] * ens.xi[:, 1]) ** 2)
    A = xi2.sum(axis=0)
    Dm = np.einsum("mq,mp->qp", d, d)
    Bm = np.einsum("mq,mp->qp", b_i, b_s)
    return A, Dm, Bm


def _hom_normalizations(tb: TwinBeamState, r: complex, t: complex):
    ens = tb.ensemble
    b_s, b_i = ens.b[:, 0], ens.b[:, 1]
    c_s, c_i = ens.c[:, 0], ens.c[:, 1]
    xi_s2 = np.abs(ens.xi[:, 0]) ** 2
    xi_i2 = np.abs(ens.xi[:, 1]) ** 2
    d, dbar = ens.d[:, 0], ens.dbar[:, 0]
    rt2 = abs(r * t) ** 2
    r4t4 = abs(r) ** 4 + abs(t) ** 4
    R0 = rt2 * (b_i.sum() ** 2 + b_s.sum() ** 2) + r4t4 * b_i.sum() * b_s.sum()
    R0d = (
        rt2 * np.sum(-2.0 * xi_i2**2 + b_i**2 + np.abs(c_i) ** 2
                     - 2.0 * xi_s2**2 + b_s**2 + np.abs(c_s) ** 2)
        + r4t4 * np.sum(-2.0 * xi_s2 * xi_i2 + np.abs(d) ** 2 + np.abs(dbar) ** 2)
    )
    return float(R0), float(R0d)


def hom_profiles(
    tb: TwinBeamState,
    overlap: np.ndarray,
    tau: np.ndarray,
    r: complex = 1.0 / math.sqrt(2.0),
    t: complex = 1.0 / math.sqrt(2.0),
) -> dict:
    """Normalized Hong-Ou-Mandel correlation profiles.

    overlap is g_qq'(tau) of shape (n_q, n_q, n_tau).  Returns a dict with
    the interference term rho (and its coherent/pair/chaotic parts), the
    normalization constants and the profiles R_n, R_n_delta.
    """
    A, Dm, Bm = _hom_coefficient_tables(tb)
    g = overlap
    gdiag2 = np.abs(g[np.arange(g.shape[0]), np.arange(g.shape[0]), :]) ** 2
    rt2 = abs(r * t) ** 2
    coh = -2.0 * rt2 * np.einsum("q,qk->k", A, gdiag2)
    pair = rt2 * np.real(np.einsum("qp,qpk->k", Dm, g * np.conj(g.transpose(1, 0, 2))))
    chaotic = rt2 * np.einsum("qp,qpk->k", Bm, np.abs(g) ** 2)
    rho = coh + pair + chaotic
    R0, R0d = _hom_normalizations(tb, r, t)
    out = {
        "tau": tau,
        "rho": rho,
        "rho_terms": {"coherent": coh, "pair": pair, "chaotic_product": chaotic},
        "R0": R0,
        "R0_delta": R0d,
    }
    denom_n = R0 + R0d
    out["R_n"] = 1.0 - 2.0 * rho / denom_n if denom_n != 0 else np.full_like(rho, np.nan)
    out["R_n_delta"] = 1.0 - 2.0 * rho / R0d if R0d != 0 else np.full_like(rho, np.nan)
    return out


def hom_from_state(tb: TwinBeamState, n_time: int = 4096,
                   r: complex = 1.0 / math.sqrt(2.0),
                   t: complex = 1.0 / math.sqrt(2.0)) -> dict:
    """Convenience wrapper: build envelopes, overlaps and HOM profiles."""
    if abs(abs(r) ** 2 + abs(t) ** 2 - 1.0) > 1e-12:
        raise ConfigError(["beam splitter must satisfy |r|^2 + |t|^2 = 1"])
    grid = default_time_grid(tb.basis.signal, n_points=n_time)
    tm_s = temporal_modes(tb.basis.signal, grid, flux_weighted=False)
    tm_i = temporal_modes(tb.basis.idler, grid, flux_weighted=False)
    g = _overlap_lags(tm_s, tm_i)
    return hom_profiles(tb, g, grid.lags, r=r, t=t)


def sfg_from_state(tb: TwinBeamState, n_time: int = 4096,
                   normalized: bool = False) -> InterferenceProfile:
    """Convenience wrapper: build flux-weighted envelopes and the SFG profile."""
    grid = default_time_grid(tb.basis.signal, n_points=n_time)
    tm_s = temporal_modes(tb.basis.signal, grid, flux_weighted=True)
    tm_i = temporal_modes(tb.basis.idler, grid, flux_weighted=True)
    return sfg_profile(tb, tm_s, tm_i, normalized=normalized)


def extract_features(tau: np.ndarray, values: np.ndarray,
                     mask_factor: float = 3.0) -> ProfileFeatures:
    """Two-scale width/visibility extraction for interference profiles."""
    return two_scale_features(tau, values, mask_factor=mask_factor)
