"""Gaussian-state description of one triplet and its observables.

The state of a triplet is Gaussian at every position: three coherent
amplitudes plus the quadratic noise coefficients built from the evolution
matrices.  All observables below are normally ordered.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .dynamics import EvolutionMatrices

__all__ = [
    "GaussianTripletState",
    "TripletObservables",
    "propagate_state",
    "propagate_ensemble",
    "TripletEnsemble",
    "intensity",
    "fluctuations",
    "derived_measures",
]

PAIRS = ("si", "sp", "ip")
_PAIR_INDEX = {"si": (0, 1), "sp": (0, 2), "ip": (1, 2)}
FIELDS = ("s", "i", "p")


@dataclass(frozen=True)
class GaussianTripletState:
    """Coherent amplitudes and noise coefficients of one triplet."""

    xi: np.ndarray              # (3,) coherent amplitudes (s, i, p)
    B: np.ndarray               # (3,) chaotic photon numbers
    C: np.ndarray               # (3,) single-mode anomalous coefficients
    D: np.ndarray               # (3,) pair coefficients, order PAIRS
    Dbar: np.ndarray            # (3,) conjugate pair coefficients, order PAIRS
    pair_gap: float | None = None   # stable b_s*b_i - d_si^2, when available

    @property
    def b(self) -> np.ndarray:
        return self.B + np.abs(self.xi) ** 2

    @property
    def c(self) -> np.ndarray:
        return self.C + self.xi**2

    def d(self, pair: str):
        j, k = _PAIR_INDEX[pair]
        return self.D[PAIRS.index(pair)] + self.xi[j] * self.xi[k]

    def dbar(self, pair: str):
        j, k = _PAIR_INDEX[pair]
        return -self.Dbar[PAIRS.index(pair)] + np.conj(self.xi[j]) * self.xi[k]


def propagate_state(ev: EvolutionMatrices, xi0) -> GaussianTripletState:
    """Gaussian state after evolution from vacuum signal/idler + coherent pump."""
    U, V = ev.U, ev.V
    xi0 = np.asarray(xi0, dtype=float)
    xi = U @ xi0 + V @ xi0  # real amplitudes: xi* = xi
    B = np.sum(V * V, axis=-1)
    C = np.sum(U * V, axis=-1)
    D = np.empty(3)
    Dbar = np.empty(3)
    for n, (j, k) in enumerate(_PAIR_INDEX[p] for p in PAIRS):
        D[n] = np.sum(U[j] * V[k])
        Dbar[n] = -np.sum(V[j] * V[k])
    return GaussianTripletState(xi=xi, B=B, C=C, D=D, Dbar=Dbar)


@dataclass
class TripletEnsemble:
    """Struct-of-arrays Gaussian states for many triplets (shape (n, ...))."""

    xi: np.ndarray     # (n, 3)
    B: np.ndarray      # (n, 3)
    C: np.ndarray      # (n, 3)
    D: np.ndarray      # (n, 3) pairs in PAIRS order
    Dbar: np.ndarray   # (n, 3)
    pair_gap: np.ndarray | None = field(default=None)
    # pair_gap holds b_s b_i - d_si^2 evaluated without catastrophic
    # cancellation; only the pair-only (gamma = 0) path can supply it.

    @property
    def n(self) -> int:
        return self.xi.shape[0]

    @property
    def b(self) -> np.ndarray:
        return self.B + np.abs(self.xi) ** 2

    @property
    def c(self) -> np.ndarray:
        return self.C + self.xi**2

    @property
    def d(self) -> np.ndarray:
        out = np.empty_like(self.D)
        for n, (j, k) in enumerate(_PAIR_INDEX[p] for p in PAIRS):
            out[:, n] = self.D[:, n] + self.xi[:, j] * self.xi[:, k]
        return out

    @property
    def dbar(self) -> np.ndarray:
        out = np.empty_like(self.Dbar)
        for n, (j, k) in enumerate(_PAIR_INDEX[p] for p in PAIRS):
            out[:, n] = -self.Dbar[:, n] + self.xi[:, j] * self.xi[:, k]
        return out

    def state(self, i: int) -> GaussianTripletState:
        return GaussianTripletState(
            xi=self.xi[i], B=self.B[i], C=self.C[i], D=self.D[i],
            Dbar=self.Dbar[i],
            pair_gap=None if self.pair_gap is None else float(self.pair_gap[i]),
        )


def propagate_ensemble(U: np.ndarray, V: np.ndarray, xi0: np.ndarray) -> TripletEnsemble:
    """Vectorized propagation: U, V of shape (n,3,3), xi0 of shape (n,3)."""
    xi = np.einsum("nij,nj->ni", U, xi0) + np.einsum("nij,nj->ni", V, xi0)
    B = np.sum(V * V, axis=-1)
    C = np.sum(U * V, axis=-1)
    D = np.empty_like(B)
    Dbar = np.empty_like(B)
    for n, (j, k) in enumerate(_PAIR_INDEX[p] for p in PAIRS):
        D[:, n] = np.sum(U[:, j, :] * V[:, k, :], axis=-1)
        Dbar[:, n] = -np.sum(V[:, j, :] * V[:, k, :], axis=-1)
    return TripletEnsemble(xi=xi, B=B, C=C, D=D, Dbar=Dbar)


def pair_only_ensemble(phi_values: np.ndarray, xi_pump: np.ndarray) -> TripletEnsemble:
    """Analytic gamma = 0 states from the gain exponent, cancellation-free.

    B_s = B_i = sinh(phi)^2, D_si = sinh(phi)cosh(phi); the pump row stays
    coherent.  pair_gap = b_s b_i - d_si^2 = expm1(-2 phi)/2 * (b + d) form,
    evaluated so that perfect pairing survives at float precision.
    """
    ph = np.asarray(phi_values, dtype=float)
    n = ph.size
    sh, ch = np.sinh(ph), np.cosh(ph)
    xi = np.zeros((n, 3))
    xi[:, 2] = xi_pump
    B = np.zeros((n, 3))
    B[:, 0] = sh * sh
    B[:, 1] = sh * sh
    C = np.zeros((n, 3))
    D = np.zeros((n, 3))
    D[:, 0] = sh * ch
    Dbar = np.zeros((n, 3))
    # b - d = sinh^2 - sinh cosh = expm1(-2 phi)/2 exactly
    gap = 0.5 * np.expm1(-2.0 * ph) * (sh * sh + sh * ch)
    return TripletEnsemble(xi=xi, B=B, C=C, D=D, Dbar=Dbar, pair_gap=gap)


@dataclass(frozen=True)
class TripletObservables:
    """Scalar observables of one triplet (normally ordered moments)."""

    intensity: dict
    coherent: dict
    chaotic: dict
    variance: dict
    cross: dict
    r: dict
    r_cross: dict
    R_si: float
    squeeze: dict


def intensity(st: GaussianTripletState, which: str):
    """Mean photon number of one field and its (chaotic, coherent) split."""
    j = FIELDS.index(which)
    chaotic = float(st.B[j])
    coherent = float(np.abs(st.xi[j]) ** 2)
    return chaotic + coherent, chaotic, coherent


def fluctuations(st: GaussianTripletState):
    """Per-field variances and pairwise covariances of photon numbers."""
    b, c, xi = st.b, st.c, st.xi
    var = {
        f: float(b[j] ** 2 + np.abs(c[j]) ** 2 - 2.0 * np.abs(xi[j]) ** 4)
        for j, f in enumerate(FIELDS)
    }
    cross = {}
    for n, pair in enumerate(PAIRS):
        j, k = _PAIR_INDEX[pair]
        d, dbar = st.d(pair), st.dbar(pair)
        cross[pair] = float(
            np.abs(d) ** 2 + np.abs(dbar) ** 2
            - 2.0 * np.abs(xi[j]) ** 2 * np.abs(xi[k]) ** 2
        )
    return var, cross


def pair_difference_variance(st: GaussianTripletState) -> float:
    """Normally ordered <(d i_s - d i_i)^2>, stable in the pair-only case."""
    var, cross = fluctuations(st)
    if st.pair_gap is not None and st.C[0] == 0.0 and st.xi[0] == 0.0:
        # symmetric pair-only state: variance_s = variance_i = b^2 and
        # cross = d^2, so the difference reduces to twice the stable gap
        return 2.0 * st.pair_gap
    return var["s"] + var["i"] - 2.0 * cross["si"]


def derived_measures(st: GaussianTripletState) -> TripletObservables:
    """All scalar observables; ratios at zero intensity become NaN markers."""
    inten, chaotic, coherent = {}, {}, {}
    for f in FIELDS:
        inten[f], chaotic[f], coherent[f] = intensity(st, f)
    var, cross = fluctuations(st)
    r = {
        f: (var[f] + inten[f] ** 2) / inten[f] ** 2 if inten[f] > 0 else float("nan")
        for f in FIELDS
    }
    r_cross = {}
    for pair in PAIRS:
        j, k = _PAIR_INDEX[pair]
        denom = inten[FIELDS[j]] * inten[FIELDS[k]]
        r_cross[pair] = cross[pair] / denom if denom > 0 else float("nan")
    denom = inten["s"] + inten["i"]
    R_si = 1.0 + pair_difference_variance(st) / denom if denom > 0 else float("nan")
    squeeze = {f: float(0.5 + st.B[j] - np.abs(st.C[j])) for j, f in enumerate(FIELDS)}
    return TripletObservables(
        intensity=inten, coherent=coherent, chaotic=chaotic,
        variance=var, cross=cross, r=r, r_cross=r_cross,
        R_si=R_si, squeeze=squeeze,
    )
