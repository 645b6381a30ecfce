"""Single-triplet dynamics: classical depletion and quadrature transfer.

The classical pump/signal amplitudes follow the hyperbolic depletion
solution; past the half-period z0 (pump at the vacuum level) the classical
trajectory is continued by mirror symmetry, z -> 2*z0 - z, with period 2*z0.

The quadrature operators evolve under a linear system whose coefficients are
the continued classical solution (the pump amplitude changes sign at its
zero crossing, which encodes the phase flip of the back-conversion stage).
For the two limiting mixing values the 2x2 transfer blocks have closed
forms, valid at every position; for intermediate mixing the blocks are
integrated with an adaptive RK45 at tolerance 1e-10.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp

from .constants import SQRT_HALF
from .errors import ConfigError, ConsistencyError, NumericalError

__all__ = [
    "TripletParams",
    "ClassicalTrajectory",
    "QuadratureTransfer",
    "EvolutionMatrices",
    "classical_amplitudes",
    "half_period_z0",
    "phi",
    "transfer_matrices",
    "assemble_UV",
    "evolution_batch",
    "symplectic_residual",
]

_SQRT2 = math.sqrt(2.0)


@dataclass(frozen=True)
class TripletParams:
    """One (m, l, q) triplet: coupling, input amplitudes, mixing, length."""

    coupling: float          # K, 1/(m sqrt(photon))
    pump_input: float        # A_p(0), sqrt(photon), symmetric ordering
    gamma: float             # coherent-coupling weight in [0, 1]
    length: float            # crystal length, m
    seed: float = SQRT_HALF  # A_s(0); vacuum level for spontaneous operation

    def __post_init__(self):
        problems = []
        if not self.pump_input >= self.seed > 0:
            problems.append(f"require A_p(0) >= A_s(0) > 0, got {self.pump_input}, {self.seed}")
        if not 0.0 <= self.gamma <= 1.0:
            problems.append(f"gamma must lie in [0, 1], got {self.gamma}")
        if self.coupling < 0:
            problems.append(f"coupling must be >= 0, got {self.coupling}")
        if self.length <= 0:
            problems.append(f"length must be > 0, got {self.length}")
        if problems:
            raise ConfigError(problems)

    @property
    def total_amplitude(self) -> float:
        """Conserved A_ps = sqrt(A_p^2 + A_s^2)."""
        return math.hypot(self.pump_input, self.seed)

    @property
    def h_pump(self) -> float:
        """atanh(A_p(0)/A_ps), evaluated in cancellation-free form."""
        return math.log((self.total_amplitude + self.pump_input) / self.seed)

    @property
    def h_seed(self) -> float:
        """atanh(A_s(0)/A_ps)."""
        return math.log((self.total_amplitude + self.seed) / self.pump_input)


@dataclass(frozen=True)
class ClassicalTrajectory:
    """Mirror-folded classical solution of the depletion equations."""

    params: TripletParams

    @property
    def conserved(self) -> float:
        return self.params.total_amplitude

    @property
    def z0(self) -> float:
        return half_period_z0(self.params)

    def __call__(self, z):
        return classical_amplitudes(self.params, z)


def half_period_z0(p: TripletParams) -> float:
    """Position of the pump minimum A_p(z0) = A_s(0).  Infinite when K = 0."""
    if p.coupling == 0.0:
        return math.inf
    return (p.h_pump - p.h_seed) / (p.coupling * p.total_amplitude)


def _fold(p: TripletParams, z):
    """Map positions onto the rising branch [0, z0] by mirror + periodicity."""
    z = np.asarray(z, dtype=float)
    z0 = half_period_z0(p)
    if not math.isfinite(z0):
        return z
    period = 2.0 * z0
    zm = np.mod(z, period)
    return np.where(zm > z0, period - zm, zm)


def classical_amplitudes(p: TripletParams, z):
    """(A_p, A_s) at position(s) z, with mirror continuation past z0."""
    if p.coupling == 0.0:
        z = np.asarray(z, dtype=float)
        return (np.broadcast_to(p.pump_input, z.shape).copy(),
                np.broadcast_to(p.seed, z.shape).copy())
    ze = _fold(p, z)
    aps = p.total_amplitude
    x = p.coupling * aps * ze - p.h_pump
    return -aps * np.tanh(x), aps / np.cosh(x)


def phi(p: TripletParams, z):
    """Accumulated parametric gain exponent of the pump-driven stage.

    Evaluated in overflow-safe form; equals K*A_p(0)*z in the undepleted
    limit and decreases past the classical depletion point.
    """
    z = np.asarray(z, dtype=float)
    if p.coupling == 0.0:
        return np.zeros(z.shape)
    aps = p.total_amplitude
    u = p.coupling * aps * z
    a = p.pump_input / aps
    # log[(1+a)/2 + (1-a)/2 * exp(2u)] without overflow; (1-a)/2 computed
    # from the exact identity (1-a)/2 = seed^2 / (2 aps (aps + A_p0)).
    log_lo = math.log((1.0 + a) / 2.0)
    log_hi = math.log(p.seed**2 / (2.0 * aps * (aps + p.pump_input))) + 2.0 * u
    return u - np.logaddexp(log_lo, log_hi)


def _log_cosh(x):
    ax = np.abs(x)
    return ax + np.log1p(np.exp(-2.0 * ax)) - math.log(2.0)


def _minus_scalar(x0, x1):
    """f_q = cosh(x1)/cosh(x0), stable for large |x|."""
    return np.exp(_log_cosh(x1) - _log_cosh(x0))


def _block_pure_pair(x):
    """Transfer block of the pair-only limit (gamma = 0), q sector."""
    x = np.asarray(x, dtype=float)
    out = np.zeros(x.shape + (2, 2))
    out[..., 0, 0] = 1.0 / np.cosh(x)
    out[..., 1, 1] = 1.0
    return out


def _block_full_mix_q(x):
    """Closed-form q-sector block at gamma = 1."""
    x = np.asarray(x, dtype=float)
    c, s = np.cosh(x), np.sinh(x)
    out = np.empty(x.shape + (2, 2))
    pref = 1.0 / (_SQRT2 * c * c)
    out[..., 0, 0] = pref * _SQRT2 * (c - x * s)
    out[..., 0, 1] = pref * 2.0 * s
    out[..., 1, 0] = pref * -(x + s * c)
    out[..., 1, 1] = pref * _SQRT2
    return out


def _block_full_mix_p(x):
    """Closed-form p-sector block at gamma = 1."""
    x = np.asarray(x, dtype=float)
    c, s = np.cosh(x), np.sinh(x)
    out = np.empty(x.shape + (2, 2))
    pref = 1.0 / (_SQRT2 * c)
    out[..., 0, 0] = pref * _SQRT2
    out[..., 0, 1] = pref * (x + s * c)
    out[..., 1, 0] = pref * -2.0 * s
    out[..., 1, 1] = pref * _SQRT2 * (c - x * s)
    return out


def _compose_full_mix(x0, x1):
    """Stable composed blocks F(x1) F(x0)^-1 for gamma = 1, q and p sectors.

    Written with difference arguments so that nearby endpoints and large
    |x| do not lose precision to cancellation.
    """
    x0 = np.asarray(x0, dtype=float)
    x1 = np.asarray(x1, dtype=float)
    c0, s0 = np.cosh(x0), np.sinh(x0)
    c1, s1 = np.cosh(x1), np.sinh(x1)
    d = x1 - x0
    e1 = c1 - d * s1 + s1 * s0 * c0
    e2 = np.sinh(d) + d * s1 * s0
    e3 = d + np.cosh(x1 + x0) * np.sinh(d)
    e4 = c0 + d * s0 + s1 * s0 * c1
    fq = np.empty(np.broadcast(x0, x1).shape + (2, 2))
    inv_q = 1.0 / (c1 * c1 * c0)
    fq[..., 0, 0] = inv_q * e1
    fq[..., 0, 1] = inv_q * _SQRT2 * e2
    fq[..., 1, 0] = inv_q * -e3 / _SQRT2
    fq[..., 1, 1] = inv_q * e4
    fp = np.empty_like(fq)
    inv_p = 1.0 / (c1 * c0 * c0)
    fp[..., 0, 0] = inv_p * e4
    fp[..., 0, 1] = inv_p * e3 / _SQRT2
    fp[..., 1, 0] = inv_p * -_SQRT2 * e2
    fp[..., 1, 1] = inv_p * e1
    return fq, fp


def _compose_pure_pair(x0, x1):
    ratio = _minus_scalar(x0, x1)  # cosh(x1)/cosh(x0)
    shape = np.broadcast(np.asarray(x0), np.asarray(x1)).shape
    fq = np.zeros(shape + (2, 2))
    fp = np.zeros(shape + (2, 2))
    fq[..., 0, 0] = 1.0 / ratio
    fq[..., 1, 1] = 1.0
    fp[..., 0, 0] = ratio
    fp[..., 1, 1] = 1.0
    return fq, fp


def _transfer_rhs(gamma):
    sq2g = _SQRT2 * gamma

    def rhs(x, y):
        th = np.tanh(x)
        se = 1.0 / np.cosh(x)
        fq = y[:4].reshape(2, 2)
        fp = y[4:].reshape(2, 2)
        dq = np.empty_like(fq)
        dq[0] = -th * fq[0] + sq2g * se * fq[1]
        dq[1] = -sq2g * se * fq[0]
        dp = np.empty_like(fp)
        dp[0] = th * fp[0] + sq2g * se * fp[1]
        dp[1] = -sq2g * se * fp[0]
        return np.concatenate((dq.ravel(), dp.ravel()))

    return rhs


_IDENTITY8 = np.concatenate((np.eye(2).ravel(), np.eye(2).ravel()))


def _integrate_blocks(gamma, x0, x1, rtol=1e-12, atol=1e-12):
    """Fundamental 2x2 blocks via adaptive RK45 on the scaled coordinate.

    The default tolerance sits below the advertised 1e-10 so the global
    symplectic residual of the assembled matrices stays within 1e-10.
    """
    if x1 == x0:
        return np.eye(2), np.eye(2)
    sol = solve_ivp(
        _transfer_rhs(gamma), (x0, x1), _IDENTITY8,
        method="RK45", rtol=rtol, atol=atol,
    )
    if not sol.success:
        raise NumericalError(f"transfer integration failed: {sol.message}")
    y = sol.y[:, -1]
    return y[:4].reshape(2, 2), y[4:].reshape(2, 2)


@dataclass(frozen=True)
class QuadratureTransfer:
    """Scalar and 2x2 transfer factors of the decoupled quadrature sectors."""

    f_q: float
    f_p: float
    F_q: np.ndarray
    F_p: np.ndarray


def transfer_matrices(p: TripletParams, z: float) -> QuadratureTransfer:
    """Quadrature transfer from 0 to z for one triplet.

    Closed forms serve the two limiting mixing values; the adaptive
    integrator serves everything in between.
    """
    if z < 0:
        raise ConfigError([f"z must be >= 0, got {z}"])
    if p.coupling == 0.0 or z == 0.0:
        eye = np.eye(2)
        return QuadratureTransfer(f_q=1.0, f_p=1.0, F_q=eye, F_p=eye.copy())
    aps = p.total_amplitude
    x0 = -p.h_pump
    x1 = p.coupling * aps * z - p.h_pump
    fq_scalar = float(_minus_scalar(x0, x1))
    if p.gamma == 0.0:
        Fq, Fp = _compose_pure_pair(x0, x1)
    elif p.gamma == 1.0:
        Fq, Fp = _compose_full_mix(x0, x1)
    else:
        Fq, Fp = _integrate_blocks(p.gamma, x0, x1)
    return QuadratureTransfer(
        f_q=fq_scalar, f_p=1.0 / fq_scalar,
        F_q=np.asarray(Fq, dtype=float), F_p=np.asarray(Fp, dtype=float),
    )


@dataclass(frozen=True)
class EvolutionMatrices:
    """Real Bogoliubov matrices, basis order (signal, idler, pump)."""

    U: np.ndarray
    V: np.ndarray


def _mix_matrix(f, F):
    """3x3 quadrature mixing matrix from a sector scalar and 2x2 block."""
    f = np.asarray(f, dtype=float)
    F = np.asarray(F, dtype=float)
    out = np.empty(f.shape + (3, 3))
    out[..., 0, 0] = 0.5 * (f + F[..., 0, 0])
    out[..., 0, 1] = 0.5 * (-f + F[..., 0, 0])
    out[..., 0, 2] = 0.5 * _SQRT2 * F[..., 0, 1]
    out[..., 1, 0] = out[..., 0, 1]
    out[..., 1, 1] = out[..., 0, 0]
    out[..., 1, 2] = out[..., 0, 2]
    out[..., 2, 0] = 0.5 * _SQRT2 * F[..., 1, 0]
    out[..., 2, 1] = out[..., 2, 0]
    out[..., 2, 2] = F[..., 1, 1]
    return out


def assemble_UV(t: QuadratureTransfer, check: bool = True) -> EvolutionMatrices:
    """Build the 3x3 U, V pair from the quadrature transfer factors."""
    mq = _mix_matrix(t.f_q, t.F_q)
    mp = _mix_matrix(t.f_p, t.F_p)
    U = 0.5 * (mq + mp)
    V = 0.5 * (mq - mp)
    ev = EvolutionMatrices(U=U, V=V)
    if check:
        res = symplectic_residual(ev)
        if res > 1e-8:
            raise ConsistencyError(f"symplectic residual {res:.2e} exceeds 1e-8")
    return ev


def symplectic_residual(ev: EvolutionMatrices) -> float:
    """Largest normalized violation of the Bogoliubov identities.

    The raw residuals scale with the squared matrix entries, so they are
    measured relative to max(1, |U|_max^2) to stay meaningful at high gain.
    """
    U, V = ev.U, ev.V
    r1 = np.abs(U @ V.swapaxes(-1, -2) - V @ U.swapaxes(-1, -2)).max(axis=(-1, -2))
    eye = np.eye(3)
    r2 = np.abs(U @ U.swapaxes(-1, -2) - V @ V.swapaxes(-1, -2) - eye).max(axis=(-1, -2))
    scale = np.maximum(1.0, np.abs(U).max(axis=(-1, -2)) ** 2)
    return float(np.max(np.maximum(r1, r2) / scale))


def _integrate_blocks_batch(gamma, x0, x1, rtol=1e-12, atol=1e-12):
    """Stacked RK45 over many triplets sharing one scaled coordinate s in [0,1].

    gamma may be a scalar or a per-triplet array.
    """
    x0 = np.asarray(x0, dtype=float)
    x1 = np.asarray(x1, dtype=float)
    n = x0.size
    span = x1 - x0
    sq2g = _SQRT2 * np.broadcast_to(np.asarray(gamma, dtype=float), x0.shape)

    def rhs(s, y):
        x = x0 + s * span
        th = np.tanh(x)
        se = 1.0 / np.cosh(x)
        f = y.reshape(n, 8)
        out = np.empty_like(f)
        # q block rows
        out[:, 0] = span * (-th * f[:, 0] + sq2g * se * f[:, 2])
        out[:, 1] = span * (-th * f[:, 1] + sq2g * se * f[:, 3])
        out[:, 2] = span * (-sq2g * se * f[:, 0])
        out[:, 3] = span * (-sq2g * se * f[:, 1])
        # p block rows
        out[:, 4] = span * (th * f[:, 4] + sq2g * se * f[:, 6])
        out[:, 5] = span * (th * f[:, 5] + sq2g * se * f[:, 7])
        out[:, 6] = span * (-sq2g * se * f[:, 4])
        out[:, 7] = span * (-sq2g * se * f[:, 5])
        return out.ravel()

    y0 = np.tile(_IDENTITY8, n)
    sol = solve_ivp(rhs, (0.0, 1.0), y0, method="RK45", rtol=rtol, atol=atol)
    if not sol.success:
        raise NumericalError(f"batch transfer integration failed: {sol.message}")
    y = sol.y[:, -1].reshape(n, 8)
    return y[:, :4].reshape(n, 2, 2), y[:, 4:].reshape(n, 2, 2)


def evolution_batch(gamma, coupling_length, pump_input, seed=SQRT_HALF,
                    z_fraction=1.0):
    """U, V matrices for many triplets at once.

    coupling_length is K*L (1/sqrt photon), pump_input the symmetric-ordering
    A_p(0) array; gamma may be a scalar or a per-triplet array; z_fraction
    scales the propagation distance relative to the crystal length.
    Returns arrays of shape (n, 3, 3).
    """
    kl = np.asarray(coupling_length, dtype=float) * z_fraction
    ap = np.asarray(pump_input, dtype=float)
    seed_arr = np.broadcast_to(np.asarray(seed, dtype=float), ap.shape)
    aps = np.hypot(ap, seed_arr)
    h = np.log((aps + ap) / seed_arr)
    x0 = -h
    x1 = kl * aps - h
    active = kl > 0
    fq_scalar = np.ones_like(ap)
    fq_scalar[active] = _minus_scalar(x0[active], x1[active])
    g = np.broadcast_to(np.asarray(gamma, dtype=float), ap.shape)
    Fq = np.tile(np.eye(2), (ap.size, 1, 1))
    Fp = Fq.copy()
    pure = active & (g == 0.0)
    full = active & (g == 1.0)
    mixed = active & (g > 0.0) & (g < 1.0)
    if np.any(pure):
        Fq[pure], Fp[pure] = _compose_pure_pair(x0[pure], x1[pure])
    if np.any(full):
        Fq[full], Fp[full] = _compose_full_mix(x0[full], x1[full])
    if np.any(mixed):
        Fq[mixed], Fp[mixed] = _integrate_blocks_batch(
            g[mixed], x0[mixed], x1[mixed])
    mq = _mix_matrix(fq_scalar, Fq)
    mp = _mix_matrix(1.0 / fq_scalar, Fp)
    return 0.5 * (mq + mp), 0.5 * (mq - mp)
