"""Parametric Schmidt-mode machinery.

Spectral modes are Hermite-Gaussian functions on a uniform frequency grid,
transverse modes are Laguerre-Gaussian, and the mode weights follow a
geometric spectrum.  Pump modes are obtained by grid convolution of the
signal and idler modes; their norms set the relative coupling of each
triplet.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import eval_genlaguerre, gammaln

from .constants import C_LIGHT, HBAR, angular_frequency, photons_per_pulse
from .errors import ConfigError, ResolutionError, TruncationError

__all__ = [
    "FrequencyGrid",
    "SpectralModeSet",
    "PumpModeSet",
    "SchmidtSpectrum",
    "TransverseWeights",
    "PumpConfig",
    "SchmidtBasis",
    "build_spectral_modes",
    "natural_pump_grid",
    "build_pump_modes",
    "build_schmidt_spectrum",
    "transverse_weights",
    "pump_power_division",
    "build_basis",
    "TripletDrive",
    "triplet_drives",
    "dominant_drive",
]


@dataclass(frozen=True)
class FrequencyGrid:
    """Uniform grid of angular frequencies, symmetric about its centre."""

    center: float      # rad/s
    half_span: float   # rad/s
    n_points: int

    def __post_init__(self):
        if self.n_points < 16:
            raise ConfigError([f"n_points must be >= 16, got {self.n_points}"])
        if self.half_span <= 0:
            raise ConfigError([f"half_span must be > 0, got {self.half_span}"])

    @property
    def step(self) -> float:
        return 2.0 * self.half_span / (self.n_points - 1)

    @property
    def omegas(self) -> np.ndarray:
        return self.center + np.linspace(-self.half_span, self.half_span, self.n_points)

    @property
    def detunings(self) -> np.ndarray:
        return np.linspace(-self.half_span, self.half_span, self.n_points)

    def norm(self, values: np.ndarray) -> float:
        """Quadrature norm sqrt(sum |f|^2 dw) of samples on this grid."""
        return float(np.sqrt(np.sum(np.abs(values) ** 2, axis=-1) * self.step))

    def inner(self, a: np.ndarray, b: np.ndarray) -> complex:
        return complex(np.sum(np.conj(a) * b) * self.step)


@dataclass(frozen=True)
class SpectralModeSet:
    """Orthonormal spectral modes sampled on a common grid."""

    grid: FrequencyGrid
    values: np.ndarray      # (count, n_points), unit norm rows
    width_sigma: float

    @property
    def count(self) -> int:
        return self.values.shape[0]

    def gram(self) -> np.ndarray:
        return (np.conj(self.values) @ self.values.T) * self.grid.step


@dataclass(frozen=True)
class PumpModeSet:
    """Non-normalized pump modes (one per q) and their quadrature norms."""

    grid: FrequencyGrid
    values: np.ndarray   # (count, n_points)
    kappa: np.ndarray    # (count,)

    @property
    def count(self) -> int:
        return self.values.shape[0]


@dataclass(frozen=True)
class SchmidtSpectrum:
    """Geometric Schmidt coefficients, spectral (q) and transverse (m, l)."""

    lambda_spectral: np.ndarray      # (n_q,)
    lambda_transverse: np.ndarray    # (n_m, n_l)
    m_values: np.ndarray             # (n_m,) azimuthal indices
    l_values: np.ndarray             # (n_l,) radial indices
    mu_spectral: float
    mu_transverse: float


@dataclass(frozen=True)
class TransverseWeights:
    """Quartic overlap of paired transverse modes, units 1/m^2."""

    w: np.ndarray        # (n_m, n_l)
    m_values: np.ndarray
    l_values: np.ndarray
    beam_radius: float


@dataclass(frozen=True)
class PumpConfig:
    """Pump laser and crystal parameters (defaults follow the reference BBO setup)."""

    power: float = 0.24                    # W
    repetition_rate: float = 400.0         # 1/s
    central_wavelength: float = 349e-9     # m
    spectral_fwhm: float = 1e-9            # m, intensity FWHM of the pump
    beam_radius: float = 500e-6            # m
    crystal_length: float = 4e-3           # m
    coupling_scale: float = 23.29          # W^-1/2, gain of the strongest triplet per sqrt(W)
    # Fraction of the pump power feeding the strongest triplet.  The physical
    # beam spreads its power over ~1e6 spatio-spectral modes; simulating only a
    # small block of them requires anchoring the absolute per-mode amplitude
    # here.  Calibrated so the strongest triplet's signal peaks near 240 mW.
    dominant_power_fraction: float = 9.6e-7

    def __post_init__(self):
        problems = [
            f"pump.{name} must be > 0, got {getattr(self, name)}"
            for name in (
                "power", "repetition_rate", "central_wavelength", "spectral_fwhm",
                "beam_radius", "crystal_length", "coupling_scale",
                "dominant_power_fraction",
            )
            if not getattr(self, name) > 0
        ]
        if problems:
            raise ConfigError(problems)

    @property
    def omega0(self) -> float:
        return angular_frequency(self.central_wavelength)

    @property
    def sigma_pump(self) -> float:
        """Amplitude-profile width (rad/s): |f|^2 has the configured FWHM."""
        fwhm_omega = 2.0 * math.pi * C_LIGHT * self.spectral_fwhm / self.central_wavelength**2
        return fwhm_omega / (2.0 * math.sqrt(math.log(2.0)))

    @property
    def sigma_signal(self) -> float:
        """Fundamental signal-mode width so the q=0 pump mode matches the pump."""
        return self.sigma_pump / math.sqrt(2.0)

    def photon_flux(self, power: float | None = None) -> float:
        """Photons per pulse at the pump carrier for a given average power."""
        p = self.power if power is None else power
        return photons_per_pulse(p, self.repetition_rate, self.omega0)


def build_spectral_modes(grid: FrequencyGrid, sigma: float, count: int) -> SpectralModeSet:
    """Hermite-Gaussian modes of width sigma centred on the grid.

    Raises ResolutionError when the grid cannot resolve sigma (fewer than
    4 samples per sigma) or the highest mode leaks off the grid.
    """
    if count < 1:
        raise ConfigError([f"mode count must be >= 1, got {count}"])
    if grid.step > sigma / 4.0:
        raise ResolutionError(
            f"grid step {grid.step:.3e} exceeds sigma/4 = {sigma / 4:.3e}"
        )
    x = grid.detunings / sigma
    norm0 = math.pi ** (-0.25) / math.sqrt(sigma)
    modes = np.empty((count, grid.n_points))
    modes[0] = norm0 * np.exp(-0.5 * x * x)
    if count > 1:
        modes[1] = math.sqrt(2.0) * x * modes[0]
    for q in range(2, count):
        modes[q] = (
            math.sqrt(2.0 / q) * x * modes[q - 1]
            - math.sqrt((q - 1) / q) * modes[q - 2]
        )
    top_norm = grid.norm(modes[-1])
    if abs(top_norm - 1.0) > 1e-6:
        raise ResolutionError(
            f"mode {count - 1} loses {abs(top_norm-1.0):.2e} of its norm on the grid; "
            "widen half_span"
        )
    return SpectralModeSet(grid=grid, values=modes, width_sigma=sigma)


def natural_pump_grid(signal: SpectralModeSet, idler: SpectralModeSet) -> FrequencyGrid:
    """The grid on which the signal x idler convolution lives natively."""
    gs, gi = signal.grid, idler.grid
    if abs(gs.step - gi.step) > 1e-9 * gs.step:
        raise ConfigError(["signal and idler grids must share the same step"])
    n = gs.n_points + gi.n_points - 1
    half = (n - 1) * gs.step / 2.0
    return FrequencyGrid(center=gs.center + gi.center, half_span=half, n_points=n)


def build_pump_modes(
    signal: SpectralModeSet,
    idler: SpectralModeSet,
    pump_grid: FrequencyGrid | None = None,
) -> PumpModeSet:
    """Convolve paired signal/idler modes into (non-normalized) pump modes.

    modes[q](w_p) = integral dw_s f_s,q(w_s) f_i,q(w_p - w_s), evaluated by
    discrete convolution.  kappa[q] is the quadrature norm of mode q.
    """
    if signal.count != idler.count:
        raise ConfigError(["signal and idler mode sets must have equal counts"])
    natural = natural_pump_grid(signal, idler)
    step = signal.grid.step
    full = np.array([
        np.convolve(signal.values[q], idler.values[q]) * step
        for q in range(signal.count)
    ])
    if pump_grid is None:
        pump_grid = natural
        values = full
    else:
        if abs(pump_grid.step - step) > 1e-9 * step:
            raise ConfigError(["pump grid must share the signal grid step"])
        offset = (pump_grid.center - pump_grid.half_span) - (natural.center - natural.half_span)
        shift = offset / step
        if abs(shift - round(shift)) > 1e-6:
            raise ConfigError(["pump grid is not commensurate with the convolution grid"])
        shift = int(round(shift))
        values = np.zeros((signal.count, pump_grid.n_points))
        src0, dst0 = max(0, shift), max(0, -shift)
        n_copy = min(natural.n_points - src0, pump_grid.n_points - dst0)
        if n_copy <= 0:
            raise TruncationError("pump grid does not overlap the convolution support")
        values[:, dst0:dst0 + n_copy] = full[:, src0:src0 + n_copy]
        total = np.sum(np.abs(full) ** 2, axis=1)
        kept = np.sum(np.abs(values) ** 2, axis=1)
        lost = 1.0 - kept / total
        if np.any(lost > 1e-6):
            raise TruncationError(
                f"pump grid drops up to {float(np.max(lost)):.2e} of the mode mass"
            )
    kappa = np.sqrt(np.sum(np.abs(values) ** 2, axis=1) * step)
    if np.any(kappa <= 0):
        raise ConfigError(["pump mode with zero norm"])
    return PumpModeSet(grid=pump_grid, values=values, kappa=kappa)


def _geometric(mu: float, n: int) -> np.ndarray:
    if not 0.0 <= mu < 1.0:
        raise ConfigError([f"mu must lie in [0, 1), got {mu}"])
    if mu == 0.0:
        out = np.zeros(n)
        out[0] = 1.0
        return out
    lam2 = (1.0 - mu * mu) * mu ** (2.0 * np.arange(n))
    return np.sqrt(lam2 / lam2.sum())


def build_schmidt_spectrum(
    mu_spectral: float,
    mu_transverse: float,
    n_q: int,
    n_m: int,
    n_l: int,
) -> SchmidtSpectrum:
    """Geometric Schmidt coefficients, renormalized over the truncated set.

    Spectral: lambda_q ~ mu^q for q = 0..n_q-1.  Transverse: doubly geometric
    in |m| (two-sided azimuthal index) and l, lambda_ml ~ mu^(|m|+l).
    """
    if n_m % 2 == 0:
        raise ConfigError([f"n_m must be odd (symmetric m range), got {n_m}"])
    lam_q = _geometric(mu_spectral, n_q)
    m_values = np.arange(-(n_m // 2), n_m // 2 + 1)
    l_values = np.arange(n_l)
    if mu_transverse == 0.0:
        lam2 = np.zeros((n_m, n_l))
        lam2[n_m // 2, 0] = 1.0
    else:
        if not 0.0 <= mu_transverse < 1.0:
            raise ConfigError([f"mu must lie in [0, 1), got {mu_transverse}"])
        expo = np.abs(m_values)[:, None] + l_values[None, :]
        lam2 = mu_transverse ** (2.0 * expo)
    lam_ml = np.sqrt(lam2 / lam2.sum())
    return SchmidtSpectrum(
        lambda_spectral=lam_q,
        lambda_transverse=lam_ml,
        m_values=m_values,
        l_values=l_values,
        mu_spectral=mu_spectral,
        mu_transverse=mu_transverse,
    )


def _laguerre_radial(m_abs: int, l: int, r: np.ndarray, w0: float) -> np.ndarray:
    """Normalized Laguerre-Gaussian radial profile (azimuthal phase dropped)."""
    rho = 2.0 * r * r / (w0 * w0)
    lognorm = 0.5 * (
        math.log(2.0 / math.pi) + gammaln(l + 1) - gammaln(l + m_abs + 1)
    ) - math.log(w0)
    return (
        np.exp(lognorm)
        * rho ** (m_abs / 2.0)
        * eval_genlaguerre(l, m_abs, rho)
        * np.exp(-rho / 2.0)
    )


def transverse_weights(
    n_m: int,
    n_l: int,
    beam_radius: float,
    n_radial: int = 800,
) -> TransverseWeights:
    """Quartic overlap w_ml = 2 pi * int r |t_ml|^4 dr of paired LG modes.

    Radial integrals use Gauss-Legendre nodes; the integrands are smooth and
    compactly concentrated, so the rule converges spectrally.
    """
    if beam_radius <= 0:
        raise ConfigError([f"beam_radius must be > 0, got {beam_radius}"])
    if n_m % 2 == 0:
        raise ConfigError([f"n_m must be odd, got {n_m}"])
    m_values = np.arange(-(n_m // 2), n_m // 2 + 1)
    l_values = np.arange(n_l)
    r_max = beam_radius * (4.0 + 1.5 * math.sqrt(2.0 * (n_m // 2 + 2 * n_l) + 1.0))
    nodes, weights_gl = np.polynomial.legendre.leggauss(n_radial)
    r = 0.5 * r_max * (nodes + 1.0)
    wq = 0.5 * r_max * weights_gl
    w = np.empty((n_m, n_l))
    for i, m in enumerate(m_values):
        for j, l in enumerate(l_values):
            radial = _laguerre_radial(abs(int(m)), int(l), r, beam_radius)
            w[i, j] = 2.0 * math.pi * np.sum(wq * r * radial**4)
            norm = 2.0 * math.pi * np.sum(wq * r * radial**2)
            if abs(norm - 1.0) > 1e-9:
                raise ResolutionError(
                    f"LG (m={m}, l={l}) norm off by {abs(norm-1):.2e}; quadrature too coarse"
                )
    return TransverseWeights(w=w, m_values=m_values, l_values=l_values, beam_radius=beam_radius)


def pump_power_division(
    cfg: PumpConfig,
    spectrum: SchmidtSpectrum,
    pump: PumpModeSet,
    power: float | None = None,
) -> np.ndarray:
    """Incident classical amplitudes A^N_mlq (sqrt photons), shape (n_m, n_l, n_q).

    A^N_mlq = ktilde * (lambda_ml * lambda_q / kappa_q) * xi_p with
    ktilde = 1/sqrt(sum_q lambda_q^2/kappa_q^2) and xi_p^2 = P/(f hbar w0),
    so that sum_mlq (A^N)^2 = xi_p^2 exactly.
    """
    if np.any(pump.kappa <= 0):
        raise ConfigError(["kappa entries must be positive"])
    lam_q = spectrum.lambda_spectral
    if lam_q.shape[0] != pump.count:
        raise ConfigError(["spectral coefficient count must match pump mode count"])
    ktilde = 1.0 / math.sqrt(float(np.sum((lam_q / pump.kappa) ** 2)))
    xi_p = math.sqrt(cfg.photon_flux(power))
    return (
        ktilde
        * spectrum.lambda_transverse[:, :, None]
        * (lam_q / pump.kappa)[None, None, :]
        * xi_p
    )


def symmetric_input_amplitude(normal_amplitude):
    """Symmetric-ordering pump input sqrt(A_N^2 + 1/2)."""
    return np.sqrt(np.asarray(normal_amplitude) ** 2 + 0.5)


@dataclass(frozen=True)
class SchmidtBasis:
    """Everything the downstream model needs about the mode structure."""

    signal: SpectralModeSet
    idler: SpectralModeSet
    pump: PumpModeSet
    spectrum: SchmidtSpectrum
    weights: TransverseWeights
    config: PumpConfig = field(repr=False)

    @property
    def n_q(self) -> int:
        return self.signal.count

    @property
    def n_ml(self) -> int:
        return self.spectrum.lambda_transverse.size


def build_basis(
    cfg: PumpConfig,
    mu_spectral: float,
    mu_transverse: float,
    n_q: int,
    n_m: int,
    n_l: int,
    n_omega: int = 321,
    half_span_sigmas: float | None = None,
) -> SchmidtBasis:
    """Construct the full Schmidt basis for a degenerate type-I interaction."""
    sigma = cfg.sigma_signal
    if half_span_sigmas is None:
        half_span_sigmas = math.sqrt(2.0 * n_q + 1.0) + 6.0
    omega_s0 = cfg.omega0 / 2.0
    grid = FrequencyGrid(center=omega_s0, half_span=half_span_sigmas * sigma, n_points=n_omega)
    signal = build_spectral_modes(grid, sigma, n_q)
    # Energy conservation anti-correlates the pair frequencies, so the idler
    # Schmidt modes are the parity reflection of the signal modes about the
    # carrier; this keeps the two-photon amplitude time-correlated.
    idler = SpectralModeSet(grid=grid, values=signal.values[:, ::-1].copy(),
                            width_sigma=sigma)
    pump = build_pump_modes(signal, idler)
    spectrum = build_schmidt_spectrum(mu_spectral, mu_transverse, n_q, n_m, n_l)
    weights = transverse_weights(n_m, n_l, cfg.beam_radius)
    return SchmidtBasis(
        signal=signal, idler=idler, pump=pump,
        spectrum=spectrum, weights=weights, config=cfg,
    )


@dataclass(frozen=True)
class TripletDrive:
    """Per-triplet coupling and input amplitude feeding the dynamics.

    coupling_length is K*L in 1/sqrt(photon); normal_amplitude is A^N(0) in
    sqrt(photon).  Arrays are flattened over (ml, q) in row-major order.
    """

    coupling_length: np.ndarray
    normal_amplitude: np.ndarray
    ml_index: np.ndarray
    q_index: np.ndarray
    n_ml: int
    n_q: int


def triplet_drives(basis: SchmidtBasis, power: float) -> TripletDrive:
    """Calibrated couplings and amplitudes for every simulated triplet.

    The simulated block is anchored at the strongest triplet: its gain is
    coupling_scale*sqrt(P) and it carries dominant_power_fraction of the pump
    power.  Subdominant triplets scale per the Schmidt power division.
    """
    cfg = basis.config
    raw = pump_power_division(cfg, basis.spectrum, basis.pump, power=power)
    flat = raw.reshape(-1, basis.n_q)
    dom_ml = int(np.argmax(basis.spectrum.lambda_transverse))
    dom_amp = flat[dom_ml, 0]
    anchor = math.sqrt(
        cfg.dominant_power_fraction * cfg.photon_flux(power)
    )
    amps = (flat * (anchor / dom_amp)).ravel()

    flux_unit = cfg.repetition_rate * HBAR * cfg.omega0  # W per photon/pulse
    kl_dominant = cfg.coupling_scale * math.sqrt(flux_unit / cfg.dominant_power_fraction)
    kl = kl_dominant * (basis.pump.kappa / basis.pump.kappa.max())
    n_ml = flat.shape[0]
    kl_full = np.tile(kl, n_ml)
    ml_index = np.repeat(np.arange(n_ml), basis.n_q)
    q_index = np.tile(np.arange(basis.n_q), n_ml)
    return TripletDrive(
        coupling_length=kl_full,
        normal_amplitude=amps,
        ml_index=ml_index,
        q_index=q_index,
        n_ml=n_ml,
        n_q=basis.n_q,
    )


def dominant_drive(cfg: PumpConfig, power: float) -> tuple[float, float]:
    """(K*L, A^N) of the strongest triplet alone, carrying its power share."""
    flux_unit = cfg.repetition_rate * HBAR * cfg.omega0
    kl = cfg.coupling_scale * math.sqrt(flux_unit / cfg.dominant_power_fraction)
    amp = math.sqrt(cfg.dominant_power_fraction * cfg.photon_flux(power))
    return kl, amp
