"""Exact trilinear dynamics in a truncated Fock space (test oracle).

The genuine three-field interaction conserves n_s - n_i and n_p + n_s, so a
pump Fock state |n_p0> with vacuum signal/idler stays inside the
pair-symmetric ladder |n, n, n_p0 - n>, n = 0..n_p0.  The generator is a
real antisymmetric tridiagonal matrix; propagation is a dense matrix
exponential.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm

from .dynamics import TripletParams, assemble_UV, transfer_matrices
from .errors import ConfigError, TruncationError
from .statistics import derived_measures, propagate_state

__all__ = ["FockState", "trilinear_propagate", "oracle_compare"]

MAX_CUTOFF = 30


@dataclass(frozen=True)
class FockState:
    """State in the pair-symmetric ladder, amplitudes[n] <-> |n, n, n_p0 - n>."""

    amplitudes: np.ndarray
    n_pump_initial: int
    cutoff: int

    @property
    def pair_numbers(self) -> np.ndarray:
        return np.arange(self.amplitudes.size)

    @property
    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    def moments(self) -> dict:
        n = self.pair_numbers
        p = self.probabilities
        mean_s = float(np.sum(n * p))
        var_s = float(np.sum((n - mean_s) ** 2 * p))
        mean_p = float(np.sum((self.n_pump_initial - n) * p))
        return {
            "n_s": mean_s,
            "n_i": mean_s,
            "n_p": mean_p,
            "var_n_s": var_s,
            "cov_n_s_n_i": var_s,  # n_s = n_i exactly in this sector
        }


def ladder_generator(n_p0: int) -> np.ndarray:
    """Real antisymmetric generator of d|psi>/dz = K A |psi>."""
    A = np.zeros((n_p0 + 1, n_p0 + 1))
    for n in range(n_p0):
        step = (n + 1) * math.sqrt(n_p0 - n)
        A[n + 1, n] = step
        A[n, n + 1] = -step
    return A


def trilinear_propagate(coupling: float, n_p0: int, z: float,
                        cutoff: int | None = None) -> FockState:
    """Propagate |0, 0, n_p0> exactly under the trilinear interaction."""
    if cutoff is None:
        cutoff = n_p0
    if not 0 < n_p0 <= cutoff <= MAX_CUTOFF:
        raise ConfigError([f"need 0 < n_p0 <= cutoff <= {MAX_CUTOFF}, got {n_p0}, {cutoff}"])
    A = ladder_generator(n_p0)
    amp0 = np.zeros(n_p0 + 1)
    amp0[0] = 1.0
    amps = expm(coupling * z * A) @ amp0
    norm = float(np.sum(amps**2))
    if abs(norm - 1.0) > 1e-8:
        raise TruncationError(f"norm drifted by {abs(norm-1):.2e} during propagation")
    return FockState(amplitudes=amps, n_pump_initial=n_p0, cutoff=cutoff)


def oracle_compare(coupling: float, n_p0: int, z: float, gamma: float) -> dict:
    """Relative errors of the Gaussian model against the exact ladder.

    The model maps the pump Fock number to the symmetric-ordering classical
    input sqrt(n_p0 + 1/2) and to a coherent amplitude sqrt(n_p0).
    """
    exact = trilinear_propagate(coupling, n_p0, z).moments()
    params = TripletParams(
        coupling=coupling,
        pump_input=math.sqrt(n_p0 + 0.5),
        gamma=gamma,
        length=z,
    )
    ev = assemble_UV(transfer_matrices(params, z))
    st = propagate_state(ev, np.array([0.0, 0.0, math.sqrt(n_p0)]))
    obs = derived_measures(st)
    model = {
        "n_s": obs.intensity["s"],
        "n_p": obs.intensity["p"],
        "var_n_s": obs.variance["s"] + obs.intensity["s"],  # add shot noise
        "cov_n_s_n_i": obs.cross["si"],
    }
    report = {}
    for key in ("n_s", "n_p", "var_n_s", "cov_n_s_n_i"):
        e, m = exact[key], model[key]
        rel = abs(m - e) / abs(e) if e != 0 else (0.0 if m == 0 else math.inf)
        report[key] = {"exact": e, "model": m, "rel_error": rel}
    return report
