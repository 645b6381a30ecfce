"""Twin-beam simulation with pump depletion and coherent signal components."""

__version__ = "0.1.0"

from .schmidt import (FrequencyGrid, PumpConfig, SchmidtBasis,
                      build_basis, build_pump_modes, build_schmidt_spectrum,
                      build_spectral_modes, pump_power_division,
                      transverse_weights)
from .dynamics import (EvolutionMatrices, TripletParams, assemble_UV,
                       classical_amplitudes, half_period_z0, phi,
                       transfer_matrices)
from .statistics import (GaussianTripletState, derived_measures, fluctuations,
                         intensity, propagate_state)
from .aggregate import (TwinBeamState, aggregate_summary, build_twinbeam,
                        mode_counts, pump_transferred_spectrum,
                        spectral_correlations)
from .interference import (hom_from_state, hom_profiles, mode_overlap_g,
                           photon_flux, sfg_from_state, sfg_profile,
                           temporal_modes)
from .fock import FockState, oracle_compare, trilinear_propagate
from .config import RunConfig, load_config
