"""
ddsense: dynamical-decoupling sequence design for selective nuclear-spin sensing.

Build pulse sequences, evaluate their filter functions, simulate the
coherence of an NV sensor coupled to a 13C bath and quantify how strongly
individual nuclei show up under a given sequence.
"""
from .analysis import (Dip, MagnitudeMap, OptimizationResult, detect_dips, magnitude_map,
                       magnitude_vs_r, map_difference, optimize_params, resonance_dip,
                       selectivity_score, signal_magnitude)
from .bath import (DEFAULT_CONSTANTS, NuclearSpin, PhysicalConstants, SpectrumPeak,
                   diamond_sites, effective_frequencies, example_bath, hyperfine_from_geometry,
                   larmor_frequency, mean_frequency, noise_spectrum, read_bath, sample_bath,
                   write_bath)
from .coherence import (CoherenceCurve, DecayEnvelope, Rotation, coherence_curve,
                        conditioned_rotation, semiclassical_coherence, spin_coherence,
                        total_coherence)
from .errors import InvalidParameterError, NoPeakError
from .filters import (PeakReport, dominant_peak_position, filter_analytic, filter_designed3,
                      filter_designed5, filter_numeric, locate_peak_numeric, peak_height3,
                      peak_height5)
from .sequences import (PulseSequence, build_cpmg, build_designed3, build_designed5,
                        build_sequence, custom_sequence, switching_function)

__version__ = "0.1.0"
