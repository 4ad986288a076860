"""Physical-layer secret-key generation under a wait-then-attack MitM.

Simulates RSS-based key extraction between two parties while an
injecting adversary watches for correlated observations, implements
the channel-randomization defense (per-round antenna mode switching),
and provides the matching closed-form security analysis.
"""

from .adversary import AttackTrace, OpportunityKind, detect_opportunity
from .analysis import (
    AnalysisResult,
    closed_form_p0_p1,
    expected_rates,
    guess_count_pmf,
    key_guess_probability,
    marcum_q1,
)
from .antenna import (
    AntennaProfile,
    calibrate_tx_power,
    gain,
    load_antenna_profile,
    omni_profile,
    save_antenna_profile,
    synthesize_rotated_beam,
)
from .config import ExperimentConfig, parse_config
from .errors import PhykeyError
from .fading import FadingParams, FadingState, channel_gain, rss_from_gain, sample_fading_block
from .fuzzy import Commitment, ReconcileFailure, commit, derive_key, open_commitment, verify_keys
from .geometry import LinkPathSet, Topology, path_angles
from .metrics import approximate_entropy, attack_metrics, bit_mismatch_rate, randomness_tests, secret_bit_rate
from .pipeline import analyze_config, replay_trace, run_experiment, run_protocol, run_trials
from .quantize import Bitstream, QuantizerConfig, confirm_excursions, find_excursions, quantize, thresholds
from .reed_solomon import DecodeFailure, ReedSolomon, RsParams, rs_decode, rs_encode
from .rician import RicianModeParams, rician_params
from .session import MeasurementTrace, build_links, simulate_session

__version__ = "0.1.0"
