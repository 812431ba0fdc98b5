"""
Serviços do HelpCap
"""

from .channel import validate_channel, load_channel, channel_summary
from .information import (
    entropy, build_joint, mi_pair, mutual_information, blahut_arimoto,
    oblivious_baseline, oblivious_policy
)
from .envelope import concave_envelope
from .optimizer import inner_g, capacity, capacity_rate_split, sweep, evaluate_policy
from .brute_force import brute_force_capacity
from .oracles import (
    detect_useless, useless_capacity, detect_mod_additive, mod_additive_capacity,
    large_help_lower_bound, oblivious_oracle, detect_special_cases
)
from .typicality import typical
from .simulator import generate_codebook, helper_encode, transmit, decode, run_trials

__all__ = [
    'validate_channel',
    'load_channel',
    'channel_summary',
    'entropy',
    'build_joint',
    'mi_pair',
    'mutual_information',
    'blahut_arimoto',
    'oblivious_baseline',
    'oblivious_policy',
    'concave_envelope',
    'inner_g',
    'capacity',
    'capacity_rate_split',
    'sweep',
    'evaluate_policy',
    'brute_force_capacity',
    'detect_useless',
    'useless_capacity',
    'detect_mod_additive',
    'mod_additive_capacity',
    'large_help_lower_bound',
    'oblivious_oracle',
    'detect_special_cases',
    'typical',
    'generate_codebook',
    'helper_encode',
    'transmit',
    'decode',
    'run_trials',
]
