"""Polar product codes: construction, SC/SCL decoding, two-step decoding,
latency model and Monte-Carlo simulation."""

from .construction import (
    CodeSpec,
    ComponentProfile,
    FrozenSet,
    ReliabilityOrder,
    bhattacharyya_order,
    bhattacharyya_parameters,
    component_frozen_sets,
    design_flat,
    design_hybrid,
    design_product,
    frozen_bit_oracle,
    frozen_from_order,
    hybrid_frozen_set,
    product_frozen_set,
)
from .decoders import ListCandidate, list_soft_output, sc_decode, scl_decode
from .polar_core import polar_encode, product_encode, row_flatten, row_reshape
from .simulator import ChannelConfig, PlainDecoderConfig, StopRule, TrialStats, run_experiment
from .two_step import TwoStepConfig, TwoStepOutcome, find_erroneous, two_step_decode

__version__ = "0.1.0"
