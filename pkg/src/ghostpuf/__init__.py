"""Arbiter-PUF variants, a ghost-bit challenge interface, and MLP modeling attacks."""
from .challenge import InvalidInput, inverse_transform, random_challenge, transform_challenge
from .crp import CrpSet, SplitSpec, generate_crps, read_crps, split, write_crps
from .interface import GhostMask, InterfacedPuf, apply_mask, eval_interfaced, interface, sample_mask
from .puf import (GATE_DELAY, STANDARD_NORMAL, ArbiterPuf, FfPuf, WeightModel, XorPuf,
                  default_loops, delay_difference, eval_arbiter, eval_ff, eval_xor,
                  sample_arbiter, sample_ff, sample_xor)

__version__ = "0.1.0"
