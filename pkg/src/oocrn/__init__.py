"""Compile increasing semilinear functions of two naturals into
output-oblivious chemical reaction networks, and check the results."""

from .crn import Configuration, Crn, Reaction, check_output_oblivious, validate_crn
from .crnfile import load_crn, parse_crn, serialize_crn
from .funcspec import (
    AffinePiece, GridAffineSpec, Grid, MinOfFissuresSpec, PartialFissureSpec, load_spec, validate_spec,
)
from .synth import SynthReport
from .verify import check_random, check_stable_computation, simulate, sweep

__version__ = "0.1.0"

__all__ = [
    "AffinePiece", "Configuration", "Crn", "Grid", "GridAffineSpec", "MinOfFissuresSpec",
    "PartialFissureSpec", "Reaction", "SynthReport", "check_output_oblivious", "check_random",
    "check_stable_computation", "load_crn", "load_spec", "parse_crn", "serialize_crn", "simulate",
    "sweep", "validate_crn", "validate_spec",
]
