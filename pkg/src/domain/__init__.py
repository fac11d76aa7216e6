"""Domain layer: pure math, no I/O."""

from src.domain.models import ConvergentState, CylinderSpec, DerivedVars
from src.domain.events import DigitRange, EventFamily, EventKind, make_family
from src.domain.sequence_parser import SequenceSpec, parse_sequence
from src.domain.cf_core import convergents, digits_of_rational, digits_of_real, push_digit
from src.domain.gauss_measure import prob_digit_eq, prob_digit_geq, prob_event
from src.domain.digit_sampler import SamplerMode, SeedSpec, sample_block, sample_trajectory
from src.domain.zero_one import VerdictKind, limsup_study, series_verdict
from src.domain.mixing_lab import eta_exact, eta_numeric
from src.domain.clt_lab import check_clt_conditions, clt_experiment

__all__ = [
    "ConvergentState",
    "CylinderSpec",
    "DerivedVars",
    "DigitRange",
    "EventFamily",
    "EventKind",
    "make_family",
    "SequenceSpec",
    "parse_sequence",
    "convergents",
    "digits_of_rational",
    "digits_of_real",
    "push_digit",
    "prob_digit_eq",
    "prob_digit_geq",
    "prob_event",
    "SamplerMode",
    "SeedSpec",
    "sample_block",
    "sample_trajectory",
    "VerdictKind",
    "limsup_study",
    "series_verdict",
    "eta_exact",
    "eta_numeric",
    "check_clt_conditions",
    "clt_experiment",
]
