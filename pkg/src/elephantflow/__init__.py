"""Cross-domain elephant flow detection pipeline."""

from .errors import ElephantFlowError
from .features import CANONICAL_SCHEMA, DEFAULT_RULES, RuleConstants
from .flow import DomainDataset, FlowRecord, LabeledMatrix, validate_flow
from .thresholding import DEFAULT_PERCENTILES, ThresholdSpec, apply_threshold

__version__ = "0.1.0"

__all__ = [
    "CANONICAL_SCHEMA",
    "DEFAULT_PERCENTILES",
    "DEFAULT_RULES",
    "DomainDataset",
    "ElephantFlowError",
    "FlowRecord",
    "LabeledMatrix",
    "RuleConstants",
    "ThresholdSpec",
    "apply_threshold",
    "validate_flow",
    "__version__",
]
