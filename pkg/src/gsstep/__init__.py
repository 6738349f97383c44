"""Phase-step estimation between two shifted fringe patterns via Gram-Schmidt."""

__version__ = "0.1.0"

from .field import inner_product, median, norm, percentile, scale_add
from .gs import (
    Aggregator,
    DegeneratePairError,
    Estimator,
    GSDecomposition,
    MaskStarvationError,
    StepEstimate,
    demodulate,
    estimate_step,
    estimate_step_sin,
    estimate_step_tan,
    gs_decompose,
    wrapped_phase,
)
from .synth import Case, FringePair, SynthSpec, synthesize

__all__ = [
    "Aggregator", "Case", "DegeneratePairError", "Estimator", "FringePair", "GSDecomposition",
    "MaskStarvationError", "StepEstimate", "SynthSpec", "demodulate", "estimate_step",
    "estimate_step_sin", "estimate_step_tan", "gs_decompose", "inner_product", "median",
    "norm", "percentile", "scale_add", "synthesize", "wrapped_phase",
]
