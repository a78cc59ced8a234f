from .patterns import (
    Constraint,
    Pattern,
    PatternTransformation,
    PatternVariable,
    TransformError,
    parse_transformations,
)
from .matching import Match, apply_transformation, find_matches
from .builtins import BUILTIN_NAMES, apply_builtin
from .pipeline import (
    Pipeline,
    PipelineResult,
    TransformationRegistry,
    default_registry,
    normalization_pipeline,
    parse_pipeline,
    run_pipeline,
)

__all__ = [
    "BUILTIN_NAMES",
    "Constraint",
    "Match",
    "Pattern",
    "PatternTransformation",
    "PatternVariable",
    "Pipeline",
    "PipelineResult",
    "TransformationRegistry",
    "TransformError",
    "apply_builtin",
    "apply_transformation",
    "default_registry",
    "find_matches",
    "normalization_pipeline",
    "parse_pipeline",
    "parse_transformations",
    "run_pipeline",
]
