"""Validation protocols: time splits, baselines and derived studies."""

from .harness import (
    AccessLog,
    EvalReport,
    NegativeReport,
    Outcome,
    evaluate_forward,
    evaluate_rules,
    expected_key,
    negative_validation,
    novel_type_split,
    path_model_predictions,
    random_baseline,
    scaling_study,
    time_split,
    yearly_splits,
)
from .pipeline import LeakageError, ValidationConfig, ValidationResult, run_validation
from .templates import ReactionTemplate, apply_template, apply_templates, extract_template, extract_templates

__all__ = [
    "AccessLog", "EvalReport", "LeakageError", "NegativeReport", "Outcome", "ReactionTemplate",
    "ValidationConfig", "ValidationResult", "apply_template", "apply_templates", "evaluate_forward",
    "evaluate_rules", "expected_key", "extract_template", "extract_templates", "negative_validation",
    "novel_type_split", "path_model_predictions", "random_baseline", "run_validation",
    "scaling_study", "time_split", "yearly_splits",
]
