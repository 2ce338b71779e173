"""Machine-checkable versions of the inequalities, embeddings and structure results."""

from .admissibility import admissible_theorem_3_1, admissible_theorem_3_2
from .checks import (
    check_embedding_3_1,
    check_embedding_3_2,
    check_holder_var,
    check_homeomorphism_sequences,
    check_lambda_sandwich,
    check_lemma_2_1,
    check_lemma_2_2,
    check_lemma_2_3,
    check_lemma_4_1,
    check_lemma_4_2,
    check_lemma_4_3,
    check_lemma_4_4,
    check_luxemburg_sandwich,
    check_metric_axioms,
    check_theorem_2_7,
    relative_change,
    scalar_N0,
)
from .families import KINDS, FunctionFamily
from .lp import constraint_margins, fit_constants
from .report import AdmissibilityDecision, InequalityReport, StructuralReport

__all__ = [
    "AdmissibilityDecision",
    "FunctionFamily",
    "InequalityReport",
    "KINDS",
    "StructuralReport",
    "admissible_theorem_3_1",
    "admissible_theorem_3_2",
    "check_embedding_3_1",
    "check_embedding_3_2",
    "check_holder_var",
    "check_homeomorphism_sequences",
    "check_lambda_sandwich",
    "check_lemma_2_1",
    "check_lemma_2_2",
    "check_lemma_2_3",
    "check_lemma_4_1",
    "check_lemma_4_2",
    "check_lemma_4_3",
    "check_lemma_4_4",
    "check_luxemburg_sandwich",
    "check_metric_axioms",
    "check_theorem_2_7",
    "constraint_margins",
    "fit_constants",
    "relative_change",
    "scalar_N0",
]
