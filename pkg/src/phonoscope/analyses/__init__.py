"""Analysis suite over profile tables (and, for fixed-token, raw corpora)."""

from .aetiology import aetiology_discrimination
from .backbones import backbone_agreement
from .baseline import baseline_comparison
from .classifier import centroid_classifier_lodo
from .crosslingual import crosslingual_consistency
from .fixed_token import fixed_token_dprime
from .robustness import lodo_stability, residualized_rankings, token_matched_comparison
from .severity import severity_gradient, stipancic_map

# Analyses operating on a ProfileTable, keyed by their report id.
TABLE_ANALYSES = {
    "severity_gradient": severity_gradient,
    "aetiology_discrimination": aetiology_discrimination,
    "crosslingual_consistency": crosslingual_consistency,
    "token_matched_comparison": token_matched_comparison,
    "lodo_stability": lodo_stability,
    "centroid_classifier_lodo": centroid_classifier_lodo,
    "residualized_rankings": residualized_rankings,
    "baseline_comparison": baseline_comparison,
}

# Analyses with non-table inputs.
CORPUS_ANALYSES = {"fixed_token_dprime": fixed_token_dprime}
MULTI_TABLE_ANALYSES = {"backbone_agreement": backbone_agreement}

ALL_ANALYSIS_IDS = sorted(TABLE_ANALYSES | CORPUS_ANALYSES | MULTI_TABLE_ANALYSES)

__all__ = [
    "ALL_ANALYSIS_IDS",
    "CORPUS_ANALYSES",
    "MULTI_TABLE_ANALYSES",
    "TABLE_ANALYSES",
    "aetiology_discrimination",
    "backbone_agreement",
    "baseline_comparison",
    "centroid_classifier_lodo",
    "crosslingual_consistency",
    "fixed_token_dprime",
    "lodo_stability",
    "residualized_rankings",
    "severity_gradient",
    "stipancic_map",
    "token_matched_comparison",
]
