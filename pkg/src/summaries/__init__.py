"""后验汇总"""
from src.summaries.field_summary import (
    FieldSummary, Partition, ThresholdScan, field_summary, partition, threshold_scan,
    arrival_odds, pit_onset_histograms
)
from src.summaries.model_comparison import (
    ModelHypothesis, model_probabilities, bayes_factor, phase_scatter, estimate_prior_probability
)

__all__ = [
    'FieldSummary', 'Partition', 'ThresholdScan', 'field_summary', 'partition', 'threshold_scan',
    'arrival_odds', 'pit_onset_histograms',
    'ModelHypothesis', 'model_probabilities', 'bayes_factor', 'phase_scatter',
    'estimate_prior_probability',
]
