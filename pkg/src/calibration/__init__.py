"""校准曲线与观测似然"""
from src.calibration.curve import (
    CalibrationCurve, load_curve, load_curve_set, interpolate_curve, mu_sigma
)
from src.calibration.likelihood import (
    RadiocarbonDate, LikelihoodTable, log_likelihood, log_likelihood_total
)

__all__ = [
    'CalibrationCurve', 'load_curve', 'load_curve_set', 'interpolate_curve', 'mu_sigma',
    'RadiocarbonDate', 'LikelihoodTable', 'log_likelihood', 'log_likelihood_total',
]
