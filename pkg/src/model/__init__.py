"""状态与先验密度"""
from src.model.state import PhaseStructure, Assignment, DepositionRates, ChronologyState
from src.model.priors import (
    log_prior_psi, log_prior_theta, delta_span, log_prior_assignment, log_prior_M,
    log_prior_rates, log_prior_alpha_beta, polya_log_pmf
)
from src.model.prior_sampler import sample_prior_psi, sample_prior_state

__all__ = [
    'PhaseStructure', 'Assignment', 'DepositionRates', 'ChronologyState',
    'log_prior_psi', 'log_prior_theta', 'delta_span', 'log_prior_assignment', 'log_prior_M',
    'log_prior_rates', 'log_prior_alpha_beta', 'polya_log_pmf',
    'sample_prior_psi', 'sample_prior_state',
]
