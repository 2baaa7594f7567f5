"""MCMC 采样"""
from src.mcmc.config import RunConfig
from src.mcmc.chain_output import ChainOutput
from src.mcmc.posterior import PosteriorContext, log_posterior
from src.mcmc.sampler import ChronologySampler, run_chain, run_chains, propose_add, propose_delete

__all__ = [
    'RunConfig', 'ChainOutput', 'PosteriorContext', 'log_posterior',
    'ChronologySampler', 'run_chain', 'run_chains', 'propose_add', 'propose_delete',
]
