"""合成数据上的端到端恢复测试（耗时）"""

import numpy as np
import pytest

from src.core.constants import Variant
from src.data.synthetic import (
    generate_hiatus_dataset, generate_single_phase_dataset, generate_spreading_dataset
)
from src.mcmc.config import RunConfig
from src.mcmc.posterior import PosteriorContext
from src.mcmc.sampler import run_chain
from src.model.priors import poisson_phase_prior
from src.summaries.field_summary import arrival_odds, partition, threshold_scan
from src.summaries.model_comparison import (
    ModelHypothesis, bayes_factor, estimate_prior_probability, has_empty_phase, model_probabilities,
    phase_count_is
)


def fit(synthetic, variant, iterations, burn_in, thinning, seed, flat=False):
    config = RunConfig(
        variant=variant, iterations=iterations, burn_in=burn_in, thinning=thinning, seed=seed,
        L=synthetic.L, U=synthetic.U, lattice_cells=synthetic.dataset.lattice.shape,
        cell_side=synthetic.dataset.lattice.cell_side, flat_likelihood=flat,
    )
    dataset = synthetic.dataset
    context = PosteriorContext.build(
        config, dataset.dates, None if flat else synthetic.curves,
        lattice=dataset.lattice, date_cells=dataset.date_cells,
    )
    return context, run_chain(config, context)


@pytest.mark.slow
class TestSyntheticRecovery:
    """模型在已知真值的合成数据上的表现"""

    def test_hiatus_recovery(self):
        """测试带间断数据: 后验众数 M >= 2，空中间阶段对单阶段的 Bayes 因子 > 100"""
        synthetic = generate_hiatus_dataset(np.random.default_rng(2007))
        context, chain = fit(synthetic, Variant.RP, 400_000, 40_000, 40, seed=11)

        probabilities = model_probabilities(chain)
        mode_M = int(probabilities.loc[probabilities['posterior'].idxmax(), 'M'])
        assert mode_M >= 2

        empty_middle = has_empty_phase(3, 2)
        prior_empty, _ = estimate_prior_probability(empty_middle, context, 20_000, np.random.default_rng(5))
        assert prior_empty > 0
        factor = bayes_factor(
            chain,
            ModelHypothesis('三阶段且中间为空', empty_middle, prior_empty),
            ModelHypothesis('单阶段', phase_count_is(1), poisson_phase_prior(1)),
        )
        assert factor > 100

    def test_no_false_settlement(self):
        """测试无空间结构的单阶段数据不会被判为定居过程"""
        synthetic = generate_single_phase_dataset(np.random.default_rng(49))
        _, chain = fit(synthetic, Variant.SPOF, 200_000, 20_000, 100, seed=3)

        scan = threshold_scan(chain, p_star=0.8)
        assert not scan.any_split

    def test_settlement_detection(self):
        """测试单中心扩散数据: 分区同时出现 green 与 blue，起源格子为 green"""
        synthetic = generate_spreading_dataset(np.random.default_rng(31))
        _, posterior = fit(synthetic, Variant.RPOF, 400_000, 40_000, 100, seed=5)
        _, prior = fit(synthetic, Variant.RPOF, 400_000, 40_000, 100, seed=6, flat=True)

        split = partition(posterior, T_star=150, p_star=0.8)
        assert split.green.any()
        assert split.blue.any()
        assert split.green.ravel()[synthetic.truth['seed_cell']]

        odds = arrival_odds(posterior, prior)
        defined = odds[~odds['undefined'] & (odds['posterior'] > 0)]
        assert defined['odds'].iloc[0] == pytest.approx(defined['odds'].max())
        assert defined['odds'].iloc[0] > defined['odds'].iloc[-1]
