"""阶段结构证据测试"""
import math

import numpy as np
import pytest

from src.core.constants import Variant
from src.core.exceptions import ChronologyError
from src.mcmc.chain_output import ChainOutput
from src.mcmc.config import RunConfig
from src.mcmc.posterior import PosteriorContext
from src.calibration.likelihood import RadiocarbonDate
from src.summaries.model_comparison import (
    ModelHypothesis, bayes_factor, estimate_prior_probability, has_empty_phase, model_probabilities,
    phase_count_is, phase_counts_are, phase_scatter, posterior_probability
)


def phase_chain(M, assignment):
    """由阶段数与分配序列构造链"""
    M = np.asarray(M, dtype=np.int64)
    assignment = np.asarray(assignment, dtype=np.int64)
    n, K = assignment.shape
    return ChainOutput(
        variant='RP',
        iteration=np.arange(1, n + 1),
        log_post=np.zeros(n),
        M=M,
        psi=[np.linspace(100.0, 900.0, m + 1) for m in M],
        rates=[np.ones(m) for m in M],
        theta=np.full((n, K), 500.0),
        assignment=assignment,
        alpha=np.full(n, np.nan),
        beta1=np.full(n, np.nan),
        beta2=np.full(n, np.nan),
        arrivals=np.full(n, -1, dtype=np.int64),
    )


@pytest.fixture
def mixed_chain():
    return phase_chain(
        [1, 1, 2, 3, 3, 3],
        [[1, 1, 1], [1, 1, 1], [1, 2, 2], [1, 3, 3], [1, 1, 3], [1, 3, 3]],
    )


class TestPredicates:
    """测试结构谓词"""

    def test_phase_count(self):
        assert phase_count_is(2)(2, np.array([1, 2]))
        assert not phase_count_is(2)(3, np.array([1, 2]))

    def test_phase_counts(self):
        predicate = phase_counts_are([1, 0, 2])
        assert predicate(3, np.array([1, 3, 3]))
        assert not predicate(3, np.array([1, 2, 3]))
        assert not predicate(2, np.array([1, 2, 2]))

    def test_empty_phase(self):
        assert has_empty_phase(3, 2)(3, np.array([1, 3, 3]))
        assert not has_empty_phase(3, 2)(3, np.array([1, 2, 3]))


class TestModelProbabilities:
    """测试阶段数后验概率与证据"""

    def test_only_single_phase(self):
        """测试只访问 M=1 时 e_1 = 2"""
        table = model_probabilities(phase_chain([1, 1, 1, 1], np.ones((4, 2))), max_M=3)
        assert table.loc[0, 'evidence'] == pytest.approx(2.0)
        assert list(table['evidence'][1:]) == [0.0, 0.0]
        assert list(table['M']) == [1, 2, 3]

    def test_posterior_sums_to_one(self, mixed_chain):
        table = model_probabilities(mixed_chain)
        assert table['posterior'].sum() == pytest.approx(1.0)
        assert table.loc[2, 'count'] == 3

    def test_prior_pmf(self, mixed_chain):
        table = model_probabilities(mixed_chain)
        assert table.loc[0, 'prior'] == pytest.approx(0.5)
        assert table.loc[1, 'prior'] == pytest.approx(0.5 * math.log(2))

    def test_empty_chain(self):
        with pytest.raises(ChronologyError):
            model_probabilities(phase_chain(np.array([], dtype=np.int64), np.zeros((0, 2))))


class TestBayesFactor:
    """测试 Bayes 因子"""

    def test_identity(self, mixed_chain):
        a = ModelHypothesis('M=1', phase_count_is(1), 0.5)
        assert bayes_factor(mixed_chain, a, a) == pytest.approx(1.0)

    def test_reciprocal(self, mixed_chain):
        a = ModelHypothesis('M=1', phase_count_is(1), 0.5)
        b = ModelHypothesis('empty middle', has_empty_phase(3, 2), 0.01)
        assert bayes_factor(mixed_chain, a, b) * bayes_factor(mixed_chain, b, a) == pytest.approx(1.0)

    def test_value(self, mixed_chain):
        a = ModelHypothesis('empty middle', has_empty_phase(3, 2), 0.01)
        b = ModelHypothesis('M=1', phase_count_is(1), 0.5)
        assert bayes_factor(mixed_chain, a, b) == pytest.approx((3 / 2) * (0.5 / 0.01))

    def test_unobserved(self, mixed_chain):
        a = ModelHypothesis('M=1', phase_count_is(1), 0.5)
        never = ModelHypothesis('M=5', phase_count_is(5), 0.01)
        assert bayes_factor(mixed_chain, a, never) == float('inf')
        assert bayes_factor(mixed_chain, never, a) == 0.0
        assert math.isnan(bayes_factor(mixed_chain, never, never))

    def test_bad_prior(self, mixed_chain):
        a = ModelHypothesis('M=1', phase_count_is(1), 0.0)
        with pytest.raises(ChronologyError):
            bayes_factor(mixed_chain, a, a)

    def test_posterior_probability(self, mixed_chain):
        p, se = posterior_probability(mixed_chain, phase_count_is(3))
        assert p == pytest.approx(0.5)
        assert se == pytest.approx(math.sqrt(0.25 / 6))


class TestPhaseScatter:
    """测试分配散点"""

    pits = {'P1': (0.0, 1.0), 'P2': (2.0, 3.0)}

    def test_single_phase(self):
        chain = phase_chain([1, 1], np.ones((2, 3)))
        table = phase_scatter(chain, ['a', 'b', 'c'], ['P1', 'P1', 'P2'], self.pits, 1)
        assert set(table['phase']) == {1}
        assert np.allclose(table['probability'], 1.0)
        assert table.loc[table['date'] == 'c', 'x'].iloc[0] == 2.0

    def test_modal_assignment(self, mixed_chain):
        table = phase_scatter(mixed_chain, ['a', 'b', 'c'], ['P1', 'P1', 'P2'], self.pits, 3).set_index('date')
        assert table.loc['a', 'phase'] == 1
        assert table.loc['c', 'phase'] == 3
        assert table.loc['c', 'probability'] == pytest.approx(1.0)
        assert table.loc['b', 'probability'] == pytest.approx(2 / 3)
        assert (table['probability'] <= 1.0).all()

    def test_absent_condition(self, mixed_chain):
        table = phase_scatter(mixed_chain, ['a', 'b', 'c'], ['P1', 'P1', 'P2'], self.pits, 4)
        assert table.empty


class TestPriorProbability:
    """测试先验概率估计"""

    def test_single_phase_half(self):
        """测试随机阶段数下 Pr(M=1) 约为 1/2"""
        config = RunConfig(variant=Variant.RP, iterations=10, burn_in=0, L=0.0, U=1000.0,
                           flat_likelihood=True, lattice_cells=None)
        dates = [RadiocarbonDate('a', 'P1', 500, 30), RadiocarbonDate('b', 'P1', 600, 30)]
        context = PosteriorContext.build(config, dates, None)
        p, se = estimate_prior_probability(phase_count_is(1), context, 2000, np.random.default_rng(0))
        assert abs(p - 0.5) < 4 * se + 1e-9

    def test_bad_draws(self):
        with pytest.raises(ChronologyError):
            estimate_prior_probability(phase_count_is(1), None, 0, np.random.default_rng(0))
