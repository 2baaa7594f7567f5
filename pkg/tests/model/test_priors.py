"""先验密度测试"""
import itertools
import math

import numpy as np
import pytest
from scipy.integrate import dblquad

from src.model.priors import (
    alpha_prior_mean, assignment_probabilities, beta_prior_mean, delta_span, log_prior_M,
    log_prior_alpha_beta, log_prior_assignment, log_prior_psi, log_prior_rates, log_prior_theta,
    poisson_phase_prior, polya_log_pmf
)
from src.model.state import Assignment, DepositionRates, PhaseStructure
from src.onsetfield.lattice import Lattice

L, U = 2000.0, 3500.0


def phases(*psi, lower=L, upper=U):
    return PhaseStructure(np.array(psi, dtype=float), lower, upper)


class TestLogPriorPsi:
    """测试阶段边界先验"""

    def test_single_phase(self):
        """测试 M=1"""
        assert log_prior_psi(phases(2500, 3000)) == pytest.approx(-math.log(1000))

    def test_two_phases(self):
        """测试 M=2"""
        assert log_prior_psi(phases(2500, 2800, 3000)) == pytest.approx(-math.log(1000) - math.log(500))

    def test_full_span_invalid(self):
        """测试跨度等于 U-L 时为 -inf"""
        assert log_prior_psi(phases(2000.0, 3500.0)) == -np.inf
        assert log_prior_psi(PhaseStructure(np.array([2000.0, 3500.0]), 1999.0, 3500.0)) == -np.inf

    def test_unordered_invalid(self):
        """测试边界不递增时为 -inf"""
        assert log_prior_psi(phases(2500, 2500, 3000)) == -np.inf

    def test_normalized_constant(self):
        """测试归一化常数 log((M-1)!) - log(U-L)"""
        p = phases(2500, 2600, 2800, 3000)
        assert log_prior_psi(p, normalized=True) - log_prior_psi(p) == pytest.approx(
            math.log(2) - math.log(1500)
        )

    def test_integrates_to_one_single_phase(self):
        """测试 M=1 归一化密度在有序区域上积分为1"""
        lo, hi = 0.0, 10.0
        value, _ = dblquad(
            lambda b, a: math.exp(log_prior_psi(phases(a, b, lower=lo, upper=hi), normalized=True)),
            lo, hi, lambda a: a, lambda a: hi, epsabs=1e-6, epsrel=1e-6,
        )
        assert value == pytest.approx(1.0, rel=1e-2)

    def test_integrates_to_one_two_phases(self):
        """测试 M=2 归一化密度积分为1（中间边界解析积出，因子为跨度）"""
        lo, hi = 0.0, 10.0

        def integrand(b, a):
            density = math.exp(log_prior_psi(phases(a, (a + b) / 2, b, lower=lo, upper=hi), normalized=True))
            return density * (b - a)

        value, _ = dblquad(integrand, lo, hi, lambda a: a, lambda a: hi, epsabs=1e-6, epsrel=1e-6)
        assert value == pytest.approx(1.0, rel=1e-2)


class TestLogPriorTheta:
    """测试样本年龄先验"""

    def test_no_field(self):
        """测试无起始场"""
        value = log_prior_theta(np.array([2700.0]), phases(2500, 3000), Assignment([1]))
        assert value == pytest.approx(-math.log(500))

    def test_field_clips_window(self):
        """测试起始场截断上限"""
        field = np.array([[2800.0]])
        value = log_prior_theta(np.array([2700.0]), phases(2500, 3000), Assignment([1]), field, np.array([0]))
        assert value == pytest.approx(-math.log(300))

    def test_field_violation(self):
        """测试样本早于起始场时为 -inf"""
        field = np.array([[2800.0]])
        value = log_prior_theta(np.array([2900.0]), phases(2500, 3000), Assignment([1]), field, np.array([0]))
        assert value == -np.inf

    def test_outside_phase(self):
        """测试样本不在所属阶段内"""
        value = log_prior_theta(np.array([2700.0]), phases(2500, 2600, 3000), Assignment([1]))
        assert value == -np.inf

    def test_permutation_equivariant(self):
        """测试同一探坑同一阶段内交换样本不改变密度"""
        field = np.array([[2900.0, 2950.0]])
        p = phases(2500, 2800, 3000)
        theta = np.array([2600.0, 2850.0, 2700.0])
        m = Assignment([1, 2, 1])
        cells = np.array([0, 1, 0])
        swapped = log_prior_theta(theta[[2, 1, 0]], p, Assignment(m.m[[2, 1, 0]]), field, cells[[2, 1, 0]])
        assert log_prior_theta(theta, p, m, field, cells) == pytest.approx(swapped)


class TestDeltaSpan:
    """测试探坑阶段跨度"""

    def test_unclipped(self):
        assert delta_span(1, 3100.0, phases(2500, 3000)) == 500.0

    def test_phase_predates_onset(self):
        assert delta_span(2, 2700.0, phases(2500, 2800, 3000)) == 0.0

    def test_partial_overlap(self):
        assert delta_span(1, 2700.0, phases(2500, 3000)) == 200.0

    def test_no_field(self):
        assert delta_span(2, None, phases(2500, 2800, 3000)) == 200.0


class TestLogPriorAssignment:
    """测试阶段分配先验"""

    def test_single_phase(self):
        """测试 M=1 概率为1"""
        value = log_prior_assignment(Assignment([1, 1, 1]), DepositionRates([0.7]), phases(2500, 3000))
        assert value == 0.0

    def test_symmetric(self):
        """测试等跨度等速率"""
        value = log_prior_assignment(Assignment([1, 2]), DepositionRates([1.0, 1.0]), phases(2500, 2750, 3000))
        assert value == pytest.approx(2 * math.log(0.5))

    def test_weighted(self):
        """测试速率与跨度加权"""
        value = log_prior_assignment(Assignment([1]), DepositionRates([2.0, 1.0]), phases(2500, 2600, 2900))
        assert value == pytest.approx(math.log(200 / 500))

    def test_all_zero_spans_invalid(self):
        """测试所有跨度为零时为 -inf"""
        field = np.array([[2400.0]])
        value = log_prior_assignment(
            Assignment([1]), DepositionRates([1.0, 1.0]), phases(2500, 2600, 2900), field, np.array([0])
        )
        assert value == -np.inf

    def test_zero_probability_phase(self):
        """测试分到零跨度阶段时为 -inf"""
        field = np.array([[2550.0]])
        value = log_prior_assignment(
            Assignment([2]), DepositionRates([1.0, 1.0]), phases(2500, 2600, 2900), field, np.array([0])
        )
        assert value == -np.inf

    def test_rate_count_mismatch(self):
        """测试速率个数与阶段数不一致"""
        assert log_prior_assignment(Assignment([1]), DepositionRates([1.0]), phases(2500, 2600, 2900)) == -np.inf

    @pytest.mark.parametrize("M,K", [(1, 3), (2, 3), (2, 4), (3, 3), (3, 4)])
    def test_sums_to_one(self, M, K):
        """测试所有 M^K 种分配的概率之和为1"""
        rng = np.random.default_rng(M * 10 + K)
        psi = np.sort(rng.uniform(2100, 3400, size=M + 1))
        p = PhaseStructure(psi, L, U)
        rates = DepositionRates(rng.exponential(1.0, size=M))
        field = rng.uniform(psi[0] + 1, psi[-1], size=(1, 2))
        cells = rng.integers(0, 2, size=K)
        total = sum(
            math.exp(log_prior_assignment(Assignment(np.array(m)), rates, p, field, cells))
            for m in itertools.product(range(1, M + 1), repeat=K)
        )
        assert total == pytest.approx(1.0)

    def test_probabilities_rows(self):
        """测试概率矩阵每行和为1"""
        probs = assignment_probabilities(DepositionRates([1.0, 3.0]), phases(2500, 2600, 2900), None, 3)
        assert probs.shape == (3, 2)
        assert np.allclose(probs.sum(axis=1), 1.0)
        assert probs[0, 0] == pytest.approx(100 / 1000)


class TestLogPriorM:
    """测试阶段数先验"""

    def test_one_phase(self):
        assert log_prior_M(1) == pytest.approx(math.log(0.5))

    def test_two_phases(self):
        assert log_prior_M(2) == pytest.approx(math.log(0.5 * math.log(2)))

    def test_zero_invalid(self):
        assert log_prior_M(0) == -np.inf

    def test_probabilities_sum(self):
        assert sum(poisson_phase_prior(m) for m in range(1, 40)) == pytest.approx(1.0)
        assert poisson_phase_prior(0) == 0.0


class TestLogPriorRates:
    """测试沉积速率先验"""

    def test_single(self):
        assert log_prior_rates([1.0]) == pytest.approx(-1.0)

    def test_two(self):
        assert log_prior_rates(DepositionRates([0.5, 2.0])) == pytest.approx(-2.5)

    def test_zero_invalid(self):
        assert log_prior_rates([1.0, 0.0]) == -np.inf


class TestLogPriorAlphaBeta:
    """测试起始场速率先验"""

    @pytest.fixture
    def lattice(self):
        return Lattice(13, 32)

    def test_prior_means(self, lattice):
        """测试先验均值"""
        assert alpha_prior_mean(10, lattice, L, U) == pytest.approx(10 / (416 * 1500))
        assert beta_prior_mean(1, lattice, L, U) == pytest.approx(32 / 3000)

    def test_at_mean(self, lattice):
        """测试 alpha 取均值时的密度"""
        ea = alpha_prior_mean(10, lattice, L, U)
        eb = beta_prior_mean(1, lattice, L, U)
        value = log_prior_alpha_beta(ea, eb, eb, 10, 1, lattice, L, U)
        expected = (math.log(1 / ea) - 1) + 2 * (math.log(1 / eb) - 1)
        assert value == pytest.approx(expected)

    def test_near_zero(self, lattice):
        """测试 alpha 趋于0时趋于众数密度"""
        ea = alpha_prior_mean(10, lattice, L, U)
        eb = beta_prior_mean(1, lattice, L, U)
        base = log_prior_alpha_beta(1e-12, eb, eb, 10, 1, lattice, L, U)
        assert base - 2 * (math.log(1 / eb) - 1) == pytest.approx(math.log(1 / ea), abs=1e-4)

    def test_factorizes(self, lattice):
        """测试 beta1、beta2 独立"""
        eb = beta_prior_mean(1, lattice, L, U)
        a = log_prior_alpha_beta(1e-5, eb, 2 * eb, 10, 1, lattice, L, U)
        b = log_prior_alpha_beta(1e-5, 2 * eb, eb, 10, 1, lattice, L, U)
        assert a == pytest.approx(b)

    def test_non_positive(self, lattice):
        assert log_prior_alpha_beta(0.0, 1.0, 1.0, 10, 1, lattice, L, U) == -np.inf


class TestPolya:
    """测试 Polya 分布"""

    def test_single_phase(self):
        for K in (0, 1, 7):
            assert polya_log_pmf([K]) == pytest.approx(0.0)

    def test_two_phases_one_date(self):
        assert math.exp(polya_log_pmf([1, 0])) == pytest.approx(0.5)
        assert math.exp(polya_log_pmf([0, 1])) == pytest.approx(0.5)

    def test_two_phases_two_dates(self):
        probs = [math.exp(polya_log_pmf(c)) for c in ([2, 0], [1, 1], [0, 2])]
        assert probs == pytest.approx([3 / 8, 2 / 8, 3 / 8])

    @pytest.mark.parametrize("M,K", [(3, 4), (4, 5)])
    def test_normalized(self, M, K):
        """测试所有计数向量概率和为1"""
        total = sum(
            math.exp(polya_log_pmf(c))
            for c in itertools.product(range(K + 1), repeat=M) if sum(c) == K
        )
        assert total == pytest.approx(1.0)
