"""后验密度测试"""
import math

import numpy as np
import pytest

from src.calibration.curve import CalibrationCurve
from src.calibration.likelihood import RadiocarbonDate
from src.core.constants import Material, Variant
from src.core.exceptions import DataValidationError
from src.mcmc.config import RunConfig
from src.mcmc.posterior import PosteriorContext, log_posterior, log_prior
from src.model.priors import log_prior_M, log_prior_psi, log_prior_rates, log_prior_theta
from src.model.state import Assignment, ChronologyState, DepositionRates, PhaseStructure
from src.onsetfield.lattice import Lattice

L, U = 0.0, 1000.0


def identity_curves(lo=-100, hi=1100):
    ages = np.arange(lo, hi + 1, dtype=np.int64)
    return {Material.TERRESTRIAL: CalibrationCurve(ages, ages.astype(float), np.zeros(len(ages)), Material.TERRESTRIAL)}


def make_context(variant, dates, flat=False, lattice=None, date_cells=None, shift=0.0):
    config = RunConfig(variant=variant, iterations=10, burn_in=0, L=L + shift, U=U + shift,
                       flat_likelihood=flat, lattice_cells=None)
    curves = None if flat else identity_curves(int(L + shift) - 100, int(U + shift) + 100)
    return PosteriorContext.build(config, dates, curves, lattice, date_cells)


def single_phase_state(variant=Variant.SP, theta=(200.0,), psi=(100.0, 300.0), shift=0.0, **extra):
    return ChronologyState(
        theta=np.array(theta) + shift,
        phases=PhaseStructure(np.array(psi) + shift, L + shift, U + shift),
        assignment=Assignment(np.ones(len(theta), dtype=np.int64)),
        rates=DepositionRates(np.array([1.0])),
        variant=variant,
        **extra,
    )


@pytest.fixture
def dates():
    return [RadiocarbonDate('D1', 'P1', 210, 30)]


class TestPosteriorContext:
    """测试后验上下文构造"""

    def test_field_variant_requires_lattice(self, dates):
        with pytest.raises(DataValidationError):
            make_context(Variant.SPOF, dates, flat=True)

    def test_known_phases(self):
        """测试单阶段族使用已知阶段列"""
        dates = [RadiocarbonDate('a', 'P1', 200, 30, phase=1), RadiocarbonDate('b', 'P1', 600, 30, phase=2)]
        context = make_context(Variant.SP, dates, flat=True)
        assert context.fixed_M == 2
        assert list(context.fixed_assignment) == [1, 2]

    def test_partial_phases_rejected(self):
        dates = [RadiocarbonDate('a', 'P1', 200, 30, phase=1), RadiocarbonDate('b', 'P1', 600, 30)]
        with pytest.raises(DataValidationError):
            make_context(Variant.SP, dates, flat=True)

    def test_random_phase_ignores_known(self):
        dates = [RadiocarbonDate('a', 'P1', 200, 30, phase=2)]
        context = make_context(Variant.RP, dates, flat=True)
        assert context.fixed_assignment is None
        assert context.fixed_M is None


class TestLogPosterior:
    """测试对数后验"""

    def test_sp_terms(self, dates):
        """测试 SP = 似然 + psi 先验 + theta 先验"""
        context = make_context(Variant.SP, dates)
        state = single_phase_state()
        expected = (
            context.table.total(state.theta)
            + log_prior_psi(state.phases, normalized=True)
            + log_prior_theta(state.theta, state.phases, state.assignment)
        )
        assert log_posterior(state, context) == pytest.approx(expected)

    def test_sp_flat_closed_form(self, dates):
        """测试平坦似然下的闭式值"""
        context = make_context(Variant.SP, dates, flat=True)
        expected = -math.log(1000 - 200) - math.log(1000) - math.log(200)
        assert log_posterior(single_phase_state(), context) == pytest.approx(expected)

    def test_theta_outside_window(self, dates):
        context = make_context(Variant.SP, dates)
        assert log_posterior(single_phase_state(theta=(350.0,)), context) == -np.inf

    def test_psi_outside_bounds(self, dates):
        context = make_context(Variant.SP, dates)
        assert log_posterior(single_phase_state(psi=(100.0, 1200.0)), context) == -np.inf

    def test_wrong_phase_count_for_single_phase(self, dates):
        """测试单阶段变体拒绝 M=2 的状态"""
        context = make_context(Variant.SP, dates, flat=True)
        state = ChronologyState(
            theta=np.array([200.0]),
            phases=PhaseStructure(np.array([100.0, 300.0, 400.0]), L, U),
            assignment=Assignment(np.array([1])),
            rates=DepositionRates(np.array([1.0, 1.0])),
            variant=Variant.SP,
        )
        assert log_posterior(state, context) == -np.inf

    def test_rpof_nests_spof(self, dates):
        """测试 M=1 时 RPOF = SPOF + M 先验 + 速率先验"""
        lattice = Lattice(1, 2)
        field = np.array([[300.0, 250.0]])
        extra = dict(alpha=0.01, beta1=0.02, beta2=0.03, field=field)
        cells = np.array([1])
        spof = make_context(Variant.SPOF, dates, lattice=lattice, date_cells=cells)
        rpof = make_context(Variant.RPOF, dates, lattice=lattice, date_cells=cells)
        a = log_posterior(single_phase_state(Variant.SPOF, **extra), spof)
        b = log_posterior(single_phase_state(Variant.RPOF, **extra), rpof)
        assert np.isfinite(a)
        assert b == pytest.approx(a + log_prior_M(1) + log_prior_rates(DepositionRates(np.array([1.0]))))

    def test_field_below_date(self, dates):
        """测试样本年龄超过所在格子的起始年龄时为 -inf"""
        lattice = Lattice(1, 2)
        context = make_context(Variant.SPOF, dates, lattice=lattice, date_cells=np.array([1]))
        state = single_phase_state(Variant.SPOF, alpha=0.01, beta1=0.02, beta2=0.03,
                                   field=np.array([[300.0, 150.0]]))
        assert log_posterior(state, context) == -np.inf

    def test_field_max_not_pinned(self, dates):
        """测试起始场最大值不等于 psi_M 时为 -inf"""
        lattice = Lattice(1, 2)
        context = make_context(Variant.SPOF, dates, lattice=lattice, date_cells=np.array([0]))
        state = single_phase_state(Variant.SPOF, alpha=0.01, beta1=0.02, beta2=0.03,
                                   field=np.array([[290.0, 250.0]]))
        assert log_prior(state, context) == -np.inf

    def test_shift_invariance(self, dates):
        """测试所有年龄整体平移时后验差不变"""
        shift = 500.0
        shifted_dates = [RadiocarbonDate('D1', 'P1', 210 + shift, 30)]
        base = make_context(Variant.SP, dates)
        moved = make_context(Variant.SP, shifted_dates, shift=shift)
        a, b = single_phase_state(), single_phase_state(theta=(250.0,), psi=(120.0, 280.0))
        before = log_posterior(b, base) - log_posterior(a, base)
        after = (log_posterior(single_phase_state(theta=(250.0,), psi=(120.0, 280.0), shift=shift), moved)
                 - log_posterior(single_phase_state(shift=shift), moved))
        assert after == pytest.approx(before)
