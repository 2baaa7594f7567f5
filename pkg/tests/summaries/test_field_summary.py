"""起始场后验汇总测试"""
import numpy as np
import pandas as pd
import pytest

from src.core.constants import PartitionLabel
from src.core.exceptions import ChronologyError
from src.mcmc.chain_output import ChainOutput
from src.summaries.field_summary import (
    arrival_odds, field_summary, mc_standard_error, partition, pit_onset_histograms, threshold_scan
)


def field_chain(fields, psi_M=None, psi_0=None, arrivals=None):
    """由起始场序列构造只含单阶段的链"""
    fields = np.asarray(fields, dtype=float)
    n = len(fields)
    psi_M = fields.reshape(n, -1).max(axis=1) if psi_M is None else np.asarray(psi_M, dtype=float)
    psi_0 = psi_M - 1000.0 if psi_0 is None else np.asarray(psi_0, dtype=float)
    return ChainOutput(
        variant='SPOF',
        iteration=np.arange(1, n + 1),
        log_post=np.zeros(n),
        M=np.ones(n, dtype=np.int64),
        psi=[np.array([a, b]) for a, b in zip(psi_0, psi_M)],
        rates=[np.array([1.0]) for _ in range(n)],
        theta=np.zeros((n, 0)),
        assignment=np.zeros((n, 0), dtype=np.int64),
        alpha=np.full(n, 1e-3),
        beta1=np.full(n, 1e-2),
        beta2=np.full(n, 1e-2),
        arrivals=np.ones(n, dtype=np.int64) if arrivals is None else np.asarray(arrivals, dtype=np.int64),
        fields=fields,
    )


def split_chain(n=20):
    """左列始终比 psi_M 早 300 年以上，右列始终紧随 psi_M"""
    fields = np.empty((n, 2, 2))
    fields[:, :, 0] = 3000.0 - 300.0 - np.arange(n)[:, None]
    fields[:, :, 1] = 3000.0
    fields[:, 0, 1] = 3000.0
    return field_chain(fields, psi_M=np.full(n, 3000.0))


class TestFieldSummary:
    """测试逐格均值与标准差"""

    def test_single_record(self):
        summary = field_summary(field_chain([[[3000.0, 2900.0]]]))
        assert np.all(summary.std == 0)
        assert np.array_equal(summary.mean, [[3000.0, 2900.0]])
        assert np.array_equal(summary.elapsed_mean, [[0.0, 100.0]])

    def test_constant_shift(self):
        """测试整体平移: 经过时间标准差为0，起始年龄标准差为正"""
        base = np.array([[3000.0, 2950.0], [2900.0, 2800.0]])
        summary = field_chain([base, base - 40.0])
        result = field_summary(summary)
        assert np.allclose(result.elapsed_std, 0.0)
        assert np.all(result.std > 0)

    def test_mean_within_trace(self):
        rng = np.random.default_rng(0)
        fields = 3000.0 - rng.exponential(100.0, size=(50, 3, 4))
        fields[:, 0, 0] = 3000.0
        result = field_summary(field_chain(fields))
        assert np.all(result.mean >= fields.min(axis=0)) and np.all(result.mean <= fields.max(axis=0))
        assert result.mean.shape == (3, 4)

    def test_no_fields(self):
        chain = field_chain([[[3000.0]]])
        chain.fields = None
        with pytest.raises(ChronologyError):
            field_summary(chain)


class TestPartition:
    """测试绿/蓝/红分区"""

    def test_all_blue(self):
        """测试经过时间全为0时全部为 blue"""
        chain = field_chain(np.full((5, 2, 3), 3000.0))
        result = partition(chain, T_star=10.0, p_star=0.8)
        assert result.count(PartitionLabel.BLUE) == 6
        assert result.blue.all()

    def test_unattainable_threshold(self):
        chain = field_chain(np.full((5, 2, 3), 3000.0))
        result = partition(chain, T_star=10.0, p_star=1.01)
        assert result.count(PartitionLabel.RED) == 6

    def test_green_and_blue(self):
        result = partition(split_chain(), T_star=150.0, p_star=0.8)
        assert result.green[:, 0].all()
        assert result.blue[:, 1].all()
        assert result.count(PartitionLabel.GREEN) + result.count(PartitionLabel.BLUE) + \
            result.count(PartitionLabel.RED) == 4
        assert list(np.unique(result.codes)) == [0, 1]

    def test_deterministic(self):
        a = partition(split_chain(), 150.0, 0.8)
        b = partition(split_chain(), 150.0, 0.8)
        assert np.array_equal(a.labels, b.labels)


class TestThresholdScan:
    """测试阈值扫描"""

    def test_identical_fields(self):
        chain = field_chain(np.full((5, 2, 2), 3000.0))
        assert not threshold_scan(chain).any_split

    def test_splitting(self):
        scan = threshold_scan(split_chain(), p_star=0.8)
        assert scan.any_split
        assert 150.0 in set(scan.splitting['T_star'])
        assert list(scan.table.columns) == ['T_star', 'green', 'blue']

    def test_custom_grid(self):
        scan = threshold_scan(split_chain(), thresholds=[0.0, 500.0])
        assert len(scan.table) == 2
        assert not scan.any_split


class TestArrivalOdds:
    """测试到达数后验/先验比"""

    def test_identical_chains(self):
        chain = field_chain(np.full((4, 1, 2), 3000.0), arrivals=[1, 1, 2, 3])
        odds = arrival_odds(chain, chain)
        assert np.allclose(odds['odds'], 1.0)
        assert not odds['undefined'].any()

    def test_unseen_in_prior(self):
        post = field_chain(np.full((4, 1, 2), 3000.0), arrivals=[1, 1, 2, 4])
        prior = field_chain(np.full((4, 1, 2), 3000.0), arrivals=[1, 2, 2, 3])
        odds = arrival_odds(post, prior).set_index('V')
        assert odds.loc[4, 'undefined']
        assert np.isnan(odds.loc[4, 'odds'])
        assert odds.loc[1, 'odds'] == pytest.approx(2.0)
        assert odds.loc[3, 'posterior'] == 0.0

    def test_requires_fields(self):
        chain = field_chain(np.full((2, 1, 1), 3000.0), arrivals=[-1, -1])
        with pytest.raises(ChronologyError):
            arrival_odds(chain, chain)


class TestPitHistograms:
    """测试探坑起始年龄直方图"""

    def test_constant_field(self):
        """测试常数场为单点质量"""
        chain = field_chain(np.full((6, 1, 2), 3005.0))
        table = pit_onset_histograms(chain, {'P1': 0})
        assert table['count'].max() == 6
        assert table['frequency'].sum() == pytest.approx(1.0)
        row = table[table['count'] == 6].iloc[0]
        assert row['bin_start'] <= 3005.0 < row['bin_end']

    def test_same_cell(self):
        rng = np.random.default_rng(1)
        chain = field_chain(3000.0 - rng.exponential(40.0, size=(30, 2, 2)))
        table = pit_onset_histograms(chain, {'A': 3, 'B': 3})
        a = table[table['pit'] == 'A']['count'].to_numpy()
        b = table[table['pit'] == 'B']['count'].to_numpy()
        assert np.array_equal(a, b)

    def test_matches_direct_extraction(self):
        """测试与直接从轨迹提取的直方图一致"""
        rng = np.random.default_rng(2)
        fields = 3000.0 - rng.exponential(40.0, size=(40, 2, 3))
        chain = field_chain(fields)
        table = pit_onset_histograms(chain, {'P': 4}, bin_width=10.0)
        samples = fields[:, 1, 1]
        edges = np.arange(np.floor(fields.reshape(40, -1)[:, 4].min() / 10) * 10,
                          samples.max() + 10, 10.0)
        counts, _ = np.histogram(samples, bins=edges)
        assert list(table['count'][:len(counts)]) == list(counts)
        assert table['count'].sum() == 40
        assert np.allclose(np.diff(table['bin_start']), 10.0)

    def test_bad_bin_width(self):
        with pytest.raises(ChronologyError):
            pit_onset_histograms(field_chain(np.full((2, 1, 1), 3000.0)), {'P': 0}, bin_width=0)

    def test_no_pits(self):
        table = pit_onset_histograms(field_chain(np.full((2, 1, 1), 3000.0)), {})
        assert isinstance(table, pd.DataFrame) and table.empty


def test_mc_standard_error():
    assert mc_standard_error(0.5, 100) == pytest.approx(0.05)
    assert mc_standard_error(1.0, 10) == 0.0
