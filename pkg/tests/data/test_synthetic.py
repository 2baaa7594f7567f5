"""合成数据测试"""
import json

import numpy as np
import pytest

from src.calibration.curve import load_curve, mu_sigma
from src.core.constants import Material
from src.core.exceptions import ChronologyError
from src.data.dataset_loader import load_dataset
from src.data.synthetic import (
    generate_hiatus_dataset, generate_single_phase_dataset, generate_spreading_dataset,
    make_linear_curve, place_pits, simulate_observations, write_curve
)
from src.onsetfield.lattice import Lattice, cell_of


class TestLinearCurve:
    """测试线性曲线"""

    def test_values(self):
        curve = make_linear_curve(100, 200, slope=2.0, offset=5.0, error=12.0)
        assert mu_sigma(curve, 150) == (305.0, 12.0)

    def test_bad_range(self):
        with pytest.raises(ChronologyError):
            make_linear_curve(200, 100)

    def test_write_and_load(self, tmp_path):
        curve = make_linear_curve(100, 120, Material.MARINE, offset=400.0)
        loaded = load_curve(write_curve(curve, tmp_path / 'marine.csv'), Material.MARINE)
        assert np.array_equal(loaded.cal_age, curve.cal_age)
        assert np.allclose(loaded.c14_age, curve.c14_age)


class TestSimulateObservations:
    """测试测年抽样"""

    def test_ids_and_rounding(self):
        curves = {Material.TERRESTRIAL: make_linear_curve(0, 1000)}
        dates = simulate_observations([100.0, 200.0], ['P1', 'P2'], curves, np.random.default_rng(0))
        assert [d.id for d in dates] == ['S001', 'S002']
        assert all(d.y == round(d.y) for d in dates)

    def test_mean(self):
        curves = {Material.TERRESTRIAL: make_linear_curve(0, 1000, error=1.0)}
        dates = simulate_observations([500.0] * 2000, ['P'] * 2000, curves, np.random.default_rng(1), sigma_lab=20.0)
        assert np.mean([d.y for d in dates]) == pytest.approx(500.0, abs=2.0)

    def test_out_of_range(self):
        curves = {Material.TERRESTRIAL: make_linear_curve(0, 100)}
        with pytest.raises(ChronologyError):
            simulate_observations([500.0], ['P1'], curves, np.random.default_rng(2))

    def test_length_mismatch(self):
        curves = {Material.TERRESTRIAL: make_linear_curve(0, 1000)}
        with pytest.raises(ChronologyError):
            simulate_observations([100.0], ['P1', 'P2'], curves, np.random.default_rng(3))


class TestPlacePits:
    """测试探坑放置"""

    def test_distinct_cells(self):
        lattice = Lattice(4, 6, cell_side=2.0)
        pits = place_pits(lattice, 10, np.random.default_rng(4))
        cells = [cell_of(lattice, p.x, p.y) for p in pits]
        assert len(set(cells)) == 10
        assert pits[0].name == 'P01'

    def test_given_cells(self):
        lattice = Lattice(3, 5, cell_side=1.0, along_axis='y')
        pits = place_pits(lattice, 2, np.random.default_rng(5), cells=[0, 14])
        assert [cell_of(lattice, p.x, p.y) for p in pits] == [0, 14]

    def test_too_many(self):
        with pytest.raises(ChronologyError):
            place_pits(Lattice(2, 2), 5, np.random.default_rng(6))


class TestScenarios:
    """测试合成场景"""

    def test_single_phase(self):
        synthetic = generate_single_phase_dataset(np.random.default_rng(7))
        dataset = synthetic.dataset
        assert len(dataset.dates) == 49
        assert len(dataset.pits) == 24
        assert dataset.lattice.shape == (13, 32)
        theta = np.asarray(synthetic.truth['theta'])
        assert np.all((theta > 2700) & (theta < 3000))
        assert {d.pit for d in dataset.dates} == {p.name for p in dataset.pits}

    def test_spreading(self):
        synthetic = generate_spreading_dataset(np.random.default_rng(8), K=20, n_pits=10, cells=(5, 8))
        truth = synthetic.truth
        field = truth['field']
        assert field.max() == 3000.0
        assert field.min() > 2500.0
        assert truth['beta1'] == 2 * truth['beta2']
        assert truth['seed_cell'] == int(np.argmax(field))
        cells = synthetic.dataset.date_cells
        assert np.all(truth['theta'] < field.ravel()[cells])

    def test_hiatus(self):
        synthetic = generate_hiatus_dataset(np.random.default_rng(9))
        truth = synthetic.truth
        assert truth['M'] == 3
        assert set(truth['assignment']) == {1, 3}
        theta = truth['theta']
        assert not np.any((theta > 800) & (theta < 1300))
        assert synthetic.L == 0.0 and synthetic.U == 2000.0

    def test_bad_boundaries(self):
        with pytest.raises(ChronologyError):
            generate_hiatus_dataset(np.random.default_rng(10), psi=(500.0, 400.0))

    def test_write(self, tmp_path):
        """测试写出的文件可被重新加载"""
        synthetic = generate_hiatus_dataset(np.random.default_rng(11), K=6, n_pits=3)
        paths = synthetic.write(tmp_path)
        dataset = load_dataset(paths['dates'], paths['pits'], lattice=synthetic.dataset.lattice)
        assert dataset.dates == synthetic.dataset.dates
        truth = json.loads(paths['truth'].read_text(encoding='utf-8'))
        assert truth['M'] == 3
        assert truth['lattice'] == [4, 8]
        assert (tmp_path / 'curve_terrestrial.csv').exists()
