import math

import numpy as np
import pytest

from modecover import (
    make_dataset,
    make_gauss_grid,
    make_grid_isolated,
    make_rare_modes_instance,
    make_sine_dataset,
    make_spiral,
    make_three_gauss_target,
    spiral_centers,
)
from modecover.core import ConfigurationError
from modecover.synthdata import grid_isolated_centers


def test_three_gauss_target_components():
    p = make_three_gauss_target()
    assert np.array_equal(p.weights, [0.9, 0.05, 0.05])
    assert np.array_equal(p.means.ravel(), [0.0, 10.0, -10.0])
    assert np.all(p.variances == 1.0)


def test_rare_modes_instance_components():
    target, center, spread = make_rare_modes_instance()
    assert np.array_equal(target.weights, [0.98, 0.01, 0.01])
    assert np.array_equal(center.weights, [1.0])
    assert np.array_equal(center.means, [[0.0]])
    assert np.array_equal(spread.weights, [0.34, 0.33, 0.33])


class TestSineDataset:
    def test_counts_exact(self):
        pts, modes = make_sine_dataset(40000, ratio=400, seed=0)
        assert len(pts) == 40100
        assert (modes == 1).sum() == 100

    def test_curve_relation(self):
        pts, modes = make_sine_dataset(1000, ratio=500, seed=1)
        major = pts[modes == 0]
        assert np.allclose(
            major[:, 1], major[:, 0] * np.sin(4 * major[:, 0] / np.pi), atol=1e-12
        )

    def test_curve_values(self):
        # y(0) = 0 and y(pi) = pi*sin(4)
        y = lambda x: x * math.sin(4 * x / math.pi)
        assert y(0.0) == 0.0
        assert y(math.pi) == pytest.approx(math.pi * math.sin(4.0), rel=1e-15)
        assert y(math.pi) == pytest.approx(-2.37757, abs=1e-5)

    def test_minor_center_default(self):
        pts, modes = make_sine_dataset(4000, ratio=400, seed=2)
        minor = pts[modes == 1]
        assert np.linalg.norm(minor.mean(axis=0) - [10.0, 0.0]) < 1.0

    def test_deterministic(self):
        a, _ = make_sine_dataset(500, ratio=250, seed=5)
        b, _ = make_sine_dataset(500, ratio=250, seed=5)
        assert np.array_equal(a, b)

    def test_rejects_too_small(self):
        with pytest.raises(ConfigurationError):
            make_sine_dataset(10, ratio=400)


class TestGaussGrid:
    def test_shapes_and_radius(self):
        pts, modes, centers = make_gauss_grid(m_modes=10, n=1000, seed=0)
        assert centers.shape == (10, 2)
        assert len(pts) == 1000
        sigma0 = math.sqrt(0.05)
        assert 3 * sigma0 == pytest.approx(0.6708, abs=1e-4)
        # round-robin allocation: counts per mode exactly n/M
        assert np.all(np.bincount(modes) == 100)

    def test_single_mode_concentration(self):
        pts, _, centers = make_gauss_grid(m_modes=1, n=2000, var=0.05, seed=3)
        d = np.linalg.norm(pts - centers[0], axis=1)
        # 2d radius-3-sigma mass is 1 - exp(-4.5) = 0.98889
        frac = (d <= 3 * math.sqrt(0.05)).mean()
        assert frac == pytest.approx(1.0 - math.exp(-4.5), abs=0.01)

    def test_one_sample_per_mode(self):
        pts, modes, _ = make_gauss_grid(m_modes=10, n=10, seed=0)
        assert np.array_equal(np.sort(modes), np.arange(10))


class TestSpiral:
    def test_center_formula(self):
        c = spiral_centers()
        assert c.shape == (20, 2)
        assert c[0] == pytest.approx(
            [math.cos(1 / 3), math.sin(1 / 3)], rel=1e-15
        )
        assert c[0] == pytest.approx([0.94496, 0.32719], abs=1e-5)
        assert c[19] == pytest.approx(
            [400 * math.cos(20 / 3), 400 * math.sin(20 / 3)], rel=1e-15
        )
        assert c[19] == pytest.approx([370.95, 149.66], abs=0.01)

    def test_mode_variance(self):
        pts, modes, centers = make_spiral(4000, seed=1)
        resid = pts - centers[modes]
        assert resid.std() == pytest.approx(1.0, abs=0.05)


class TestGridIsolated:
    def test_centers(self):
        c = grid_isolated_centers()
        assert c.shape == (442, 2)
        assert np.array_equal(c[0], [-10.0, -10.0])
        assert np.array_equal(c[-1], [100.0, 100.0])
        axis = np.unique(c[:-1, 0])
        assert len(axis) == 21
        assert np.allclose(np.diff(axis), 1.0)

    def test_dataset(self):
        pts, modes, centers = make_grid_isolated(4420, seed=0)
        assert (modes == 441).sum() == 10
        isolated = pts[modes == 441]
        assert np.linalg.norm(isolated.mean(axis=0) - [100.0, 100.0]) < 0.5


def test_make_dataset_dispatch():
    data = make_dataset("spiral", seed=2, n=200)
    assert data.centers.shape == (20, 2)
    assert data.mode_var == 1.0
    assert make_dataset("grid_isolated", seed=0, n=884).mode_var == 0.05
    assert make_dataset("sine", seed=0, n_major=500, ratio=250).mode_var is None
    with pytest.raises(ConfigurationError):
        make_dataset("nope")
