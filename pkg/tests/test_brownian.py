import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from lawsde import Config
from lawsde.brownian import WienerGrid, generate, coarsen, path_seed


@pytest.fixture
def grid():
    return WienerGrid.generate(0.0, 1.0, 6, 2, seed=42)


def test_generate_is_deterministic(grid):
    again = WienerGrid.generate(0.0, 1.0, 6, 2, seed=42)
    assert again == grid
    assert generate(0.0, 1.0, 6, 2, 42) == grid
    assert WienerGrid.generate(0.0, 1.0, 6, 2, seed=43) != grid


def test_channels_are_independent_streams(grid):
    # channel m only depends on (seed, m)
    wider = WienerGrid.generate(0.0, 1.0, 6, 3, seed=42)
    np.testing.assert_array_equal(wider.increments[:2], grid.increments)
    assert not np.array_equal(grid.increments[0], grid.increments[1])


def test_increments_are_read_only(grid):
    assert grid.increments.shape == (2, 64)
    with pytest.raises(ValueError):
        grid.increments[0, 0] = 1.0


def test_dW_and_times(grid):
    dW = grid.dW(4)
    assert dW.shape == (3, 16)
    assert np.all(dW[0] == 1.0 / 16)
    times = grid.times(4)
    assert times[0] == 0.0 and times[-1] == 1.0 and times.size == 17
    assert grid.h == 1.0 / 64
    assert grid.step_size(2) == 0.25
    with pytest.raises(ValueError):
        grid.dW(7)


def test_coarsen_sums_neighbour_pairs(grid):
    fine = grid.increments
    np.testing.assert_array_equal(grid.coarsen(5).increments, fine[:, 0::2] + fine[:, 1::2])
    assert grid.coarsen(6) is grid
    assert coarsen(grid, 3) == grid.coarsen(3)


def test_coarsen_is_transitive(grid):
    np.testing.assert_array_equal(grid.coarsen(3).coarsen(1).increments,
                                  grid.coarsen(1).increments)


def test_path(grid):
    W = grid.path(3)
    assert W.shape == (3, 9)
    np.testing.assert_array_equal(W[0], grid.times(3))
    assert np.all(W[1:, 0] == 0.0)
    np.testing.assert_allclose(W[1:, -1], grid.increments.sum(axis=1), atol=1e-14)


def test_increment_at_matches_dW(grid):
    dW = grid.dW()
    for channel, index in [(1, 0), (1, 5), (2, 17), (2, 63)]:
        assert grid.increment_at(channel, index) == dW[channel, index]
    assert grid.increment_at(0, 3) == grid.h
    coarse = grid.coarsen(3)
    dW = coarse.dW()
    for channel, index in [(1, 0), (2, 4), (1, 7)]:
        assert coarse.increment_at(channel, index) == dW[channel, index]
    with pytest.raises(ValueError):
        grid.increment_at(3, 0)
    with pytest.raises(ValueError):
        grid.increment_at(1, 64)


def test_dump_and_load(grid, tmp_path):
    fname = tmp_path / "grid.bin"
    grid.dump(fname)
    loaded = WienerGrid.load(fname)
    assert loaded == grid

    coarse = grid.coarsen(2)
    coarse.dump(fname)
    loaded = WienerGrid.load(fname)
    assert loaded == coarse
    assert loaded.source_levels == 6
    assert loaded.increment_at(2, 1) == coarse.dW()[2, 1]


def test_load_rejects_foreign_and_truncated_files(grid, tmp_path):
    foreign = tmp_path / "foreign.bin"
    foreign.write_bytes(b"not a grid at all, just some bytes" * 4)
    with pytest.raises(ValueError):
        WienerGrid.load(foreign)

    truncated = tmp_path / "truncated.bin"
    grid.dump(truncated)
    data = truncated.read_bytes()
    truncated.write_bytes(data[:-8])
    with pytest.raises(ValueError):
        WienerGrid.load(truncated)


def test_generate_rejects_bad_arguments():
    with pytest.raises(ValueError):
        WienerGrid.generate(1.0, 1.0, 3, 1, 0)
    with pytest.raises(ValueError):
        WienerGrid.generate(0.0, 1.0, -1, 1, 0)
    with pytest.raises(ValueError):
        WienerGrid.generate(0.0, 1.0, 3, 1, -5)
    with pytest.raises(MemoryError):
        WienerGrid.generate(0.0, 1.0, 20, 2, 0, memory_budget=1000)


def test_zero_channels():
    grid = WienerGrid.generate(0.0, 2.0, 3, 0, 1)
    dW = grid.dW()
    assert dW.shape == (1, 8)
    assert np.all(dW[0] == 0.25)


def test_increment_moments():
    grid = WienerGrid.generate(0.0, 1.0, 14, 2, seed=2024)
    n = 2**14
    x = grid.increments / np.sqrt(grid.h)
    assert np.all(np.abs(x.mean(axis=1)) < 5 / np.sqrt(n))
    np.testing.assert_allclose(x.var(axis=1), 1.0, atol=0.05)
    assert abs(np.corrcoef(x)[0, 1]) < 0.05


def test_path_seeds_are_distinct():
    seeds = [path_seed(7, i) for i in range(50)]
    assert len(set(seeds)) == 50
    assert path_seed(7, 3) == seeds[3]
    assert path_seed(8, 3) != seeds[3]


@given(st.integers(min_value=0, max_value=2**63), st.integers(min_value=1, max_value=7))
@settings(deadline=None, max_examples=25)
def test_every_level_sees_the_same_path(seed, levels):
    grid = WienerGrid.generate(0.0, 1.0, levels, 1, seed)
    total = grid.coarsen(0).increments
    for level in range(levels + 1):
        np.testing.assert_array_equal(grid.coarsen(level).coarsen(0).increments, total)


def test_memory_budget_comes_from_config():
    config = Config()
    config["memory_budget"] = 1000
    with pytest.raises(MemoryError):
        WienerGrid.generate(0.0, 1.0, 10, 1, 0, config=config)
    with pytest.raises(MemoryError):
        generate(0.0, 1.0, 10, 1, 0, config=config)
    assert WienerGrid.generate(0.0, 1.0, 6, 1, 0, config=config).levels == 6
    # an explicit budget wins over the hyperparameter
    assert WienerGrid.generate(0.0, 1.0, 10, 1, 0, memory_budget=2**20, config=config).levels == 10


def test_moments_across_seeds():
    samples = 1000
    unit = np.array([WienerGrid.generate(0.0, 1.0, 0, 2, path_seed(5, i)).increments[:, 0]
                     for i in range(samples)])
    assert np.all(np.abs(unit.mean(axis=0)) < 5 / np.sqrt(samples))
    np.testing.assert_allclose((unit**2).mean(axis=0), 1.0, atol=0.2)
    assert abs(np.corrcoef(unit.T)[0, 1]) < 0.15

    coarse = np.concatenate([
        WienerGrid.generate(0.0, 1.0, 4, 1, path_seed(6, i)).coarsen(2).increments[0]
        for i in range(samples // 4)])
    assert coarse.size == samples
    np.testing.assert_allclose(coarse.var(), 0.25, atol=0.05)
