"""
Tests for Monte Carlo return probabilities
"""

import pytest

from core.measures import convolve_power, make_lazy_srw
from core.utils import MeasureError
from core.walks import block_tasks, mc_return_probability, wilson_interval


def test_zero_steps_always_return(z2):
    est = mc_return_probability(make_lazy_srw(z2), 0, 100, seed=1)
    assert est.estimate == 1.0
    assert est.hits == 100


def test_wilson_interval():
    low, high = wilson_interval(0, 10)
    assert low == 0.0 and 0 < high < 0.35
    low, high = wilson_interval(50, 100)
    assert low < 0.5 < high
    assert high - 0.5 == pytest.approx(0.5 - low)
    with pytest.raises(MeasureError):
        wilson_interval(0, 0)


def test_blocks_cover_trials(z2):
    tasks = block_tasks(make_lazy_srw(z2), 4, 25, seed=3, block_size=10)
    assert [t[2] for t in tasks] == [10, 10, 5]
    assert [t[4] for t in tasks] == [0, 1, 2]


def test_seed_determinism(z2):
    spec = make_lazy_srw(z2)
    first = mc_return_probability(spec, 6, 5000, seed=7, block_size=1000)
    second = mc_return_probability(spec, 6, 5000, seed=7, block_size=1000)
    assert first.hits == second.hits
    assert first.to_json()["seed"] == 7


def test_worker_count_does_not_change_hits(s22):
    spec = make_lazy_srw(s22)
    one = mc_return_probability(spec, 4, 4000, seed=11, threads=1, block_size=1000)
    two = mc_return_probability(spec, 4, 4000, seed=11, threads=2, block_size=1000)
    assert one.hits == two.hits


@pytest.mark.slow
def test_estimate_matches_exact(s22):
    spec = make_lazy_srw(s22)
    exact = float(convolve_power(spec, 8).at_identity())
    est = mc_return_probability(spec, 8, 200_000, seed=20240601, threads=2)
    low, high = est.three_sigma
    assert low <= exact <= high


def test_argument_checks(z2):
    spec = make_lazy_srw(z2)
    with pytest.raises(MeasureError):
        mc_return_probability(spec, 2, 0, seed=1)
    with pytest.raises(MeasureError):
        mc_return_probability(spec, -1, 10, seed=1)
