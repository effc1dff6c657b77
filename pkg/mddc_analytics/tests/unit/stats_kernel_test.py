"""Tests for module mddc_analytics.api.stats_kernel"""
# standard python stuff
import logging
from math import comb

# python libraries
import numpy as np
import pytest

from mddc_analytics import cli
from mddc_analytics.config import env_config
import mddc_analytics.constants as constants
from mddc_analytics.api.types import RngStream
from mddc_analytics.api.stats_kernel import quantile, boxplot_fences, boxplot_stats, \
    normal_upper_tail, fisher_exact_greater, bh_adjust, round_half_even, \
    sample_multinomial, sample_mvn, mvn_factor
from mddc_analytics.api.errors import EmptyData, BadProbabilityVector, NotPSD

logger = logging.getLogger('mddc_analytics')
if not logger.handlers:
    cli.config_logger(env_config[constants.LOG_LEVEL])

def test_quantile():
    assert quantile([5], 0.5) == 5
    assert quantile([1, 2, 3, 4], 0.25) == pytest.approx(1.75)
    assert quantile([1, 2, 3, 4, 5], 0.75) == pytest.approx(4)
    assert quantile(range(1, 101), 0.95) == pytest.approx(95.05)
    data = [3.2, -1.0, 7.5, 0.3]
    assert quantile(data, 0) == min(data)
    assert quantile(data, 1) == max(data)
    with pytest.raises(EmptyData):
        quantile([], 0.5)

def test_boxplot_fences():
    assert boxplot_fences([1, 2, 3, 4, 5], 1.5) == pytest.approx((-1, 7))
    assert boxplot_fences([3, 3, 3], 1.5) == pytest.approx((3, 3))
    assert boxplot_fences([1, 2, 3, 4, 5], 0) == pytest.approx((2, 4))
    # non-finite values are ignored
    assert boxplot_fences([1, 2, np.nan, 3, 4, 5], 1.5) == pytest.approx((-1, 7))
    stats = boxplot_stats([1, 2, 3, 4, 5], 1.5)
    assert stats.iqr == pytest.approx(2)
    with pytest.raises(EmptyData):
        boxplot_fences([np.nan], 1.5)

def test_normal_upper_tail():
    assert normal_upper_tail(0) == 0.5
    assert normal_upper_tail(1.959963985) == pytest.approx(0.025, abs=1e-9)
    assert normal_upper_tail(-40) == 1.0
    tails = normal_upper_tail(np.array([0.0, 1.0]))
    assert tails.shape == (2,)

def enumerate_fisher(a, b, c, d):
    row1, col1, total = a + b, a + c, a + b + c + d
    lo, hi = max(0, row1 + col1 - total), min(row1, col1)
    denom = comb(total, row1)
    return sum(comb(col1, k) * comb(total - col1, row1 - k) \
        for k in range(max(a, lo), hi + 1)) / denom

def test_fisher_examples():
    assert fisher_exact_greater(3, 1, 1, 3) == pytest.approx(17 / 70, abs=1e-12)
    assert fisher_exact_greater(4, 0, 0, 4) == pytest.approx(1 / 70, abs=1e-12)
    assert fisher_exact_greater(0, 5, 2, 9) == 1.0

def test_fisher_matches_enumeration():
    for total in range(1, 31):
        for a in range(total + 1):
            for b in range(total + 1 - a):
                for c in range(total + 1 - a - b):
                    d = total - a - b - c
                    assert fisher_exact_greater(a, b, c, d) == \
                        pytest.approx(enumerate_fisher(a, b, c, d), abs=1e-10)

def test_fisher_large_counts():
    p = fisher_exact_greater(500, 10000, 2000, 5000000)
    assert 0 <= p < 1e-100

def reference_bh(p):
    p = np.asarray(p, dtype=np.float64)
    m = p.size
    order = np.argsort(p)
    ranked = p[order] * m / np.arange(1, m + 1)
    adjusted = np.minimum(1.0, np.minimum.accumulate(ranked[::-1])[::-1])
    out = np.empty(m)
    out[order] = adjusted
    return out

def test_bh_examples():
    assert bh_adjust([0.005, 0.01, 0.03, 0.04]) == pytest.approx([0.02, 0.02, 0.04, 0.04])
    assert bh_adjust([0.5]) == pytest.approx([0.5])
    assert bh_adjust([0.03, 0.03, 0.03]) == pytest.approx([0.03, 0.03, 0.03])

def test_bh_missing_pass_through():
    adjusted = bh_adjust(np.array([[0.01, np.nan], [0.04, 0.02]]))
    assert adjusted.shape == (2, 2)
    assert np.isnan(adjusted[0, 1])
    assert adjusted[~np.isnan(adjusted)] == pytest.approx(reference_bh([0.01, 0.04, 0.02]))

def test_bh_matches_reference():
    gen = np.random.default_rng(8)
    for _ in range(2000):
        p = gen.uniform(size=gen.integers(1, 51)) ** 3
        adjusted = bh_adjust(p)
        assert np.allclose(adjusted, reference_bh(p), rtol=0, atol=1e-12)
        assert (adjusted >= p - 1e-15).all() and (adjusted <= 1).all()

def test_round_half_even():
    assert round_half_even(2.5) == 2
    assert round_half_even(3.5) == 4
    assert round_half_even(2.3) == 2

def test_sample_multinomial():
    rng = RngStream(seed=1)
    assert sample_multinomial(rng, 7, [1.0]).tolist() == [7]
    assert sample_multinomial(rng, 0, [0.5, 0.5]).tolist() == [0, 0]
    counts = sample_multinomial(rng, 10**6, [0.25] * 4)
    assert counts.sum() == 10**6
    sigma = np.sqrt(10**6 * 0.25 * 0.75)
    assert (np.abs(counts - 250000) < 5 * sigma).all()
    with pytest.raises(BadProbabilityVector):
        sample_multinomial(rng, 5, [0.5, 0.6])
    with pytest.raises(BadProbabilityVector):
        sample_multinomial(rng, 5, [-0.5, 1.5])

def test_streams_are_reproducible():
    first = sample_multinomial(RngStream(seed=9, stream_id=3), 1000, [0.2] * 5)
    again = sample_multinomial(RngStream(seed=9, stream_id=(3,)), 1000, [0.2] * 5)
    other = sample_multinomial(RngStream(seed=9, stream_id=4), 1000, [0.2] * 5)
    assert first.tolist() == again.tolist()
    assert first.tolist() != other.tolist()
    assert RngStream(seed=9).child(2, 1).stream_id == (2, 1)

def test_sample_mvn():
    mean = np.array([1.0, -2.0])
    assert sample_mvn(RngStream(seed=2), mean, np.zeros((2, 2))) == pytest.approx(mean)

    draws = sample_mvn(RngStream(seed=2), np.zeros(3), np.eye(3), size=100000)
    assert np.abs(np.cov(draws.T) - np.eye(3)).max() < 0.05

    ones = sample_mvn(RngStream(seed=2), np.zeros(2), np.ones((2, 2)), size=50)
    assert np.allclose(ones[:, 0], ones[:, 1])

def test_mvn_factor_rejects_indefinite():
    with pytest.raises(NotPSD):
        mvn_factor(np.array([[1.0, 2.0], [2.0, 1.0]]))
    factor = mvn_factor(np.array([[1.0, 1.0], [1.0, 1.0]]))
    assert factor @ factor.T == pytest.approx(np.ones((2, 2)))
