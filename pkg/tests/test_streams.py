import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import stats

from abclab.errors import DomainError
from abclab.streams import (
    RandomStream,
    log_add,
    logsumexp,
    sample_categorical,
    sample_exponential,
    sample_geometric,
    sample_normal,
    sample_poisson,
    sample_uniform,
)


def _gof_pvalue(draws, pmf, support):
    observed = np.array([(draws == k).sum() for k in support] + [(draws > support[-1]).sum()])
    probs = np.append(pmf, 1.0 - pmf.sum())
    keep = probs * draws.size > 5
    exp = probs * draws.size
    obs_k, exp_k = observed[keep], exp[keep]
    # pool the sparse tail cells into one
    obs_k = np.append(obs_k, observed[~keep].sum())
    exp_k = np.append(exp_k, exp[~keep].sum())
    if exp_k[-1] == 0:
        obs_k, exp_k = obs_k[:-1], exp_k[:-1]
    return stats.chisquare(obs_k, exp_k).pvalue


def test_same_descriptor_same_sequence():
    a = RandomStream(42, (1, 2)).generator.random(5)
    b = RandomStream(42, (1, 2)).generator.random(5)
    assert np.array_equal(a, b)


def test_child_independent_of_sibling_order():
    root = RandomStream(7)
    first = root.child(3).generator.random(4)
    root2 = RandomStream(7)
    root2.child(1).generator.random(100)
    root2.child(2).generator.random(100)
    assert np.array_equal(first, root2.child(3).generator.random(4))


def test_children_differ_and_fresh_resets():
    s = RandomStream(1)
    assert not np.array_equal(s.child(0).generator.random(4), s.child(1).generator.random(4))
    x = s.generator.random(3)
    assert np.array_equal(s.fresh().generator.random(3), x)


@pytest.mark.parametrize("seed", [-1, 2**64])
def test_bad_seed(seed):
    with pytest.raises(DomainError):
        RandomStream(seed)


def test_bad_path_index():
    with pytest.raises(DomainError):
        RandomStream(0, (-3,))


def test_poisson_gof():
    lam = 2.5
    draws = sample_poisson(RandomStream(11), lam, size=50_000)
    support = np.arange(12)
    assert _gof_pvalue(draws, stats.poisson.pmf(support, lam), support) > 1e-4


def test_geometric_starts_at_zero_gof():
    p = 0.3
    draws = sample_geometric(RandomStream(12), p, size=50_000)
    assert draws.min() == 0
    support = np.arange(25)
    pmf = p * (1 - p) ** support
    assert _gof_pvalue(draws, pmf, support) > 1e-4


def test_categorical_gof_and_zero_weight():
    w = np.array([0.2, 0.0, 0.5, 0.3, 0.0])
    draws = sample_categorical(RandomStream(13), w, size=60_000)
    assert not np.isin(draws, [1, 4]).any()
    counts = np.bincount(draws, minlength=5)[[0, 2, 3]]
    assert stats.chisquare(counts, 60_000 * w[[0, 2, 3]]).pvalue > 1e-4


def test_normal_exponential_uniform_moments():
    s = RandomStream(14)
    x = sample_normal(s, 1.0, 2.0, size=100_000)
    assert abs(x.mean() - 1.0) < 4 * 2.0 / math.sqrt(x.size)
    e = sample_exponential(s, 4.0, size=100_000)
    assert abs(e.mean() - 0.25) < 4 * 0.25 / math.sqrt(e.size)
    u = sample_uniform(s, -1.0, 3.0, size=100_000)
    assert u.min() >= -1.0 and u.max() < 3.0
    assert stats.kstest(u, stats.uniform(-1, 4).cdf).pvalue > 1e-4


@pytest.mark.parametrize(
    "call",
    [
        lambda s: sample_poisson(s, -1.0),
        lambda s: sample_poisson(s, math.nan),
        lambda s: sample_geometric(s, 0.0),
        lambda s: sample_geometric(s, 1.0),
        lambda s: sample_normal(s, 0.0, 0.0),
        lambda s: sample_exponential(s, 0.0),
        lambda s: sample_uniform(s, 1.0, 1.0),
        lambda s: sample_categorical(s, [0.0, 0.0]),
        lambda s: sample_categorical(s, [1.0, -0.5]),
        lambda s: sample_categorical(s, []),
    ],
)
def test_domain_errors(call):
    with pytest.raises(DomainError):
        call(RandomStream(0))


@given(st.lists(st.floats(-700, 700), min_size=1, max_size=20))
def test_logsumexp_matches_direct(values):
    direct = math.log(math.fsum(math.exp(v) for v in values))
    assert logsumexp(values) == pytest.approx(direct, rel=1e-12, abs=1e-12)


@given(st.floats(-1e3, 1e3), st.floats(-1e3, 1e3))
def test_log_add_symmetric_and_shift_invariant(a, b):
    assert log_add(a, b) == log_add(b, a)
    assert log_add(a, b) >= max(a, b)
    assert log_add(a + 5.0, b + 5.0) == pytest.approx(log_add(a, b) + 5.0, abs=1e-9)


def test_logsumexp_all_neg_inf_and_axis():
    assert logsumexp([-math.inf, -math.inf]) == -math.inf
    assert log_add(-math.inf, 1.5) == 1.5
    m = np.array([[0.0, -math.inf], [1.0, 1.0]])
    assert np.allclose(logsumexp(m, axis=1), [0.0, 1.0 + math.log(2.0)])
