import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from abclab.errors import ConfigurationError
from abclab.models import bernoulli_model, fixed_coin_model, normal_pair, poisson_model, geometric_model
from abclab.streams import RandomStream
from abclab.table import (
    ReferenceTable,
    build_reference_table,
    quantile_rank,
    threshold,
    tolerance_sweep,
)


def _count_table(T=5000, workers=1, block_size=1000, seed=3):
    return build_reference_table([poisson_model(), geometric_model()], None, 10, T, RandomStream(seed),
                                 workers=workers, block_size=block_size)


def test_table_shape_and_names():
    t = _count_table()
    assert len(t) == 5000
    assert t.model_names == ("poisson", "geometric")
    assert t.summary_names == ("sum",)
    assert t.parameters.shape == (5000, 1)
    assert set(np.unique(t.model_index)) == {0, 1}


def test_table_identical_across_worker_counts():
    a, b = _count_table(workers=1), _count_table(workers=4)
    assert np.array_equal(a.model_index, b.model_index)
    assert np.array_equal(a.parameters, b.parameters)
    assert np.array_equal(a.summaries, b.summaries)


def test_csv_round_trip_is_exact(tmp_path):
    models = [bernoulli_model(), fixed_coin_model()]
    t = build_reference_table(models, [0.3, 0.7], 4, 300, RandomStream(1), block_size=64)
    d = t.distances([2.0])
    t.to_csv(tmp_path / "t.csv", d)
    back, d2 = ReferenceTable.from_csv(tmp_path / "t.csv")
    assert np.array_equal(back.model_index, t.model_index)
    # the parameter-free model pads with nan
    assert np.array_equal(back.parameters, t.parameters, equal_nan=True)
    assert np.isnan(back.parameters[t.model_index == 1]).all()
    assert np.array_equal(back.summaries, t.summaries)
    assert np.array_equal(d2, d)
    assert (tmp_path / "t.csv").read_bytes().count(b"\r") == 0


def test_csv_header_checked(tmp_path):
    (tmp_path / "bad.csv").write_text("a,b\n1,2\n")
    with pytest.raises(ConfigurationError):
        ReferenceTable.from_csv(tmp_path / "bad.csv")


def test_quantile_rank_guards_float_error():
    assert quantile_rank(0.07, 100) == 7
    assert quantile_rank(0.001, 1000) == 1
    assert quantile_rank(1e-9, 10) == 1
    assert quantile_rank(1.0, 10) == 10


def test_ties_at_threshold_are_all_accepted():
    t = ReferenceTable(np.array([0, 1, 0, 1, 0]), np.zeros((5, 1)), np.array([[0.0], [1.0], [1.0], [1.0], [3.0]]),
                       model_names=("a", "b"))
    rows = tolerance_sweep(t, [0.0], [0.4])
    assert threshold(t.distances([0.0]), 0.4) == 1.0
    assert rows[0].accept_counts.tolist() == [2, 2]
    assert rows[0].n_accepted == 4


@given(st.lists(st.floats(1e-3, 1.0), min_size=1, max_size=5, unique=True))
def test_accept_counts_monotone_in_quantile(qs):
    qs = sorted(qs, reverse=True)
    t = _count_table(T=2000)
    rows = tolerance_sweep(t, [12.0], qs)
    n = [r.n_accepted for r in rows]
    eps = [r.epsilon for r in rows]
    assert n == sorted(n, reverse=True)
    assert eps == sorted(eps, reverse=True)


def test_counts_shrink_tenfold_on_continuous_summary():
    m1, m2 = normal_pair(1.0, 2.0, 1.0)
    t = build_reference_table([m1, m2], None, 10, 100_000, RandomStream(4))
    rows = tolerance_sweep(t, [0.3], [0.1, 0.01, 0.001])
    assert [r.n_accepted for r in rows] == [10_000, 1_000, 100]


@pytest.mark.parametrize("qs", [[], [0.0], [1.5], [0.01, 0.1], [0.1, 0.1]])
def test_bad_quantiles(qs):
    with pytest.raises(ConfigurationError):
        tolerance_sweep(_count_table(T=100, block_size=100), [1.0], qs)


def test_fixed_tolerance_accept_ratio_matches_enumeration():
    # Bernoulli toy against a fair coin, n = 3, observed S = 3:
    # P[M=1, S >= 3 - eps] / P[M=2, S >= 3 - eps]
    models = [bernoulli_model(), fixed_coin_model()]
    t = build_reference_table(models, None, 3, 10**6, RandomStream(8))
    d = t.distances([3.0])
    for eps, expected in ((0.0, (1 / 4) / (1 / 8)), (1.0, (2 / 4) / (4 / 8))):
        acc = np.bincount(t.model_index[d <= eps], minlength=2)
        log_ratio = math.log(acc[0] / acc[1])
        se = math.sqrt(1 / acc[0] + 1 / acc[1])
        assert abs(log_ratio - math.log(expected)) < 3 * se
