import math

import numpy as np
import pytest

from abclab.engine import AbcConfig, abc_model_choice, abc_sample, realised_acceptance_rate
from abclab.errors import ConfigurationError
from abclab.models import bernoulli_model, fixed_coin_model, normal_model, normal_pair, poisson_model
from abclab.streams import RandomStream


def test_bernoulli_posterior_mean_at_zero_tolerance():
    run = abc_sample(bernoulli_model(), [3.0], 3, AbcConfig(n_accept=20_000, epsilon=0.0), RandomStream(1))
    assert run.n_accepted == 20_000 and not run.truncated
    sd = math.sqrt(4 / (25 * 6))  # Beta(4, 1)
    assert abs(run.parameters[:, 0].mean() - 0.8) < 4 * sd / math.sqrt(run.n_accepted)
    assert np.all(run.summaries == 3.0)


def test_model_choice_matches_enumerated_probability():
    run = abc_model_choice([bernoulli_model(), fixed_coin_model()], None, np.array([1, 1, 1]),
                           AbcConfig(n_accept=20_000, epsilon=0.0), RandomStream(2))
    p = run.accept_counts[0] / run.n_accepted
    assert abs(p - 2 / 3) < 4 * math.sqrt((2 / 9) / run.n_accepted)


@pytest.mark.parametrize("cfg", [
    AbcConfig(n_accept=3000, epsilon=0.0, batch_size=1000),
    AbcConfig(quantile=0.05, max_draws=20_000, batch_size=3000),
])
def test_identical_across_worker_counts(cfg):
    models, y = [bernoulli_model(), fixed_coin_model()], np.array([1, 0, 1, 1])
    runs = [abc_model_choice(models, None, y, AbcConfig(**{**cfg.__dict__, "workers": w}), RandomStream(3))
            for w in (1, 2, 5)]
    for r in runs[1:]:
        assert r.total_draws == runs[0].total_draws
        assert np.array_equal(r.model_index, runs[0].model_index)
        assert np.array_equal(r.parameters, runs[0].parameters, equal_nan=True)


def test_stops_at_target_and_counts_draws():
    run = abc_sample(poisson_model(), [10.0], 5, AbcConfig(n_accept=777, epsilon=1.0, batch_size=500), RandomStream(4))
    assert run.n_accepted == 777
    assert run.draw_counts.sum() == run.total_draws
    assert realised_acceptance_rate(run) == pytest.approx(777 / run.total_draws)
    assert np.all(run.distances <= 1.0)


def test_infinite_tolerance_accepts_everything():
    run = abc_sample(poisson_model(), [10.0], 5, AbcConfig(n_accept=500, epsilon=math.inf), RandomStream(5))
    assert run.total_draws == 500


def test_truncation_is_reported():
    m = normal_model(1.0, 1.0)
    run = abc_sample(m, [0.3], 5, AbcConfig(n_accept=100, epsilon=1e-9, max_draws=5000), RandomStream(6))
    assert run.truncated and run.n_accepted < 100 and run.total_draws == 5000


def test_quantile_mode_with_mad_scaling_and_data():
    m1, m2 = normal_pair(1.0, 3.0, 1.0)
    run = abc_model_choice([m1, m2], None, np.zeros(6), AbcConfig(quantile=0.01, distance="scaled",
                           max_draws=10_000, keep_data=True), RandomStream(7))
    assert run.n_accepted == 100
    assert run.scale is not None and run.scale.shape == (1,)
    assert np.allclose(run.data.mean(axis=1), run.summaries[:, 0])
    assert run.particles[0].model_index in (0, 1)


@pytest.mark.parametrize("kwargs", [
    dict(),
    dict(epsilon=1.0, quantile=0.1),
    dict(epsilon=-1.0),
    dict(quantile=0.0),
    dict(epsilon=1.0, distance="manhattan"),
    dict(epsilon=1.0, scale=(1.0, 0.0)),
    dict(epsilon=1.0, n_accept=0),
])
def test_config_validation(kwargs):
    with pytest.raises(ConfigurationError):
        AbcConfig(**kwargs)


def test_runtime_configuration_errors():
    s = RandomStream(0)
    with pytest.raises(ConfigurationError):
        abc_sample(normal_model(1.0, 1.0), [0.0], 3, AbcConfig(epsilon=0.0), s)
    with pytest.raises(ConfigurationError):
        abc_sample(normal_model(1.0, 1.0), [0.0, 1.0], 3, AbcConfig(epsilon=1.0), s)
    with pytest.raises(ConfigurationError):
        abc_sample(normal_model(1.0, 1.0), [0.0], 3, AbcConfig(epsilon=1.0, distance="scaled"), s)
    with pytest.raises(ConfigurationError):
        abc_model_choice([poisson_model()], None, np.array([1]), AbcConfig(epsilon=1.0), s)
    with pytest.raises(ConfigurationError):
        abc_model_choice([poisson_model(), poisson_model()], [1.0, -1.0], np.array([1]), AbcConfig(epsilon=1.0), s)
