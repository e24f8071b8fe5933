import math

import numpy as np
import pytest

from abclab.errors import ConfigurationError
from abclab.experiments import (
    GrfConfig,
    LimitsConfig,
    MaConfig,
    NormalConfig,
    PoisGeomConfig,
    run_grf,
    run_limits,
    run_ma,
    run_normal,
    run_poisgeom,
)

SMALL = {
    "grf": (run_grf, GrfConfig(n_datasets=12, n_sites=6, proposals=20_000, min_accepts=50, block_size=5000)),
    "poisgeom": (run_poisgeom, PoisGeomConfig(reps=300, block_size=128)),
    "normal": (run_normal, NormalConfig(reps=500, block_size=128)),
    "limits": (run_limits, LimitsConfig()),
    "ma": (run_ma, MaConfig(n=30, datasets=2, table_size=20_000, block_size=4096)),
}


@pytest.mark.parametrize("name", sorted(SMALL))
def test_worker_count_does_not_change_output(name):
    run, cfg = SMALL[name]
    a, b = run(cfg, 11, workers=1), run(cfg, 11, workers=3)
    assert list(a.columns) == list(b.columns)
    for k in a.columns:
        assert np.array_equal(np.asarray(a.columns[k]), np.asarray(b.columns[k]))


def test_grf_rows_and_agreement():
    r = run_grf(GrfConfig(n_datasets=40, proposals=50_000, min_accepts=300), 5)
    assert len(r.columns["dataset"]) == 40
    assert not r.truncated
    assert min(r.columns["accepts_1"] + r.columns["accepts_2"]) >= 300
    err = np.abs(r.columns["log_bf_abc"] - r.columns["log_bf_exact"])
    assert np.mean(err <= 3 * r.columns["mc_se"]) > 0.9


def test_grf_equal_statistics_give_small_bf():
    r = run_grf(GrfConfig(n_datasets=60, proposals=50_000, min_accepts=200), 6)
    eq = r.columns["eta_1"] == r.columns["eta_2"]
    assert eq.any()
    # the two graphs differ by one edge, so equal counts are nearly uninformative
    assert np.all(np.abs(r.columns["log_bf_exact"][eq]) < 1.0)
    assert np.all(np.abs(r.columns["log_bf_abc"][eq]) < 1.0)


def test_grf_truncation_flag():
    r = run_grf(GrfConfig(n_datasets=20, proposals=1000, max_proposals=2000, min_accepts=1000), 1)
    assert r.truncated


def test_grf_enumeration_budget():
    with pytest.raises(ConfigurationError):
        run_grf(GrfConfig(n_sites=24), 0)


def test_grf_paper_scale_flag():
    cfg = GrfConfig(paper_scale=True).scaled()
    assert (cfg.n_datasets, cfg.proposals) == (2000, 4 * 10**6)
    assert cfg.max_proposals >= cfg.proposals and cfg.scaled() == cfg


def test_poisgeom_single_replication():
    r = run_poisgeom(PoisGeomConfig(reps=1, growth_ns=(20,)), 0)
    law = np.array(r.columns["law"])
    assert (law == "poisson").sum() == 1
    assert math.isfinite(r.columns["log_bf"][0]) and math.isfinite(r.columns["log_bf_summary"][0])


def test_normal_equal_scales_all_zero():
    r = run_normal(NormalConfig(sigma1=1.0, sigma2=1.0, reps=200), 0)
    assert np.all(np.array(r.columns["log_ratio"]) == 0.0)
    assert len(r.columns["log_ratio"]) == 400


def test_limits_columns():
    r = run_limits(LimitsConfig(n_grid=(10, 100)), 0)
    assert r.columns["study"].count("poisgeom_paper") == 2
    assert r.diagnostics["poisgeom_constant_gap"] == pytest.approx(math.log(2.0))


def test_ma_output_layout():
    r = run_ma(MaConfig(n=30, datasets=2, table_size=20_000), 0)
    assert "log_bf_abc_q0.001" in r.columns and "mc_se_q0.1" in r.columns
    assert r.columns["law"] == ["ma2", "ma2", "ma1", "ma1"]
    with pytest.raises(ConfigurationError):
        run_ma(MaConfig(distance="manhattan"), 0)
