import math

import numpy as np
import pytest

import bccp


def test_quantile_and_pvalue():
    assert bccp.finite_sample_quantile(list(range(1, 100)), 0.1) == 90
    assert math.isinf(bccp.finite_sample_quantile([5.0], 0.1))
    assert bccp.conformal_pvalue(10, [1, 2, 3]) == pytest.approx(0.25)


def test_two_segment_set():
    y = [5.0] * 9 + [20.0] * 9
    yh = [5.2] * 9 + [25.0] * 9
    part = bccp.bins_from_cutpoints([10.0], 0.0)
    cal = bccp.Calibration(y, yh, 0.1, part)
    segs = cal.bccp_d(9.5)
    assert len(segs) == 2
    assert segs[0] == pytest.approx((9.3, 9.7))
    assert segs[1] == pytest.approx((10.0, 14.5))
    assert cal.bccp_c(9.5) == pytest.approx((9.3, 14.5))


def test_one_bin_matches_scp():
    x, y = bccp.lognormal_dgp(400, 3)
    yh = np.exp(np.log(y) + np.random.default_rng(0).normal(0, 0.3, y.size))
    cal = bccp.Calibration(y, yh, 0.1, bccp.Partition.whole(0.0))
    for v in (0.5, 2.0, 10.0):
        assert cal.bccp_d(v) == [cal.scp(v)]


def test_baselines():
    assert bccp.poisson_interval(4, 0.1) == (1, 8)
    lo, hi = bccp.lognormal_interval(0.0, 1.0, 0.1)
    assert lo == pytest.approx(math.exp(-1.6448536), abs=1e-6)
    assert hi == pytest.approx(math.exp(1.6448536), rel=1e-6)
    x = np.column_stack([np.linspace(0, 1, 50)])
    fit = bccp.quantreg_fit(x, list(2 * x[:, 0] + 1), 0.5)
    assert fit.converged
    assert fit.coefficients == pytest.approx([1.0, 2.0], abs=1e-8)


def test_dgps_and_errors():
    x, y = bccp.zero_inflated_count_dgp(1000, 5, zero_prob=1.0)
    assert x.shape == (1000, 2)
    assert (y == 0).all()
    with pytest.raises(bccp.BccpError):
        bccp.finite_sample_quantile([], 0.1)


def test_study_rows():
    rows = bccp.run_study("lognormal", replications=2, n=2000, methods=["scp", "bccp-d=percentiles:4"])
    labels = {(r["method"], r["group"]) for r in rows}
    assert ("scp", "all") in labels
    overall = [r for r in rows if r["group"] == "all"]
    for r in overall:
        assert 0.8 < r["coverage"] < 1.0
