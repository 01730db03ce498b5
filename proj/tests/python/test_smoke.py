import numpy as np
import pytest

import pcluster


def panel(seed=0, N=20, T=16):
    d = pcluster.simulate_panel(N=N, T=T, burn_in=200, seed=seed)
    return d["y"], [d["x"]]


def test_simulate_panel_reconstructs():
    d = pcluster.simulate_panel(N=10, T=8, beta=0.5, burn_in=100, seed=3)
    assert d["y"].shape == (10, 8)
    np.testing.assert_allclose(d["y"], 0.5 * d["x"] + d["f"] + d["v"], atol=1e-12)
    np.testing.assert_allclose(d["x"], d["h"] + d["u"], atol=1e-12)


def test_baseline_with_single_clusters_matches_twfe():
    y, x = panel()
    b = pcluster.estimate(y, x, G=1, C=1)
    t = pcluster.estimate(y, x, estimator="twfe")
    np.testing.assert_allclose(b["beta"], t["beta"], rtol=1e-10)
    assert b["G"] == [1] and b["C"] == [1]


@pytest.mark.parametrize("name", pcluster.ESTIMATORS)
def test_every_estimator_runs(name):
    y, x = panel(seed=1, N=24, T=24)
    r = pcluster.estimate(y, x, estimator=name)
    assert r["method"].startswith(name)
    assert np.isfinite(r["beta"]).all() and (r["se"] > 0).all()


def test_seed_determinism():
    y, x = panel(seed=2)
    a = pcluster.estimate(y, x, seed=9)
    b = pcluster.estimate(y, x, seed=9)
    assert a["beta"][0] == b["beta"][0]
    assert a["G"] == b["G"]


def test_cluster_outputs():
    y, x = panel(seed=4)
    c = pcluster.cluster(y, x)
    assert len(c["unit_labels"]) == 20 and len(c["time_labels"]) == 16
    assert max(c["unit_labels"]) + 1 == c["G"]
    assert c["time_centers"].shape == (c["C"], 2)


def test_errors_carry_kind():
    y = np.ones((4, 4))
    with pytest.raises(pcluster.PanelError) as info:
        pcluster.estimate(y, [np.arange(16.0).reshape(4, 4)], G=4, C=4)
    assert info.value.kind == "InsufficientDof"
    with pytest.raises(ValueError):
        pcluster.estimate(np.full((3, 3), np.nan), [y[:3, :3]])


def test_monte_carlo_smoke():
    rows = pcluster.monte_carlo(["baseline", "twfe"], reps=3, N=12, T=12, burn_in=100, seed=5)
    assert [r["estimator"] for r in rows] == ["baseline", "twfe"]
    assert all(r["n_failed"] == 0 for r in rows)
    assert np.isnan(rows[1]["G_hat"])


def test_csv_reader(tmp_path):
    path = tmp_path / "p.csv"
    path.write_text("unit,time,y,x1\na,1,1,2\na,2,3,4\nb,1,5,6\nb,2,7,9\n")
    d = pcluster.read_panel_csv(str(path))
    assert d["unit_ids"] == ["a", "b"]
    np.testing.assert_array_equal(d["x"][0], [[2, 4], [6, 9]])


def test_eigenvalue_ratio():
    assert pcluster.eigenvalue_ratio_factors([10, 9, 1, 0.5], 3) == 2
