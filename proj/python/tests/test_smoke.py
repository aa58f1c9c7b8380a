import math

import numpy as np
import pytest

import cascadelab as cl


def test_closed_forms():
    for s in np.linspace(-1.0, 2.0, 13):
        assert cl.phi(s) == pytest.approx(2 * s - s * s, abs=1e-12)
    assert cl.phi_tilde(0.5) == pytest.approx(0.25)
    assert cl.q_beta(0.5) == pytest.approx(4.0)
    assert cl.tau_star(1.0) == pytest.approx(0.75)
    assert cl.kpz_solve(math.log(2) / math.log(3)) == pytest.approx(0.39248848, abs=1e-7)
    assert cl.c_alpha(0.5) == pytest.approx(0.25 + 2 * math.log(2), abs=1e-12)


def test_leaves_and_measure():
    x = cl.leaf_weights(8, seed=3)
    assert x.shape == (256,)
    assert np.array_equal(x, cl.leaf_weights(8, seed=3))
    assert not np.array_equal(x, cl.leaf_weights(8, seed=3, replica=1))
    mu = cl.measure(8, beta=0.5, seed=3)
    assert mu.shape == (256,)
    assert np.all(mu > 0)


def test_total_mass_mean_subcritical():
    # E Z_beta,n = 2^{n phi~(beta)}, so the normalized totals average to one.
    z = cl.total_mass(8, beta=0.5, replicas=4000, seed=11)
    se = z.std(ddof=1) / math.sqrt(z.size)
    assert abs(z.mean() - 1.0) < 4 * se


def test_stable_half_laplace():
    x = cl.stable(0.5, count=20000, seed=5)
    est = np.exp(-x).mean()
    se = np.exp(-x).std(ddof=1) / math.sqrt(x.size)
    assert abs(est - math.exp(-1.0)) < 4 * se


def test_front_speed():
    t = cl.front_tracking(0.5, 60)
    assert t["m"][-1] - t["m"][-2] == pytest.approx(cl.c_alpha(0.5), abs=1e-3)


def test_subordinate_mass_is_finite():
    out = cl.subordinate(8, beta=1.0, alpha=0.5, seed=2)
    assert out["total"] > 0
    assert len(out["cells"]) == 256


def test_run_experiment_report():
    rep = cl.run_experiment("wavefront", {"alpha": "0.5", "iterations": "60"})
    assert rep["schema_version"] == 1
    assert rep["passed"]
    assert rep["statistics"]["speed"] == pytest.approx(1.636294, abs=1e-3)


def test_config_errors_are_value_errors():
    with pytest.raises(ValueError):
        cl.run_experiment("tail", {"replicas": "0"})
    with pytest.raises(ValueError):
        cl.run_experiment("nonsense")


def test_verify_subset():
    rows = cl.verify("quick", ["A1", "A6"])
    assert [r[0] for r in rows] == ["A1", "A6"]
    assert all(r[1] for r in rows)
