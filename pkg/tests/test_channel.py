import numpy as np
import pytest
from scipy import stats

from uplinkcomp.channel import (FadingDraw, LinkAttenuations, PowerConfig, ScenarioGeometry,
                                apply_power_control, attenuations, db_to_linear, default_x_max,
                                link_attenuations, linear_to_db, rate_to_threshold, sample_fading,
                                sample_interference, sample_ppp)
from uplinkcomp.ppp import PppModel


@pytest.mark.parametrize("z, t, expected", [
    (2.0, -2.0, (17, 17, 17, 17)),
    (0.0, 0.0, (1, 257, 257, 1)),
    (1.0, -1.0, (2, 82, 82, 2)),
])
def test_attenuations_from_positions(z, t, expected):
    la = link_attenuations(ScenarioGeometry(2.0, 4.0, z, t))
    assert (la.l11, la.l12, la.l21, la.l22) == expected


def test_attenuations_vectorised_match_scalar():
    z = np.array([0.3, -1.2, 2.0])
    t = np.array([-0.7, 1.9, -2.0])
    la = attenuations(z, t, 2.0, 3.5)
    for k in range(3):
        one = attenuations(z[k], t[k], 2.0, 3.5)
        assert la.l12[k] == one.l12 and la.l21[k] == one.l21


@pytest.mark.parametrize("z, t", [(2.5, 0.0), (0.0, -2.1)])
def test_positions_outside_cell_rejected(z, t):
    with pytest.raises(ValueError):
        ScenarioGeometry(2.0, 4.0, z, t)


def test_interval_geometry_needs_point_for_attenuations():
    with pytest.raises(ValueError):
        link_attenuations(ScenarioGeometry(2.0, 4.0, (1.0, 2.0), -2.0))
    with pytest.raises(ValueError):
        ScenarioGeometry(2.0, 4.0, (2.0, 1.0), -2.0)


def test_power_control_examples():
    edge = apply_power_control(LinkAttenuations(17.0, 17.0, 17.0, 17.0))
    assert (edge.l11, edge.l12, edge.l21, edge.l22) == (1.0, 1.0, 1.0, 1.0)
    mid = apply_power_control(LinkAttenuations(2.0, 82.0, 82.0, 2.0))
    assert mid.l12 == 41.0 and mid.l21 == 41.0
    centre = LinkAttenuations(1.0, 257.0, 257.0, 1.0)
    assert apply_power_control(centre) == centre


def test_power_control_own_links_exactly_one():
    rng = np.random.default_rng(4)
    la = attenuations(rng.uniform(-2, 2, 1000), rng.uniform(-2, 2, 1000), 2.0, 3.7)
    pc = apply_power_control(la)
    assert np.all(pc.l11 == 1.0) and np.all(pc.l22 == 1.0)


def test_power_config():
    cfg = PowerConfig.from_db(20.0, 0.0)
    assert cfg.P == pytest.approx(100.0) and cfg.theta1 == cfg.theta2 == pytest.approx(1.0)
    with pytest.raises(ValueError):
        PowerConfig(1.0, 1.0, 1.0, "adaptive")
    with pytest.raises(ValueError):
        PowerConfig(-1.0, 1.0, 1.0)
    la = LinkAttenuations(2.0, 82.0, 82.0, 2.0)
    assert PowerConfig(10.0, 1.0, 1.0, "compensation").equivalent_attenuations(la).l12 == 41.0
    assert PowerConfig(10.0, 1.0, 1.0).equivalent_attenuations(la) is la


def test_unit_helpers():
    assert db_to_linear(10.0) == pytest.approx(10.0)
    assert linear_to_db(100.0) == pytest.approx(20.0)
    np.testing.assert_allclose(db_to_linear(np.array([0.0, 20.0])), [1.0, 100.0])
    assert rate_to_threshold(1.0) == 1.0


def test_fading_replay_is_deterministic():
    la = LinkAttenuations(17.0, 17.0, 17.0, 17.0)
    a = sample_fading(la, np.random.default_rng(11), 5)
    b = sample_fading(la, np.random.default_rng(11), 5)
    np.testing.assert_array_equal(a.g, b.g)


def test_fading_marginals():
    n = 1_000_000
    la = LinkAttenuations(17.0, 5.0, 82.0, 1.0)
    draw = sample_fading(la, np.random.default_rng(2), n)
    hsq = draw.hsq
    assert abs(hsq[0, 0].mean() - 1 / 17) < 3 * (1 / 17) / np.sqrt(n)
    assert abs(np.corrcoef(hsq[0, 0], hsq[1, 0])[0, 1]) < 0.005
    np.testing.assert_allclose(np.abs(draw.h) ** 2, hsq, rtol=1e-12)


@pytest.mark.parametrize("i, j, lam", [(0, 0, 17.0), (0, 1, 5.0), (1, 0, 82.0), (1, 1, 1.0)])
def test_fading_ks(i, j, lam):
    la = LinkAttenuations(17.0, 5.0, 82.0, 1.0)
    hsq = sample_fading(la, np.random.default_rng(8), 100_000).hsq[i, j]
    # 1% critical value of the one-sample KS statistic
    assert stats.kstest(hsq, "expon", args=(0, 1 / lam)).statistic < 1.63 / np.sqrt(len(hsq))


def test_fading_mirror_and_from_hsq():
    la = LinkAttenuations(2.0, 3.0, 4.0, 5.0)
    draw = sample_fading(la, np.random.default_rng(0))
    m = draw.mirrored()
    assert m.hsq[0, 0] == draw.hsq[1, 1] and m.hsq[0, 1] == draw.hsq[1, 0]
    fixed = FadingDraw.from_hsq([[0.2, 0.1], [5.0, 0.3]])
    np.testing.assert_allclose(fixed.hsq, [[0.2, 0.1], [5.0, 0.3]])


def test_ppp_empty_and_window_checks():
    geom = ScenarioGeometry()
    r = sample_ppp(geom, 0.0, np.random.default_rng(0), x_max=50.0)
    assert r.I1 == 0.0 and r.I2 == 0.0 and len(r.points) == 0
    with pytest.raises(ValueError):
        sample_ppp(geom, 0.25, np.random.default_rng(0), x_max=4.0)
    with pytest.raises(ValueError):
        sample_interference(10, 2.0, 4.0, 0.25, np.random.default_rng(0), x_max=3.0)


def test_ppp_points_outside_cluster_and_count():
    geom = ScenarioGeometry()
    rng = np.random.default_rng(3)
    counts = []
    for _ in range(2000):
        r = sample_ppp(geom, 0.25, rng, x_max=50.0)
        assert np.all(np.abs(r.points) >= 4.0) and np.all(np.abs(r.points) <= 50.0)
        counts.append(len(r.points))
    mean = 0.25 * 2 * 46
    assert abs(np.mean(counts) - mean) < 3 * np.sqrt(mean / len(counts))


def test_ppp_mean_interference_matches_campbell():
    n = 100_000
    i1, i2 = sample_interference(n, 2.0, 4.0, 0.25, np.random.default_rng(5), x_max=50.0)
    model = PppModel(0.25, 2.0, 4.0)
    se = i1.std() / np.sqrt(n)
    assert abs(i1.mean() - model.mean_I1()) < 3 * se
    assert abs(i2.mean() - model.mean_I2()) < 3 * i2.std() / np.sqrt(n)


def test_single_and_batched_field_samplers_agree():
    geom = ScenarioGeometry()
    rng = np.random.default_rng(6)
    single = np.array([sample_ppp(geom, 0.25, rng, x_max=50.0).I1 for _ in range(20_000)])
    batch, _ = sample_interference(20_000, 2.0, 4.0, 0.25, np.random.default_rng(7), x_max=50.0)
    se = np.hypot(single.std(), batch.std()) / np.sqrt(20_000)
    assert abs(single.mean() - batch.mean()) < 4 * se


def test_truncation_radius_effect():
    geom = ScenarioGeometry()
    rng = np.random.default_rng(9)
    full, cut = [], []
    for _ in range(5000):
        r = sample_ppp(geom, 0.25, rng, x_max=100.0)
        keep = np.abs(r.points) <= 50.0
        inner = np.sum(r.marks[keep, 0] / (1 + np.abs(r.points[keep] + 2.0) ** 4))
        full.append(r.I1)
        cut.append(inner)
        # extending the window only adds nonnegative terms
        assert r.I1 >= inner
    assert (np.sum(full) - np.sum(cut)) / np.sum(full) < 1e-3


def test_power_scale_multiplies_interference():
    a, _ = sample_interference(100, 2.0, 4.0, 0.25, np.random.default_rng(1), x_max=50.0)
    b, _ = sample_interference(100, 2.0, 4.0, 0.25, np.random.default_rng(1), x_max=50.0,
                               power_scale=17.0)
    np.testing.assert_allclose(b, 17.0 * a)


def test_default_truncation_radius():
    assert default_x_max(2.0, 4.0) == pytest.approx(4.0 + 10 ** 1.5 * 4.0)
