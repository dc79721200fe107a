import numpy as np
import pytest

from aafusion import BernoulliComponent, ContractError, GaussianMixture, LmbDensity
from aafusion.filters import (
    BirthModel,
    MotionModel,
    SensorModel,
    bernoulli_predict,
    bernoulli_update,
    extract_states,
    lmb_predict,
    lmb_update,
    phd_predict,
    phd_update,
)

STATIC = MotionModel(np.eye(4), np.zeros((4, 4)), p_survival=1.0)


def target_gm(mass=1.0, pos=(0.0, 0.0), var=1.0):
    return GaussianMixture.single([pos[0], 0.0, pos[1], 0.0], np.eye(4) * var).scaled(mass)


class TestModels:
    def test_constant_velocity_shape(self):
        m = MotionModel.constant_velocity(dt=2.0, noise=1.0)
        assert m.dim == 4
        np.testing.assert_allclose(m.F @ [1, 1, 0, 0], [3, 1, 0, 0])

    def test_q_must_be_psd(self):
        with pytest.raises(ContractError):
            MotionModel(np.eye(2), -np.eye(2))

    def test_r_must_be_pd(self):
        with pytest.raises(ContractError):
            SensorModel(np.eye(2), np.zeros((2, 2)))

    def test_clutter_density(self):
        s = SensorModel.position(clutter_rate=10.0, region=((0, 0), (10, 20)))
        assert s.clutter_density == pytest.approx(10 / 200)


class TestPhd:
    def test_predict_identity(self):
        g = target_gm(2.0)
        out = phd_predict(g, STATIC)
        np.testing.assert_array_equal(out.means, g.means)
        np.testing.assert_array_equal(out.covs, g.covs)
        np.testing.assert_array_equal(out.weights, g.weights)

    def test_predict_mass(self):
        motion = MotionModel(np.eye(4), np.eye(4), p_survival=0.9)
        out = phd_predict(target_gm(2.0), motion, BirthModel(target_gm(0.1, (5, 5))))
        assert out.mass == pytest.approx(1.9)

    def test_covariance_grows_by_q(self):
        Q = np.diag([0.1, 0.2, 0.3, 0.4])
        out = phd_predict(target_gm(), MotionModel(np.eye(4), Q, 1.0))
        np.testing.assert_allclose(out.covs[0], np.eye(4) + Q)

    def test_update_no_detection_probability(self):
        s = SensorModel.position(p_detect=0.0, clutter_rate=5.0)
        assert phd_update(target_gm(1.7), [[0.0, 0.0]], s).mass == pytest.approx(1.7)

    def test_update_no_measurements(self):
        s = SensorModel.position(p_detect=0.9)
        assert phd_update(target_gm(2.0), np.empty((0, 2)), s).mass == pytest.approx(0.2)

    def test_far_measurement_heavy_clutter(self):
        s = SensorModel.position(p_detect=0.9, clutter_rate=50.0)
        assert phd_update(target_gm(1.0), [[80.0, 80.0]], s).mass == pytest.approx(0.1, rel=0.01)

    def test_update_mass_formula(self):
        # one component, one measurement: mass = (1 - pD) w + pD w q / (kappa + pD w q)
        s = SensorModel.position(sigma=1.0, p_detect=0.8, clutter_rate=4.0)
        g = target_gm(1.0, var=1.0)
        z = np.array([0.5, -0.3])
        q = np.exp(-0.5 * z @ z / 2.0) / (2 * np.pi * 2.0)
        expected = 0.2 + 0.8 * q / (s.clutter_density + 0.8 * q)
        assert phd_update(g, [z], s).mass == pytest.approx(expected, rel=1e-12)

    def test_single_target_mass_converges(self):
        motion = MotionModel.constant_velocity(noise=1e-3, p_survival=1.0)
        s = SensorModel.position(sigma=0.5, p_detect=1.0, clutter_rate=0.0)
        birth = BirthModel(target_gm(0.1, (0, 0), var=25.0))
        phd = GaussianMixture.empty(4)
        x = np.array([1.0, 1.0, -2.0, 0.5])
        for _ in range(3):
            phd = phd_update(phd_predict(phd, motion, birth), [x[[0, 2]]], s)
            x = motion.F @ x
        assert 0.9 <= phd.mass <= 1.1

    def test_deterministic(self):
        s = SensorModel.position(clutter_rate=3.0)
        Z = np.random.default_rng(0).normal(size=(5, 2))
        a, b = (phd_update(target_gm(1.0), Z, s) for _ in range(2))
        np.testing.assert_array_equal(a.weights, b.weights)
        np.testing.assert_array_equal(a.means, b.means)


class TestBernoulli:
    def test_predict_identity(self):
        bc = BernoulliComponent(0.7, target_gm())
        out = bernoulli_predict(bc, STATIC)
        assert out.existence == 0.7
        np.testing.assert_array_equal(out.spd.means, bc.spd.means)

    def test_predict_existence(self):
        motion = MotionModel(np.eye(4), np.eye(4), p_survival=0.9)
        out = bernoulli_predict(BernoulliComponent(0.5, target_gm()), motion, 0.2, target_gm(pos=(5, 5)))
        assert out.existence == pytest.approx(0.2 * 0.5 + 0.9 * 0.5)
        assert out.spd.mass == pytest.approx(1.0)

    def test_birth_needs_spd(self):
        with pytest.raises(ContractError):
            bernoulli_predict(BernoulliComponent(0.5, target_gm()), STATIC, 0.1)

    def test_no_detection_probability(self):
        bc = BernoulliComponent(0.6, target_gm())
        out = bernoulli_update(bc, np.empty((0, 2)), SensorModel.position(p_detect=0.0))
        assert out.existence == pytest.approx(0.6)
        np.testing.assert_allclose(out.spd.means, bc.spd.means)

    def test_certain_misdetection(self):
        out = bernoulli_update(BernoulliComponent(1.0, target_gm()), np.empty((0, 2)),
                               SensorModel.position(p_detect=1.0, clutter_rate=0.0))
        assert out.existence == 0.0

    def test_missed_detection_existence(self):
        out = bernoulli_update(BernoulliComponent(0.5, target_gm()), np.empty((0, 2)),
                               SensorModel.position(p_detect=0.9))
        assert out.existence == pytest.approx(0.05 / 0.55)

    def test_measurement_without_clutter_confirms(self):
        out = bernoulli_update(BernoulliComponent(0.3, target_gm()), [[0.2, 0.1]],
                               SensorModel.position(p_detect=0.9, clutter_rate=0.0))
        assert out.existence == 1.0

    def test_existence_in_unit_interval(self):
        rng = np.random.default_rng(1)
        s = SensorModel.position(p_detect=0.95, clutter_rate=2.0, region=((-5, -5), (5, 5)))
        for _ in range(50):
            bc = BernoulliComponent(rng.uniform(), target_gm(pos=rng.normal(size=2)))
            out = bernoulli_update(bc, rng.uniform(-5, 5, (rng.integers(0, 4), 2)), s)
            assert 0.0 <= out.existence <= 1.0
            if out.existence > 0:
                assert out.spd.mass == pytest.approx(1.0)


class TestLmb:
    def test_births(self):
        birth = BirthModel(GaussianMixture.concatenate([target_gm(0.1, (0, 0)), target_gm(0.2, (10, 10))]))
        out = lmb_predict(LmbDensity({}), STATIC, birth, time=3)
        assert out.labels == ((3, 0), (3, 1))
        assert [out.tracks[l].existence for l in out.labels] == pytest.approx([0.1, 0.2])

    def test_labels_preserved_and_unique(self):
        birth = BirthModel(target_gm(0.1))
        lmb = LmbDensity({})
        for t in range(4):
            lmb = lmb_predict(lmb, STATIC, birth, time=t)
        assert lmb.labels == tuple((t, 0) for t in range(4))

    def test_label_collision(self):
        lmb = lmb_predict(LmbDensity({}), STATIC, BirthModel(target_gm(0.1)), time=0)
        with pytest.raises(ContractError):
            lmb_predict(lmb, STATIC, BirthModel(target_gm(0.1)), time=0)

    def test_single_target_confirmed(self):
        motion = MotionModel.constant_velocity(noise=0.1)
        s = SensorModel.position(p_detect=0.95, clutter_rate=1.0)
        rng = np.random.default_rng(7)
        x = np.array([0.0, 1.0, 0.0, -0.5])
        lmb = lmb_predict(LmbDensity({}), motion, BirthModel(target_gm(0.1, (0, 0), var=4.0)), time=0)
        for t in range(5):
            if t:
                lmb = lmb_predict(lmb, motion, None, time=t)
            Z = [x[[0, 2]] + rng.normal(size=2)] if rng.random() < 0.95 else []
            lmb = lmb_update(lmb, Z, s)
            x = motion.F @ x
        assert lmb.tracks[(0, 0)].existence > 0.9

    def test_two_tracks_split_measurements(self):
        s = SensorModel.position(p_detect=0.9, clutter_rate=1.0)
        lmb = LmbDensity({(0, 0): BernoulliComponent(0.5, target_gm(pos=(0, 0))),
                          (0, 1): BernoulliComponent(0.5, target_gm(pos=(30, 30)))})
        out = lmb_update(lmb, [[0.1, 0.0], [30.0, 29.8]], s)
        for l, pos in [((0, 0), (0, 0)), ((0, 1), (30, 30))]:
            assert out.tracks[l].existence > 0.9
            np.testing.assert_allclose(out.tracks[l].spd.means[0, [0, 2]], pos, atol=0.5)

    def test_pruning(self):
        s = SensorModel.position(p_detect=1.0, clutter_rate=1.0)
        out = lmb_update(LmbDensity({(0, 0): BernoulliComponent(1e-3, target_gm())}), np.empty((0, 2)), s)
        assert out.labels == ()


class TestExtract:
    def test_small_phd(self):
        assert extract_states(target_gm(0.2)) == []

    def test_two_unit_components(self):
        g = GaussianMixture.concatenate([target_gm(1.0, (0, 0)), target_gm(1.0, (5, 5))])
        states = extract_states(g)
        assert len(states) == 2 and all(l is None for _, l in states)
        assert sorted(tuple(x[[0, 2]]) for x, _ in states) == [(0, 0), (5, 5)]

    def test_lmb_threshold(self):
        lmb = LmbDensity({(1, 0): BernoulliComponent(0.95, target_gm()),
                          (1, 1): BernoulliComponent(0.1, target_gm(pos=(3, 3)))})
        states = extract_states(lmb, 0.5)
        assert len(states) == 1 and states[0][1] == (1, 0)

    def test_bernoulli(self):
        assert len(extract_states(BernoulliComponent(0.6, target_gm()))) == 1
        assert extract_states(BernoulliComponent(0.4, target_gm())) == []
