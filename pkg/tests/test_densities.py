import math

import numpy as np
import pytest

from aafusion import (
    BernoulliComponent,
    CardinalityPmf,
    ContractError,
    DeltaGlmbDensity,
    GaussianMixture,
    GlmbDensity,
    Hypothesis,
    IidcDensity,
    Label,
    LabelSetHypothesis,
    LmbDensity,
    MbMixture,
    MglmbDensity,
    MultiBernoulli,
    PoissonDensity,
    cardinality_of,
    delta_glmb_to_glmb,
    labeled_set_density_eval,
    lmb_from_delta_glmb,
    lphd_of,
    marginalize_delta_glmb,
    phd_of,
    set_density_eval,
)
from aafusion.densities import DensityWarning
from aafusion.phd import UnsupportedCardinality
from aafusion.serialization import SchemaError, dumps, from_dict, loads, to_dict
from factories import hypothesis_universe, n1, random_delta_glmb, random_glmb, random_lmb, random_unlabeled

S = n1()


class TestValidation:
    def test_unnormalized_spd_is_renormalized_with_warning(self):
        with pytest.warns(DensityWarning):
            bc = BernoulliComponent(0.5, GaussianMixture.single([0.0], [[1.0]], weight=1.1))
        assert bc.spd.mass == pytest.approx(1.0)

    def test_existence_out_of_range(self):
        with pytest.raises(ContractError):
            BernoulliComponent(1.2, S)

    def test_zero_existence_may_have_empty_spd(self):
        assert BernoulliComponent(0.0, GaussianMixture.empty(1)).existence == 0.0

    def test_cardinality_pmf_must_sum_to_one(self):
        with pytest.warns(DensityWarning):
            p = CardinalityPmf(np.array([0.5, 0.6]))
        assert p.probs.sum() == pytest.approx(1.0)

    def test_delta_glmb_needs_every_track_density(self):
        with pytest.raises(ContractError):
            DeltaGlmbDensity((Hypothesis({(0, 0)}, "x", 1.0),), {})

    def test_mglmb_label_sets_distinct(self):
        h = LabelSetHypothesis({(0, 0)}, 0.5)
        with pytest.raises(ContractError):
            MglmbDensity((h, h), {(frozenset({(0, 0)}), (0, 0)): S})

    def test_labels_are_ordered(self):
        assert Label(0, 5) < Label(1, 0) < Label(1, 1)
        assert str(Label(3, 1)) == "(3;1)"


class TestPhd:
    def test_poisson(self):
        assert phd_of(PoissonDensity(2.0, S)).mass == pytest.approx(2.0)

    def test_bernoulli(self):
        d = phd_of(BernoulliComponent(0.7, S))
        assert d.mass == pytest.approx(0.7)
        assert d.pdf([0.3]) == pytest.approx(0.7 * S.pdf([0.3]))

    def test_iidc(self):
        d = IidcDensity(CardinalityPmf.from_dict({0: 0.5, 2: 0.5}), S)
        assert phd_of(d).mass == pytest.approx(1.0)

    def test_mbm_hypothesis_weight_scales_existence(self):
        mbm = MbMixture(((0.25, MultiBernoulli((BernoulliComponent(0.8, S),))),
                         (0.75, MultiBernoulli((BernoulliComponent(0.4, S), BernoulliComponent(1.0, n1(3.0)))))))
        assert phd_of(mbm).mass == pytest.approx(0.25 * 0.8 + 0.75 * 1.4)

    def test_labeled_density_rejected(self):
        with pytest.raises(TypeError):
            phd_of(LmbDensity({}))


class TestLphd:
    def test_lmb_track(self):
        lmb = LmbDensity({(1, 0): BernoulliComponent(0.4, S)})
        assert lphd_of(lmb, (1, 0)).mass == pytest.approx(0.4)

    def test_unknown_label_gives_zero(self):
        lmb = LmbDensity({(1, 0): BernoulliComponent(0.4, S)})
        assert lphd_of(lmb, (7, 7)).mass == 0.0

    def test_delta_glmb_single_hypothesis(self):
        d = DeltaGlmbDensity((Hypothesis({(0, 0)}, "xi0", 1.0),), {("xi0", (0, 0)): S})
        assert lphd_of(d, (0, 0)).mass == pytest.approx(1.0)

    def test_delta_glmb_indicator_sum(self):
        d = DeltaGlmbDensity(
            (Hypothesis({(0, 0)}, "a", 0.3), Hypothesis({(0, 1)}, "b", 0.7)),
            {("a", (0, 0)): S, ("b", (0, 1)): n1(2.0)},
        )
        assert lphd_of(d, (0, 0)).mass == pytest.approx(0.3)

    def test_glmb_label_marginal_convention(self):
        L1, L2 = frozenset({(0, 0)}), frozenset({(0, 0), (0, 1)})
        g = GlmbDensity(("c",), {("c", L1): 0.2, ("c", L2): 0.5, ("c", frozenset()): 0.3},
                        {("c", (0, 0)): S, ("c", (0, 1)): n1(1.0)})
        assert lphd_of(g, (0, 0)).mass == pytest.approx(0.7)
        assert lphd_of(g, (0, 1)).mass == pytest.approx(0.5)

    def test_conversions_keep_lphd(self):
        rng = np.random.default_rng(5)
        d = random_delta_glmb(rng, hypothesis_universe(rng, 6))
        converted = [delta_glmb_to_glmb(d), marginalize_delta_glmb(d), lmb_from_delta_glmb(d)]
        x = rng.normal(size=(7, 2))
        for l in d.labels:
            ref = lphd_of(d, l)
            for c in converted:
                got = lphd_of(c, l, dim=2)
                assert got.mass == pytest.approx(ref.mass, abs=1e-12)
                np.testing.assert_allclose(got.pdf(x), ref.pdf(x), atol=1e-12)


class TestCardinality:
    def test_bernoulli(self):
        np.testing.assert_allclose(cardinality_of(BernoulliComponent(0.3, S)).probs, [0.7, 0.3])

    def test_mb_convolution(self):
        mb = MultiBernoulli((BernoulliComponent(0.5, S), BernoulliComponent(0.5, S)))
        np.testing.assert_allclose(cardinality_of(mb).probs, [0.25, 0.5, 0.25])

    def test_poisson_series(self):
        pmf = cardinality_of(PoissonDensity(1.0, S), n_max=10)
        expected = np.array([math.exp(-1) / math.factorial(n) for n in range(11)])
        np.testing.assert_allclose(pmf.probs, expected / expected.sum(), rtol=1e-12)
        assert pmf.probs[1] == pytest.approx(0.3679, abs=1e-4)
        assert not pmf.truncated

    def test_truncation_flag(self):
        assert cardinality_of(PoissonDensity(20.0, S), n_max=10).truncated

    def test_mb_mean_is_sum_of_existences(self):
        rng = np.random.default_rng(1)
        for _ in range(20):
            mb = random_unlabeled("mb", rng)
            assert cardinality_of(mb).mean() == pytest.approx(sum(bc.existence for bc in mb), abs=1e-12)

    @pytest.mark.parametrize("family", ["poisson", "iidc", "bernoulli", "mb", "mbm"])
    def test_phd_mass_equals_mean_cardinality(self, family):
        rng = np.random.default_rng(11)
        for _ in range(10):
            d = random_unlabeled(family, rng)
            assert phd_of(d).mass == pytest.approx(cardinality_of(d, n_max=60).mean(), abs=1e-9)

    def test_labeled_cardinality_from_label_sets(self):
        d = DeltaGlmbDensity(
            (Hypothesis(set(), "a", 0.2), Hypothesis({(0, 0), (0, 1)}, "b", 0.8)),
            {("b", (0, 0)): S, ("b", (0, 1)): S},
        )
        np.testing.assert_allclose(cardinality_of(d).probs, [0.2, 0.0, 0.8])


class TestSetDensity:
    def test_bernoulli_cases(self):
        bc = BernoulliComponent(0.8, S)
        assert set_density_eval(bc, []) == 1.0 - 0.8
        assert set_density_eval(bc, [[0.5]]) == 0.8 * S.pdf([0.5])
        assert set_density_eval(bc, [[0.5], [1.0]]) == 0.0

    def test_poisson_empty_set(self):
        assert set_density_eval(PoissonDensity(1.0, S), []) == pytest.approx(math.exp(-1))

    def test_mb_pair_sums_both_assignments(self):
        s2 = n1(2.0)
        mb = MultiBernoulli((BernoulliComponent(0.6, S), BernoulliComponent(0.3, s2)))
        x, y = 0.1, 1.7
        expected = 0.6 * 0.3 * (S.pdf([x]) * s2.pdf([y]) + S.pdf([y]) * s2.pdf([x]))
        assert set_density_eval(mb, [[x], [y]]) == pytest.approx(expected, rel=1e-14)

    def test_mb_refuses_large_sets(self):
        mb = MultiBernoulli(tuple(BernoulliComponent(0.5, S) for _ in range(6)))
        with pytest.raises(UnsupportedCardinality):
            set_density_eval(mb, np.zeros((5, 1)))

    def test_lmb_labeled_density(self):
        lmb = LmbDensity({(0, 0): BernoulliComponent(0.6, S), (0, 1): BernoulliComponent(0.3, n1(2.0))})
        assert labeled_set_density_eval(lmb, []) == pytest.approx(0.4 * 0.7)
        val = labeled_set_density_eval(lmb, [([0.2], (0, 1))])
        assert val == pytest.approx(0.4 * 0.3 * n1(2.0).pdf([0.2]))
        assert labeled_set_density_eval(lmb, [([0.2], (0, 1)), ([0.3], (0, 1))]) == 0.0


class TestSerialization:
    @pytest.mark.parametrize("family", ["poisson", "iidc", "bernoulli", "mb", "mbm"])
    def test_unlabeled_round_trip(self, family):
        d = random_unlabeled(family, np.random.default_rng(2))
        text = dumps(d)
        assert dumps(loads(text)) == text
        assert '"schema": "rfs-density/1"' in text

    def test_labeled_round_trip(self):
        rng = np.random.default_rng(4)
        d = random_delta_glmb(rng, hypothesis_universe(rng, 5, assoc_ids=((1, "k"), "b", 3)))
        for x in (d, delta_glmb_to_glmb(d), marginalize_delta_glmb(d), random_lmb(rng), random_glmb(rng)):
            text = dumps(x)
            back = loads(text)
            assert type(back) is type(x)
            assert dumps(back) == text

    def test_assoc_ids_come_back_as_tuples(self):
        d = DeltaGlmbDensity((Hypothesis({(0, 0)}, ("m", 1, 2), 1.0),), {(("m", 1, 2), (0, 0)): S})
        assert loads(dumps(d)).hypotheses[0].assoc == ("m", 1, 2)

    def test_row_major_gaussians(self):
        gm = GaussianMixture.single([1.0, 2.0], [[2.0, 0.5], [0.5, 1.0]])
        doc = to_dict(gm)
        assert doc["mixture"]["dim"] == 2
        assert doc["mixture"]["covs"] == [[[2.0, 0.5], [0.5, 1.0]]]

    def test_unknown_schema_or_family(self):
        with pytest.raises(SchemaError):
            from_dict({"schema": "rfs-density/2", "family": "poisson"})
        with pytest.raises(SchemaError):
            from_dict({"schema": "rfs-density/1", "family": "cphd"})
