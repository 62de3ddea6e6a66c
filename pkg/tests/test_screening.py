import numpy as np
import pytest

from screenlab import rng
from screenlab.dgp import DiscreteDgpConfig, GaussianDgpConfig, UnitType, generate_discrete, generate_gaussian
from screenlab.errors import EmptyScreen, MissingStatedTypes, MissingTypes
from screenlab.screening import ScreenMechanism, apply_screen, elicit_stated_type, elicit_stated_types


class TestElicitation:
    def test_no_type_two_error(self):
        g = np.random.default_rng(0)
        assert all(elicit_stated_type(UnitType.COMPLIER, 0.7, 0.0, g) for _ in range(500))

    def test_no_type_one_error(self):
        g = np.random.default_rng(1)
        for t in (UnitType.NEVER_TAKER, UnitType.ALWAYS_TAKER):
            assert not any(elicit_stated_type(t, 0.0, 0.9, g) for _ in range(500))

    def test_type_two_rate(self):
        types = np.full(100_000, UnitType.COMPLIER, dtype=np.int8)
        stated = elicit_stated_types(types, 0.0, 0.2, rng.uniforms(12, "stated", 100_000))
        assert abs(stated.mean() - 0.8) <= 0.005

    def test_type_one_rate_scalar(self):
        g = np.random.default_rng(2)
        share = np.mean([elicit_stated_type(UnitType.NEVER_TAKER, 0.3, 0.0, g) for _ in range(20_000)])
        assert abs(share - 0.3) <= 0.015

    def test_rejects_bad_rates(self):
        with pytest.raises(ValueError):
            elicit_stated_type(UnitType.COMPLIER, 0.1, 1.5, np.random.default_rng(0))

    def test_never_states_always_taker(self):
        # stated types are a boolean complier indicator only
        s = generate_discrete(DiscreteDgpConfig(n=1000, eps1=0.5), seed=0)
        assert s.stated_complier.dtype == bool


@pytest.fixture
def big_sample():
    cfg = DiscreteDgpConfig(n=100_000, p_complier=0.25, p_always=0.35, p_never=0.40, eps1=0.1, eps2=0.2)
    return generate_discrete(cfg, seed=21)


class TestApplyScreen:
    def test_no_screen_keeps_all(self, big_sample):
        ss = apply_screen(big_sample, ScreenMechanism.NO_SCREEN)
        assert ss.retention_fraction == 1.0
        assert ss.sample.screened_in.all()

    def test_oracle_retention(self, big_sample):
        ss = apply_screen(big_sample, ScreenMechanism.ORACLE_COMPLIER)
        assert abs(ss.retention_fraction - 0.25) <= 0.01
        assert ss.retention_fraction == ss.retained_count / ss.total_count
        assert np.array_equal(ss.sample.screened_in, big_sample.true_type == UnitType.COMPLIER)

    def test_stated_flags(self, big_sample):
        ss = apply_screen(big_sample, ScreenMechanism.STATED_COMPLIER)
        assert np.array_equal(ss.sample.screened_in, big_sample.stated_complier)
        compliers = big_sample.true_type == UnitType.COMPLIER
        excluded = np.mean(~ss.sample.screened_in[compliers])
        assert abs(excluded - 0.2) < 0.01

    def test_stated_without_type_two_error_retains_compliers(self):
        s = generate_discrete(DiscreteDgpConfig(n=5000, eps1=0.3, eps2=0.0), seed=3)
        ss = apply_screen(s, ScreenMechanism.STATED_COMPLIER)
        assert ss.sample.screened_in[s.true_type == UnitType.COMPLIER].all()

    def test_pseudo_marks_only(self, big_sample):
        ss = apply_screen(big_sample, ScreenMechanism.PSEUDO_SCREEN)
        assert ss.retention_fraction == 1.0
        assert np.array_equal(ss.sample.screened_in, big_sample.stated_complier)
        z, d, y = ss.columns()
        assert z is big_sample.z and d is big_sample.d and y is big_sample.y
        assert abs(ss.stated_subset().retention_fraction - big_sample.stated_complier.mean()) == 0

    def test_screening_independent_of_instrument(self, big_sample):
        flag = apply_screen(big_sample, ScreenMechanism.STATED_COMPLIER).sample.screened_in
        z = big_sample.z == 1
        p1, p0, p = flag[z].mean(), flag[~z].mean(), flag.mean()
        se = np.sqrt(p * (1 - p) * (1 / z.sum() + 1 / (~z).sum()))
        assert abs(p1 - p0) < 4 * se

    def test_gaussian_oracle_missing_types(self):
        s = generate_gaussian(GaussianDgpConfig(n=40), 1.0, seed=0)
        with pytest.raises(MissingTypes):
            apply_screen(s, ScreenMechanism.ORACLE_COMPLIER)

    @pytest.mark.parametrize("m", [ScreenMechanism.STATED_COMPLIER, ScreenMechanism.PSEUDO_SCREEN])
    def test_missing_stated(self, big_sample, m):
        with pytest.raises(MissingStatedTypes):
            apply_screen(big_sample.without_stated_types(), m)

    def test_empty_screen(self):
        s = generate_discrete(DiscreteDgpConfig(n=100, eps2=1.0, eps1=0.0), seed=0)
        with pytest.raises(EmptyScreen):
            apply_screen(s, ScreenMechanism.STATED_COMPLIER)

    def test_accepts_string_mechanism(self, big_sample):
        assert apply_screen(big_sample, "oracle_complier").mechanism is ScreenMechanism.ORACLE_COMPLIER
