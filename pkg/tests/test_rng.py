import numpy as np
import pytest
from scipy import stats

from screenlab import rng


class TestStreams:
    def test_same_key_same_draws(self):
        a = rng.raw(7, "outcome", 100)
        b = rng.raw(7, "outcome", 100)
        assert np.array_equal(a, b)

    def test_tags_and_indices_separate_streams(self):
        base = rng.raw(7, "outcome", 50)
        assert not np.array_equal(base, rng.raw(7, "type", 50))
        assert not np.array_equal(base, rng.raw(8, "outcome", 50))
        assert not np.array_equal(rng.raw(7, "bootstrap", 50, 0), rng.raw(7, "bootstrap", 50, 1))

    def test_prefix_stability(self):
        # draw i of a stream does not depend on how many draws were requested
        long = rng.uniforms(3, "x", 1000)
        short = rng.uniforms(3, "x", 10)
        assert np.array_equal(long[:10], short)

    def test_block_offset(self):
        words = rng.raw(5, "x", 40)
        assert np.array_equal(rng.raw(5, "x", 8, block=3), words[12:20])

    def test_uniforms_open_interval(self):
        u = rng.to_unit_interval(np.array([0, 2**64 - 1], dtype=np.uint64))
        assert u[0] == 2.0**-53
        assert u[1] == 1.0 - 2.0**-53
        assert np.isfinite(rng.normals(0, "x", 1)).all()

    def test_normals_are_standard_normal(self):
        x = rng.normals(11, "outcome", 100_000)
        assert np.all(np.isfinite(x))
        assert stats.kstest(x, "norm").pvalue > 0.001
        assert abs(x.mean()) < 0.015
        assert abs(x.std() - 1.0) < 0.01

    def test_child_seed_range_and_determinism(self):
        s = rng.child_seed(1, "replication", 4)
        assert s == rng.child_seed(1, "replication", 4)
        assert 0 <= s < 2**63
        assert s != rng.child_seed(1, "replication", 5)

    def test_negative_seed_rejected(self):
        with pytest.raises(ValueError):
            rng.raw(-1, "x", 3)


class TestReplicateUniforms:
    @pytest.mark.parametrize("width", [1, 3, 4, 5, 13])
    def test_batch_invariance(self, width):
        full = rng.replicate_uniforms(9, "bootstrap", 10, width, 1)
        for start in range(10):
            one = rng.replicate_uniforms(9, "bootstrap", 1, width, 1, start=start)
            assert np.array_equal(one[0], full[start])
        assert np.array_equal(rng.replicate_uniforms(9, "bootstrap", 4, width, 1, start=3), full[3:7])

    def test_shape(self):
        assert rng.replicate_uniforms(0, "t", 6, 7).shape == (6, 7)
