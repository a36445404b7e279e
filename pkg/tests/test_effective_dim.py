import numpy as np
import pytest

from gmoments.effective_dim import effective_rank, max_norm_effective_dim
from gmoments.gaussian import make_covariance
from tests.conftest import seeded_psd


class TestEffectiveRank:
    def test_identity_is_dimension(self):
        for d in (1, 3, 16):
            assert effective_rank(np.eye(d)) == float(d)

    def test_spiked_hand_value(self):
        assert effective_rank(np.diag([1.0, 0.5, 0.5])) == pytest.approx(2.0, rel=1e-14)

    def test_scale_invariance(self):
        sigma = seeded_psd(4, 5)
        assert effective_rank(3.7 * sigma) == pytest.approx(effective_rank(sigma), rel=1e-12)

    def test_bounds(self):
        for seed in range(10):
            d = 2 + seed % 5
            r = effective_rank(seeded_psd(seed, d))
            assert 1.0 - 1e-12 <= r <= d + 1e-12

    def test_zero_matrix_rejected(self):
        with pytest.raises(ValueError):
            effective_rank(np.zeros((3, 3)))


class TestMaxNormEffectiveDim:
    def test_univariate_folded_normal(self):
        # E|X| = sigma sqrt(2/pi), so r_max -> 2/pi for d = 1
        dims = max_norm_effective_dim(make_covariance("identity", 1),
                                      mc_samples=10**6, seed=17)
        assert dims.r_max == pytest.approx(2 / np.pi, rel=0.01)

    def test_scale_invariance_same_seed(self):
        sigma = seeded_psd(8, 4)
        a = max_norm_effective_dim(sigma, mc_samples=20_000, seed=5)
        b = max_norm_effective_dim(6.25 * sigma, mc_samples=20_000, seed=5)
        assert b.r_max == pytest.approx(a.r_max, rel=1e-10)

    def test_monotone_in_dimension_for_identity(self):
        # same seed stream: each coordinate set is a superset of the smaller d
        values = [max_norm_effective_dim(make_covariance("identity", d),
                                         mc_samples=20_000, seed=3).r_max
                  for d in (1, 2, 4, 8, 16)]
        assert all(b > a for a, b in zip(values, values[1:]))

    def test_permutation_invariance_within_mc_error(self):
        sigma = seeded_psd(12, 5)
        perm = [4, 2, 0, 3, 1]
        sigma_p = sigma[np.ix_(perm, perm)]
        a = max_norm_effective_dim(sigma, mc_samples=200_000, seed=6)
        b = max_norm_effective_dim(sigma_p, mc_samples=200_000, seed=6)
        tol = 5 * (a.e_max_abs_stderr + b.e_max_abs_stderr) * 2 * a.e_max_abs / np.max(np.abs(sigma))
        assert abs(a.r_max - b.r_max) <= tol

    def test_stderr_reported(self):
        dims = max_norm_effective_dim(make_covariance("identity", 3),
                                      mc_samples=50_000, seed=1)
        assert dims.e_max_abs_stderr > 0
        assert dims.mc_samples == 50_000 and dims.seed == 1
        assert dims.r2 == pytest.approx(3.0)

    def test_min_samples_guard(self):
        with pytest.raises(ValueError):
            max_norm_effective_dim(np.eye(2), mc_samples=100, seed=0)

    def test_zero_matrix_rejected(self):
        with pytest.raises(ValueError):
            max_norm_effective_dim(np.zeros((2, 2)), mc_samples=20_000, seed=0)

    def test_json_fields(self):
        dims = max_norm_effective_dim(np.eye(2), mc_samples=20_000, seed=2)
        js = dims.to_json()
        assert set(js) == {"r2", "r_max", "e_max_abs", "e_max_abs_stderr",
                           "mc_samples", "seed"}
