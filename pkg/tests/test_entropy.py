"""Generator catalog: exact values, convexity, derivatives, Lipschitz bounds."""

import numpy as np
import pytest

from rankdiv.entropy import (
    DERIVATIVE_SINGULAR,
    EntropyKind,
    EntropySpec,
    derivative,
    eval_f,
    lipschitz_bound,
)

ALL_KINDS = list(EntropyKind)
SMOOTH_AWAY_FROM_KINKS = [k for k in ALL_KINDS if k is not EntropyKind.TV]


def spec(kind):
    return EntropySpec(kind)


class TestEvalExamples:
    def test_tv_at_one(self):
        assert eval_f(spec(EntropyKind.TV), 1.0) == 0.0

    def test_chi2_at_zero(self):
        assert eval_f(spec(EntropyKind.CHI_SQ), 0.0) == 0.5

    def test_kl_at_zero_continuous_extension(self):
        assert eval_f(spec(EntropyKind.KL), 0.0) == 0.0

    def test_negative_input_rejected(self):
        with pytest.raises(ValueError):
            eval_f(spec(EntropyKind.KL), -0.1)

    @pytest.mark.parametrize("kind", ALL_KINDS)
    def test_f_of_one_is_exactly_zero(self, kind):
        assert eval_f(spec(kind), 1.0) == 0.0

    def test_tv_symmetry_about_one(self):
        s = spec(EntropyKind.TV)
        t = np.arange(0, 257) / 128.0  # dyadic grid: 2 - t is exact in floats
        np.testing.assert_array_equal(eval_f(s, t), eval_f(s, 2.0 - t))

    def test_reverse_kl_clamped_eval(self):
        s = EntropySpec(EntropyKind.REVERSE_KL, epsilon_clamp=1e-12)
        assert eval_f(s, 0.0) == pytest.approx(-np.log(1e-12))


class TestConvexity:
    @pytest.mark.parametrize("kind", ALL_KINDS)
    def test_convexity_on_random_triples(self, kind):
        s = spec(kind)
        rng = np.random.default_rng(42)
        a = rng.uniform(0.0, 8.0, 1000)
        b = rng.uniform(0.0, 8.0, 1000)
        lam = rng.uniform(0.0, 1.0, 1000)
        mid = lam * a + (1 - lam) * b
        lhs = np.asarray(eval_f(s, mid))
        rhs = lam * np.asarray(eval_f(s, a)) + (1 - lam) * np.asarray(eval_f(s, b))
        assert np.all(lhs <= rhs + 1e-12)


class TestDerivative:
    def test_chi2_example(self):
        assert derivative(spec(EntropyKind.CHI_SQ), 3.0) == pytest.approx(2.0)

    def test_kl_example(self):
        assert derivative(spec(EntropyKind.KL), 1.0) == pytest.approx(1.0)

    def test_tv_subgradient_left_of_kink(self):
        assert derivative(spec(EntropyKind.TV), 0.5) == -1.0

    def test_tv_midpoint_subgradient_at_kink(self):
        assert derivative(spec(EntropyKind.TV), 1.0) == 0.0

    @pytest.mark.parametrize("kind", SMOOTH_AWAY_FROM_KINKS)
    def test_matches_central_differences(self, kind):
        s = spec(kind)
        t = np.geomspace(0.05, 60.0, 50)
        h = 1e-6
        numeric = (np.asarray(eval_f(s, t + h)) - np.asarray(eval_f(s, t - h))) / (2 * h)
        analytic = np.asarray(derivative(s, t))
        scale = np.maximum(np.abs(numeric), 1.0)
        np.testing.assert_allclose(analytic, numeric, atol=1e-6 * scale.max(), rtol=1e-6)


class TestLipschitzBound:
    def test_tv_is_globally_one(self):
        assert lipschitz_bound(spec(EntropyKind.TV), 65.0) == 1.0
        assert lipschitz_bound(spec(EntropyKind.TV), 3.0) == 1.0

    def test_chi2_example(self):
        assert lipschitz_bound(spec(EntropyKind.CHI_SQ), 65.0) == pytest.approx(64.0)

    def test_kl_matches_grid_search_oracle(self):
        # oracle: max |f'| over [epsilon_clamp, hi]; the derivative singularity
        # at the clamp dominates log(hi)+1 for the default clamp.
        s = spec(EntropyKind.KL)
        grid = np.geomspace(s.epsilon_clamp, 65.0, 400_001)
        oracle = np.abs(np.asarray(derivative(s, grid))).max()
        assert lipschitz_bound(s, 65.0) == pytest.approx(oracle, rel=1e-9)
        assert lipschitz_bound(s, 65.0) == pytest.approx(abs(np.log(1e-12) + 1.0))

    @pytest.mark.parametrize("kind", ALL_KINDS)
    def test_bound_is_valid_on_grid(self, kind):
        s = spec(kind)
        hi = 17.0
        L = lipschitz_bound(s, hi)
        lo = s.epsilon_clamp if kind in DERIVATIVE_SINGULAR else 0.0
        grid = np.linspace(max(lo, 1e-12), hi, 20_001)
        f_vals = np.asarray(eval_f(s, grid))
        quotients = np.abs(np.diff(f_vals)) / np.diff(grid)
        assert np.all(quotients <= L * (1 + 1e-9))

    def test_invalid_interval(self):
        with pytest.raises(ValueError):
            lipschitz_bound(spec(EntropyKind.KL), 0.0)


def test_kind_from_name_roundtrip():
    for name in ("tv", "kl", "js", "hellinger2", "chi2", "triangular", "jeffreys", "reverse_kl"):
        assert EntropyKind.from_name(name).value == name
    with pytest.raises(ValueError):
        EntropyKind.from_name("renyi")
