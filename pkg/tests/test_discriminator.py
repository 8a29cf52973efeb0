import numpy as np
import pytest

from modecover import (
    DiscriminatorSpec,
    diagnostics,
    empirical_cover_test,
    exact_discriminator,
    init_weights_empirical,
    ratio_estimate,
    train_discriminator,
)

AFFINE = DiscriminatorSpec(feature_map="affine")


class TestTraining:
    def test_identical_samples_predict_half(self):
        rng = np.random.default_rng(0)
        xs = rng.normal(size=(200, 1))
        disc = train_discriminator(xs, xs, AFFINE, seed=1)
        preds = disc.predict(xs)
        assert np.all(np.abs(preds - 0.5) < 0.05)

    def test_separated_clusters(self):
        rng = np.random.default_rng(1)
        pos = rng.normal(10.0, 0.5, (300, 1))
        neg = rng.normal(-10.0, 0.5, (300, 1))
        disc = train_discriminator(pos, neg, AFFINE, seed=2)
        assert np.all(disc.predict(pos) > 0.95)
        assert np.all(disc.predict(neg) < 0.05)

    def test_loss_non_increasing(self):
        rng = np.random.default_rng(2)
        pos = rng.normal(1.0, 1.0, (200, 2))
        neg = rng.normal(-1.0, 1.0, (200, 2))
        for spec in (AFFINE, DiscriminatorSpec(feature_map="rbf", n_centers=16)):
            disc = train_discriminator(pos, neg, spec, seed=3)
            losses = np.asarray(disc.loss_path)
            assert np.all(np.diff(losses) <= 1e-12)

    def test_deterministic_per_seed(self):
        rng = np.random.default_rng(3)
        pos = rng.normal(1, 1, (100, 2))
        neg = rng.normal(-1, 1, (100, 2))
        d1 = train_discriminator(pos, neg, seed=7)
        d2 = train_discriminator(pos, neg, seed=7)
        assert np.array_equal(d1.weights, d2.weights)

    def test_two_point_ideal_limit(self):
        # empirical mix of 5:7 at one point vs all collapsed mass: the
        # optimum predicts 5/12 there and ~1 on the unmatched point
        rng = np.random.default_rng(4)
        n = 10000
        pos = np.where(rng.random((n, 1)) < 5 / 7, 0.0, 1.0)
        neg = np.zeros((n, 1))
        disc = train_discriminator(pos, neg, AFFINE, seed=5)
        d_a = disc.predict([[0.0]])[0]
        d_b = disc.predict([[1.0]])[0]
        assert d_a == pytest.approx(5 / 12, abs=0.02)
        assert d_b > 0.99

    def test_accuracy_improves_with_samples(self):
        # mean deviation from the ideal response shrinks as samples grow
        rng = np.random.default_rng(5)
        ideal = {0.0: 5 / 12, 1.0: 1.0}
        errs = []
        for n in (1000, 10000):
            pos = np.where(rng.random((n, 1)) < 5 / 7, 0.0, 1.0)
            neg = np.zeros((n, 1))
            disc = train_discriminator(pos, neg, AFFINE, seed=6)
            preds = disc.predict([[0.0], [1.0]])
            errs.append(np.mean([abs(preds[0] - 5 / 12), abs(preds[1] - 1.0)]))
        assert errs[1] < errs[0]


class TestRatioEstimate:
    def test_half_gives_one(self):
        disc = exact_discriminator([0.5], [0.5], [[0.0]])
        assert ratio_estimate(disc, [[0.0]])[0] == pytest.approx(1.0)

    def test_five_twelfths(self):
        disc = exact_discriminator([5 / 7], [1.0], [[0.0]])
        assert ratio_estimate(disc, [[0.0]])[0] == pytest.approx(1.4, rel=1e-9)

    def test_clamp_arithmetic(self):
        disc = exact_discriminator([1.0], [0.0], [[0.0]], clamp=1e-6)
        ratio = ratio_estimate(disc, [[0.0]])[0]
        assert ratio == pytest.approx(1e-6 / (1 - 1e-6), rel=1e-9)


class TestEmpiricalCoverTest:
    def test_worked_two_point_flags(self):
        points = np.array([[0.0]] * 5 + [[1.0]] * 2)
        ws = init_weights_empirical(points)
        disc = exact_discriminator([5 / 7, 2 / 7], [1.0, 0.0], [[0.0], [1.0]])
        flags = empirical_cover_test(disc, ws, delta=0.25)
        assert flags.tolist() == [False] * 5 + [True] * 2
        # the covered samples sit at 1.4 * (1/7) = 0.2 >= 0.25/7
        ratios = ratio_estimate(disc, np.array([[0.0]]))
        assert ratios[0] * (1 / 7) == pytest.approx(0.2, rel=1e-9)

    def test_uninformative_discriminator_never_doubles(self):
        points = np.arange(20.0)[:, None]
        ws = init_weights_empirical(points)
        disc = exact_discriminator(
            np.full(20, 0.05), np.full(20, 0.05), points
        )
        for delta in (0.1, 0.5, 0.99):
            assert not empirical_cover_test(disc, ws, delta).any()

    def test_zero_ratio_doubles_everything(self):
        points = np.arange(5.0)[:, None]
        ws = init_weights_empirical(points)
        disc = exact_discriminator(np.ones(5), np.zeros(5), points)
        assert empirical_cover_test(disc, ws, delta=0.25).all()

    def test_threshold_equality_not_doubled(self):
        # ratio * w/W exactly delta/n stays unchanged (strict inequality)
        points = np.array([[0.0], [1.0]])
        ws = init_weights_empirical(points)
        disc = exact_discriminator([0.5, 0.5], [0.5, 0.5], points)  # ratio 1
        flags = empirical_cover_test(disc, ws, delta=1.0)
        assert not flags.any()


class TestDiagnostics:
    def test_perfect_discriminator(self):
        points = np.array([[0.0]] * 5 + [[1.0]] * 2)
        ws = init_weights_empirical(points)
        p_vals = np.array([5 / 7] * 5 + [2 / 7] * 2)
        g_vals = np.array([1.0] * 5 + [0.0] * 2)
        disc = exact_discriminator([5 / 7, 2 / 7], [1.0, 0.0], [[0.0], [1.0]])
        diag = diagnostics(disc, g_vals, p_vals, ws, delta=0.25)
        assert diag.epsilon_prime == 0.0
        assert diag.lambda_min == 1.0
        assert diag.delta_prime == 0.25

    def test_flipped_flags_count_covered_mass(self):
        # four points, half covered; an inverted classifier doubles exactly
        # the covered ones, so epsilon_prime equals their round mass
        points = np.arange(4.0)[:, None]
        ws = init_weights_empirical(points)
        p_vals = np.full(4, 0.25)
        g_vals = np.array([0.25, 0.25, 0.0, 0.0])  # first two covered
        flipped = exact_discriminator(
            np.full(4, 0.25), np.array([0.0, 0.0, 1.0, 1.0]), points
        )
        diag = diagnostics(flipped, g_vals, p_vals, ws, delta=0.25)
        assert diag.epsilon_prime == pytest.approx(0.5)
        assert diag.lambda_min == 0.0  # kept points are truly uncovered

    def test_algebraic_identity_with_uniform_target(self):
        # with uniform target mass the classifier test reduces to the exact
        # density test g < delta * p when the ideal response is used
        rng = np.random.default_rng(8)
        n = 12
        points = np.arange(float(n))[:, None]
        ws = init_weights_empirical(points)
        for _ in range(20):
            flags_random = rng.random(n) < 0.4
            ws_t = ws
            if flags_random.any():
                from modecover import double_weights

                ws_t = double_weights(ws, flags_random)
            p_t = np.exp2(ws_t.log2_weight - ws_t.log2_total)
            g_t = rng.dirichlet(np.ones(n))
            disc = exact_discriminator(p_t, g_t, points, clamp=1e-12)
            flags = empirical_cover_test(disc, ws_t, delta=0.3)
            exact = g_t < 0.3 * (1.0 / n)
            assert np.array_equal(flags, exact)
