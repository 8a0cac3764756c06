import numpy as np
import pytest

from sgdlab.data import Dataset, GaussianSpec, gen_two_gaussians
from sgdlab.errors import (ContractError, UndefinedDenominatorError,
                           UnsupportedDimensionError)
from sgdlab.metrics import (distance, fgsm_perturb, margin_estimate, path_norm,
                            path_norm_bruteforce, robustness_curve,
                            weight_frobenius)
from sgdlab.net import MlpSpec, Weights, init_weights, predict


def weights_from(spec, flat):
    return Weights.from_flat(spec, np.asarray(flat, dtype=float), "random-init", 0)


class TestDistance:
    def test_self_distance_zero(self):
        w = init_weights(MlpSpec(2, (3,), 2), 0)
        assert distance(w, w) == 0.0

    def test_doubling_gives_one(self):
        w = init_weights(MlpSpec(2, (3,), 2), 0)
        w2 = w.copy()
        for m, b in w2.layers:
            m *= 2.0
            b *= 2.0
        np.testing.assert_allclose(distance(w2, w), 1.0, rtol=1e-12)

    def test_hand_computed_matrix_pair(self):
        # ((1,2),(3,4)) vs identity, no biases: sqrt(0+4+9+9)/sqrt(2) = sqrt(11)
        spec = MlpSpec(2, (), 2)
        w1 = weights_from(spec, [1, 2, 3, 4, 0, 0])
        w2 = weights_from(spec, [1, 0, 0, 1, 0, 0])
        np.testing.assert_allclose(distance(w1, w2), np.sqrt(11.0), rtol=1e-9)

    def test_scaling_identity(self):
        # d(cW, W) = |c - 1|
        w = init_weights(MlpSpec(3, (4,), 3), 1)
        for c in (0.5, 3.0):
            wc = w.copy()
            for m, b in wc.layers:
                m *= c
                b *= c
            np.testing.assert_allclose(distance(wc, w), abs(c - 1), rtol=1e-12)

    def test_zero_denominator_rejected(self):
        spec = MlpSpec(2, (), 2)
        w = weights_from(spec, [1, 2, 3, 4, 0, 0])
        zero = weights_from(spec, [0] * 6)
        with pytest.raises(UndefinedDenominatorError):
            distance(w, zero)


class TestFrobenius:
    def test_zero(self):
        spec = MlpSpec(2, (), 2)
        assert weight_frobenius(weights_from(spec, [0] * 6)) == 0.0

    def test_three_four_five(self):
        spec = MlpSpec(1, (), 2)
        w = weights_from(spec, [3, 0, 4, 0])
        np.testing.assert_allclose(weight_frobenius(w), 5.0, rtol=1e-9)

    def test_homogeneity(self):
        w = init_weights(MlpSpec(2, (3,), 2), 2)
        wc = w.copy()
        for m, b in wc.layers:
            m *= -2.5
            b *= -2.5
        np.testing.assert_allclose(weight_frobenius(wc), 2.5 * weight_frobenius(w))


class TestPathNorm:
    def test_single_path_chain(self):
        # 1 -> 1 -> 1 (second layer stands in for the output pair)
        spec = MlpSpec(1, (1,), 2)
        w = weights_from(spec, [2, 0, 3, 0, 0, 0])  # weights 2 then (3, 0), no biases
        np.testing.assert_allclose(path_norm(spec, w, 1), 6.0, rtol=1e-9)
        np.testing.assert_allclose(path_norm(spec, w, 2), 6.0, rtol=1e-9)

    def test_two_path_fan_in(self):
        spec = MlpSpec(2, (), 2)
        w = weights_from(spec, [1, -2, 0, 0, 0, 0])
        np.testing.assert_allclose(path_norm(spec, w, 1), 3.0, rtol=1e-9)

    def test_scaling_power(self):
        # c * every weight of a bias-free L-layer net scales the norm by c^L
        spec = MlpSpec(2, (3, 3), 2)
        w = init_weights(spec, 4)
        for i, (m, b) in enumerate(w.layers):
            w.layers[i] = (m, np.zeros_like(b))
        c, L = 1.7, 3
        wc = w.copy()
        for m, _ in wc.layers:
            m *= c
        for p in (1, 2):
            np.testing.assert_allclose(path_norm(spec, wc, p),
                                       c**L * path_norm(spec, w, p), rtol=1e-9)

    def test_matches_bruteforce_on_random_nets(self):
        rng = np.random.default_rng(0)
        for trial in range(100):
            widths = tuple(int(v) for v in rng.integers(1, 5, size=rng.integers(0, 4)))
            spec = MlpSpec(int(rng.integers(1, 5)), widths, int(rng.integers(2, 5)))
            w = init_weights(spec, trial)
            for p in (1, 2):
                closed = path_norm(spec, w, p)
                brute = path_norm_bruteforce(spec, w, p)
                assert abs(closed - brute) / max(abs(brute), 1e-12) < 1e-9


class TestFgsm:
    def test_eps_zero_identity(self):
        spec = MlpSpec(2, (3,), 2)
        w = init_weights(spec, 0)
        x = np.array([0.5, 0.5])
        np.testing.assert_array_equal(fgsm_perturb(spec, w, x, 0, 0.0), x)

    def test_sign_rule(self):
        # gradient (+, -) with eps 0.1 moves coordinates by (+0.1, -0.1)
        spec = MlpSpec(2, (), 2)
        # linear net: grad_x = (p - onehot(y)) @ W; pick W so signs are (+, -)
        w = weights_from(spec, [1, -1, -1, 1, 0, 0])
        x = np.array([0.5, 0.5])
        from sgdlab.net import input_gradient
        g = input_gradient(spec, w, x, 1)
        out = fgsm_perturb(spec, w, x, 1, 0.1)
        np.testing.assert_allclose(out, x + 0.1 * np.sign(g))
        assert np.all(np.abs(out - x) <= 0.1 + 1e-15)

    def test_zero_gradient_untouched(self):
        spec = MlpSpec(2, (3,), 2)
        w = weights_from(spec, [0.0] * spec.n_params)
        x = np.array([0.3, -0.4])
        np.testing.assert_array_equal(fgsm_perturb(spec, w, x, 0, 0.5), x)

    def test_linf_bound_property(self):
        rng = np.random.default_rng(3)
        spec = MlpSpec(4, (5,), 3)
        w = init_weights(spec, 3)
        for _ in range(20):
            x = rng.normal(size=4)
            eps = float(rng.uniform(0, 1))
            out = fgsm_perturb(spec, w, x, int(rng.integers(0, 3)), eps)
            assert np.max(np.abs(out - x)) <= eps + 1e-15

    def test_clip(self):
        spec = MlpSpec(2, (), 2)
        w = weights_from(spec, [1, -1, -1, 1, 0, 0])
        out = fgsm_perturb(spec, w, np.array([0.99, 0.0]), 1, 0.5, clip=(0.0, 1.0))
        assert np.all(out <= 1.0) and np.all(out >= 0.0)


class TestRobustnessCurve:
    def _model(self):
        spec = MlpSpec(2, (), 2)
        w = weights_from(spec, [1, 0, -1, 0, 0, 0])  # sign(x1) classifier
        return spec, w

    def test_eps_zero_equals_clean_accuracy(self):
        spec, w = self._model()
        ds = gen_two_gaussians(GaussianSpec(n_per_class=20))
        curve = robustness_curve(spec, w, ds, [0.0, 0.1])
        clean = float(np.mean(predict(spec, w, ds.features) == ds.labels))
        assert curve.points[0] == (0.0, clean)

    def test_single_eps_zero_grid(self):
        spec, w = self._model()
        ds = gen_two_gaussians(GaussianSpec(n_per_class=5))
        curve = robustness_curve(spec, w, ds, [0.0])
        assert len(curve.points) == 1

    def test_monotone_for_linear_model(self):
        # the attack is optimal against a linear decision rule
        spec, w = self._model()
        ds = gen_two_gaussians(GaussianSpec(n_per_class=30))
        # labels flipped so class 1 sits at x1 < 0: use true generator labels
        curve = robustness_curve(spec, w, ds, [0.0, 0.5, 1.0, 1.5, 2.0, 3.0])
        accs = [a for _, a in curve.points]
        assert all(b <= a + 1e-12 for a, b in zip(accs, accs[1:]))

    def test_grid_must_start_at_zero(self):
        spec, w = self._model()
        ds = gen_two_gaussians(GaussianSpec(n_per_class=5))
        with pytest.raises(ContractError):
            robustness_curve(spec, w, ds, [0.1, 0.2])


class TestMarginEstimate:
    def _sign_x1_model(self):
        spec = MlpSpec(2, (), 2)
        return spec, weights_from(spec, [1, 0, -1, 0, 0, 0])

    def test_distance_to_vertical_line(self):
        spec, w = self._sign_x1_model()
        ds = Dataset(np.array([[0.5, 0.0], [-1.25, 0.0]]),
                     np.array([0, 1], dtype=np.int64), 2)
        box = ((-2.0, 2.0), (-2.0, 2.0))
        res = 400
        cell_diag = np.hypot(4.0 / res, 4.0 / res)
        margins, mmin, mmed = margin_estimate(spec, w, ds, box, res)
        assert abs(margins[0] - 0.5) <= cell_diag
        assert abs(margins[1] - 1.25) <= cell_diag

    def test_point_on_boundary(self):
        spec, w = self._sign_x1_model()
        ds = Dataset(np.array([[0.0, 0.0]]), np.array([0], dtype=np.int64), 2)
        box = ((-1.0, 1.0), (-1.0, 1.0))
        res = 128
        cell_diag = np.hypot(2.0 / res, 2.0 / res)
        _, mmin, _ = margin_estimate(spec, w, ds, box, res)
        assert mmin <= cell_diag

    def test_refinement_property(self):
        spec, w = self._sign_x1_model()
        rng = np.random.default_rng(0)
        ds = Dataset(rng.uniform(-1, 1, size=(10, 2)),
                     np.zeros(10, dtype=np.int64), 2)
        box = ((-1.5, 1.5), (-1.5, 1.5))
        coarse_diag = np.hypot(3.0 / 100, 3.0 / 100)
        m1, _, _ = margin_estimate(spec, w, ds, box, 100)
        m2, _, _ = margin_estimate(spec, w, ds, box, 200)
        assert np.all(m2 <= m1 + coarse_diag)

    def test_dimension_and_resolution_guards(self):
        spec = MlpSpec(3, (), 2)
        w = init_weights(spec, 0)
        ds = Dataset(np.zeros((1, 3)) + 1.0, np.array([0], dtype=np.int64), 2)
        with pytest.raises(UnsupportedDimensionError):
            margin_estimate(spec, w, ds, ((0, 1), (0, 1)), 128)
        spec2, w2 = self._sign_x1_model()
        ds2 = Dataset(np.ones((1, 2)), np.array([0], dtype=np.int64), 2)
        with pytest.raises(ContractError):
            margin_estimate(spec2, w2, ds2, ((0, 1), (0, 1)), 32)
