import numpy as np
import pytest

from natle.denoise import DenoiseParams
from natle.image import rgb_to_hsv
from natle.operators import gradient
from natle.reflectance import (
    ReflectanceInit,
    ReflectanceParams,
    compute_g,
    estimate_reflectance,
    init_reflectance,
    reflectance_objective,
)

from imagegen import clean_scene
from oracles import dense_reflectance_matrix


def triangle_carpet(n=48, period=8, slope=0.05, base=0.3):
    """Texture with constant gradient magnitude in both directions."""
    ramp = np.arange(n) % period
    wave = slope * np.minimum(ramp, period - ramp)
    return base + wave[None, :] + wave[:, None]


class TestInitReflectance:
    def test_division_value(self):
        hsv = np.zeros((1, 1, 3))
        hsv[0, 0, 2] = 0.25
        light = np.full((1, 1), 0.5)
        init = init_reflectance(hsv, light, ReflectanceParams(),
                                DenoiseParams(enabled=False))
        assert init.rhat[0, 0] == pytest.approx(0.25 / 0.501, abs=1e-12)

    def test_noise_free_input_with_matching_light(self):
        hsv = rgb_to_hsv(clean_scene(40, 40, seed=21))
        light = hsv[..., 2].copy()
        init = init_reflectance(hsv, light, ReflectanceParams(), DenoiseParams())
        assert np.abs(init.rhat - 1.0).max() <= 0.05

    def test_dark_pixel_guard(self):
        hsv = np.zeros((1, 2, 3))
        hsv[0, 0, 2] = 0.004
        hsv[0, 1, 2] = 0.9
        light = np.array([[0.004, 0.001]])  # second pixel forces the cap
        params = ReflectanceParams()
        init = init_reflectance(hsv, light, params, DenoiseParams(enabled=False))
        assert np.all(np.isfinite(init.rhat))
        assert init.rhat.max() <= params.ratio_cap
        assert init.rhat[0, 1] == params.ratio_cap

    def test_overflow_survives_denoising_round_trip(self):
        # a bright region over dim light: the ratio > 1 must not be clipped
        hsv = rgb_to_hsv(clean_scene(24, 24, seed=2))
        light = np.full((24, 24), 0.25)
        init = init_reflectance(hsv, light, ReflectanceParams(), DenoiseParams())
        raw = hsv[..., 2] / (light + 1e-3)
        assert raw.max() > 1.0
        assert init.rhat.max() > 1.0
        assert init.rhat.max() <= 10.0

    def test_disabled_denoising_passes_chroma_through(self):
        hsv = rgb_to_hsv(clean_scene(16, 16, seed=4))
        light = np.full((16, 16), 0.5)
        init = init_reflectance(hsv, light, ReflectanceParams(),
                                DenoiseParams(enabled=False))
        np.testing.assert_array_equal(init.hue, hsv[..., 0])
        np.testing.assert_array_equal(init.sat, hsv[..., 1])

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            init_reflectance(np.zeros((4, 4, 3)), np.zeros((3, 3)),
                             ReflectanceParams(), DenoiseParams(enabled=False))


class TestComputeG:
    def test_small_gradient_zeroed(self):
        scene = np.array([[0.5, 0.51]])  # gradient 0.01 < 0.02
        field = compute_g(scene, ReflectanceParams())
        assert field.gh[0, 0] == 0.0

    def test_amplification(self):
        scene = np.array([[0.3, 0.5]])  # gradient 0.2
        field = compute_g(scene, ReflectanceParams(lam=1.1))
        assert field.gh[0, 0] == pytest.approx(0.22, abs=1e-12)

    def test_sign_preserved(self):
        scene = np.array([[0.5, 0.3]])  # gradient -0.2
        field = compute_g(scene, ReflectanceParams(lam=1.1))
        assert field.gh[0, 0] == pytest.approx(-0.22, abs=1e-12)

    def test_sparsity_monotone_in_threshold(self, rng):
        scene = rng.random((24, 24)) * 0.3
        fractions = []
        for eps_g in (0.0, 0.02, 0.1):
            field = compute_g(scene, ReflectanceParams(eps_g=eps_g))
            zeros = (field.gh == 0).sum() + (field.gv == 0).sum()
            fractions.append(zeros / (2 * scene.size))
        assert fractions[0] <= fractions[1] <= fractions[2]


class TestEstimateReflectance:
    @staticmethod
    def plain_init(rhat):
        return ReflectanceInit(rhat=rhat, hue=np.zeros_like(rhat), sat=np.zeros_like(rhat))

    def test_beta_zero_returns_init_bitwise(self, rng):
        rhat = rng.random((9, 9)) * 1.5
        out = estimate_reflectance(self.plain_init(rhat), rng.random((9, 9)),
                                   ReflectanceParams(beta=0.0))
        np.testing.assert_array_equal(out, rhat)

    def test_constant_fixed_point_when_target_zero(self):
        # constant scene -> G = 0; constant rhat stays put for any beta
        rhat = np.full((8, 8), 0.63)
        scene = np.full((8, 8), 0.4)
        out = estimate_reflectance(self.plain_init(rhat), scene,
                                   ReflectanceParams(beta=3.0))
        np.testing.assert_allclose(out, 0.63, atol=1e-9)

    def test_matches_dense_oracle_12x12(self, rng):
        params = ReflectanceParams(beta=3.0)
        rhat = rng.random((12, 12)) * 2
        scene = rng.random((12, 12))
        out = estimate_reflectance(self.plain_init(rhat), scene, params)

        target = compute_g(scene, params)
        uh = np.zeros_like(rhat)
        uv = np.zeros_like(rhat)
        uh[:, :-1] -= target.gh[:, :-1]
        uh[:, 1:] += target.gh[:, :-1]
        uv[:-1, :] -= target.gv[:-1, :]
        uv[1:, :] += target.gv[:-1, :]
        rhs = rhat + params.beta * (uh + uv)
        dense = dense_reflectance_matrix(params.beta, 12, 12)
        expected = np.linalg.solve(dense, rhs.ravel()).reshape(12, 12)
        np.testing.assert_allclose(out, expected, atol=1e-5)

    def test_perturbation_never_improves_objective(self, rng):
        params = ReflectanceParams(beta=3.0)
        rhat = rng.random((10, 10))
        scene = rng.random((10, 10))
        init = self.plain_init(rhat)
        out = estimate_reflectance(init, scene, params)
        base = reflectance_objective(out, init, scene, params)
        for _ in range(100):
            delta = rng.standard_normal(out.shape)
            delta *= 1e-3 / np.linalg.norm(delta)
            assert reflectance_objective(out + delta, init, scene, params) >= base - 1e-9

    def test_texture_contract_large_beta(self):
        # strong gradient-fit weight drives |grad R| / |grad S| toward lam
        params = ReflectanceParams(beta=100.0)
        scene = triangle_carpet()
        out = estimate_reflectance(self.plain_init(scene.copy()), scene, params)
        gs, gr = gradient(scene), gradient(out)
        mags = np.concatenate([gs.gh.ravel(), gs.gv.ravel()])
        outs = np.concatenate([gr.gh.ravel(), gr.gv.ravel()])
        mask = np.abs(mags) >= params.eps_g
        ratio = np.abs(outs[mask]) / np.abs(mags[mask])
        in_band = np.mean((ratio >= 1.0) & (ratio <= params.lam + 0.1))
        assert in_band >= 0.9


class TestParamValidation:
    def test_rejects_negative_beta(self):
        with pytest.raises(ValueError):
            ReflectanceParams(beta=-1.0)

    def test_rejects_negative_threshold(self):
        with pytest.raises(ValueError):
            ReflectanceParams(eps_g=-0.01)

    def test_rejects_tiny_cap(self):
        with pytest.raises(ValueError):
            ReflectanceParams(ratio_cap=0.5)
