import numpy as np
import pytest

import matplotlib.colors

from natle.image import (
    ImageReadError,
    ImageTooLargeError,
    UnsupportedImageError,
    as_planar,
    as_rgb,
    hsv_to_rgb,
    init_illumination,
    load_image,
    rgb_to_hsv,
    save_image,
)


def pixel(r, g, b):
    return np.array([[[r, g, b]]], dtype=float)


class TestRgbToHsv:
    def test_pure_gray(self):
        h, s, v = rgb_to_hsv(pixel(0.5, 0.5, 0.5))[0, 0]
        assert h == 0.0 and s == 0.0 and v == 0.5

    def test_pure_red(self):
        h, s, v = rgb_to_hsv(pixel(1.0, 0.0, 0.0))[0, 0]
        assert h == 0.0 and s == 1.0 and v == 1.0

    def test_mixed_pixel_against_hexcone_formula(self):
        # hand evaluation: V=0.6, S=0.4/0.6, blue sector H=(4+(0.2-0.4)/0.4)/6
        h, s, v = rgb_to_hsv(pixel(0.2, 0.4, 0.6))[0, 0]
        assert v == pytest.approx(0.6, abs=1e-12)
        assert s == pytest.approx(2.0 / 3.0, abs=1e-12)
        assert h == pytest.approx(7.0 / 12.0, abs=1e-12)

    def test_matches_reference_library_on_random_grid(self, random_rgb):
        ours = rgb_to_hsv(random_rgb)
        reference = matplotlib.colors.rgb_to_hsv(random_rgb)
        np.testing.assert_allclose(ours, reference, atol=1e-12)


class TestHsvToRgb:
    def test_achromatic(self):
        out = hsv_to_rgb(pixel(0.0, 0.0, 0.7))[0, 0]
        np.testing.assert_allclose(out, [0.7, 0.7, 0.7], atol=1e-12)

    def test_primary_green(self):
        out = hsv_to_rgb(pixel(1.0 / 3.0, 1.0, 1.0))[0, 0]
        np.testing.assert_allclose(out, [0.0, 1.0, 0.0], atol=1e-12)

    def test_round_trip_random_grid(self, rng):
        img = rng.random((21, 9, 3))
        back = hsv_to_rgb(rgb_to_hsv(img))
        np.testing.assert_allclose(back, img, atol=1e-6)

    def test_round_trip_extremes(self):
        corners = np.array([[[0, 0, 0], [1, 1, 1], [1, 0, 0], [0, 1, 0],
                             [0, 0, 1], [1, 1, 0], [0, 1, 1], [1, 0, 1]]], dtype=float)
        back = hsv_to_rgb(rgb_to_hsv(corners))
        np.testing.assert_allclose(back, corners, atol=1e-12)


class TestInitIllumination:
    def test_white_pixel(self):
        assert init_illumination(pixel(1, 1, 1))[0, 0] == pytest.approx(1.0, abs=1e-12)

    def test_channel_weights(self):
        assert init_illumination(pixel(1, 0, 0))[0, 0] == pytest.approx(0.299, abs=1e-12)
        assert init_illumination(pixel(0, 1, 0))[0, 0] == pytest.approx(0.587, abs=1e-12)
        assert init_illumination(pixel(0, 0, 1))[0, 0] == pytest.approx(0.114, abs=1e-12)

    def test_range_preserved(self, random_rgb):
        out = init_illumination(random_rgb)
        assert out.min() >= 0.0 and out.max() <= 1.0

    def test_linearity(self, random_rgb):
        for a in (0.0, 0.25, 0.7, 1.0):
            np.testing.assert_allclose(
                init_illumination(a * random_rgb),
                a * init_illumination(random_rgb),
                atol=1e-12,
            )


class TestFileRoundTrip:
    def test_save_then_load_identical_to_quantized(self, tmp_path, random_rgb):
        path = tmp_path / "img.png"
        save_image(path, random_rgb)
        loaded = load_image(path)
        quantized = np.rint(np.clip(random_rgb, 0, 1) * 255.0) / 255.0
        np.testing.assert_allclose(loaded, quantized, atol=1e-12)

    def test_eight_bit_normalization(self, tmp_path):
        path = tmp_path / "gray.png"
        save_image(path, np.full((2, 2, 3), 128 / 255.0))
        assert load_image(path)[0, 0, 0] == pytest.approx(128 / 255.0, abs=1e-12)

    def test_sixteen_bit_png(self, tmp_path):
        import cv2

        path = tmp_path / "deep.png"
        data = np.array([[[1000, 30000, 65535]]], dtype=np.uint16)
        cv2.imwrite(str(path), data[:, :, ::-1])
        loaded = load_image(path)
        np.testing.assert_allclose(loaded[0, 0], [1000 / 65535, 30000 / 65535, 1.0], atol=1e-12)

    def test_jpeg_loads(self, tmp_path):
        import cv2

        path = tmp_path / "img.jpg"
        cv2.imwrite(str(path), np.full((4, 4, 3), 128, dtype=np.uint8))
        assert load_image(path).shape == (4, 4, 3)

    def test_alpha_dropped(self, tmp_path):
        import cv2

        path = tmp_path / "rgba.png"
        cv2.imwrite(str(path), np.full((3, 3, 4), 200, dtype=np.uint8))
        assert load_image(path).shape == (3, 3, 3)

    def test_grayscale_replicated(self, tmp_path):
        import cv2

        path = tmp_path / "gray1.png"
        cv2.imwrite(str(path), np.full((3, 3), 77, dtype=np.uint8))
        out = load_image(path)
        np.testing.assert_array_equal(out[..., 0], out[..., 1])
        np.testing.assert_array_equal(out[..., 0], out[..., 2])


class TestFileErrors:
    def test_missing_file(self, tmp_path):
        with pytest.raises(ImageReadError):
            load_image(tmp_path / "nope.png")

    def test_corrupt_file(self, tmp_path):
        bad = tmp_path / "bad.png"
        bad.write_bytes(b"this is not an image")
        with pytest.raises(UnsupportedImageError):
            load_image(bad)

    def test_pixel_guard(self, tmp_path, monkeypatch):
        import natle.image as image_mod

        monkeypatch.setattr(image_mod, "MAX_PIXELS", 8)
        path = tmp_path / "big.png"
        save_image(path, np.zeros((4, 4, 3)))
        with pytest.raises(ImageTooLargeError):
            load_image(path)

    def test_save_requires_png(self, tmp_path):
        with pytest.raises(UnsupportedImageError):
            save_image(tmp_path / "out.jpg", np.zeros((2, 2, 3)))


class TestValidators:
    def test_planar_rejects_rgb(self, random_rgb):
        with pytest.raises(ValueError):
            as_planar(random_rgb)

    def test_rgb_rejects_planar(self, random_planar):
        with pytest.raises(ValueError):
            as_rgb(random_planar)

    def test_rgb_rejects_empty(self):
        with pytest.raises(ValueError):
            as_rgb(np.zeros((0, 4, 3)))
