import colorsys

import numpy as np
import pytest
from PIL import Image

from app.exceptions import (
    ConfigValidationError,
    MissingFileError,
    MultiChannelMaskError,
    RegionBoundsError,
    TruncatedDataError,
    UnsupportedFormatError,
)
from app.schemas.plots import RegionOfInterest
from app.services.raster import (
    PlantSegmenter,
    crop,
    load_image,
    load_mask,
    otsu_threshold,
    save_mask,
    segment_hue_threshold,
    segment_otsu,
    to_hue,
)
from tests import oracles


class TestHueConversion:
    """Hexcone hue on the halved-degree scale"""

    def test_primary_colours(self):
        img = np.array([[[255, 0, 0], [0, 255, 0], [0, 0, 255], [255, 255, 0], [255, 0, 255]]], dtype=np.uint8)
        assert to_hue(img).tolist() == [[0, 60, 120, 30, 150]]

    def test_achromatic_pixels_have_zero_hue(self):
        img = np.array([[[0, 0, 0], [128, 128, 128], [255, 255, 255]]], dtype=np.uint8)
        assert to_hue(img).tolist() == [[0, 0, 0]]

    def test_hue_wraps_at_180(self):
        img = np.array([[[255, 0, 1]]], dtype=np.uint8)
        assert to_hue(img)[0, 0] == 0

    def test_matches_halved_degrees(self):
        """Saturated colours around the wheel land within one level of degrees / 2"""
        for degrees in range(0, 360, 7):
            r, g, b = colorsys.hsv_to_rgb(degrees / 360.0, 1.0, 1.0)
            img = np.array([[[round(r * 255), round(g * 255), round(b * 255)]]], dtype=np.uint8)
            diff = abs(int(to_hue(img)[0, 0]) - round(degrees / 2) % 180)
            assert min(diff, 180 - diff) <= 1

    def test_strips_match_single_pass(self):
        """Images taller than one strip convert identically row by row"""
        np.random.seed(42)
        img = np.random.randint(0, 256, size=(1100, 3, 3), dtype=np.uint8)
        full = to_hue(img)
        assert full.shape == (1100, 3)
        assert np.array_equal(full[1024:], to_hue(img[1024:]))
        assert full.max() <= 179


class TestSegmentation:
    """Hue band and Otsu plant masks"""

    def setup_method(self):
        np.random.seed(42)

    def test_hue_band_is_inclusive(self):
        hue = np.array([[19, 20, 55, 90, 91]], dtype=np.uint8)
        assert segment_hue_threshold(hue, 20, 90).tolist() == [[0, 1, 1, 1, 0]]

    def test_inverted_band_rejected(self):
        hue = np.zeros((2, 2), dtype=np.uint8)
        with pytest.raises(ConfigValidationError):
            segment_hue_threshold(hue, 90, 20)

    def test_otsu_bimodal(self):
        hue = np.array([[10] * 6 + [100] * 4], dtype=np.uint8)
        assert otsu_threshold(hue) == 10
        assert segment_otsu(hue).tolist() == [[0] * 6 + [1] * 4]

    def test_otsu_degenerate_histogram(self):
        hue = np.full((4, 4), 37, dtype=np.uint8)
        assert otsu_threshold(hue) is None
        assert segment_otsu(hue).sum() == 0

    def test_otsu_matches_brute_force(self):
        for _ in range(200):
            levels = np.random.randint(2, 8)
            palette = np.random.choice(180, size=levels, replace=False)
            hue = palette[np.random.randint(0, levels, size=(6, 7))].astype(np.uint8)
            hist = np.bincount(hue.ravel(), minlength=180).tolist()
            assert otsu_threshold(hue) == oracles.otsu(hist)

    def test_green_on_black_segments_as_plants(self):
        mask = np.zeros((5, 6), dtype=np.uint8)
        mask[1:4, 2:5] = 1
        rgb = np.zeros((5, 6, 3), dtype=np.uint8)
        rgb[mask == 1] = (0, 255, 0)
        assert np.array_equal(PlantSegmenter("hue").segment(rgb), mask)

    def test_segment_with_roi(self):
        rgb = np.zeros((10, 10, 3), dtype=np.uint8)
        rgb[2, 3] = (0, 200, 0)
        mask = PlantSegmenter("hue").segment(rgb, RegionOfInterest(x0=3, y0=2, width=4, height=4))
        assert mask.shape == (4, 4)
        assert mask[0, 0] == 1 and mask.sum() == 1

    def test_unknown_method(self):
        with pytest.raises(ConfigValidationError) as exc:
            PlantSegmenter("kmeans")
        assert exc.value.field == "segmentation.method"

    def test_crop_outside_raster(self):
        with pytest.raises(RegionBoundsError):
            crop(np.zeros((10, 10), dtype=np.uint8), RegionOfInterest(x0=5, y0=0, width=6, height=2))


class TestRasterIO:
    """Decoding RGB rasters and single-channel masks"""

    def setup_method(self):
        np.random.seed(42)
        self.rgb = np.random.randint(0, 256, size=(16, 12, 3), dtype=np.uint8)

    def test_rgb_png_round_trip(self, tmp_path):
        path = tmp_path / "field.png"
        Image.fromarray(self.rgb, mode="RGB").save(path)
        assert np.array_equal(load_image(path), self.rgb)

    def test_rgba_drops_alpha(self, tmp_path):
        rgba = np.dstack([self.rgb, np.full(self.rgb.shape[:2], 7, dtype=np.uint8)])
        path = tmp_path / "field.png"
        Image.fromarray(rgba, mode="RGBA").save(path)
        assert np.array_equal(load_image(path), self.rgb)

    def test_rgb_tiff(self, tmp_path):
        path = tmp_path / "field.tif"
        Image.fromarray(self.rgb, mode="RGB").save(path)
        assert np.array_equal(load_image(path), self.rgb)

    def test_grayscale_rejected_as_rgb(self, tmp_path):
        path = tmp_path / "gray.png"
        Image.fromarray(self.rgb[..., 0], mode="L").save(path)
        with pytest.raises(UnsupportedFormatError):
            load_image(path)

    def test_missing_file(self, tmp_path):
        with pytest.raises(MissingFileError):
            load_image(tmp_path / "absent.png")

    def test_not_an_image(self, tmp_path):
        path = tmp_path / "notes.png"
        path.write_bytes(b"definitely not a raster")
        with pytest.raises(UnsupportedFormatError):
            load_image(path)

    def test_truncated_png(self, tmp_path):
        big = np.random.randint(0, 256, size=(256, 256, 3), dtype=np.uint8)
        path = tmp_path / "cut.png"
        Image.fromarray(big, mode="RGB").save(path)
        data = path.read_bytes()
        path.write_bytes(data[: len(data) // 2])
        with pytest.raises(TruncatedDataError):
            load_image(path)

    def test_truncated_png_is_closed(self, tmp_path, monkeypatch):
        big = np.random.randint(0, 256, size=(256, 256, 3), dtype=np.uint8)
        path = tmp_path / "cut.png"
        Image.fromarray(big, mode="RGB").save(path)
        data = path.read_bytes()
        path.write_bytes(data[: len(data) // 2])

        opened = []
        real_open = Image.open

        def recording_open(*args, **kwargs):
            img = real_open(*args, **kwargs)
            opened.append(img)
            return img

        monkeypatch.setattr(Image, "open", recording_open)
        with pytest.raises(TruncatedDataError):
            load_image(path)
        assert len(opened) == 1 and opened[0].fp is None

    def test_mask_nonzero_is_plant(self, tmp_path):
        values = np.array([[0, 1, 200], [0, 0, 255]], dtype=np.uint8)
        path = tmp_path / "mask.png"
        Image.fromarray(values, mode="L").save(path)
        assert load_mask(path).tolist() == [[0, 1, 1], [0, 0, 1]]

    def test_multichannel_mask_rejected(self, tmp_path):
        path = tmp_path / "mask.png"
        Image.fromarray(self.rgb, mode="RGB").save(path)
        with pytest.raises(MultiChannelMaskError):
            load_mask(path)

    @pytest.mark.parametrize("suffix", ["png", "pgm"])
    def test_save_mask_round_trip(self, tmp_path, suffix):
        mask = (np.random.rand(9, 13) > 0.5).astype(np.uint8)
        path = save_mask(mask, tmp_path / f"mask.{suffix}")
        assert np.array_equal(load_mask(path), mask)
