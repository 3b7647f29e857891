import logging
from fractions import Fraction
from typing import Callable, Dict, Optional

import cv2
import numpy as np

from app.config.settings import settings
from app.exceptions import ConfigValidationError, RegionBoundsError
from app.schemas.plots import RegionOfInterest
from app.services.raster.io import HueImage, PlantMask, RgbImage

logger = logging.getLogger(__name__)

HUE_LEVELS = 180

# rows per cvtColor call; bounds the 3-channel HSV working copy
_HUE_STRIP_ROWS = 1024


def crop(img: np.ndarray, roi: RegionOfInterest) -> np.ndarray:
    """Cut an axis-aligned region out of a raster (any channel count)"""
    height, width = img.shape[:2]
    if not roi.fits(width, height):
        raise RegionBoundsError(
            f"region of interest exceeds the {width}x{height} raster",
            context={"x0": roi.x0, "y0": roi.y0, "width": roi.width, "height": roi.height},
        )
    return img[roi.y0:roi.y0 + roi.height, roi.x0:roi.x0 + roi.width]


def to_hue(img: RgbImage) -> HueImage:
    """
    Hexcone hue on OpenCV's 8-bit scale: degrees halved, in [0, 179].
    Achromatic pixels (max == min) get hue 0.
    """
    rgb = np.ascontiguousarray(img, dtype=np.uint8)
    hue = np.empty(rgb.shape[:2], dtype=np.uint8)
    for start in range(0, rgb.shape[0], _HUE_STRIP_ROWS):
        strip = rgb[start:start + _HUE_STRIP_ROWS]
        hue[start:start + len(strip)] = cv2.cvtColor(strip, cv2.COLOR_RGB2HSV)[..., 0]
    return hue


def segment_hue_threshold(hue: HueImage, lo: Optional[int] = None, hi: Optional[int] = None) -> PlantMask:
    """Plant where lo <= hue <= hi"""
    lo = settings.hue_lo if lo is None else lo
    hi = settings.hue_hi if hi is None else hi
    if not 0 <= lo <= hi <= HUE_LEVELS - 1:
        raise ConfigValidationError(
            f"hue band [{lo}, {hi}] must satisfy 0 <= lo <= hi <= {HUE_LEVELS - 1}",
            field="segmentation.hue_lo",
        )
    return (cv2.inRange(np.ascontiguousarray(hue, dtype=np.uint8), lo, hi) > 0).astype(np.uint8)


def otsu_threshold(hue: HueImage) -> Optional[int]:
    """
    Hue level maximising the between-class variance of {hue <= t} vs {hue > t}.
    Compared as exact rationals; ties keep the smallest t. None when the
    histogram has a single populated level.
    """
    hist = np.bincount(hue.ravel(), minlength=HUE_LEVELS)[:HUE_LEVELS].astype(np.int64)
    levels = np.arange(HUE_LEVELS, dtype=np.int64)
    total = int(hist.sum())
    total_sum = int((hist * levels).sum())

    best_t, best_score = None, Fraction(0)
    n0, s0 = 0, 0
    for t in range(HUE_LEVELS - 1):
        n0 += int(hist[t])
        s0 += t * int(hist[t])
        n1 = total - n0
        if n0 == 0 or n1 == 0:
            continue
        # N^2 * sigma_b^2 = (S0*N - S*N0)^2 / (N0*N1)
        score = Fraction((s0 * total - total_sum * n0) ** 2, n0 * n1)
        if score > best_score:
            best_t, best_score = t, score
    return best_t


def segment_otsu(hue: HueImage) -> PlantMask:
    if hue.size == 0:
        raise ConfigValidationError("cannot threshold an empty image", field="input")
    threshold = otsu_threshold(hue)
    if threshold is None:
        logger.warning("Hue histogram is degenerate; Otsu segmentation yields an empty mask")
        return np.zeros(hue.shape, dtype=np.uint8)
    logger.info(f"Otsu hue threshold: {threshold}")
    return (hue > threshold).astype(np.uint8)


SegmentationStrategy = Callable[[HueImage], PlantMask]


class PlantSegmenter:
    """Turns an RGB raster into a plant mask with a named strategy (hue band or Otsu)"""

    def __init__(self, method: str = "hue", hue_lo: Optional[int] = None, hue_hi: Optional[int] = None):
        self.hue_lo = settings.hue_lo if hue_lo is None else hue_lo
        self.hue_hi = settings.hue_hi if hue_hi is None else hue_hi
        self.strategies: Dict[str, SegmentationStrategy] = {
            "hue": lambda h: segment_hue_threshold(h, self.hue_lo, self.hue_hi),
            "otsu": segment_otsu,
        }
        if method not in self.strategies:
            raise ConfigValidationError(
                f"unknown segmentation method '{method}' (choose from {sorted(self.strategies)})",
                field="segmentation.method",
            )
        self.method = method

    def segment(self, img: RgbImage, roi: Optional[RegionOfInterest] = None) -> PlantMask:
        if roi is not None:
            img = crop(img, roi)
        mask = self.strategies[self.method](to_hue(img))
        logger.info(
            f"Segmented {mask.shape[1]}x{mask.shape[0]} ROI with '{self.method}': "
            f"{int(mask.sum())} plant pixels"
        )
        return mask
