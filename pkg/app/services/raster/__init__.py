# Raster services exports
from app.services.raster.io import (
    RgbImage,
    HueImage,
    PlantMask,
    load_image,
    load_mask,
    save_mask,
)
from app.services.raster.segmentation import (
    PlantSegmenter,
    crop,
    to_hue,
    segment_hue_threshold,
    segment_otsu,
    otsu_threshold,
)

__all__ = [
    "RgbImage",
    "HueImage",
    "PlantMask",
    "load_image",
    "load_mask",
    "save_mask",
    "PlantSegmenter",
    "crop",
    "to_hue",
    "segment_hue_threshold",
    "segment_otsu",
    "otsu_threshold",
]
