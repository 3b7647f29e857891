"""
Raster decoding and encoding.

Images are plain numpy arrays:
    RgbImage   uint8, shape (height, width, 3)
    HueImage   uint8, shape (height, width), values in [0, 179]
    PlantMask  uint8, shape (height, width), values in {0, 1}

GeoTIFF georeferencing tags are ignored; everything is in pixels.
"""
import logging
from pathlib import Path
from typing import Union

import numpy as np
import numpy.typing as npt
from PIL import Image, UnidentifiedImageError

from app.exceptions import (
    MissingFileError,
    MultiChannelMaskError,
    TruncatedDataError,
    UnsupportedFormatError,
)

logger = logging.getLogger(__name__)

RgbImage = npt.NDArray[np.uint8]
HueImage = npt.NDArray[np.uint8]
PlantMask = npt.NDArray[np.uint8]

PathLike = Union[str, Path]

# orthomosaics routinely exceed Pillow's decompression-bomb guard
Image.MAX_IMAGE_PIXELS = None

_RGB_MODES = {"RGB", "RGBA", "P"}
_SINGLE_CHANNEL_MODES = {"1", "L", "I", "I;16", "I;16B", "I;16L", "F"}


def _open(path: PathLike) -> Image.Image:
    path = Path(path)
    if not path.is_file():
        raise MissingFileError(f"raster not found: {path}", context={"path": str(path)})
    try:
        img = Image.open(path)
    except UnidentifiedImageError as e:
        raise UnsupportedFormatError(
            f"not a decodable raster: {path}", context={"path": str(path)}
        ) from e
    try:
        img.load()
    except (OSError, SyntaxError, ValueError) as e:
        img.close()
        raise TruncatedDataError(
            f"raster data is truncated or corrupt: {path} ({e})", context={"path": str(path)}
        ) from e
    return img


def load_image(path: PathLike) -> RgbImage:
    """Decode an 8-bit RGB raster (PNG/TIFF); palette images are expanded, alpha is dropped"""
    with _open(path) as img:
        if img.mode not in _RGB_MODES:
            raise UnsupportedFormatError(
                f"expected an 8-bit RGB raster, got mode {img.mode}: {path}",
                context={"path": str(path), "mode": img.mode},
            )
        rgb = np.asarray(img.convert("RGB"), dtype=np.uint8)
    logger.info(f"Loaded {rgb.shape[1]}x{rgb.shape[0]} RGB raster from {path}")
    return rgb


def load_mask(path: PathLike) -> PlantMask:
    """Decode a single-channel raster; any nonzero pixel counts as plant"""
    with _open(path) as img:
        if img.mode not in _SINGLE_CHANNEL_MODES:
            raise MultiChannelMaskError(
                f"mask must be single-channel, got mode {img.mode}: {path}",
                context={"path": str(path), "mode": img.mode},
            )
        values = np.array(img)
    mask = (values != 0).astype(np.uint8)
    logger.info(f"Loaded {mask.shape[1]}x{mask.shape[0]} mask from {path} ({int(mask.sum())} plant pixels)")
    return mask


def save_mask(mask: PlantMask, path: PathLike) -> Path:
    """Write a mask as 0/255 grayscale; the suffix picks PNG or PGM"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    Image.fromarray((mask.astype(np.uint8) * 255), mode="L").save(path)
    return path
