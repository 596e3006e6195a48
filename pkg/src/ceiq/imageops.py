"""Image decoding, grayscale conversion, histograms and equalization.

Images are plain numpy arrays: ``uint8`` of shape (H, W) for grayscale,
(H, W, 3) for RGB. All functions are pure and thread-safe.
"""

from dataclasses import dataclass

import numpy as np
from PIL import Image, UnidentifiedImageError

from .errors import ImageError, InvalidArgumentError
from .utils import round_half_away

# NTSC/YIQ luminance weights for RGB -> gray conversion.
LUMA_WEIGHTS = (0.2989, 0.5870, 0.1140)


def validate_gray(img: np.ndarray) -> np.ndarray:
    img = np.asarray(img)
    if img.ndim != 2 or img.size == 0:
        raise InvalidArgumentError(f"expected a non-empty 2-D gray image, got shape {img.shape}")
    if img.dtype != np.uint8:
        if not np.issubdtype(img.dtype, np.integer):
            raise InvalidArgumentError(f"gray image must be integer-typed, got {img.dtype}")
        if img.min() < 0 or img.max() > 255:
            raise InvalidArgumentError("gray pixel values must lie in [0, 255]")
        img = img.astype(np.uint8)
    return img


def validate_rgb(img: np.ndarray) -> np.ndarray:
    img = np.asarray(img)
    if img.ndim != 3 or img.shape[2] != 3 or img.shape[0] == 0 or img.shape[1] == 0:
        raise InvalidArgumentError(f"expected a non-empty (H, W, 3) RGB image, got shape {img.shape}")
    if img.dtype != np.uint8:
        if not np.issubdtype(img.dtype, np.integer):
            raise InvalidArgumentError(f"RGB image must be integer-typed, got {img.dtype}")
        if img.min() < 0 or img.max() > 255:
            raise InvalidArgumentError("RGB channel values must lie in [0, 255]")
        img = img.astype(np.uint8)
    return img


def load_image(path) -> np.ndarray:
    """Decode PNG/JPEG/BMP into a uint8 array.

    Single-channel files come back as (H, W) and are used as the gray
    image directly; color files come back as (H, W, 3). 16-bit and
    alpha-carrying files are rejected rather than silently rescaled.
    """
    try:
        with Image.open(path) as im:
            mode = im.mode
            if mode == "P":
                im = im.convert("RGB")
                mode = "RGB"
            if mode == "L":
                return np.asarray(im, dtype=np.uint8)
            if mode == "RGB":
                return np.asarray(im, dtype=np.uint8)
            raise ImageError(
                f"{path}: unsupported image mode {mode!r} (8-bit L or RGB required; "
                "16-bit and alpha images are rejected)"
            )
    except FileNotFoundError as exc:
        raise ImageError(f"{path}: no such file") from exc
    except UnidentifiedImageError as exc:
        raise ImageError(f"{path}: cannot decode image") from exc
    except OSError as exc:
        raise ImageError(f"{path}: {exc}") from exc


def to_gray(img: np.ndarray) -> np.ndarray:
    """Convert RGB to gray with the NTSC luma weights.

    Each output pixel is round(0.2989 R + 0.5870 G + 0.1140 B), ties away
    from zero, clamped to [0, 255]. Inputs that are already gray (R=G=B=v)
    map to v. A 2-D input passes through unchanged.
    """
    img = np.asarray(img)
    if img.ndim == 2:
        return validate_gray(img)
    img = validate_rgb(img)
    wr, wg, wb = LUMA_WEIGHTS
    luma = wr * img[:, :, 0] + wg * img[:, :, 1] + wb * img[:, :, 2]
    return np.clip(round_half_away(luma), 0, 255).astype(np.uint8)


@dataclass(frozen=True)
class Histogram:
    """Fixed-bin pixel-value histogram with both counts and probabilities."""

    counts: np.ndarray  # int64, length = bins
    probabilities: np.ndarray  # float64, sums to 1

    @property
    def bins(self) -> int:
        return len(self.counts)


def compute_histogram(img: np.ndarray, bins: int = 128) -> Histogram:
    """Histogram of a gray image; pixel v falls in bin floor(v * bins / 256)."""
    img = validate_gray(img)
    if not 1 <= bins <= 256:
        raise InvalidArgumentError(f"bins must lie in [1, 256], got {bins}")
    full = np.bincount(img.ravel(), minlength=256).astype(np.int64)
    idx = (np.arange(256) * bins) // 256
    counts = np.zeros(bins, dtype=np.int64)
    np.add.at(counts, idx, full)
    return Histogram(counts=counts, probabilities=counts / img.size)


def equalize(img: np.ndarray) -> np.ndarray:
    """Classical 256-level histogram equalization.

    Builds the empirical CDF over the 256 gray levels and remaps each
    pixel v to round(255 * cdf(v)), ties away from zero. The level map is
    monotone nondecreasing and the output has the same dimensions.
    """
    img = validate_gray(img)
    counts = np.bincount(img.ravel(), minlength=256)
    cdf = np.cumsum(counts) / img.size
    lut = round_half_away(255.0 * cdf).astype(np.uint8)
    return lut[img]
