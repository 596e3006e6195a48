"""Structural similarity (SSIM) between two gray images.

Local luminance/contrast/structure statistics under an 11x11 Gaussian
window (sigma 1.5), "valid" borders (no padding), optional box-filter
downsampling for large images — the configuration of the reference SSIM
implementation.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.ndimage import correlate1d

from .errors import InvalidArgumentError
from .imageops import validate_gray
from .utils import round_half_away


@dataclass(frozen=True)
class SsimParams:
    k1: float = 0.01
    k2: float = 0.03
    dynamic_range: float = 255.0
    window_size: int = 11
    window_sigma: float = 1.5
    alpha: float = 1.0
    beta: float = 1.0
    lam: float = 1.0
    auto_downsample: bool = True

    def __post_init__(self):
        if self.k1 <= 0 or self.k2 <= 0:
            raise InvalidArgumentError("k1 and k2 must be positive")
        if self.window_size < 3 or self.window_size % 2 == 0:
            raise InvalidArgumentError("window_size must be an odd integer >= 3")
        if self.window_sigma <= 0:
            raise InvalidArgumentError("window_sigma must be positive")
        if self.dynamic_range <= 0:
            raise InvalidArgumentError("dynamic_range must be positive")


@dataclass(frozen=True)
class SsimResult:
    mean_ssim: float
    ssim_map: Optional[np.ndarray] = None


def gaussian_window(size: int, sigma: float) -> np.ndarray:
    """Normalized 1-D Gaussian taps; the 2-D window is its outer product."""
    half = (size - 1) / 2.0
    t = np.arange(size) - half
    g = np.exp(-(t * t) / (2.0 * sigma * sigma))
    return g / g.sum()


def downsample_factor(height: int, width: int) -> int:
    return max(1, int(round_half_away(min(height, width) / 256.0)))


def box_downsample(img: np.ndarray, factor: int) -> np.ndarray:
    """Mean over non-overlapping factor x factor blocks (symmetric edge pad)."""
    if factor <= 1:
        return img
    h, w = img.shape
    pad_h = (-h) % factor
    pad_w = (-w) % factor
    if pad_h or pad_w:
        img = np.pad(img, ((0, pad_h), (0, pad_w)), mode="symmetric")
    h, w = img.shape
    return img.reshape(h // factor, factor, w // factor, factor).mean(axis=(1, 3))


def _filter_valid(img: np.ndarray, taps: np.ndarray) -> np.ndarray:
    """Separable correlation keeping only positions where the window fits."""
    r = (len(taps) - 1) // 2
    out = correlate1d(img, taps, axis=0, mode="constant")
    out = correlate1d(out, taps, axis=1, mode="constant")
    return out[r:-r or None, r:-r or None]


def ssim(a: np.ndarray, b: np.ndarray, params: SsimParams = SsimParams(),
         return_map: bool = False) -> SsimResult:
    """Mean SSIM between two equally sized gray images.

    With unit exponents the local index is the standard two-term form
    ((2*mu_a*mu_b + C1)(2*cov + C2)) / ((mu_a^2 + mu_b^2 + C1)(var_a + var_b + C2));
    non-unit exponents use the explicit three-component product. Statistics
    are computed in float64; the mean is taken over the valid (non-padded)
    map only.
    """
    a = validate_gray(a)
    b = validate_gray(b)
    if a.shape != b.shape:
        raise InvalidArgumentError(f"image dimensions differ: {a.shape} vs {b.shape}")

    x = a.astype(np.float64)
    y = b.astype(np.float64)
    if params.auto_downsample:
        f = downsample_factor(*x.shape)
        if f > 1:
            x = box_downsample(x, f)
            y = box_downsample(y, f)
    if min(x.shape) < params.window_size:
        raise InvalidArgumentError(
            f"image of shape {x.shape} is smaller than the {params.window_size}x"
            f"{params.window_size} window (after downsampling)"
        )

    taps = gaussian_window(params.window_size, params.window_sigma)
    mu_x = _filter_valid(x, taps)
    mu_y = _filter_valid(y, taps)
    mu_xx = mu_x * mu_x
    mu_yy = mu_y * mu_y
    mu_xy = mu_x * mu_y
    var_x = _filter_valid(x * x, taps) - mu_xx
    var_y = _filter_valid(y * y, taps) - mu_yy
    cov_xy = _filter_valid(x * y, taps) - mu_xy

    L = params.dynamic_range
    c1 = (params.k1 * L) ** 2
    c2 = (params.k2 * L) ** 2

    if params.alpha == 1.0 and params.beta == 1.0 and params.lam == 1.0:
        ssim_map = ((2.0 * mu_xy + c1) * (2.0 * cov_xy + c2)) / (
            (mu_xx + mu_yy + c1) * (var_x + var_y + c2)
        )
    else:
        c3 = c2 / 2.0
        sd_x = np.sqrt(np.maximum(var_x, 0.0))
        sd_y = np.sqrt(np.maximum(var_y, 0.0))
        lum = (2.0 * mu_xy + c1) / (mu_xx + mu_yy + c1)
        con = (2.0 * sd_x * sd_y + c2) / (var_x + var_y + c2)
        stru = (cov_xy + c3) / (sd_x * sd_y + c3)
        # structure can be negative; keep its sign under fractional exponents
        ssim_map = (
            lum ** params.alpha
            * con ** params.beta
            * np.sign(stru) * np.abs(stru) ** params.lam
        )

    mean = float(ssim_map.mean())
    return SsimResult(mean_ssim=mean, ssim_map=ssim_map if return_map else None)
