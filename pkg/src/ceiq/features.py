"""The five contrast-awareness features.

A gray image is compared against its histogram-equalized version: one
SSIM score plus four histogram statistics (entropy of each histogram and
both cross entropies between them), all in bits.
"""

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateImageError, InvalidArgumentError
from .imageops import Histogram, compute_histogram, equalize, to_gray
from .ssim import SsimParams, ssim

DEFAULT_BINS = 128


@dataclass(frozen=True)
class FeatureVector:
    s_ge: float  # SSIM between gray image and its equalized version
    e_g: float   # entropy of the gray histogram (bits)
    e_e: float   # entropy of the equalized histogram (bits)
    e_ge: float  # cross entropy of gray under equalized (bits)
    e_eg: float  # cross entropy of equalized under gray (bits)

    def as_array(self) -> np.ndarray:
        return np.array([self.s_ge, self.e_g, self.e_e, self.e_ge, self.e_eg])

    @staticmethod
    def names() -> tuple:
        return ("s_ge", "e_g", "e_e", "e_ge", "e_eg")


def entropy(h: Histogram) -> float:
    """Shannon entropy in bits; zero-probability bins are skipped."""
    p = h.probabilities[h.probabilities > 0]
    if p.size == 0:
        raise InvalidArgumentError("entropy of an all-zero histogram is undefined")
    return float(-np.sum(p * np.log2(p)))


def cross_entropy(p: Histogram, q: Histogram) -> float:
    """-sum p(i) log2 q(i) over bins where both probabilities are nonzero.

    Bins where either distribution is zero are skipped without
    renormalizing, so the value stays finite for any pair of histograms
    that share at least one occupied bin.
    """
    if p.bins != q.bins:
        raise InvalidArgumentError(f"bin counts differ: {p.bins} vs {q.bins}")
    mask = (p.probabilities > 0) & (q.probabilities > 0)
    if not mask.any():
        raise InvalidArgumentError("histograms share no occupied bin; cross entropy undefined")
    return float(-np.sum(p.probabilities[mask] * np.log2(q.probabilities[mask])))


def extract_features(img: np.ndarray, bins: int = DEFAULT_BINS,
                     ssim_params: SsimParams = SsimParams()) -> FeatureVector:
    """Run the full feature pipeline on an RGB or gray uint8 array.

    Raises DegenerateImageError when the image carries no contrast signal
    (the gray and equalized histograms share no occupied bin, e.g. for a
    constant image whose single level moves under equalization).
    """
    gray = to_gray(img)
    equalized = equalize(gray)
    s_ge = ssim(gray, equalized, ssim_params).mean_ssim
    h_g = compute_histogram(gray, bins)
    h_e = compute_histogram(equalized, bins)
    try:
        e_ge = cross_entropy(h_g, h_e)
        e_eg = cross_entropy(h_e, h_g)
    except InvalidArgumentError as exc:
        raise DegenerateImageError(
            f"no usable contrast signal (histogram supports are disjoint): {exc}"
        ) from exc
    return FeatureVector(
        s_ge=s_ge,
        e_g=entropy(h_g),
        e_e=entropy(h_e),
        e_ge=e_ge,
        e_eg=e_eg,
    )
