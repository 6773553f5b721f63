"""PSNR and single-scale SSIM on the 8-bit (0-255) scale."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .imagecore import Image

PEAK = 255.0
PSNR_CAP = 99.0
SSIM_WINDOW = 11
SSIM_SIGMA = 1.5
C1 = (0.01 * PEAK) ** 2
C2 = (0.03 * PEAK) ** 2


@dataclass(frozen=True)
class QualityScore:
    psnr_db: float
    ssim: float


def _pixels(img) -> np.ndarray:
    if isinstance(img, Image):
        return img.pixels
    return np.asarray(img, dtype=np.float64)


def _pair(reference, test):
    a, b = _pixels(reference), _pixels(test)
    if a.shape != b.shape:
        raise ValueError(f"image dimensions differ: {a.shape} vs {b.shape}")
    return a, b


def psnr(reference, test) -> float:
    """``10 log10(255^2 / MSE)`` in dB, capped at 99 dB for identical inputs."""
    a, b = _pair(reference, test)
    mse = np.mean((a - b) ** 2)
    if mse == 0:
        return PSNR_CAP
    return float(min(10.0 * np.log10(PEAK**2 / mse), PSNR_CAP))


def gaussian_window(size: int = SSIM_WINDOW, sigma: float = SSIM_SIGMA) -> np.ndarray:
    """1-D normalized Gaussian taps; the 2-D window is their outer product."""
    t = np.arange(size) - (size - 1) / 2.0
    g = np.exp(-(t**2) / (2.0 * sigma**2))
    return g / g.sum()


def _filter_valid(x: np.ndarray, g: np.ndarray) -> np.ndarray:
    # separable weighted mean over every fully-contained window
    n = g.size
    x = sliding_window_view(x, n, axis=0) @ g
    return sliding_window_view(x, n, axis=1) @ g


def ssim_map(reference, test) -> np.ndarray:
    a, b = _pair(reference, test)
    if min(a.shape) < SSIM_WINDOW:
        raise ValueError(f"image {a.shape} smaller than the {SSIM_WINDOW}x{SSIM_WINDOW} SSIM window")
    g = gaussian_window()
    mu_a = _filter_valid(a, g)
    mu_b = _filter_valid(b, g)
    var_a = _filter_valid(a * a, g) - mu_a**2
    var_b = _filter_valid(b * b, g) - mu_b**2
    cov = _filter_valid(a * b, g) - mu_a * mu_b
    num = (2 * mu_a * mu_b + C1) * (2 * cov + C2)
    den = (mu_a**2 + mu_b**2 + C1) * (var_a + var_b + C2)
    return num / den


def ssim(reference, test) -> float:
    """Mean SSIM over all valid 11x11 Gaussian (sigma 1.5) windows."""
    return float(np.mean(ssim_map(reference, test)))


def quality(reference, test) -> QualityScore:
    return QualityScore(psnr(reference, test), ssim(reference, test))
