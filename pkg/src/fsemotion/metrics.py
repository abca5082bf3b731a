"""SSIM and NRMSE on magnitude images."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

__all__ = ["MetricReport", "compare", "nrmse", "ssim"]

WINDOW = 7
K1 = 0.01
K2 = 0.03


def _pair(ref, est):
    ref = np.asarray(ref, dtype=np.float64)
    est = np.asarray(est, dtype=np.float64)
    if ref.shape != est.shape:
        raise ValueError(f"shape mismatch: {ref.shape} vs {est.shape}")
    return ref, est


def nrmse(ref, est) -> float:
    """||est - ref|| / ||ref||."""
    ref, est = _pair(ref, est)
    denom = np.linalg.norm(ref)
    if denom == 0:
        raise ValueError("reference image is identically zero")
    return float(np.linalg.norm(est - ref) / denom)


def ssim(ref, est, dynamic_range: Optional[float] = None, window: int = WINDOW) -> float:
    """Mean SSIM over all fully contained ``window`` x ``window`` uniform windows.

    Local statistics are population (1/N) moments. ``dynamic_range``
    defaults to ``ref.max() - ref.min()``.
    """
    ref, est = _pair(ref, est)
    if ref.ndim != 2:
        raise ValueError(f"ssim expects 2D images, got shape {ref.shape}")
    if window > min(ref.shape):
        raise ValueError(f"window {window} larger than image {ref.shape}")
    if dynamic_range is None:
        dynamic_range = float(ref.max() - ref.min())
    if not dynamic_range > 0:
        raise ValueError(f"dynamic_range must be positive, got {dynamic_range}")
    c1 = (K1 * dynamic_range) ** 2
    c2 = (K2 * dynamic_range) ** 2

    wx = sliding_window_view(ref, (window, window))
    wy = sliding_window_view(est, (window, window))
    mx = wx.mean(axis=(-2, -1))
    my = wy.mean(axis=(-2, -1))
    dx = wx - mx[..., None, None]
    dy = wy - my[..., None, None]
    vx = (dx * dx).mean(axis=(-2, -1))
    vy = (dy * dy).mean(axis=(-2, -1))
    cxy = (dx * dy).mean(axis=(-2, -1))

    num = (2 * mx * my + c1) * (2 * cxy + c2)
    den = (mx**2 + my**2 + c1) * (vx + vy + c2)
    return float(np.mean(num / den))


@dataclass(frozen=True)
class MetricReport:
    ssim: float
    nrmse: float
    sample_id: Optional[int] = None
    pipeline: Optional[str] = None

    def __str__(self) -> str:
        return f"ssim={self.ssim!r} nrmse={self.nrmse!r}"


def compare(ref, est, sample_id=None, pipeline=None) -> MetricReport:
    """Metrics of ``|est|`` against ``|ref|``."""
    ref = np.abs(np.asarray(ref))
    est = np.abs(np.asarray(est))
    return MetricReport(ssim=ssim(ref, est), nrmse=nrmse(ref, est), sample_id=sample_id, pipeline=pipeline)
