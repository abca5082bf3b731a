"""Slow reference implementations used as independent test oracles."""

import numpy as np


def dft2c_direct(x):
    """Centered orthonormal DFT by explicit double summation."""
    x = np.asarray(x)
    ny, nx = x.shape
    out = np.zeros((ny, nx), dtype=complex)
    ys = np.arange(ny) - ny // 2
    xs = np.arange(nx) - nx // 2
    for ky in range(ny):
        for kx in range(nx):
            fy, fx = ky - ny // 2, kx - nx // 2
            phase = np.exp(-2j * np.pi * (fy * ys[:, None] / ny + fx * xs[None, :] / nx))
            out[ky, kx] = np.sum(x * phase)
    return out / np.sqrt(ny * nx)


def idft2c_direct(k):
    return np.conj(dft2c_direct(np.conj(k)))


def ssim_direct(ref, est, dynamic_range, window=7, k1=0.01, k2=0.03):
    """Mean SSIM over valid windows, one window at a time with scalar loops."""
    ny, nx = ref.shape
    c1 = (k1 * dynamic_range) ** 2
    c2 = (k2 * dynamic_range) ** 2
    n = window * window
    vals = []
    for i in range(ny - window + 1):
        for j in range(nx - window + 1):
            a = [float(v) for v in ref[i:i + window, j:j + window].ravel()]
            b = [float(v) for v in est[i:i + window, j:j + window].ravel()]
            ma = sum(a) / n
            mb = sum(b) / n
            va = sum((v - ma) ** 2 for v in a) / n
            vb = sum((v - mb) ** 2 for v in b) / n
            cov = sum((u - ma) * (v - mb) for u, v in zip(a, b)) / n
            vals.append((2 * ma * mb + c1) * (2 * cov + c2) / ((ma**2 + mb**2 + c1) * (va + vb + c2)))
    return sum(vals) / len(vals)
