"""Centered orthonormal FFTs, rigid in-plane transforms and complex noise.

Arrays are plain numpy arrays. The last two axes are always (ny, nx) with
phase encoding along rows; leading axes are treated as a batch, so an echo
stack of shape (etl, ny, nx) can be transformed in one call. The DC sample
of k-space sits at index (ny // 2, nx // 2).
"""

from __future__ import annotations

import functools
from dataclasses import dataclass

import numpy as np
from scipy import sparse

__all__ = [
    "DataValidityError",
    "RigidTransform",
    "add_noise",
    "apply_rigid",
    "check_image",
    "fft2c",
    "fft2c_rows",
    "ifft2c",
    "make_rng",
]

# stream tags keep per-purpose random streams independent for a shared seed
STREAM_NOISE = 1
STREAM_TRAJECTORY = 2
STREAM_PHANTOM = 3
STREAM_MDME_NOISE = 4


class DataValidityError(ValueError):
    """Raised for arrays with the wrong rank or non-finite entries."""


def make_rng(seed: int, stream: int = 0) -> np.random.Generator:
    """Generator for ``seed`` on an independent sub-stream ``stream``."""
    if seed < 0:
        raise ValueError(f"seed must be non-negative, got {seed}")
    ss = np.random.SeedSequence(int(seed), spawn_key=(int(stream),))
    return np.random.Generator(np.random.PCG64(ss))


def check_image(arr, name: str = "image") -> np.ndarray:
    arr = np.asarray(arr)
    if arr.ndim < 2:
        raise DataValidityError(f"{name} must be at least 2D, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise DataValidityError(f"{name} contains non-finite values")
    return arr


def fft2c(img) -> np.ndarray:
    """Centered, orthonormal 2D DFT over the last two axes."""
    img = check_image(img)
    tmp = np.fft.ifftshift(img, axes=(-2, -1))
    tmp = np.fft.fft2(tmp, axes=(-2, -1), norm="ortho")
    return np.fft.fftshift(tmp, axes=(-2, -1))


@functools.lru_cache(maxsize=8)
def _centered_dft_matrix(n: int) -> np.ndarray:
    pos = np.arange(n) - n // 2
    mat = np.exp(-2j * np.pi * np.outer(pos, pos) / n) / np.sqrt(n)
    mat.setflags(write=False)
    return mat


def fft2c_rows(img, rows) -> np.ndarray:
    """Selected phase-encode rows of :func:`fft2c`, without the full transform.

    ``img`` is (..., ny, nx) and ``rows`` is (..., k) with matching leading
    axes; the result is (..., k, nx) and equals ``fft2c(img)[..., rows, :]``
    up to roundoff.
    """
    img = np.asarray(img)
    # separable: restricted DFT along y first, then FFT of the k rows along x
    mat = _centered_dft_matrix(img.shape[-2])[np.asarray(rows)]
    if np.isrealobj(img):
        tmp = mat.real @ img + 1j * (mat.imag @ img)
    else:
        tmp = mat @ img
    tmp = np.fft.ifftshift(tmp, axes=-1)
    return np.fft.fftshift(np.fft.fft(tmp, axis=-1, norm="ortho"), axes=-1)


def ifft2c(ksp) -> np.ndarray:
    """Inverse of :func:`fft2c`."""
    ksp = check_image(ksp, "k-space")
    tmp = np.fft.ifftshift(ksp, axes=(-2, -1))
    tmp = np.fft.ifft2(tmp, axes=(-2, -1), norm="ortho")
    return np.fft.fftshift(tmp, axes=(-2, -1))


@dataclass(frozen=True)
class RigidTransform:
    """In-plane rigid motion state.

    ``rotation_deg`` is counterclockwise as displayed (row 0 at the top)
    about the geometric image center; shifts are in pixels, positive
    ``shift_y`` moving content down and positive ``shift_x`` to the right.
    """

    rotation_deg: float = 0.0
    shift_y: float = 0.0
    shift_x: float = 0.0

    def __post_init__(self):
        for name in ("rotation_deg", "shift_y", "shift_x"):
            value = getattr(self, name)
            if not np.isfinite(value):
                raise DataValidityError(f"{name} must be finite, got {value}")

    @property
    def is_identity(self) -> bool:
        return self.rotation_deg == 0 and self.shift_y == 0 and self.shift_x == 0


def _cos_sin(angle_deg: float) -> tuple[float, float]:
    # right angles get exact values so the resampling grid lands on pixels
    quarter, rem = divmod(angle_deg, 90.0)
    if rem == 0:
        return ((1.0, 0.0), (0.0, 1.0), (-1.0, 0.0), (0.0, -1.0))[int(quarter) % 4]
    rad = np.deg2rad(angle_deg)
    return float(np.cos(rad)), float(np.sin(rad))


def _rotation_operator(ny: int, nx: int, angle_deg: float) -> sparse.csr_matrix:
    """Sparse (ny*nx, ny*nx) bilinear resampling matrix for a rotation.

    Row p holds the four interpolation weights of output pixel p; taps
    outside the field of view carry zero weight, which is the zero fill.
    """
    cy, cx = (ny - 1) / 2.0, (nx - 1) / 2.0
    c, s = _cos_sin(angle_deg)

    yy, xx = np.mgrid[0:ny, 0:nx].astype(np.float64)
    # output pixel -> source location, in a y-up frame centered on the image
    u = (xx - cx).ravel()
    v = (cy - yy).ravel()
    xs = cx + (c * u + s * v)
    ys = cy - (-s * u + c * v)

    x0 = np.floor(xs)
    y0 = np.floor(ys)
    fx = xs - x0
    fy = ys - y0
    x0 = x0.astype(np.intp)
    y0 = y0.astype(np.intp)

    # fixed four taps per row; taps outside the image get weight 0 on column 0
    n = ny * nx
    cols = np.empty((n, 4), dtype=np.intp)
    vals = np.empty((n, 4))
    for k, (dy, dx, w) in enumerate((
        (0, 0, (1 - fy) * (1 - fx)),
        (0, 1, (1 - fy) * fx),
        (1, 0, fy * (1 - fx)),
        (1, 1, fy * fx),
    )):
        yi = y0 + dy
        xi = x0 + dx
        inside = (yi >= 0) & (yi < ny) & (xi >= 0) & (xi < nx)
        cols[:, k] = np.where(inside, yi * nx + xi, 0)
        vals[:, k] = np.where(inside, w, 0.0)
    indptr = np.arange(0, 4 * n + 1, 4)
    return sparse.csr_matrix((vals.ravel(), cols.ravel(), indptr), shape=(n, n))


def _rotate(img: np.ndarray, angle_deg: float) -> np.ndarray:
    ny, nx = img.shape[-2:]
    op = _rotation_operator(ny, nx, angle_deg)
    flat = img.reshape(-1, ny * nx).T
    return np.ascontiguousarray((op @ flat).T).reshape(img.shape)


def _translate(img: np.ndarray, shift_y: float, shift_x: float) -> np.ndarray:
    ny, nx = img.shape[-2:]
    ky = (np.arange(ny) - ny // 2) / ny
    kx = (np.arange(nx) - nx // 2) / nx
    ramp = np.exp(-2j * np.pi * (ky[:, None] * shift_y + kx[None, :] * shift_x))
    return ifft2c(fft2c(img) * ramp)


def apply_rigid(img, t: RigidTransform) -> np.ndarray:
    """Rotate (bilinear, zero fill) and then translate (k-space phase ramp).

    Rotation is about ((ny - 1) / 2, (nx - 1) / 2). Translation wraps
    around the field of view. Real input stays real unless a shift is
    requested; the identity transform returns an exact copy.
    """
    img = check_image(img)
    if t.is_identity:
        return img.copy()
    out = img
    if t.rotation_deg != 0:
        out = _rotate(out, t.rotation_deg)
    if t.shift_y != 0 or t.shift_x != 0:
        out = _translate(out, t.shift_y, t.shift_x)
    return out


def add_noise(ksp, sigma: float, seed: int) -> np.ndarray:
    """Add circular complex white Gaussian noise of total variance ``sigma**2``."""
    if not sigma >= 0:
        raise ValueError(f"sigma must be >= 0, got {sigma}")
    ksp = check_image(ksp, "k-space")
    if sigma == 0:
        return ksp.copy()
    rng = make_rng(seed, STREAM_NOISE)
    scale = sigma / np.sqrt(2.0)
    noise = rng.normal(0.0, scale, ksp.shape) + 1j * rng.normal(0.0, scale, ksp.shape)
    return ksp + noise
