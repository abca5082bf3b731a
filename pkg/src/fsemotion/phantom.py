"""Procedural brain-like parameter maps and the synthetic MDME mapping path."""

from __future__ import annotations

from typing import Optional

import numpy as np

from .core import STREAM_MDME_NOISE, STREAM_PHANTOM, make_rng
from .relaxation import MDME_TD_MS, MDME_TE_MS, MdmeDictionary, ParameterMaps, match_maps

__all__ = [
    "TISSUES",
    "generate_phantom",
    "load_maps",
    "phantom_from_mdme",
    "save_maps",
    "simulate_mdme",
]

# (pd [a.u.], t2 [ms], t1 [ms]) per tissue class. Rough 3 T brain values,
# snapped onto the MDME dictionary grid (t1 = 100 + 20k, t2 = 10 + 2k) so
# noiseless fits are exact. Not measured data.
TISSUES = {
    "fat": (0.90, 70.0, 380.0),
    "gray_matter": (0.80, 100.0, 1820.0),
    "white_matter": (0.70, 80.0, 1080.0),
    "csf": (1.00, 980.0, 4000.0),
    "lesion": (0.85, 140.0, 2100.0),
}

MIN_SIZE = 32


def _ellipse(yy, xx, cy, cx, ry, rx, theta_deg):
    th = np.deg2rad(theta_deg)
    c, s = np.cos(th), np.sin(th)
    dx = xx - cx
    dy = yy - cy
    u = c * dx + s * dy
    v = -s * dx + c * dy
    return (u / rx) ** 2 + (v / ry) ** 2 <= 1.0


def generate_phantom(ny: int, nx: int, seed: int, tissues: Optional[dict] = None) -> ParameterMaps:
    """Randomized head phantom of nested and overlapping ellipses.

    Layers are painted (not summed), so every foreground pixel carries one
    row of ``tissues`` exactly. Everything outside the scalp ellipse is
    background with pd = t2 = t1 = 0.
    """
    if ny < MIN_SIZE or nx < MIN_SIZE:
        raise ValueError(f"phantom needs ny, nx >= {MIN_SIZE}, got {ny}x{nx}")
    tissues = TISSUES if tissues is None else tissues
    rng = make_rng(seed, STREAM_PHANTOM)

    half = min(ny, nx) / 2.0
    yy = (np.arange(ny)[:, None] - (ny - 1) / 2.0) / half
    xx = (np.arange(nx)[None, :] - (nx - 1) / 2.0) / half
    u = rng.uniform

    label = np.full((ny, nx), -1, dtype=np.int16)
    names = list(tissues)

    def paint(mask, name):
        label[mask & head] = names.index(name)

    hcy, hcx = u(-0.03, 0.03), u(-0.03, 0.03)
    hry, hrx = u(0.86, 0.93), u(0.70, 0.78)
    hth = u(-8, 8)
    head = _ellipse(yy, xx, hcy, hcx, hry, hrx, hth)
    label[head] = names.index("fat")

    scale = u(0.86, 0.90)
    paint(_ellipse(yy, xx, hcy, hcx, hry * scale, hrx * scale, hth), "gray_matter")

    scale = u(0.66, 0.74)
    wy, wx = hry * scale, hrx * scale
    paint(_ellipse(yy, xx, hcy + u(-0.03, 0.03), hcx, wy, wx, hth + u(-5, 5)), "white_matter")
    # gray matter islands cutting into the white matter
    for _ in range(rng.integers(2, 5)):
        ang = u(0, 2 * np.pi)
        r = u(0.7, 0.95)
        paint(
            _ellipse(yy, xx, hcy + r * wy * np.sin(ang), hcx + r * wx * np.cos(ang),
                     u(0.05, 0.12), u(0.05, 0.12), u(0, 180)),
            "gray_matter",
        )

    # lateral ventricles
    sep = u(0.06, 0.12)
    vry, vrx = u(0.18, 0.28), u(0.05, 0.09)
    for side in (-1, 1):
        paint(_ellipse(yy, xx, hcy + u(-0.05, 0.02), hcx + side * sep, vry, vrx, side * u(10, 25)), "csf")

    for _ in range(rng.integers(0, 4)):
        ang = u(0, 2 * np.pi)
        r = u(0.25, 0.6)
        rad = u(0.03, 0.07)
        paint(
            _ellipse(yy, xx, hcy + r * wy * np.sin(ang), hcx + r * wx * np.cos(ang), rad, rad * u(0.7, 1.3), u(0, 180)),
            "lesion",
        )

    table = np.array([tissues[n] for n in names], dtype=np.float64)
    fg = label >= 0
    pd = np.zeros((ny, nx))
    t2 = np.zeros((ny, nx))
    t1 = np.zeros((ny, nx))
    pd[fg], t2[fg], t1[fg] = table[label[fg]].T
    return ParameterMaps(pd=pd, t2=t2, t1=t1)


def simulate_mdme(maps: ParameterMaps, td_ms=MDME_TD_MS, te_ms=MDME_TE_MS,
                  sigma: float = 0.0, seed: int = 0) -> np.ndarray:
    """Forward MDME magnitude signals, shape (ny, nx, len(td) * len(te))."""
    if maps.t1 is None:
        raise ValueError("MDME simulation needs a t1 map")
    td = np.asarray(td_ms, dtype=np.float64)
    te = np.asarray(te_ms, dtype=np.float64)
    fg = maps.foreground
    out = np.zeros(maps.shape + (td.size * te.size,))
    t1 = maps.t1[fg][:, None]
    t2 = maps.t2[fg][:, None]
    sat = 1.0 - np.exp(-td[None, :] / t1)
    dec = np.exp(-te[None, :] / t2)
    out[fg] = maps.pd[fg][:, None] * (sat[:, :, None] * dec[:, None, :]).reshape(t1.shape[0], -1)
    if sigma > 0:
        rng = make_rng(seed, STREAM_MDME_NOISE)
        out = out + rng.normal(0.0, sigma, out.shape)
    return out


def phantom_from_mdme(volume, dictionary: MdmeDictionary) -> ParameterMaps:
    """Estimate PD/T1/T2 maps from an (ny, nx, n_meas) MDME volume."""
    volume = np.asarray(volume, dtype=np.float64)
    if volume.ndim != 3:
        raise ValueError(f"MDME volume must be (ny, nx, n_meas), got shape {volume.shape}")
    return match_maps(volume, dictionary)


def save_maps(path, maps: ParameterMaps) -> None:
    arrays = {"pd": maps.pd, "t2": maps.t2}
    if maps.t1 is not None:
        arrays["t1"] = maps.t1
    with open(path, "wb") as fh:
        np.savez(fh, **arrays)


def load_maps(path, index: int = 0) -> ParameterMaps:
    """Load maps from an ``.npz`` with ``pd``, ``t2`` and optional ``t1``.

    3D arrays are (slice, ny, nx); ``index`` selects a slice modulo the
    slice count.
    """
    with np.load(path) as data:
        missing = {"pd", "t2"} - set(data.files)
        if missing:
            raise ValueError(f"{path}: missing arrays {sorted(missing)}")
        arrays = {k: data[k] for k in ("pd", "t2", "t1") if k in data.files}
    if arrays["pd"].ndim == 3:
        n = arrays["pd"].shape[0]
        arrays = {k: v[index % n] for k, v in arrays.items()}
    return ParameterMaps(**arrays)
