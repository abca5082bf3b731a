"""Tissue parameter maps, T2 decay of echo images and MDME dictionary fitting.

All times are in milliseconds. Background pixels carry ``pd == 0`` and may
use ``t2 == 0`` (and ``t1 == 0``) as a sentinel; they never enter the
exponentials.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .core import DataValidityError

__all__ = [
    "EchoStack",
    "MDME_TD_MS",
    "MDME_TE_MS",
    "MdmeDictionary",
    "ParameterMaps",
    "build_dictionary",
    "decay_image",
    "echo_stack",
    "match_maps",
    "mdme_signal",
]

# delay and echo times of the multi-delay multi-echo protocol
MDME_TD_MS = (7562.0, 3504.0, 1041.0, 171.0)
MDME_TE_MS = (27.0, 90.0)
T1_RANGE_MS = (100.0, 6000.0, 20.0)
T2_RANGE_MS = (10.0, 1000.0, 2.0)

MAX_ETL = 64
BACKGROUND_REL_THRESHOLD = 1e-9


@dataclass(frozen=True, eq=False)
class ParameterMaps:
    """Per-pixel proton density, T2 and optional T1 maps."""

    pd: np.ndarray
    t2: np.ndarray
    t1: Optional[np.ndarray] = None

    def __post_init__(self):
        pd = np.asarray(self.pd, dtype=np.float64)
        t2 = np.asarray(self.t2, dtype=np.float64)
        t1 = None if self.t1 is None else np.asarray(self.t1, dtype=np.float64)
        arrays = {"pd": pd, "t2": t2} if t1 is None else {"pd": pd, "t2": t2, "t1": t1}
        for name, arr in arrays.items():
            if arr.ndim != 2:
                raise DataValidityError(f"{name} must be 2D, got shape {arr.shape}")
            if arr.shape != pd.shape:
                raise DataValidityError(f"{name} shape {arr.shape} != pd shape {pd.shape}")
            if not np.all(np.isfinite(arr)):
                raise DataValidityError(f"{name} contains non-finite values")
        if np.any(pd < 0):
            raise DataValidityError("pd must be non-negative")
        fg = pd > 0
        if np.any(t2[fg] <= 0):
            raise DataValidityError("t2 must be positive wherever pd > 0")
        if t1 is not None and np.any(t1[fg] <= 0):
            raise DataValidityError("t1 must be positive wherever pd > 0")
        for name, arr in arrays.items():
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def shape(self) -> tuple[int, int]:
        return self.pd.shape

    @property
    def foreground(self) -> np.ndarray:
        return self.pd > 0


@dataclass(frozen=True, eq=False)
class EchoStack:
    echoes: np.ndarray  # (etl, ny, nx) complex
    te_ms: np.ndarray

    @property
    def etl(self) -> int:
        return len(self.te_ms)


def decay_image(maps: ParameterMaps, te_ms: float) -> np.ndarray:
    """Transverse magnetization ``pd * exp(-te / t2)`` as a complex image."""
    if not te_ms > 0:
        raise ValueError(f"te_ms must be positive, got {te_ms}")
    fg = maps.foreground
    rate = np.divide(te_ms, maps.t2, out=np.zeros(maps.shape), where=fg)
    img = np.where(fg, maps.pd * np.exp(-rate), 0.0)
    return img.astype(np.complex128)


def echo_stack(maps: ParameterMaps, etl: int, esp_ms: float) -> EchoStack:
    """Echo images at te = esp, 2 esp, ..., etl * esp."""
    if not (isinstance(etl, (int, np.integer)) and 1 <= etl <= MAX_ETL):
        raise ValueError(f"etl must be an integer in [1, {MAX_ETL}], got {etl}")
    if not esp_ms > 0:
        raise ValueError(f"esp_ms must be positive, got {esp_ms}")
    te = esp_ms * np.arange(1, etl + 1, dtype=np.float64)
    echoes = np.stack([decay_image(maps, float(t)) for t in te])
    return EchoStack(echoes=echoes, te_ms=te)


def _saturation(t1, td_ms):
    return 1.0 - np.exp(-np.divide.outer(np.asarray(td_ms, dtype=np.float64), t1)).T


def _t2_decay(t2, te_ms):
    return np.exp(-np.divide.outer(np.asarray(te_ms, dtype=np.float64), t2)).T


def mdme_signal(t1: float, t2: float, pd: float, td_ms: Sequence[float], te_ms: Sequence[float]) -> np.ndarray:
    """Saturation-recovery times T2-decay signal, ordered delay-major.

    ``s[i * len(te) + j] = pd * (1 - exp(-td[i] / t1)) * exp(-te[j] / t2)``
    """
    if not (t1 > 0 and t2 > 0):
        raise ValueError(f"relaxation times must be positive, got t1={t1}, t2={t2}")
    if not pd >= 0:
        raise ValueError(f"pd must be non-negative, got {pd}")
    sat = 1.0 - np.exp(-np.asarray(td_ms, dtype=np.float64) / t1)
    dec = np.exp(-np.asarray(te_ms, dtype=np.float64) / t2)
    return pd * np.outer(sat, dec).ravel()


def _grid(rng: Sequence[float], name: str) -> np.ndarray:
    start, stop, step = (float(v) for v in rng)
    if not step > 0:
        raise ValueError(f"{name} step must be positive, got {step}")
    if not start > 0:
        raise ValueError(f"{name} start must be positive, got {start}")
    if stop < start:
        raise ValueError(f"{name} range is empty: start {start} > stop {stop}")
    n = int(np.floor((stop - start) / step + 1e-9)) + 1
    return start + step * np.arange(n)


@dataclass(frozen=True, eq=False)
class MdmeDictionary:
    """Unit-norm signal atoms over a (t1, t2) grid, t1-major."""

    t1_grid: np.ndarray
    t2_grid: np.ndarray
    td_ms: np.ndarray
    te_ms: np.ndarray
    atoms: np.ndarray  # (n_t1 * n_t2, n_meas), unit rows
    norms: np.ndarray  # Euclidean norm of each unnormalized pd = 1 atom

    @property
    def n_measurements(self) -> int:
        return self.atoms.shape[1]

    def __len__(self) -> int:
        return self.atoms.shape[0]

    def grid_point(self, index: int) -> tuple[float, float]:
        i, j = divmod(int(index), len(self.t2_grid))
        return float(self.t1_grid[i]), float(self.t2_grid[j])


def build_dictionary(
    t1_range=T1_RANGE_MS,
    t2_range=T2_RANGE_MS,
    td_ms=MDME_TD_MS,
    te_ms=MDME_TE_MS,
) -> MdmeDictionary:
    """Simulate the MDME dictionary on inclusive ``(start, stop, step)`` grids."""
    t1 = _grid(t1_range, "t1")
    t2 = _grid(t2_range, "t2")
    td = np.asarray(td_ms, dtype=np.float64)
    te = np.asarray(te_ms, dtype=np.float64)
    if td.size == 0 or te.size == 0:
        raise ValueError("need at least one delay time and one echo time")

    sat = _saturation(t1, td)  # (n_t1, n_td)
    dec = _t2_decay(t2, te)  # (n_t2, n_te)
    raw = sat[:, None, :, None] * dec[None, :, None, :]
    raw = raw.reshape(t1.size * t2.size, td.size * te.size)
    norms = np.linalg.norm(raw, axis=1)
    if np.any(norms == 0):
        raise ValueError("dictionary contains all-zero atoms; check delay times")
    atoms = raw / norms[:, None]
    for arr in (t1, t2, td, te, atoms, norms):
        arr.setflags(write=False)
    return MdmeDictionary(t1_grid=t1, t2_grid=t2, td_ms=td, te_ms=te, atoms=atoms, norms=norms)


def match_maps(signals, dictionary: MdmeDictionary, chunk: int = 128) -> ParameterMaps:
    """Fit PD/T1/T2 per pixel by maximum normalized inner product.

    ``signals`` has shape (..., n_meas) with real magnitudes. The argmax uses
    unit-normalized signals; ties go to the lowest (t1, t2) index. PD is the
    projection of the raw signal on the winning atom divided by that atom's
    pd = 1 norm. Pixels whose norm is at most 1e-9 times the largest norm
    are background (pd = t1 = t2 = 0).
    """
    signals = np.asarray(signals, dtype=np.float64)
    if signals.ndim < 1 or signals.shape[-1] != dictionary.n_measurements:
        raise ValueError(
            f"signal length {signals.shape[-1] if signals.ndim else 0} does not match "
            f"dictionary atom length {dictionary.n_measurements}"
        )
    if not np.all(np.isfinite(signals)):
        raise DataValidityError("signals contain non-finite values")
    out_shape = signals.shape[:-1]
    flat = signals.reshape(-1, dictionary.n_measurements)

    norms = np.linalg.norm(flat, axis=1)
    fg = norms > BACKGROUND_REL_THRESHOLD * (norms.max() if norms.size else 0.0)

    pd = np.zeros(flat.shape[0])
    t1 = np.zeros(flat.shape[0])
    t2 = np.zeros(flat.shape[0])
    if fg.any():
        # identical signals (common in piecewise-constant phantoms) are matched once
        uniq, inverse = np.unique(flat[fg], axis=0, return_inverse=True)
        inverse = inverse.ravel()
        unit = uniq / np.linalg.norm(uniq, axis=1)[:, None]
        best = np.empty(uniq.shape[0], dtype=np.intp)
        for start in range(0, uniq.shape[0], chunk):
            scores = unit[start:start + chunk] @ dictionary.atoms.T
            best[start:start + chunk] = np.argmax(scores, axis=1)
        proj = np.einsum("ij,ij->i", uniq, dictionary.atoms[best])
        n_t2 = len(dictionary.t2_grid)
        pd[fg] = (proj / dictionary.norms[best])[inverse]
        t1[fg] = dictionary.t1_grid[best // n_t2][inverse]
        t2[fg] = dictionary.t2_grid[best % n_t2][inverse]

    # a negative projection means no physical match; treat as background
    neg = pd < 0
    pd[neg] = 0.0
    t1[neg] = 0.0
    t2[neg] = 0.0
    return ParameterMaps(pd=pd.reshape(out_shape), t2=t2.reshape(out_shape), t1=t1.reshape(out_shape))
