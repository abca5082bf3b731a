"""Cartesian FSE sampling: echo-train schedules, line extraction and k-space assembly.

Phase encoding runs along rows (axis -2) of k-space; every sampled line is a
full readout row.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional

import numpy as np


__all__ = [
    "AcquisitionSchedule",
    "AssemblyError",
    "SampledLines",
    "assemble_kspace",
    "build_schedule",
    "center_out_order",
    "linear_segments",
    "sample_lines",
]

ORDERINGS = ("center_out",)


class AssemblyError(ValueError):
    """Sampled lines do not form an exact partition of the phase-encode axis."""

    def __init__(self, message, missing=(), duplicates=()):
        super().__init__(message)
        self.missing = tuple(missing)
        self.duplicates = tuple(duplicates)


@dataclass(frozen=True, eq=False)
class AcquisitionSchedule:
    """Assignment of phase-encode lines to (TR, echo) slots.

    ``line_table[tr, echo]`` is the phase-encode index acquired at that slot.
    Every echo of every TR shares the echo time ``(echo + 1) * esp_ms``.
    """

    n_pe: int
    etl: int
    esp_ms: float
    line_table: np.ndarray
    ordering: str = "center_out"

    @property
    def n_tr(self) -> int:
        return self.n_pe // self.etl

    @property
    def te_ms(self) -> np.ndarray:
        return self.esp_ms * np.arange(1, self.etl + 1, dtype=np.float64)

    def line_of(self, tr: int, echo: int) -> int:
        if not (0 <= tr < self.n_tr and 0 <= echo < self.etl):
            raise IndexError(f"(tr={tr}, echo={echo}) outside {self.n_tr} TRs x {self.etl} echoes")
        return int(self.line_table[tr, echo])

    def te_of(self, tr: int, echo: int) -> float:
        self.line_of(tr, echo)
        return float(self.te_ms[echo])

    @property
    def echo_of_line(self) -> np.ndarray:
        """Echo index that acquires each phase-encode line."""
        out = np.empty(self.n_pe, dtype=np.intp)
        out[self.line_table] = np.arange(self.etl)[None, :]
        return out

    @property
    def tr_of_line(self) -> np.ndarray:
        out = np.empty(self.n_pe, dtype=np.intp)
        out[self.line_table] = np.arange(self.n_tr)[:, None]
        return out

    def summary(self) -> dict:
        return {
            "n_pe": self.n_pe,
            "etl": self.etl,
            "n_tr": self.n_tr,
            "esp_ms": self.esp_ms,
            "ordering": self.ordering,
        }

    def to_table(self) -> str:
        """Comma-separated ``tr,echo,line,te_ms`` dump, one row per sample."""
        rows = ["tr,echo,line,te_ms"]
        te = self.te_ms
        for tr in range(self.n_tr):
            for e in range(self.etl):
                rows.append(f"{tr},{e},{self.line_table[tr, e]},{te[e]:g}")
        return "\n".join(rows) + "\n"


def center_out_order(n_pe: int) -> np.ndarray:
    """Line indices sorted by distance from ``n_pe // 2``, lower index first on ties."""
    idx = np.arange(n_pe)
    dist = np.abs(idx - n_pe // 2)
    return idx[np.lexsort((idx, dist))]


def build_schedule(n_pe: int, etl: int, esp_ms: float, ordering: str = "center_out") -> AcquisitionSchedule:
    if ordering not in ORDERINGS:
        raise ValueError(f"unsupported ordering {ordering!r}; expected one of {ORDERINGS}")
    if n_pe <= 0 or etl <= 0:
        raise ValueError(f"n_pe and etl must be positive, got n_pe={n_pe}, etl={etl}")
    if n_pe % etl:
        raise ValueError(f"etl={etl} does not divide n_pe={n_pe}")
    if not esp_ms > 0:
        raise ValueError(f"esp_ms must be positive, got {esp_ms}")
    n_tr = n_pe // etl
    order = center_out_order(n_pe)
    # band e = order[e*n_tr:(e+1)*n_tr]; within a band TR t takes element t
    table = order.reshape(etl, n_tr).T.copy()
    table.setflags(write=False)
    return AcquisitionSchedule(n_pe=n_pe, etl=etl, esp_ms=float(esp_ms), line_table=table, ordering=ordering)


@dataclass(frozen=True, eq=False)
class SampledLines:
    indices: np.ndarray  # (k,) phase-encode indices
    rows: np.ndarray  # (k, nx) complex readout rows

    def __post_init__(self):
        idx = np.asarray(self.indices, dtype=np.intp).reshape(-1)
        rows = np.asarray(self.rows)
        if rows.ndim != 2 or rows.shape[0] != idx.size:
            raise ValueError(f"rows shape {rows.shape} inconsistent with {idx.size} indices")
        if np.unique(idx).size != idx.size:
            raise ValueError("sampled line indices must be unique")
        object.__setattr__(self, "indices", idx)
        object.__setattr__(self, "rows", rows)

    def __len__(self) -> int:
        return self.indices.size


def sample_lines(ksp, schedule: AcquisitionSchedule, tr: int, echo: Optional[int] = None) -> SampledLines:
    """Rows of ``ksp`` acquired during ``tr``; only ``echo`` if given."""
    ksp = np.asarray(ksp)
    if ksp.ndim != 2:
        raise ValueError(f"k-space must be 2D, got shape {ksp.shape}")
    if ksp.shape[0] != schedule.n_pe:
        raise ValueError(f"k-space has {ksp.shape[0]} rows, schedule expects {schedule.n_pe}")
    if not 0 <= tr < schedule.n_tr:
        raise IndexError(f"tr={tr} outside [0, {schedule.n_tr})")
    if echo is None:
        idx = schedule.line_table[tr]
    else:
        idx = np.array([schedule.line_of(tr, echo)])
    return SampledLines(indices=idx, rows=ksp[idx])


def assemble_kspace(samples: Iterable[SampledLines], ny: int, nx: int) -> np.ndarray:
    """Place sampled rows into an (ny, nx) k-space; each row exactly once."""
    out = np.zeros((ny, nx), dtype=np.complex128)
    count = np.zeros(ny, dtype=np.intp)
    for s in samples:
        if s.rows.shape[1] != nx:
            raise AssemblyError(f"row length {s.rows.shape[1]} != nx={nx}")
        bad = s.indices[(s.indices < 0) | (s.indices >= ny)]
        if bad.size:
            raise AssemblyError(f"line index {int(bad[0])} outside [0, {ny})")
        out[s.indices] = s.rows
        np.add.at(count, s.indices, 1)
    dup = np.flatnonzero(count > 1)
    missing = np.flatnonzero(count == 0)
    if dup.size or missing.size:
        parts = []
        if missing.size:
            parts.append(f"missing lines {missing.tolist()}")
        if dup.size:
            parts.append(f"duplicate lines {dup.tolist()}")
        raise AssemblyError("; ".join(parts), missing=missing.tolist(), duplicates=dup.tolist())
    return out


def linear_segments(n_pe: int, n_segments: int) -> list[range]:
    """Split ``range(n_pe)`` into contiguous blocks, larger blocks first."""
    if n_pe <= 0 or n_segments <= 0 or n_segments > n_pe:
        raise ValueError(f"need 0 < n_segments <= n_pe, got n_segments={n_segments}, n_pe={n_pe}")
    base, extra = divmod(n_pe, n_segments)
    blocks = []
    start = 0
    for s in range(n_segments):
        size = base + (1 if s < extra else 0)
        blocks.append(range(start, start + size))
        start += size
    return blocks
