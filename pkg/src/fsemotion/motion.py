"""Inter-TR rigid motion and the FSE-aware / FSE-agnostic corruption pipelines."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

import numpy as np

from .acquisition import AcquisitionSchedule, SampledLines, assemble_kspace, linear_segments
from .core import (
    STREAM_TRAJECTORY,
    RigidTransform,
    add_noise,
    apply_rigid,
    check_image,
    fft2c,
    fft2c_rows,
    ifft2c,
    make_rng,
)
from .relaxation import ParameterMaps, echo_stack

__all__ = [
    "MotionTrajectory",
    "PIPELINES",
    "SimulationOutput",
    "sample_trajectory",
    "simulate_fse_agnostic",
    "simulate_fse_aware",
    "simulate_gt",
]

PIPELINES = ("fse_aware", "fse_agnostic")


@dataclass(frozen=True)
class MotionTrajectory:
    """Piecewise-constant motion: ``n_events`` states, each held for
    ``n_tr // n_events`` consecutive TRs."""

    n_tr: int
    event_transforms: tuple[RigidTransform, ...]

    def __post_init__(self):
        object.__setattr__(self, "event_transforms", tuple(self.event_transforms))
        n_events = len(self.event_transforms)
        if n_events == 0 or self.n_tr <= 0 or self.n_tr % n_events:
            raise ValueError(f"n_events={n_events} must divide n_tr={self.n_tr}")

    @classmethod
    def from_angles(cls, n_tr: int, angles_deg: Sequence[float]) -> "MotionTrajectory":
        return cls(n_tr, tuple(RigidTransform(float(a)) for a in angles_deg))

    @classmethod
    def still(cls, n_tr: int, n_events: int = 1) -> "MotionTrajectory":
        return cls(n_tr, (RigidTransform(),) * n_events)

    @property
    def n_events(self) -> int:
        return len(self.event_transforms)

    @property
    def trs_per_event(self) -> int:
        return self.n_tr // self.n_events

    def event_of_tr(self, tr: int) -> int:
        if not 0 <= tr < self.n_tr:
            raise IndexError(f"tr={tr} outside [0, {self.n_tr})")
        return tr // self.trs_per_event

    @property
    def states(self) -> tuple[RigidTransform, ...]:
        return tuple(self.event_transforms[self.event_of_tr(t)] for t in range(self.n_tr))

    @property
    def angles_deg(self) -> tuple[float, ...]:
        return tuple(t.rotation_deg for t in self.event_transforms)


def sample_trajectory(
    n_tr: int,
    n_events: int,
    sigma_deg: float,
    seed: int,
    sigma_shift_px: float = 0.0,
) -> MotionTrajectory:
    """Draw one rotation per event from N(0, sigma_deg**2).

    Translations are drawn from N(0, sigma_shift_px**2) when requested and
    are zero otherwise.
    """
    if n_events <= 0 or n_tr <= 0 or n_tr % n_events:
        raise ValueError(f"n_events={n_events} must divide n_tr={n_tr}")
    if not (sigma_deg >= 0 and sigma_shift_px >= 0):
        raise ValueError("motion standard deviations must be non-negative")
    rng = make_rng(seed, STREAM_TRAJECTORY)
    angles = rng.normal(0.0, 1.0, n_events) * sigma_deg
    shifts = rng.normal(0.0, 1.0, (n_events, 2)) * sigma_shift_px
    # + 0.0 turns the -0.0 produced by zero sigmas into 0.0
    events = tuple(
        RigidTransform(float(a) + 0.0, float(sy) + 0.0, float(sx) + 0.0)
        for a, (sy, sx) in zip(angles, shifts)
    )
    return MotionTrajectory(n_tr, events)


@dataclass(frozen=True, eq=False)
class SimulationOutput:
    clean: np.ndarray
    corrupt: np.ndarray
    trajectory: MotionTrajectory
    schedule: dict
    seed: int
    pipeline: str
    extras: dict = field(default_factory=dict)


def _check_maps(maps: ParameterMaps, schedule: AcquisitionSchedule):
    if maps.shape[0] != schedule.n_pe:
        raise ValueError(f"maps have {maps.shape[0]} phase-encode rows, schedule expects {schedule.n_pe}")


def simulate_gt(maps: ParameterMaps, schedule: AcquisitionSchedule) -> np.ndarray:
    """Motion-free FSE image: each line taken from the k-space of its own echo."""
    _check_maps(maps, schedule)
    stack = echo_stack(maps, schedule.etl, schedule.esp_ms)
    ksp = fft2c(stack.echoes)
    rows = np.arange(schedule.n_pe)
    return ifft2c(ksp[schedule.echo_of_line, rows, :])


def simulate_fse_aware(
    maps: ParameterMaps,
    schedule: AcquisitionSchedule,
    traj: MotionTrajectory,
    sigma_noise: float = 0.0,
    seed: int = 0,
) -> SimulationOutput:
    """Motion-corrupt FSE acquisition with echo ordering and T2 decay.

    Every echo image is moved by the motion state of the TR, Fourier
    transformed, and only the line scheduled for that (TR, echo) is kept.
    Only the kept rows are actually computed (see :func:`fft2c_rows`).
    """
    _check_maps(maps, schedule)
    if traj.n_tr != schedule.n_tr:
        raise ValueError(f"trajectory has {traj.n_tr} TRs, schedule has {schedule.n_tr}")
    stack = echo_stack(maps, schedule.etl, schedule.esp_ms)
    ny, nx = maps.shape

    # echo images are real; TRs sharing a motion state reuse one resampling
    echoes = stack.echoes.real
    groups: dict[RigidTransform, list[int]] = {}
    for tr, state in enumerate(traj.states):
        groups.setdefault(state, []).append(tr)

    samples: list[SampledLines] = []
    for state, trs in groups.items():
        # only the lines each echo acquires in these TRs are transformed
        lines = schedule.line_table[trs].T  # (etl, len(trs))
        rows = fft2c_rows(apply_rigid(echoes, state), lines)
        for e in range(schedule.etl):
            samples.extend(
                SampledLines(indices=[line], rows=row[None, :]) for line, row in zip(lines[e], rows[e])
            )
    ksp = assemble_kspace(samples, ny, nx)
    ksp = add_noise(ksp, sigma_noise, seed)
    return SimulationOutput(
        clean=simulate_gt(maps, schedule),
        corrupt=ifft2c(ksp),
        trajectory=traj,
        schedule=schedule.summary(),
        seed=seed,
        pipeline="fse_aware",
    )


def simulate_fse_agnostic(
    clean_img,
    traj: Union[MotionTrajectory, Sequence[RigidTransform]],
    n_segments: Optional[int] = None,
    sigma_noise: float = 0.0,
    seed: int = 0,
) -> SimulationOutput:
    """Naive baseline: contiguous k-space blocks of one image, one motion state each."""
    clean_img = check_image(clean_img)
    if clean_img.ndim != 2:
        raise ValueError(f"clean image must be 2D, got shape {clean_img.shape}")
    if isinstance(traj, MotionTrajectory):
        transforms = traj.event_transforms
    else:
        transforms = tuple(traj)
        traj = MotionTrajectory(len(transforms), transforms)
    if n_segments is None:
        n_segments = len(transforms)
    if n_segments != len(transforms):
        raise ValueError(f"{len(transforms)} motion states for {n_segments} segments")

    ny, nx = clean_img.shape
    samples = []
    for block, state in zip(linear_segments(ny, n_segments), transforms):
        idx = np.arange(block.start, block.stop)
        samples.append(SampledLines(indices=idx, rows=fft2c_rows(apply_rigid(clean_img, state), idx)))
    ksp = assemble_kspace(samples, ny, nx)
    ksp = add_noise(ksp, sigma_noise, seed)
    return SimulationOutput(
        clean=clean_img,
        corrupt=ifft2c(ksp),
        trajectory=traj,
        schedule={"n_pe": ny, "n_segments": n_segments},
        seed=seed,
        pipeline="fse_agnostic",
    )
