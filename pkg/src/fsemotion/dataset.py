"""Batch generation of paired clean / motion-corrupt images."""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from .acquisition import build_schedule
from .config import SimConfig
from .imageio import DatasetManifest, ManifestRecord, export_image, write_manifest
from .metrics import compare
from .motion import sample_trajectory, simulate_fse_agnostic, simulate_fse_aware, simulate_gt
from .phantom import generate_phantom, load_maps

__all__ = ["DatasetError", "generate_dataset", "simulate_sample"]

logger = logging.getLogger(__name__)


class DatasetError(RuntimeError):
    def __init__(self, message, completed: int):
        super().__init__(message)
        self.completed = completed


def sample_maps(cfg: SimConfig, sample_id: int):
    if cfg.phantom == "file":
        maps = load_maps(cfg.phantom_path, sample_id)
        if maps.shape != (cfg.ny, cfg.nx):
            raise ValueError(f"phantom file maps are {maps.shape}, config expects {(cfg.ny, cfg.nx)}")
        return maps
    return generate_phantom(cfg.ny, cfg.nx, cfg.base_seed + sample_id)


def simulate_sample(cfg: SimConfig, sample_id: int) -> dict:
    """Clean image, trajectory and one corrupt image per configured pipeline."""
    seed = cfg.base_seed + sample_id
    maps = sample_maps(cfg, sample_id)
    schedule = build_schedule(cfg.ny, cfg.etl, cfg.esp_ms)
    traj = sample_trajectory(schedule.n_tr, cfg.n_events, cfg.sigma_deg, seed)
    out = {"seed": seed, "trajectory": traj, "corrupt": {}}
    if "fse_aware" in cfg.pipelines:
        res = simulate_fse_aware(maps, schedule, traj, cfg.sigma_noise, seed)
        out["clean"] = res.clean
        out["corrupt"]["fse_aware"] = res.corrupt
    else:
        out["clean"] = simulate_gt(maps, schedule)
    if "fse_agnostic" in cfg.pipelines:
        res = simulate_fse_agnostic(out["clean"], traj, cfg.n_events, cfg.sigma_noise, seed)
        out["corrupt"]["fse_agnostic"] = res.corrupt
    return out


def _magnitude(img) -> np.ndarray:
    # metrics are computed on exactly the float32 values that get stored
    return np.abs(img).astype(np.float32)


def _write_sample(cfg: SimConfig, sample_id: int, root: Path) -> list[ManifestRecord]:
    sim = simulate_sample(cfg, sample_id)
    name = f"sample_{sample_id:05d}.fseimg"
    clean = _magnitude(sim["clean"])
    clean_rel = f"clean/{name}"
    clean_bytes = export_image(clean, root / clean_rel)
    records = []
    for pipeline in cfg.pipelines:
        corrupt = _magnitude(sim["corrupt"][pipeline])
        rel = f"{pipeline}/{name}"
        nbytes = export_image(corrupt, root / rel)
        rep = compare(clean, corrupt)
        records.append(ManifestRecord(
            sample_id=sample_id,
            pipeline=pipeline,
            seed=sim["seed"],
            angles_deg=sim["trajectory"].angles_deg,
            clean_path=clean_rel,
            clean_bytes=clean_bytes,
            corrupt_path=rel,
            corrupt_bytes=nbytes,
            ssim=rep.ssim,
            nrmse=rep.nrmse,
        ))
    return records


def generate_dataset(cfg: SimConfig, out_dir, workers: int = 1) -> DatasetManifest:
    """Simulate ``cfg.n_samples`` samples into ``out_dir`` and write ``manifest.txt``.

    Each sample uses seed ``base_seed + sample_id``. Image files are
    written atomically; the manifest is written once, after all samples.
    If any sample fails, a manifest with ``status: partial`` listing the
    completed samples is written before :class:`DatasetError` is raised.
    """
    root = Path(out_dir)
    root.mkdir(parents=True, exist_ok=True)
    for sub in ("clean",) + cfg.pipelines:
        (root / sub).mkdir(exist_ok=True)

    def job(sample_id):
        try:
            return _write_sample(cfg, sample_id, root), None
        except Exception as exc:  # reported after the partial manifest is written
            return None, exc

    ids = range(cfg.n_samples)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(job, ids))
    else:
        results = [job(i) for i in ids]

    records = []
    failures = []
    completed = 0
    for sample_id, (recs, exc) in zip(ids, results):
        if exc is None:
            records.extend(recs)
            completed += 1
        else:
            failures.append((sample_id, exc))

    manifest = DatasetManifest(
        config=cfg.items(),
        records=records,
        status="complete" if not failures else "partial",
        completed_samples=completed,
    )
    write_manifest(manifest, root)
    if failures:
        sample_id, exc = failures[0]
        raise DatasetError(
            f"{len(failures)} of {cfg.n_samples} samples failed (first: sample {sample_id}: {exc}); "
            f"partial manifest lists {completed} completed samples",
            completed,
        ) from exc
    logger.info("wrote %d samples (%d records) to %s", completed, len(records), root)
    return manifest
