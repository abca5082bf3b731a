"""Simulation of rigid-motion artifacts in fast spin echo (FSE) MRI.

Two corruption models are provided: an FSE-aware forward model that follows
the echo-train line ordering and T2 decay of each echo, and the common
FSE-agnostic baseline that moves contiguous k-space blocks of a finished
image.
"""

from .acquisition import AcquisitionSchedule, assemble_kspace, build_schedule, linear_segments, sample_lines
from .core import RigidTransform, add_noise, apply_rigid, fft2c, ifft2c
from .metrics import compare, nrmse, ssim
from .motion import (
    MotionTrajectory,
    SimulationOutput,
    sample_trajectory,
    simulate_fse_agnostic,
    simulate_fse_aware,
    simulate_gt,
)
from .phantom import generate_phantom, phantom_from_mdme, simulate_mdme
from .relaxation import (
    EchoStack,
    MdmeDictionary,
    ParameterMaps,
    build_dictionary,
    decay_image,
    echo_stack,
    match_maps,
    mdme_signal,
)

from .config import SimConfig, load_config
from .dataset import generate_dataset
from .imageio import export_image, load_image

__version__ = "0.1.0"
