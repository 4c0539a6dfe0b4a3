"""The enhancement network: blocks, assembly, parameters and checkpoints."""

from .blocks import (
    PyramidDecomposition,
    cab_forward,
    ddcm_forward,
    ddcm_pre_cab,
    ide_refine,
    ldp_decompose,
    lga_forward,
    lssm_forward,
    mcm_forward,
    ss2d_directions,
    ss2d_forward,
)
from .checkpoint import (
    BadMagicError,
    CheckpointError,
    ChecksumError,
    TruncatedCheckpointError,
    UnsupportedVersionError,
    load_checkpoint,
    save_checkpoint,
)
from .config import ABLATION_VARIANTS, PRESETS, ModelConfig
from .model import enhance, expected_parameter_count, lalnet_forward, light_adaptation, valid_size
from .params import MissingParameterError, ParamStore, check_params, init_params, param_specs

__all__ = [
    "ABLATION_VARIANTS", "BadMagicError", "CheckpointError", "ChecksumError",
    "MissingParameterError", "ModelConfig", "PRESETS", "ParamStore", "PyramidDecomposition",
    "TruncatedCheckpointError", "UnsupportedVersionError", "cab_forward", "check_params",
    "ddcm_forward", "ddcm_pre_cab", "enhance", "expected_parameter_count", "ide_refine",
    "init_params", "lalnet_forward", "ldp_decompose", "lga_forward", "light_adaptation",
    "load_checkpoint", "lssm_forward", "mcm_forward", "param_specs", "save_checkpoint",
    "ss2d_directions", "ss2d_forward", "valid_size",
]
