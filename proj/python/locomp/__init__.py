"""Localized compression of image datasets.

Images are CHW numpy arrays (uint8 or float32). Errors raise subclasses of
LocompError: ValidationError, IoError, FormatError, each with a ``code``
attribute naming the violated rule.
"""

from ._locomp import (
    FormatError,
    IoError,
    LocompError,
    ValidationError,
    check_stride_compat,
    compress,
    compression_ratios,
    hflip,
    limited_flip,
    load_image,
    ms_matrix,
    pca_feasible,
    prepare_default,
    read_lcim,
    read_matrix,
    resize,
    rmm_matrix,
    run_inline,
    sample,
    sketch_fc_inputs,
    sketch_matrix,
    write_lcim,
    write_png,
)

__all__ = [
    "FormatError",
    "IoError",
    "LocompError",
    "ValidationError",
    "check_stride_compat",
    "compress",
    "compression_ratios",
    "hflip",
    "limited_flip",
    "load_image",
    "ms_matrix",
    "pca_feasible",
    "prepare_default",
    "read_lcim",
    "read_matrix",
    "resize",
    "rmm_matrix",
    "run_inline",
    "sample",
    "sketch_fc_inputs",
    "sketch_matrix",
    "write_lcim",
    "write_png",
]
