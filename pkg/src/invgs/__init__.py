"""Invertible Gram-Schmidt transforms with packed coefficients."""
from .core import (
    METHODS,
    DependentBlock,
    DependentVector,
    PackedCoefficients,
    ShapeError,
    Tolerance,
    egsp,
    egsp2d,
    gfbr,
    gsp,
    iegsp,
    iegsp2d,
    igsp,
    mgs_strict,
    n_coefficients,
    orthogonalize,
    pack_index,
    prune_reconstruct,
    reconstruct,
    unpack_index,
)
from .metrics import MetricsReport, mae, max_abs_po, metrics, mse, po, psnr

__version__ = "0.1.0"
