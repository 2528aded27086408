"""Python bindings for the salut 4D LUT engine."""

from ._core import (
    SalutError,
    apply_lut4d,
    gradcheck,
    hist_corr,
    identity_lut4d,
    loss_mn,
    loss_tv,
    luminance_context,
    psnr,
    quad_interp,
    read_lut4d,
    read_ppm,
    run_cli,
    ssim,
    write_lut4d,
    write_ppm,
)

__all__ = [
    "SalutError",
    "apply_lut4d",
    "gradcheck",
    "hist_corr",
    "identity_lut4d",
    "loss_mn",
    "loss_tv",
    "luminance_context",
    "psnr",
    "quad_interp",
    "read_lut4d",
    "read_ppm",
    "run_cli",
    "ssim",
    "write_lut4d",
    "write_ppm",
]
