"""SGBM + WLS stereo matching with genetic-algorithm parameter tuning.

Images are 2-D ``uint8`` arrays and disparity maps 2-D ``float32`` arrays
indexed ``[y, x]``; invalid disparities are ``INVALID_DISPARITY`` (-1).
"""

from ._core import (
    INVALID_DISPARITY,
    FormatError,
    MatchParams,
    ParameterSet,
    WlsParams,
    decode,
    evaluate_fitness,
    generate,
    load_pfm,
    load_pgm,
    mse,
    psnr,
    run_ga,
    run_sgbm,
    save_pfm,
    save_pgm,
    sobel_magnitude,
    ssim,
    wls_refine,
)

__all__ = [
    "INVALID_DISPARITY",
    "FormatError",
    "MatchParams",
    "ParameterSet",
    "WlsParams",
    "decode",
    "evaluate_fitness",
    "generate",
    "load_pfm",
    "load_pgm",
    "mse",
    "psnr",
    "run_ga",
    "run_sgbm",
    "save_pfm",
    "save_pgm",
    "sobel_magnitude",
    "ssim",
    "wls_refine",
]
