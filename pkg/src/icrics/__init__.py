"""Block compressive sensing with closed-loop iterative compensation recovery.

The open-loop pipeline senses each image block with a seeded row-orthonormal
Gaussian operator and reconstructs it (min-norm or DCT-domain ISTA). The
compensation loop then feeds the re-reconstruction error back into the
estimate, ``x <- x + lam * (y0 - RC(MS(x)))``.
"""

__version__ = "0.1.0"

from .imagecore import BlockLayout, BlockSet, Image, PGMError, from_blocks, load_pgm, save_pgm, to_blocks
from .sensing import MeasurementOperator, adjoint, make_operator, measure, sampling_dims
from .recon import ReconstructorSpec, dct2, idct2, recover, recover_ista, recover_pinv, soft_threshold
from .feedback import (
    FeedbackConfig,
    IterationTrace,
    RecoveryResult,
    icrics_run,
    icrics_step,
    init_estimate,
    run_on_image,
)
from .analysis import (
    StabilityReport,
    admissible_lambda_interval,
    analyze,
    contraction_factor,
    estimate_jacobian,
    spectral_radius,
    steady_state_error,
)
from .metrics import psnr, ssim
from .bench import BenchConfig, BenchRow, run_benchmark, scan_dataset, summarize
