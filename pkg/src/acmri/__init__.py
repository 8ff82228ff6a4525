"""Slice-by-slice reconstruction and stability analysis for
line-undersampled multi-coil MRI."""

from .coilstack import CoilStack
from .geometry import (
    BandSet,
    Grid,
    SamplingMask,
    make_accelerated_mask,
    make_random_mask,
    mask_to_bands,
    rasterize_bands,
)
from .metrics import Roi, default_roi, rel_error, ssim_mean, ssim_window
from .operators import (
    FredholmMatrix,
    SliceSystem,
    assemble_slice,
    build_matrix,
    build_matrix_analytic,
    build_matrix_dft,
    kernel_eval,
    prepare_data,
    realify,
)
from .simulation import (
    CoilModel,
    PhantomSpec,
    make_coil_maps,
    make_phantom,
    simulate_kspace,
)
from .solver import (
    ReconResult,
    SliceSolution,
    SolverOptions,
    TvParams,
    reconstruct,
    smoothed_tv,
    solve_slice,
    sos_combine,
)
from .svd_analysis import (
    SvdReport,
    SweepConfig,
    SweepRow,
    pseudoinverse_apply,
    stability_sweep,
    svd_blocks,
)
from .baselines import BaselineSpec, adjoint_2d, forward_2d, reconstruct_baseline

__version__ = "0.1.0"
