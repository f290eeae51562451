"""Focal-zoom super-resolution toolkit.

Robust pixel-wise registration of zoom pairs, exact Laplacian pyramids,
per-pixel kernel prediction and application, a desk-scale trainable
network, Y-channel quality metrics, and synthetic oracles for all of it.
"""

from .container import read_tensor, write_tensor
from .errors import (
    ConfigError,
    DataIOError,
    DegenerateInputError,
    DivergenceError,
    InvalidParameterError,
    ShapeError,
    SingularSystemError,
    ZoomSRError,
)
from .image import (
    crop_center,
    load_image,
    load_y,
    rgb_to_y,
    sample_bilinear,
    save_image,
)
from .kernels import (
    apply_kernels,
    apply_kernels_grad,
    apply_pyramid_kernels,
    influence_footprint,
)
from .lens import LensConfig, image_distance, image_size, initial_scale, magnification
from .metrics import PSNR_CAP_DB, SsimConfig, evaluate_pair, psnr, ssim
from .nn import (
    AdamState,
    ModelConfig,
    adam_step,
    conv2d_backward,
    conv2d_forward,
    depth_to_space,
    init_params,
    loss_l2,
    pad_to_multiple,
    pipeline_loss,
    predict_kernels,
    predict_kernels_backward,
    relu,
    relu_backward,
    residual_block,
    space_to_depth,
    super_resolve,
    train_toy,
)
from .pyramid import (
    LaplacianPyramid,
    decompose,
    gauss_down,
    gauss_up,
    gauss_up_adjoint,
    reconstruct,
)
from .registration import (
    AffineTransform,
    LuminanceParams,
    RegistrationConfig,
    RegistrationResult,
    corner_error,
    estimate_luminance,
    image_jacobian,
    irls_solve,
    irls_weights,
    make_transform,
    register,
    warp_crop,
)
from .synth import (
    DegradationSpec,
    checker_and_ramp_corpus,
    degrade,
    lr_shape_for,
    spatially_varying_blur,
)

__version__ = "0.1.0"
