"""Super-resolution engine built entirely from 1x1 convolutions and
parameter-free spatial-shift layers."""

from .bench import BenchReport, bench_latency
from .checkpoint import read_checkpoint, write_checkpoint
from .errors import (
    CheckpointError,
    ConfigError,
    ImageFormatError,
    ShapeError,
    ShiftSRError,
)
from .images import load_image, save_image
from .metrics import psnr, quantized_y, rgb_to_y, ssim
from .model import (
    Model,
    ModelConfig,
    apply_attention,
    build_model,
    count_flops,
    count_params,
    forward,
    layer_inventory,
)
from .shiftconv import (
    Conv1x1Weights,
    ShiftStepSet,
    conv1x1,
    preset_steps,
    sc_layer_fused,
    sc_layer_naive,
    sc_to_dense3x3,
    spatial_shift,
)
from .tensorops import (
    gemm,
    pixel_shuffle,
    pixel_unshuffle,
    relu,
    resize,
    resize_adjoint,
    zero_pad,
)
from .trainer import (
    TrainConfig,
    adam_init,
    adam_step,
    backward,
    l1_loss,
    make_training_pair,
    train,
)

__version__ = "0.1.0"
