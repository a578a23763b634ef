"""Event-stream pattern tracking through a learned intensity-change model.

The pipeline has four stages, one module each: synthesizing blurred
intensity-change training tuples from a planar pattern (synth), fitting a
small tanh network to them with hand-written gradients (ieg), explaining
sliding windows of simulated or recorded events by descending the network's
pose and velocity inputs (tracker), and scoring the result against ground
truth (evaluate). Shared geometry and the pattern/event types live in core,
and cli wires everything into one executable.
"""

from .core import (
    Event,
    GroundTruth,
    Pattern,
    Pose2,
    Velocity2,
    WindowState,
    load_pattern,
    save_pgm,
    warp,
    warp_batch,
    warp_jacobian,
)
from .errors import FileFormatError, NumericalDivergenceError
from .evaluate import ErrorReport, align_and_score, emit_timeseries
from .ieg import (
    AdamState,
    IegModel,
    forward,
    forward_batch,
    grad_input,
    grad_input_batch,
    grad_weights,
    init_model,
    load_model,
    ranges_from_samples,
    save_model,
    train,
)
from .synth import (
    EventStream,
    SynthConfig,
    TrainingSample,
    builtin_marker,
    generate_training_set,
    load_training_set,
    save_training_set,
    simulate_stream,
)
from .tracker import (
    TrackerConfig,
    Trajectory,
    optimize_window,
    slide_track,
    window_loss,
    window_loss_grad,
)

__version__ = "0.1.0"

__all__ = [
    "AdamState",
    "ErrorReport",
    "Event",
    "EventStream",
    "FileFormatError",
    "GroundTruth",
    "IegModel",
    "NumericalDivergenceError",
    "Pattern",
    "Pose2",
    "SynthConfig",
    "TrackerConfig",
    "TrainingSample",
    "Trajectory",
    "Velocity2",
    "WindowState",
    "align_and_score",
    "builtin_marker",
    "emit_timeseries",
    "forward",
    "forward_batch",
    "generate_training_set",
    "grad_input",
    "grad_input_batch",
    "grad_weights",
    "init_model",
    "load_model",
    "load_pattern",
    "load_training_set",
    "optimize_window",
    "ranges_from_samples",
    "save_model",
    "save_pgm",
    "save_training_set",
    "simulate_stream",
    "slide_track",
    "train",
    "warp",
    "warp_batch",
    "warp_jacobian",
    "window_loss",
    "window_loss_grad",
    "__version__",
]
