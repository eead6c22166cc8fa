"""videoloom: an interactive video-generation engine over synthetic worlds.

Two composed diffusion stages steered by four user instruction channels
(image, content, motion, trajectory), verified end to end against worlds
whose optimal denoisers have closed forms.
"""

from .diffusion import (
    BlendCondition,
    NoiseSchedule,
    blend_noise,
    blended_denoiser,
    build_schedule,
    forward_diffuse,
    predict_clean,
    reverse_step,
    sample,
)
from .errors import (
    BusyError,
    CapacityError,
    CentroidUndefinedError,
    ConflictError,
    SchemaError,
    ValidationError,
)
from .instructions import (
    ContentInstruction,
    ImageInstruction,
    InstructionSet,
    MotionInstruction,
    Stroke,
    TrajectoryInstruction,
    apply_paint,
    apply_trajectory,
    compile_instructions,
)
from .metrics import (
    EmbeddingVector,
    LatencyReport,
    best_label,
    cosine,
    embed,
    image_alignment,
    label_prototype,
    measure_latency,
    text_alignment,
)
from .pipeline import (
    AlignParams,
    EngineConfig,
    GenerationResult,
    align_frame,
    decode,
    default_align_params,
    encode,
    generate,
    p_img,
    p_video,
    video_world,
)
from .scenes import (
    CONTENT_LABELS,
    MOTION_LABELS,
    Blob,
    FrameStack,
    SceneSpec,
    centroid,
    render_frames,
    render_scene_frame,
    sample_scene,
)
from .serialization import (
    array_digest,
    canonical_json,
    export_result,
    instructions_from_dict,
    instructions_to_dict,
    load_session_file,
    result_digests,
    save_session_file,
)
from .service import create_app
from .sessions import ServiceConfig, Session, SessionStore, default_instruction_set
from .worlds import GaussianWorld, analytic_denoiser, analytic_epsilon, log_marginal_density

__version__ = "0.1.0"

__all__ = [
    "AlignParams",
    "BlendCondition",
    "Blob",
    "BusyError",
    "CapacityError",
    "CentroidUndefinedError",
    "ConflictError",
    "CONTENT_LABELS",
    "ContentInstruction",
    "EmbeddingVector",
    "EngineConfig",
    "FrameStack",
    "GaussianWorld",
    "GenerationResult",
    "ImageInstruction",
    "InstructionSet",
    "LatencyReport",
    "MOTION_LABELS",
    "MotionInstruction",
    "NoiseSchedule",
    "SceneSpec",
    "SchemaError",
    "ServiceConfig",
    "Session",
    "SessionStore",
    "Stroke",
    "TrajectoryInstruction",
    "ValidationError",
    "align_frame",
    "analytic_denoiser",
    "analytic_epsilon",
    "apply_paint",
    "apply_trajectory",
    "array_digest",
    "best_label",
    "blend_noise",
    "blended_denoiser",
    "build_schedule",
    "canonical_json",
    "centroid",
    "compile_instructions",
    "cosine",
    "create_app",
    "decode",
    "default_align_params",
    "default_instruction_set",
    "embed",
    "encode",
    "export_result",
    "forward_diffuse",
    "generate",
    "image_alignment",
    "instructions_from_dict",
    "instructions_to_dict",
    "label_prototype",
    "load_session_file",
    "log_marginal_density",
    "measure_latency",
    "p_img",
    "p_video",
    "predict_clean",
    "render_frames",
    "render_scene_frame",
    "result_digests",
    "reverse_step",
    "sample",
    "sample_scene",
    "save_session_file",
    "text_alignment",
    "video_world",
]
