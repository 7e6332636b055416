"""Graph-based video resequencing.

Build a relation graph over a clip's frames with a learnable distance,
derive motion structure from optical flow, and generate new smooth frame
orderings from any chosen start frame via constrained stochastic walks.
"""

from .errors import VideoReseqError
from .evaluate import (
    OverlapReport,
    RatingTally,
    StabilityReport,
    frame_difference,
    overlap_measure,
    rating_aggregate,
    stability,
)
from .features import (
    ExternalEmbeddingProvider,
    LearnedEmbeddingProvider,
    PixelEmbeddingProvider,
    extract_pixel_feature,
    psnr,
)
from .flow import (
    LMSMask,
    MotionTendency,
    detect_lms,
    estimate_flow,
    motion_tendency,
    normalize_magnitude,
    wrapped_angle_distance,
)
from .graph import SRG, CandidateSet, build_graph, content_candidates, mean_edge_weight
from .media_io import (
    DatasetManifest,
    EmbeddingSet,
    FlowField,
    FrameSet,
    decode_flo,
    encode_flo,
    load_frame_set,
    load_manifest,
    read_embedding_set,
    write_embedding_set,
)
from .metric import (
    LearnedEmbedding,
    TrainConfig,
    Triplet,
    build_triplets,
    distance_loss,
    learned_distance,
    train_metric,
)
from .pipeline import PipelineArtifacts, PipelineConfig, build_pipeline, run_walk
from .sdpf import (
    MotionContext,
    MotionDistanceCache,
    SdpfParams,
    SequencePath,
    StepRecord,
    build_motion_context,
    coherence_threshold,
    directional_ok,
    distill_s2,
    motion_distance,
    pseudo_image,
    sdpf_run,
    selection_probabilities,
    significant_motion_map,
    significant_set,
)

__version__ = "0.1.0"
