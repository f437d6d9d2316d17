"""Umpire-pose event detection and cricket highlight summarization toolkit."""

from .cascade import (
    DISCARDED,
    NO_ACTION,
    CascadeModel,
    DecisionKind,
    FrameDecision,
    classify_frame,
    classify_frames,
    event_decision,
    load_cascade,
    save_cascade,
)
from .domain import (
    EVENT_CLASSES,
    NON_UMPIRE_CODE,
    BalanceReport,
    DatasetManifest,
    EventClass,
    GroundTruthEvent,
    ManifestRecord,
    PresenceClass,
    check_class_balance,
    parse_manifest,
    parse_truth_file,
    serialize_manifest,
)
from .errors import (
    ConvergenceError,
    DataError,
    FormatError,
    SnowsumError,
    UndefinedMetricError,
)
from .evaluation import (
    EventCounts,
    holdout_accuracy,
    jackknife,
    kfold_cv,
    match_events,
    ppv,
    stratified_split,
    tpr,
)
from .features import (
    FeatureStore,
    RasterImage,
    baseline_extract,
    build_store,
    normalize_intensity,
    read_store,
    write_store,
)
from .linsvm import (
    BinaryLinearModel,
    MulticlassModel,
    TrainConfig,
    decision_value,
    grid_search_C,
    load_model,
    objective,
    predict_binary,
    predict_multi,
    predict_multi_batch,
    save_model,
    train_binary,
    train_ovr,
)
from .summarizer import (
    Segment,
    SummaryDocument,
    WindowConfig,
    emit_summary,
    parse_summary,
    summarize_stream,
    vote,
)

__version__ = "0.1.0"
