"""Movement detection from WiFi channel state information.

The pipeline: parse a capture, preprocess subcarrier amplitudes,
correlate adjacent frames, calibrate against empty-room recordings,
then run sliding variance analysis for a binary movement mask.
"""

from .capture import (
    BANDWIDTH_SUBCARRIERS,
    ChannelSpec,
    ComplexSample,
    CsiCapture,
    CsiFrame,
    amplitudes,
    load_capture,
    parse_canonical,
    write_canonical,
)
from .correlation import PccSeries, pcc_pair, pcc_series, sti, sti_series
from .detector import (
    CalibrationProfile,
    DetectorConfig,
    MovementMask,
    calibrate,
    contains_movement,
    detect,
    load_profile,
    running_variance,
    save_profile,
    set_initial_state,
    sliding_variance_analysis,
)
from .errors import (
    CsiError,
    CutoffAboveNyquist,
    DegenerateSpan,
    EmptyCalibrationSet,
    GapInGroundTruth,
    InputTooShort,
    InvalidScript,
    MixedStreams,
    MixedSubcarrierCount,
    NoCsiFrames,
    NonIntegerDecimation,
    NotAPcap,
    RateMismatch,
    SchemaViolation,
    ShapeMismatch,
    TooFewFrames,
    UnsortedEvents,
    WindowTooLarge,
    ZeroVariance,
)
from .evaluate import (
    AccuracyReport,
    BatchSummary,
    EvalRun,
    GroundTruth,
    batch_evaluate,
    load_ground_truth,
    load_pir_events,
    movement_ground_truth,
    rasterize,
    rasterize_events,
    save_ground_truth,
    score,
    score_pir,
)
from .nexmon import decode_chanspec, encode_chanspec, parse_nexmon_pcap
from .preprocess import (
    AmplitudeSeries,
    PipelineConfig,
    SubcarrierMap,
    default_subcarrier_map,
    downsample,
    load_subcarrier_map,
    lowpass,
    preprocess_pipeline,
    prune_subcarriers,
    resample_linear,
)
from .synth import Episode, SynthScript, generate, load_script

__version__ = "0.1.0"
