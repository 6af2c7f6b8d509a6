"""Respiratory rate estimation from the photoplethysmogram.

Five respiratory-induced variation series (intensity, amplitude, frequency,
width, slope) are extracted beat-by-beat, each rated spectrally with
power-law background subtraction, gated by a noise index, and fused per
window with covariance intersection. Smart Fusion baselines and a benchmark
evaluation harness are included.
"""

from .errors import (
    BoundsError,
    EmptyFusionError,
    InsufficientSignalError,
    ParseError,
    RrcifError,
    UnsupportedRateError,
    ValidationError,
)
from .evaluation import (
    AgreementStats,
    SubjectResult,
    SubjectWindows,
    SweepRow,
    agreement,
    reference_at,
    score_at,
    score_subject,
    sweep,
    wilcoxon_signed_rank,
)
from .fusion import SF3, SF5, FusionResult, SfConfig, cif_fuse, cif_weights, fuse_window, smart_fusion
from .pipeline import RecordAnalysis, analyze_record, fuse_all, fuse_estimates, subject_windows
from .preprocess import Beat, bandpass, flag_artifacts, segment_beats
from .riv import ALL_KINDS, RivKind, RivSeries, extract
from .signal_io import (
    ModDepths,
    PpgRecord,
    ReferenceRr,
    SynthSpec,
    read_record,
    read_record_json,
    read_reference,
    synthesize,
    write_record,
    write_reference,
)
from .spectral import (
    DEFAULT_THRESHOLD,
    PowerSpectrum,
    RrEstimate,
    WindowGrid,
    estimate_rr,
    fit_power_law,
    gate,
    window_spectrum,
)

__all__ = [name for name in dir() if not name.startswith("_")]
