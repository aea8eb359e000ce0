"""Congestive heart failure detection from raw ECG via second-order difference plots."""

__version__ = "0.1.0"

from .classifiers import ClassifierSpec, Dataset, fit_classifier
from .preprocess import FilterConfig, denoise, segment_windows
from .record_io import EcgRecord, Label, load_manifest, load_record
from .sodp import RegionPartition, compute_sodp, extract_features
from .synth import SynthSpec, generate_cohort, generate_record
from .validation import run_kfold, run_loso

__all__ = [
    "ClassifierSpec",
    "Dataset",
    "EcgRecord",
    "FilterConfig",
    "Label",
    "RegionPartition",
    "SynthSpec",
    "compute_sodp",
    "denoise",
    "extract_features",
    "fit_classifier",
    "generate_cohort",
    "generate_record",
    "load_manifest",
    "load_record",
    "run_kfold",
    "run_loso",
    "segment_windows",
]
