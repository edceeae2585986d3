"""bruxkit: dual-ear IMU teeth grinding/clenching detection at desk scale.

Pipeline: corpus (formats + validation) -> segment (1.6 s / 50% windows)
-> features (71-value descriptor) -> models (five classical classifiers)
-> eval (leave-one-subject-out reports). synth generates the deterministic
stand-in corpus; cli wires everything into one executable.
"""

__version__ = "0.1.0"

from .corpus import (
    AnnotationTrack,
    Interval,
    Modality,
    Recording,
    load_annotations,
    load_corpus,
    load_recording,
    save_annotations,
    save_recording,
    validate_pair,
)
from .eval import build_dataset, loso_evaluate, metrics_from_confusion, task_spec
from .features import FeatureVector, featurize
from .models import ModelSpec, predict, train
from .segment import LabelPolicy, Window, segment, window_count
from .synth import ParticipantProfile, ProtocolScript, generate_corpus, generate_participant

__all__ = [
    "AnnotationTrack",
    "FeatureVector",
    "Interval",
    "LabelPolicy",
    "Modality",
    "ModelSpec",
    "ParticipantProfile",
    "ProtocolScript",
    "Recording",
    "Window",
    "build_dataset",
    "featurize",
    "generate_corpus",
    "generate_participant",
    "load_annotations",
    "load_corpus",
    "load_recording",
    "loso_evaluate",
    "metrics_from_confusion",
    "predict",
    "save_annotations",
    "save_recording",
    "segment",
    "task_spec",
    "train",
    "validate_pair",
    "window_count",
]
