"""Per-instance choice of an alldifferent implementation."""

from ._cspsel import (
    Error,
    duplication_copies,
    evaluate,
    extract,
    extract_one,
    feature_names,
    label,
    predict,
    synth,
    train,
)

__all__ = [
    "Error",
    "duplication_copies",
    "evaluate",
    "extract",
    "extract_one",
    "feature_names",
    "label",
    "predict",
    "synth",
    "train",
]
