"""Entropy-guided cover-tree feature extraction for labeled point clouds."""

__version__ = "0.1.0"

from ._core import (
    Collection,
    InputError,
    Model,
    NumericError,
    cross_validate,
    entropy,
    generate,
    read_collection,
    train,
    write_collection,
)

__all__ = [
    "Collection",
    "InputError",
    "Model",
    "NumericError",
    "cross_validate",
    "entropy",
    "generate",
    "read_collection",
    "train",
    "write_collection",
]
