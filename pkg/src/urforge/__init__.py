"""Executable combinatorics of countable homogeneous metric spaces with
finite distance sets: universality and blocks, growing approximants,
the orbit calculus, quotients, and the indivisibility game with
machine-checkable certificates."""

from .distset import Block, DistanceSet, UniversalityWitness, blocks, is_universal, jumps
from .space import DGraph, Space, TypeFn, enumerate_katetov, extend, is_katetov, is_metric, orbit, rank, restrict
from .builder import Approximant, Embedding, SaturationCertificate, build, copy_check, saturate, saturation_level
from .errors import BudgetExceededError, CompletionError, NonUniversalError, UrforgeError

__version__ = "0.1.0"

__all__ = [
    "Approximant",
    "Block",
    "BudgetExceededError",
    "CompletionError",
    "DGraph",
    "DistanceSet",
    "Embedding",
    "NonUniversalError",
    "SaturationCertificate",
    "Space",
    "TypeFn",
    "UniversalityWitness",
    "UrforgeError",
    "blocks",
    "build",
    "copy_check",
    "enumerate_katetov",
    "extend",
    "is_katetov",
    "is_metric",
    "is_universal",
    "jumps",
    "orbit",
    "rank",
    "restrict",
    "saturate",
    "saturation_level",
]
