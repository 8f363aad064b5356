"""Uniform plane trees with given degree sequence, their path encodings,
fragmentations and laminations, and the matching continuum constructions."""

from . import (  # noqa: F401
    degree_sequence,
    errors,
    excursion,
    fragmentation,
    harness,
    lamination,
    plane_tree,
    sampler,
)

__version__ = "0.1.0"
