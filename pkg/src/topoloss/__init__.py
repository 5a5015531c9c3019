"""Topology-aware loss evaluation for 2D segmentation rasters.

Computes cubical persistent homology of grayscale images with critical-cell
tracking, matches persistence diagrams with optional spatial weighting,
evaluates the topology loss and its surrogate gradient, and ships metrics
plus a pixel-space gradient-descent harness.
"""

__version__ = "0.1.0"

from .cubical import FilteredComplex, build_complex
from .matching import MatchingResult, match_diagrams
from .persistence import Diagram, PersistencePair, betti_numbers, compute_persistence, diagram_of_mask
from .raster import binarize, load_image, pad_border, save_image

__all__ = [
    "__version__",
    "FilteredComplex",
    "build_complex",
    "MatchingResult",
    "match_diagrams",
    "Diagram",
    "PersistencePair",
    "betti_numbers",
    "compute_persistence",
    "diagram_of_mask",
    "binarize",
    "load_image",
    "pad_border",
    "save_image",
]
