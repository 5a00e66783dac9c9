"""Second smallest eigenvalue of the normalized Laplacian of a tree, via
Perron values of normalized bottleneck matrices."""

__version__ = "0.1.0"

from .errors import PerronTreeError, TreeError
from .spectral import (
    Classification,
    Kind,
    SpectralReport,
    classify,
    classify_exhaustive,
    lambda1,
    normalized_laplacian,
)
from .tolerances import DEFAULT, Tolerances
from .tree import Tree, parse_edge_list, random_tree

__all__ = [
    "Classification",
    "DEFAULT",
    "Kind",
    "PerronTreeError",
    "SpectralReport",
    "Tolerances",
    "Tree",
    "TreeError",
    "classify",
    "classify_exhaustive",
    "lambda1",
    "normalized_laplacian",
    "parse_edge_list",
    "random_tree",
]
