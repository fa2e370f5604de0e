"""Multidimensional LULU operators and the discrete pulse transform of images."""

from .connectivity import Connectivity, GridImage
from .operators import Op, OperatorKind, apply, apply_Ln, apply_Un

__all__ = ["Connectivity", "GridImage", "Op", "OperatorKind", "apply", "apply_Ln", "apply_Un"]
