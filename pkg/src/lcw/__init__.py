"""Levi-Civita connections on noncommutative one-forms presented by frames."""

import os as _os

# LCW_THREADS caps BLAS/OpenMP threads; it must be set before numpy loads.
_threads = _os.environ.get("LCW_THREADS")
if _threads:
    for _var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
        _os.environ.setdefault(_var, _threads)

from .algebra import FuzzyAlgebra, GridAlgebra, LaurentAlgebra
from .geometry import Geometry, from_coordinate_frame, validate
from .tensors import Frame, ModuleOperator, TensorElement

__all__ = [
    "FuzzyAlgebra",
    "Frame",
    "Geometry",
    "GridAlgebra",
    "LaurentAlgebra",
    "ModuleOperator",
    "TensorElement",
    "from_coordinate_frame",
    "validate",
]
