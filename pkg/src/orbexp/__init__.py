"""Exponentially decaying basis functions, their inter-basis transforms, one-range
addition theorems, and convergence studies of the resulting expansions."""
from importlib.metadata import PackageNotFoundError, version

try:
    __version__ = version("artifact")
except PackageNotFoundError:
    __version__ = "0.1.0"

from .basis import BasisSpec, QuantumIndex, WeightSpec
from .reports import ConvergenceReport
from .transforms import CoeffTensor

__all__ = ["BasisSpec", "QuantumIndex", "WeightSpec", "ConvergenceReport", "CoeffTensor", "__version__"]
