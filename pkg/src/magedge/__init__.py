"""Band structure of a Landau Hamiltonian with a periodic edge potential and
eigenvalue counting in its spectral gaps."""

from .bands import BandStructure, band_curvature, band_derivative, band_edges_and_gaps, locate_extrema
from .errors import (
    ConfigError,
    ConstantBandError,
    ConvergenceError,
    DegenerateExtremumError,
    MagEdgeError,
    NearDegeneracyError,
    NoiseFloorError,
    PreconditionError,
)
from .fiber import FiberModel, HermiteBasis, assemble, converge, eigenpairs, hermite_fn
from .potential import FourierPotential, gap_condition, range_and_extrema

__version__ = "0.1.0"
