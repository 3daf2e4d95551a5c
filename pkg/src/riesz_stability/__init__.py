"""Riesz energies, Fraenkel asymmetry and quantitative stability checks for sets in R^n."""

from .asymmetry import fraenkel_asymmetry, normalized_symmetric_difference
from .errors import (
    EmptySetError,
    GridError,
    InvalidDimensionError,
    InvalidKernelError,
    PreconditionError,
    QuadratureError,
    RieszError,
    SingularConfigurationError,
    UnsupportedDimensionError,
)
from .kernel import (
    BallSpec,
    Kernel,
    ball_energy,
    ball_potential,
    ball_potential_center,
    newton_energy_ball,
    newton_potential_ball,
    unit_ball_volume,
)
from .potential import (
    compute_cell_constants,
    energy_voxel,
    poisson_residual,
    potential_direct,
    potential_fft,
    quadratic_distance,
)
from .radial import (
    RadialSet,
    annulus_perturbation,
    deficit_radial,
    radial_asymmetry,
    radial_energy,
    radial_potential,
)
from .stability import StabilityReport, Tolerances, deficit, fit_exponent
from .symmetrize import fmp_symmetrize, truncate_tail
from .voxel import Grid, PotentialField, VoxelSet, rasterize_ball, rearrange_decreasing, symmetrize_halfspace

__version__ = "0.1.0"
