"""fracwave: meshfree RBF collocation solver for constant-Q viscoacoustic
wave equations with decoupled fractional Laplacians, plus a Fourier
pseudospectral reference solver and a manufactured-solution harness."""

from .errors import (ConditioningError, ConfigurationError, CoverageError,
                     DomainError, FracwaveError, InstabilityError)
from .fraclap import FracOpConfig
from .geometry import Domain2D, PointCloud, generate_cloud, ray_exit_distance
from .media import (MediumParams, MediumSpec, VelocityField, constant_velocity,
                    derive_coefficients, dispersion_curve, gamma_from_q,
                    layered_velocity, raster_velocity, sample_velocity)
from .rbf import RbfBasis, interpolate, kernel_matrix, phi
from .stepper import (Scenario, SnapshotGrid, SourceTerm, StepperState,
                      SystemMatrices, assemble, evaluate, initialize,
                      ricker_field, run, step)

__version__ = "0.1.0"
