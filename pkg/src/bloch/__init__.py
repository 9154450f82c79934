"""Leading-order Bloch dispersion for periodic arrays of small inclusions."""

__version__ = "0.1.0"

from .bem import (
    PolarizabilityTensor,
    ReducedDensity,
    analytic_sphere_tensor,
    assemble_adjoint_double_layer,
    chi_for_direction,
    polarizability_tensor,
    solve_reduced_density,
)
from .cluster import ClusterSolution, bloch_residual, build_clusters, evaluate, export_field_grid
from .dispersion import (
    DispersionResult,
    EigenModes,
    GeometryScale,
    MediumParams,
    ModeMatrix,
    assemble_M0,
    dispersion_scan,
    eigen_modes,
    frequencies_fixed_k,
    maxwell_effective,
    wavevectors_fixed_omega,
)
from .lattice import ExceptionalSet, LatticeSpec, cubic_lattice, find_exceptional_set, plane_distances, reciprocal_basis
from .mesh import SurfaceMesh, ellipsoid, icosphere, load_mesh, write_off
from .specfun import BallConstants, ball_constants, plane_wave_moments, sph_bessel_j, sph_bessel_y, sphere_quadrature
