"""Discrete Laplacians on intrinsic meshes and their low spectra."""

from .fields import (boundary_tangential_energy, check_isometry, dirichlet_energy, even_part, even_spectrum,
                     gradient_sq, harmonic_extension, odd_spectrum, orbit_projection)
from .operators import (OperatorPair, SpectralError, assemble, corner_cotangents, cotan_weights, mass_matrix,
                        stiffness_matrix)
from .solve import (DEFAULT_CLUSTER_TOL, Spectrum, cluster_ids, eigen_residuals, multiplicity, rayleigh,
                    restricted_spectrum, solve_spectrum)
from .io import read_eigenvectors, spectrum_csv, spectrum_rows, write_spectrum

__all__ = [
    "DEFAULT_CLUSTER_TOL", "OperatorPair", "SpectralError", "Spectrum", "assemble", "boundary_tangential_energy",
    "check_isometry", "cluster_ids", "corner_cotangents", "cotan_weights", "dirichlet_energy", "eigen_residuals",
    "even_part", "even_spectrum", "gradient_sq", "harmonic_extension", "mass_matrix", "multiplicity",
    "odd_spectrum", "orbit_projection", "rayleigh", "read_eigenvectors", "restricted_spectrum", "solve_spectrum", "spectrum_csv", "spectrum_rows",
    "stiffness_matrix", "write_spectrum",
]
