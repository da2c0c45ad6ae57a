"""Spectral-domain dyadic Green's functions for horizontally layered media.

The package solves the electromagnetic and elastodynamic layered-media
kernels one horizontal wavenumber at a time, expands every tensor on a fixed
nine-matrix basis whose coefficients depend only on the radial wavenumber,
validates interface and radiation conditions numerically, and reconstructs
spatial values with Bessel-weighted radial quadrature.
"""

from .basis import (BasisCoefficients, SpectralPoint, VectorBasisCoefficients,
                    decompose, decompose_vector, multiply_in_basis,
                    product_rule_class, realize, realize_basis)
from .elastic import (ElasticSpectralSolution, assemble_G_elastic,
                      elastic_free_space_coeffs, elastic_interface_residuals,
                      evaluate_traction_scalars, solve_elastic_spectral)
from .errors import (BranchPoint, CoincidentDepths, ConfigError,
                     DegenerateSpectralPoint, LayeredMediaError, NonConvergent,
                     OnInterface, PhaseMismatch, SingularSystem,
                     VacuumHasNoWavenumber)
from .hankel import QuadratureSpec, RadialIntegrand, inverse_radial_transform, spatial_green
from .maxwell import (EmSpectralSolution, assemble_GE, assemble_GH,
                      em_free_space_b, em_interface_residuals,
                      recover_sommerfeld_potential, recover_transverse_potential,
                      solve_em_spectral)
from .oracle import (oracle_elastic_full, oracle_em_full,
                     oracle_halfspace_reflection)
from .stack import (VACUUM, ElasticMaterial, EmMaterial, LayerStack,
                    vertical_wavenumber, wavenumbers)

__version__ = "0.1.0"
