"""Potential-theoretic operators and L1 inequality checks on periodic grids."""

from .backend import BACKEND_NAME
from .errors import (ConfigError, DimensionError, EpsilonTooSmallForBoxError,
                     LadderTooShortError, MeanNotZeroError, NotDivergenceFreeError,
                     PotlabError, QOutOfRangeError, RadiusOutOfRangeError,
                     SphereMeanNonzeroError, SupportOverflowError)
from .fields import (FieldRecipe, Grid, MatrixField, ScalarField, VectorField,
                     generate, generate_sum, make_grid, mean_subtract,
                     random_dipole_ensemble, random_mean_zero_scalar,
                     random_scalar_bumps, reference_bump)
from .kernels import (AbsPowerCombo, MatrixKernel, QuadraticFormIntegrand,
                      SphereQuadrature, a_decomposition, flux_functional,
                      grad_potential, gradient_kernel_apply, kernel_convolution,
                      matrix_curl, matrix_kernel, matrix_kernel_form,
                      newtonian_potential, phi_integral_ladder, row_divergence,
                      sphere_quadrature, truncated_phi_integral,
                      weighted_lq_norm)
from .specfun import bessel_k1, gamma_fn, paper_constant, sphere_area
from .spectral import (SpectralField, TransformConvention, dft, divergence,
                       frac_laplacian_power, gradient,
                       homogeneous_quadratic_form, idft, jacobian,
                       leray_project, regularize_eps, riesz_transform,
                       sobolev_norm_homog, sobolev_norm_inhomog,
                       spectral_divergence_residual)

__version__ = "0.1.0"
