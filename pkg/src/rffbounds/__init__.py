"""Random Fourier features for shift-invariant kernels and their derivatives,
with finite-sample error bounds and seeded Monte Carlo checks."""
from .bounds import (BernsteinParams, BoundReport, F_d, bernstein_params, cor1_bound, covering_upper,
                     entropy_integral_upper, khintchine, sigma_of, thm1_bound, thm1_h, thm2_bound,
                     thm3_bound, thm3_H, thm4_failure_prob, vol_factor)
from .errors import (DegenerateInput, DimensionMismatch, GridBudgetExceeded, InvalidA, InvalidDiameter,
                     InvalidR, RFFError, UnboundedSupport, UnsupportedDimension, UnsupportedOrder,
                     ValidationError)
from .features import (embed, estimate_derivative, estimate_derivative_at, estimate_kernel, fd_derivative,
                       phase, target_derivative, target_derivative_at, target_gradient_at)
from .multiindex import MultiIndex, as_multi_index, parse_multi_index
from .norms import (Ball, Box, ErrorReport, Quadrature, difference_set, error_field, gradient_sup,
                    lipschitz_terms, lr_error, lr_norm_of_field, sup_error_certified)
from .spectral import (Discrete, FeatureSet, GaussianIso, MomentReport, SpectralMeasure, UniformBox,
                       characteristic_fn, moment_C, moment_E, moment_report, sample_frequencies,
                       second_moment, sup_moment_T)

__version__ = "0.1.0"
