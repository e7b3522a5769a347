"""One-factor affine short-rate models as Bernstein processes.

Closed forms (``model``), exact squared-Bessel sampling (``bessel``), the
Monte Carlo engine (``sde``), isovector classification (``isovector``) and
validation tools (``analytics``, ``stats``).
"""
__version__ = "0.1.0"

from .model import (DerivedParams, DomainError, ModelParams, ParameterError, Potential,
                    action_s, bernstein_drift, cdf_delta1, cdf_delta3, density_delta1,
                    density_delta3, derive, eta, eta_star_delta1, eta_star_delta3,
                    potential_eval)
from .bessel import (BesqSpec, besq_no_hit_probability, besq_scaling_check,
                     besq_transition_sample, sample_x_exact, time_change)
from .sde import (PathSet, Scheme, SimConfig, hitting_stats, simulate_ou, simulate_s,
                  simulate_x, simulate_z)
from .isovector import (CaseTag, IsovectorCase, IsovectorSolution, auxiliary_residual,
                        canonical_basis_d0, classify, model_isovector_dimension,
                        solve_auxiliary)
from .analytics import (GridSpec, ResidualReport, moment_check_ou, pde_residual,
                        s_expectation_study)
from .stats import DistTestReport, chi_square_gof, ks_one_sample, ks_two_sample
