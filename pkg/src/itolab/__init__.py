"""itolab: a Monte Carlo laboratory for semimartingale decompositions of transformed diffusions.

Simulates elliptic Ito diffusions, builds kernel-smoothed approximants of a
time-space transform, extracts the martingale/finite-variation decomposition
of the transformed path, classifies semimartingality through the total
variation of the smoothing compensators, exercises additive time changes
(including the Cantor clock) and their duality identities, and verifies the
chain-rule transfer of pathwise differentiability by finite differences.
"""

from .models import DiffusionModel, ValidationReport, model_preset, validate_model
from .simulate import PathEnsemble, SamplePath, simulate, uniform_grid
from .kernels import TransitionKernel, kernel_expectation, transition_kernel
from .pathstats import ito_integral, local_time_oracle, quadratic_variation, total_variation
from .transforms import TransformSpec, apply_L, transform_preset
from .smoothing import SmoothedTransform, estimate_generalized_gradient, smooth
from .decompose import (Decomposition, MeasureEstimate, VariationProfile, Verdict,
                        VerdictThresholds, decompose, measure_nu, semimartingale_verdict,
                        variation_ladder)
from .clocks import (Clock, build_clock, cantor, clock_preset, duality_check, extend_driver,
                     inverse_clock, time_change_path)
from .malliavin import MalliavinMatrix, chain_rule_check, malliavin_fd, uniform_l2_bound

__version__ = "0.1.0"
