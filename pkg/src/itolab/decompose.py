"""Pathwise decomposition f(t, X_t) = f(0, X_0) + M + A and the semimartingale diagnostic.

The martingale part integrates the smoothed gradient against the path; the
finite-variation part A is *defined* as the residual, so the decomposition
identity holds by construction and the diagnostic content lives elsewhere:
in how the total variation of A^n = int L fhat_n(s, X_s) ds behaves as the
smoothing index n grows. Flat profiles (tight total variation) certify a
semimartingale; profiles growing like a power of n flag the opposite.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .kernels import transition_kernel
from .models import DiffusionModel
from .pathstats import ito_integral
from .simulate import PathEnsemble, SamplePath, scalar_path
from .smoothing import smooth
from .transforms import TransformSpec, gradient as analytic_gradient


@dataclass(frozen=True)
class Decomposition:
    """Per-path decomposition at one smoothing index."""

    path_index: int
    n: int
    gradient_samples: np.ndarray     # (K+1, m), fhat_n_x (or analytic f_x) along the path
    martingale: SamplePath           # M_t = int gradient dX, scalar
    finite_variation: SamplePath     # A_t = f(t,X_t) - f(0,X_0) - M_t, scalar


@dataclass(frozen=True)
class VariationProfile:
    """Ensemble-mean total variation of A^n per smoothing index."""

    indices: np.ndarray       # strictly increasing ints
    estimates: np.ndarray     # mean Var(A^n) over the ensemble
    stderrs: np.ndarray

    def __post_init__(self):
        if np.any(np.diff(self.indices) <= 0):
            raise ValueError("smoothing indices must be strictly increasing")
        if np.any(self.estimates < 0):
            raise ValueError("variation estimates must be nonnegative")


@dataclass(frozen=True)
class VerdictThresholds:
    flat_slope: float = 0.05
    growth_slope: float = 0.15
    min_levels: int = 4
    zero_floor: float = 1e-10    # profiles entirely below this are flat by fiat

    def as_dict(self) -> dict:
        return {"flat_slope": self.flat_slope, "growth_slope": self.growth_slope,
                "min_levels": self.min_levels, "zero_floor": self.zero_floor}


SEMIMARTINGALE = "Semimartingale"
NOT_SEMIMARTINGALE = "NotSemimartingale"
INCONCLUSIVE = "Inconclusive"


@dataclass(frozen=True)
class Verdict:
    classification: str
    profile: VariationProfile
    slope: float
    thresholds: VerdictThresholds


@dataclass(frozen=True)
class MeasureEstimate:
    """Estimates of psi integrated against the weak-derivative measure."""

    entries: tuple    # (psi_id, estimate, stderr) triples
    n: int


def _transform_values(transform: TransformSpec, ensemble: PathEnsemble) -> np.ndarray:
    return transform(ensemble.grid[None, :], ensemble.values)


def decompose(transform: TransformSpec, ensemble: PathEnsemble, model: DiffusionModel,
              n: int, gradient: str = "smoothed", time_quad_points: int = 3,
              space_quad_order: int = 21) -> list[Decomposition]:
    """Decompose f(t, X_t) along every ensemble path at smoothing index n.

    gradient="smoothed" samples fhat_n's gradient; "analytic" uses the
    transform's own f_x (C12 transforms with supplied derivatives only).
    """
    if gradient == "analytic":
        if transform.f_x is None:
            raise ValueError(f"transform {transform.name!r} has no analytic gradient")
        g = analytic_gradient(transform, ensemble.grid[None, :], ensemble.values)
    elif gradient == "smoothed":
        st = smooth(transform, transition_kernel(model), n, time_quad_points, space_quad_order)
        g = st.gradient(ensemble.grid[None, :], ensemble.values)
    else:
        raise ValueError("gradient must be 'smoothed' or 'analytic'")

    fvals = _transform_values(transform, ensemble)
    out = []
    for i in range(ensemble.n_paths):
        M = ito_integral(g[i], ensemble.path(i))
        A = scalar_path(ensemble.grid, fvals[i] - fvals[i, 0] - M.scalar)
        out.append(Decomposition(path_index=i, n=int(n), gradient_samples=g[i],
                                 martingale=M, finite_variation=A))
    return out


def generator_along_paths(transform: TransformSpec, ensemble: PathEnsemble,
                          model: DiffusionModel, n: int, time_quad_points: int = 3,
                          space_quad_order: int = 21) -> np.ndarray:
    """L fhat_n evaluated at every (t_k, X_{t_k}); shape (P, K+1)."""
    st = smooth(transform, transition_kernel(model), n, time_quad_points, space_quad_order)
    return st.generator_value(ensemble.grid[None, :], ensemble.values)


def compensator_paths(transform: TransformSpec, ensemble: PathEnsemble, model: DiffusionModel,
                      n: int, **quad) -> np.ndarray:
    """A^n_t = int_0^t L fhat_n(s, X_s) ds by left-point quadrature; (P, K+1)."""
    lvals = generator_along_paths(transform, ensemble, model, n, **quad)
    dt = np.diff(ensemble.grid)
    out = np.zeros_like(lvals)
    np.cumsum(lvals[:, :-1] * dt[None, :], axis=1, out=out[:, 1:])
    return out


def variation_ladder(transform: TransformSpec, ensemble: PathEnsemble, model: DiffusionModel,
                     n_list, time_quad_points: int = 3,
                     space_quad_order: int = 21) -> VariationProfile:
    """Mean total variation of A^n over the ensemble, per smoothing index."""
    n_list = [int(n) for n in n_list]
    if len(n_list) < 4:
        raise ValueError("the ladder needs at least four smoothing indices")
    if any(b <= a for a, b in zip(n_list, n_list[1:])):
        raise ValueError("smoothing indices must be strictly increasing")
    dt = np.diff(ensemble.grid)
    means, ses = [], []
    for n in n_list:
        lvals = generator_along_paths(transform, ensemble, model, n,
                                      time_quad_points=time_quad_points,
                                      space_quad_order=space_quad_order)
        tv = np.abs(lvals[:, :-1]) @ dt     # per-path total variation of A^n
        means.append(float(tv.mean()))
        ses.append(float(tv.std(ddof=1) / np.sqrt(len(tv))) if len(tv) > 1 else 0.0)
    return VariationProfile(indices=np.asarray(n_list), estimates=np.asarray(means),
                            stderrs=np.asarray(ses))


def fit_loglog_slope(indices: np.ndarray, estimates: np.ndarray) -> float:
    """Least-squares slope of log(estimates) against log(indices)."""
    return float(np.polyfit(np.log(indices.astype(float)), np.log(estimates), 1)[0])


def semimartingale_verdict(profile: VariationProfile,
                           thresholds: VerdictThresholds | None = None) -> Verdict:
    """Classify a variation profile by its fitted log-log growth slope.

    Profiles whose largest estimate sits below the zero floor are pure
    quadrature roundoff (L fhat_n vanishes identically); a log fit on that
    noise is meaningless, so they classify flat with slope 0.
    """
    thresholds = thresholds or VerdictThresholds()
    if profile.indices.shape[0] < thresholds.min_levels:
        raise ValueError(
            f"profile has {profile.indices.shape[0]} levels; need >= {thresholds.min_levels}")
    if float(np.max(profile.estimates)) <= thresholds.zero_floor:
        slope = 0.0
    else:
        slope = fit_loglog_slope(profile.indices, np.maximum(profile.estimates, 1e-300))
    if slope <= thresholds.flat_slope:
        classification = SEMIMARTINGALE
    elif slope >= thresholds.growth_slope:
        classification = NOT_SEMIMARTINGALE
    else:
        classification = INCONCLUSIVE
    return Verdict(classification=classification, profile=profile, slope=slope,
                   thresholds=thresholds)


def measure_nu(transform: TransformSpec, ensemble: PathEnsemble, model: DiffusionModel,
               n: int, test_functions, time_quad_points: int = 3,
               space_quad_order: int = 21) -> MeasureEstimate:
    """Monte Carlo estimates of E int psi(s, X_s) dA^n_s per test function.

    test_functions is a list of (psi_id, psi) with psi(t, x) bounded and
    continuous, vectorized like transforms. The estimates approximate the
    integrals of psi against the weak-derivative measure as n grows.
    """
    lvals = generator_along_paths(transform, ensemble, model, n,
                                  time_quad_points=time_quad_points,
                                  space_quad_order=space_quad_order)
    dt = np.diff(ensemble.grid)
    entries = []
    for psi_id, psi in test_functions:
        pv = psi(ensemble.grid[None, :-1], ensemble.values[:, :-1, :])
        per_path = (pv * lvals[:, :-1]) @ dt
        est = float(per_path.mean())
        se = float(per_path.std(ddof=1) / np.sqrt(len(per_path))) if len(per_path) > 1 else 0.0
        entries.append((psi_id, est, se))
    return MeasureEstimate(entries=tuple(entries), n=int(n))
