"""Diffusion models and numerical validation of the ellipticity / drift bounds.

A model is the pair of coefficient maps (b, sigma) for

    dX_t = b(t, X_t) dt + sigma(t, X_t) dW_t,   X_0 = x0,

together with the *claimed* bounds: a claimed ellipticity epsilon such that
eps |v|^2 <= v' (sigma sigma')(t,x) v <= eps^{-1} |v|^2, and a claimed drift
bound. The bounds are untestable over all of time-space, so validation sweeps
a finite probe grid; enlarging the grid can only tighten the empirical
constants (it never turns a failure into a pass).

Coefficients must be vectorized: ``drift(t, x)`` takes ``x`` of shape
``(..., m)`` and returns ``(..., m)``; ``diffusion(t, x)`` returns
``(..., m, m)``. ``t`` is a scalar or an array broadcastable against the
leading shape of ``x`` (the smoothing operator evaluates coefficients at one
time per state).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import ModelEvaluationError

Coefficient = Callable[[float, np.ndarray], np.ndarray]


@dataclass(frozen=True)
class DiffusionModel:
    dimension: int
    drift: Coefficient
    diffusion: Coefficient
    ellipticity: float          # claimed lower/upper spectral bound (eps, 1/eps)
    drift_bound: float          # claimed sup |b|, or C in |b| <= C(1+|x|)
    x0: np.ndarray
    horizon: float
    name: str = "custom"
    sigma_constant: bool = False    # sigma independent of (t, x)
    drift_is_constant: bool = False
    linear_growth: bool = False     # drift bound read as |b| <= C(1+|x|)

    def __post_init__(self):
        object.__setattr__(self, "x0", np.asarray(self.x0, dtype=float).reshape(self.dimension))
        if self.dimension < 1:
            raise ValueError("dimension must be a positive integer")
        if self.ellipticity <= 0:
            raise ValueError("claimed ellipticity must be positive")
        if self.drift_bound < 0:
            raise ValueError("drift bound must be nonnegative")
        if self.horizon <= 0:
            raise ValueError("horizon must be positive")

    def covariance(self, t: float, x: np.ndarray) -> np.ndarray:
        """sigma sigma' at (t, x), shape (..., m, m)."""
        s = self.diffusion(t, x)
        return s @ np.swapaxes(s, -1, -2)

    def with_horizon(self, horizon: float) -> "DiffusionModel":
        return DiffusionModel(
            dimension=self.dimension, drift=self.drift, diffusion=self.diffusion,
            ellipticity=self.ellipticity, drift_bound=self.drift_bound,
            x0=self.x0, horizon=horizon, name=self.name,
            sigma_constant=self.sigma_constant, drift_is_constant=self.drift_is_constant,
            linear_growth=self.linear_growth,
        )


@dataclass(frozen=True)
class ValidationReport:
    passed: bool
    ellipticity_ok: bool
    drift_ok: bool
    empirical_epsilon: float
    max_drift_norm: float
    failures: tuple[str, ...] = field(default_factory=tuple)

    def as_dict(self) -> dict:
        return {
            "passed": self.passed,
            "ellipticity_ok": self.ellipticity_ok,
            "drift_ok": self.drift_ok,
            "empirical_epsilon": self.empirical_epsilon,
            "max_drift_norm": self.max_drift_norm,
            "failures": list(self.failures),
        }


def _check_finite(value: np.ndarray, what: str, t: float, x: np.ndarray) -> None:
    if not np.all(np.isfinite(value)):
        raise ModelEvaluationError(f"{what} evaluated non-finite at t={t!r}, x={np.asarray(x).tolist()!r}")


def validate_model(model: DiffusionModel, probe_grid) -> ValidationReport:
    """Sweep probes (t, x, x') and check the claimed bounds empirically.

    The empirical epsilon is the largest eps compatible with every probe:
    min over probes of min(lam, 1/lam) with lam = x'(sigma sigma')x' / |x'|^2.
    Fails if any probe violates the claimed two-sided ellipticity bound or the
    drift bound (|b| <= bound, or <= bound*(1+|x|) for linear-growth models).
    """
    probes = list(probe_grid)
    if not probes:
        raise ValueError("probe grid must be nonempty")

    eps = model.ellipticity
    failures: list[str] = []
    emp_eps = np.inf
    max_drift = 0.0
    for t, x, xp in probes:
        x = np.asarray(x, dtype=float).reshape(model.dimension)
        xp = np.asarray(xp, dtype=float).reshape(model.dimension)
        nrm2 = float(xp @ xp)
        if nrm2 == 0.0:
            raise ValueError("probe direction x' must be nonzero")
        cov = model.covariance(t, x)
        _check_finite(cov, "sigma sigma'", t, x)
        quad = float(xp @ cov @ xp) / nrm2
        if quad <= 0.0:
            failures.append(f"ellipticity: quadratic form {quad:.3e} <= 0 at t={t}, x={x.tolist()}")
            emp_eps = 0.0
        else:
            emp_eps = min(emp_eps, quad, 1.0 / quad)
            if quad < eps * (1 - 1e-12) or quad > (1 - 1e-12) ** -1 / eps:
                failures.append(
                    f"ellipticity: quadratic form {quad:.6g} outside [{eps:.6g}, {1/eps:.6g}]"
                    f" at t={t}, x={x.tolist()}, x'={xp.tolist()}"
                )
        b = model.drift(t, x)
        _check_finite(b, "drift", t, x)
        bnrm = float(np.linalg.norm(np.asarray(b).reshape(model.dimension)))
        max_drift = max(max_drift, bnrm)
        cap = model.drift_bound * (1.0 + float(np.linalg.norm(x))) if model.linear_growth else model.drift_bound
        if bnrm > cap * (1 + 1e-12):
            failures.append(f"drift: |b|={bnrm:.6g} exceeds bound {cap:.6g} at t={t}, x={x.tolist()}")

    ell_ok = not any(f.startswith("ellipticity") for f in failures)
    drift_ok = not any(f.startswith("drift") for f in failures)
    return ValidationReport(
        passed=ell_ok and drift_ok,
        ellipticity_ok=ell_ok,
        drift_ok=drift_ok,
        empirical_epsilon=float(emp_eps),
        max_drift_norm=max_drift,
        failures=tuple(failures),
    )


def default_probe_grid(model: DiffusionModel, t_points: int = 5, x_points: int = 9,
                       x_radius: float = 3.0):
    """Deterministic probe lattice: times x states x unit directions."""
    ts = np.linspace(0.0, model.horizon, t_points)
    m = model.dimension
    offsets = np.linspace(-x_radius, x_radius, x_points)
    dirs = list(np.eye(m))
    if m > 1:
        dirs.append(np.ones(m) / np.sqrt(m))
    probes = []
    for t in ts:
        for off in offsets:
            x = model.x0 + off
            for d in dirs:
                probes.append((float(t), x, d))
    return probes


def _const_matrix(value: np.ndarray, m: int) -> Coefficient:
    value = np.asarray(value, dtype=float).reshape(m, m)

    def diffusion(t, x):
        x = np.asarray(x, dtype=float)
        return np.broadcast_to(value, x.shape[:-1] + (m, m)).copy()

    return diffusion


def _const_vector(value: np.ndarray, m: int) -> Coefficient:
    value = np.asarray(value, dtype=float).reshape(m)

    def drift(t, x):
        x = np.asarray(x, dtype=float)
        return np.broadcast_to(value, x.shape).copy()

    return drift


def _bounded_elliptic_sigma(t, x):
    # sigma(t,x) = sqrt(1 + x^2/(1+x^2)): spectrum in [1, sqrt(2)], smooth, state-dependent
    x = np.asarray(x, dtype=float)
    s = np.sqrt(1.0 + x[..., 0] ** 2 / (1.0 + x[..., 0] ** 2))
    return s[..., None, None] * np.ones(x.shape[:-1] + (1, 1))


def _make_presets() -> dict[str, DiffusionModel]:
    bm = DiffusionModel(
        dimension=1, drift=_const_vector([0.0], 1), diffusion=_const_matrix([[1.0]], 1),
        ellipticity=1.0, drift_bound=0.0, x0=[0.0], horizon=1.0, name="bm",
        sigma_constant=True, drift_is_constant=True,
    )
    scaled = DiffusionModel(
        dimension=1, drift=_const_vector([0.0], 1), diffusion=_const_matrix([[2.0]], 1),
        ellipticity=0.25, drift_bound=0.0, x0=[0.0], horizon=1.0, name="scaled_bm",
        sigma_constant=True, drift_is_constant=True,
    )
    drifted = DiffusionModel(
        dimension=1, drift=_const_vector([1.0], 1), diffusion=_const_matrix([[1.0]], 1),
        ellipticity=1.0, drift_bound=1.0, x0=[0.0], horizon=1.0, name="drifted_bm",
        sigma_constant=True, drift_is_constant=True,
    )
    bounded = DiffusionModel(
        dimension=1, drift=_const_vector([0.0], 1), diffusion=_bounded_elliptic_sigma,
        ellipticity=0.5, drift_bound=0.0, x0=[0.0], horizon=1.0, name="bounded_elliptic",
    )
    return {"bm": bm, "scaled_bm": scaled, "drifted_bm": drifted, "bounded_elliptic": bounded}


MODEL_PRESETS = _make_presets()


def model_preset(name: str) -> DiffusionModel:
    try:
        return MODEL_PRESETS[name]
    except KeyError:
        known = ", ".join(sorted(MODEL_PRESETS))
        raise KeyError(f"unknown model preset {name!r} (known: {known})") from None
