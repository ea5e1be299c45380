"""Finite-difference Malliavin derivatives by increment perturbation, and the chain-rule transfer check.

Bumping the stored Brownian increment of step j by h is a Cameron-Martin
perturbation whose density is h/dt over that step, so

    D[i][j] = (F_i(bumped path) - F_i(base path)) / h

is already the per-unit-time derivative: it approximates the step-average of
D_s F over [s_j, s_j + dt] (exactly 1 for F = W_T). The suffix of the path is
re-run through the same Euler scheme with common random numbers, so
perturbations after an evaluation time cannot touch it and the adaptedness
zeros are bit-exact.

Square-integrable-derivative membership is a limit statement and is not
certified numerically; what is checked are the computable hypotheses (the
chain-rule identity and the uniform L2 bound of the derivative sequence).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .models import DiffusionModel
from .simulate import PathEnsemble, SamplePath, _advance
from .transforms import TransformSpec, gradient as analytic_gradient


@dataclass(frozen=True)
class PathFunctional:
    """Named path functional evaluated at fixed times."""

    name: str
    times: np.ndarray                    # (I,) evaluation times (grid points)
    fn: Callable[[SamplePath], np.ndarray]   # path -> (I,) values


def state_at_times(name: str, times) -> PathFunctional:
    """Functional returning the (scalar) state at the given grid times."""
    times = np.atleast_1d(np.asarray(times, dtype=float))

    def fn(path: SamplePath) -> np.ndarray:
        idx = np.searchsorted(path.grid, times)
        return path.values[idx, 0]

    return PathFunctional(name=name, times=times, fn=fn)


def transform_at_times(transform: TransformSpec, times) -> PathFunctional:
    times = np.atleast_1d(np.asarray(times, dtype=float))

    def fn(path: SamplePath) -> np.ndarray:
        idx = np.searchsorted(path.grid, times)
        return np.atleast_1d(transform(times, path.values[idx]))

    return PathFunctional(name=transform.name, times=times, fn=fn)


@dataclass(frozen=True)
class MalliavinMatrix:
    s_times: np.ndarray      # (J,) perturbation times
    t_times: np.ndarray      # (I,) functional evaluation times
    matrix: np.ndarray       # (I, J), D[i][j] ~ D_{s_j} F(t_i)
    h: float


def _grid_indices(grid: np.ndarray, times: np.ndarray, what: str) -> np.ndarray:
    idx = np.searchsorted(grid, times)
    idx = np.clip(idx, 0, grid.shape[0] - 1)
    if np.any(np.abs(grid[idx] - times) > 1e-9 * np.maximum(1.0, np.abs(times))):
        raise ValueError(f"{what} must be grid points")
    return idx


def _perturbed_values(model: DiffusionModel, base: SamplePath, step: int, h: float) -> np.ndarray:
    """State values after bumping increment `step` by h; prefix reused bit-exactly."""
    inc = base.increments[step:].copy()
    inc[0, 0] += h
    suffix = _advance(model, base.grid[step:], base.values[step], inc)
    out = base.values.copy()
    out[step + 1:] = suffix[1:]
    return out


def malliavin_fd(model: DiffusionModel, functional: PathFunctional, base_path: SamplePath,
                 s_times, h: float) -> MalliavinMatrix:
    """Finite-difference Malliavin matrix of the functional along one path."""
    if h <= 0:
        raise ValueError("bump size h must be positive")
    if model.dimension != 1:
        raise ValueError("the Malliavin module handles scalar models")
    if base_path.increments is None:
        raise ValueError("base path must retain its driver increments")
    s_times = np.atleast_1d(np.asarray(s_times, dtype=float))
    s_idx = _grid_indices(base_path.grid, s_times, "perturbation times")
    base_vals = np.asarray(functional.fn(base_path), dtype=float)
    D = np.empty((base_vals.shape[0], s_times.shape[0]))
    for j, k in enumerate(s_idx):
        pert = SamplePath(grid=base_path.grid,
                          values=_perturbed_values(model, base_path, int(k), h),
                          increments=None)
        D[:, j] = (np.asarray(functional.fn(pert), dtype=float) - base_vals) / h
    return MalliavinMatrix(s_times=s_times, t_times=functional.times, matrix=D, h=h)


def default_bump(grid: np.ndarray, scale: float = 1e-4) -> float:
    """h = scale * sqrt(dt): balances truncation against increment magnitude."""
    return scale * float(np.sqrt(grid[1] - grid[0]))


def chain_rule_check(transform: TransformSpec, model: DiffusionModel, ensemble: PathEnsemble,
                     t: float, h: float, s_times=None) -> dict:
    """Residual of D f(t, X_t) = f_x(t, X_t) * D X_t, per path.

    Both sides come from the same perturbed re-simulations (one suffix re-run
    per perturbation time), so the comparison isolates the chain rule itself.
    Requires an analytic gradient on the transform.
    """
    if transform.f_x is None:
        raise ValueError(f"transform {transform.name!r} has no analytic gradient")
    grid = ensemble.grid
    if s_times is None:
        k = max(1, ensemble.grid.shape[0] // 16)
        s_times = grid[k:-1:k][:8]
    s_times = np.atleast_1d(np.asarray(s_times, dtype=float))
    s_times = s_times[s_times < t]
    t_idx = int(_grid_indices(grid, np.array([t]), "evaluation time")[0])

    residuals = []
    for i in range(ensemble.n_paths):
        base = ensemble.path(i)
        x_t = float(base.values[t_idx, 0])
        f_t = float(transform(t, base.values[t_idx]))
        fx = float(np.asarray(analytic_gradient(transform, t, base.values[t_idx])).reshape(-1)[0])
        s_idx = _grid_indices(grid, s_times, "perturbation times")
        dF = np.empty(s_times.shape[0])
        dX = np.empty(s_times.shape[0])
        for j, k in enumerate(s_idx):
            vals = _perturbed_values(model, base, int(k), h)
            dX[j] = (vals[t_idx, 0] - x_t) / h
            dF[j] = (float(transform(t, vals[t_idx])) - f_t) / h
        rhs = fx * dX
        denom = float(np.linalg.norm(rhs))
        residuals.append(float(np.linalg.norm(dF - rhs)) / max(denom, 1e-300))
    residuals = np.asarray(residuals)
    return {
        "functional": transform.name,
        "t": float(t),
        "h": float(h),
        "n_paths": int(ensemble.n_paths),
        "n_perturbations": int(s_times.shape[0]),
        "mean_residual": float(residuals.mean()),
        "max_residual": float(residuals.max()),
    }


def uniform_l2_bound(f_sequence, model: DiffusionModel, ensemble: PathEnsemble, t: float,
                     h: float | None = None, s_points: int = 16,
                     require_bounded: bool = True, growth_factor: float = 2.0) -> dict:
    """Estimate E int_0^t |D_s F^n|^2 ds for each member of a transform sequence.

    f_sequence entries need a value(s, x) evaluator (smoothed transforms) or
    are TransformSpecs. The estimate thins the perturbation grid to s_points
    and reports the sequence, its max, and a violation flag if it grows by
    more than growth_factor from its first entry. The boundedness claim of
    the underlying transform is checked unless require_bounded=False (the
    report records the claim either way).
    """
    if not f_sequence:
        raise ValueError("f_sequence must be nonempty")
    grid = ensemble.grid
    h = default_bump(grid) if h is None else h
    t_idx = int(_grid_indices(grid, np.array([t]), "evaluation time")[0])
    stride = max(1, t_idx // s_points)
    s_idx = np.arange(0, t_idx, stride)[:s_points]
    weight = t / s_idx.shape[0]

    bounded_claims = []
    estimates = []
    labels = []
    for entry in f_sequence:
        if isinstance(entry, TransformSpec):
            value = entry
            bounded = entry.bounded
            labels.append(entry.name)
        else:
            value = entry.value
            bounded = getattr(entry.transform, "bounded", False)
            labels.append(f"{entry.transform.name}~n={entry.n}")
        bounded_claims.append(bool(bounded))
        if require_bounded and not bounded:
            raise ValueError(
                "transform is not flagged bounded; pass require_bounded=False to override")
        per_path = np.empty(ensemble.n_paths)
        for i in range(ensemble.n_paths):
            base = ensemble.path(i)
            f_base = float(value(t, base.values[t_idx][None, :])[0]
                           if not isinstance(entry, TransformSpec)
                           else entry(t, base.values[t_idx]))
            acc = 0.0
            for k in s_idx:
                vals = _perturbed_values(model, base, int(k), h)
                f_pert = float(value(t, vals[t_idx][None, :])[0]
                               if not isinstance(entry, TransformSpec)
                               else entry(t, vals[t_idx]))
                acc += ((f_pert - f_base) / h) ** 2
            per_path[i] = acc * weight
        estimates.append(float(per_path.mean()))

    estimates_arr = np.asarray(estimates)
    violation = bool(estimates_arr.max() > growth_factor * max(estimates_arr[0], 1e-300))
    return {
        "t": float(t),
        "h": float(h),
        "labels": labels,
        "bound_sequence": estimates,
        "max_bound": float(estimates_arr.max()),
        "bounded_claims": bounded_claims,
        "growth_violation": violation,
    }
