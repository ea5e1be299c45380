"""Path statistics: quadratic/total variation, Ito sums, and the occupation-time local-time oracle."""

from __future__ import annotations

import numpy as np

from .errors import GridMismatchError
from .simulate import PathEnsemble, SamplePath, scalar_path


def _need_two_points(path: SamplePath) -> None:
    if path.grid.shape[0] < 2:
        raise ValueError("path needs at least two points")


def quadratic_variation(path: SamplePath, per_coordinate: bool = False) -> SamplePath:
    """Running sum of squared increments (total over coordinates by default)."""
    _need_two_points(path)
    sq = np.diff(path.values, axis=0) ** 2
    if not per_coordinate:
        sq = sq.sum(axis=1, keepdims=True)
    out = np.zeros((path.grid.shape[0], sq.shape[1]))
    np.cumsum(sq, axis=0, out=out[1:])
    return SamplePath(grid=path.grid, values=out)


def total_variation(path: SamplePath) -> float:
    """Mesh-level total variation: sum of Euclidean increment norms."""
    _need_two_points(path)
    inc = np.diff(path.values, axis=0)
    return float(np.linalg.norm(inc, axis=1).sum())


def total_variation_path(path: SamplePath) -> SamplePath:
    """Running mesh-level total variation as a scalar path."""
    _need_two_points(path)
    inc = np.linalg.norm(np.diff(path.values, axis=0), axis=1)
    out = np.zeros(path.grid.shape[0])
    np.cumsum(inc, out=out[1:])
    return scalar_path(path.grid, out)


def ito_integral(integrand: np.ndarray, driver: SamplePath) -> SamplePath:
    """Left-point Riemann-Ito sums of the integrand against the driver.

    integrand holds samples at the grid points (the last one is unused);
    shape (K+1,) for scalar m=1 integrands or (K+1, m) for gradients dotted
    with the vector increments.
    """
    _need_two_points(driver)
    integrand = np.asarray(integrand, dtype=float)
    K1 = driver.grid.shape[0]
    if integrand.shape[0] != K1:
        raise GridMismatchError(
            f"integrand has {integrand.shape[0]} samples, driver grid has {K1} points")
    dX = np.diff(driver.values, axis=0)
    if integrand.ndim == 1:
        if driver.dimension != 1:
            raise GridMismatchError("scalar integrand against a multi-dimensional driver")
        contrib = integrand[:-1] * dX[:, 0]
    else:
        if integrand.shape[1] != driver.dimension:
            raise GridMismatchError("integrand and driver dimensions differ")
        contrib = np.einsum("ki,ki->k", integrand[:-1], dX)
    out = np.zeros(K1)
    np.cumsum(contrib, out=out[1:])
    return scalar_path(driver.grid, out)


def local_time_oracle(path: SamplePath, a: float, eps: float) -> SamplePath:
    """Occupation-time estimate of local time at level a.

    Running (1/2eps) * sum over steps of 1{|X_{t_k} - a| < eps} dt (left
    endpoints). Converges, first in eps then in mesh, to L_t^a for
    Brownian-type scalar paths; independent of the decomposition machinery,
    which is exactly why it serves as the Tanaka ground truth.
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    if path.dimension != 1:
        raise ValueError("local time oracle is defined for scalar paths")
    x = path.values[:-1, 0]
    dt = np.diff(path.grid)
    occupied = (np.abs(x - a) < eps).astype(float)
    out = np.zeros(path.grid.shape[0])
    np.cumsum(occupied * dt / (2.0 * eps), out=out[1:])
    return scalar_path(path.grid, out)


def export_statistics_csv(ensemble: PathEnsemble, path: str, level: float = 0.0,
                          eps: float = 0.01) -> str:
    """Per-path statistics CSV: path_id, t, qv, tv_running, local_time."""
    header = "path_id,t,qv,tv_running,local_time"
    K1 = ensemble.grid.shape[0]
    rows = np.empty((ensemble.n_paths * K1, 5))
    for i in range(ensemble.n_paths):
        p = ensemble.path(i)
        sl = slice(i * K1, (i + 1) * K1)
        rows[sl, 0] = i
        rows[sl, 1] = ensemble.grid
        rows[sl, 2] = quadratic_variation(p).scalar
        rows[sl, 3] = total_variation_path(p).scalar
        rows[sl, 4] = local_time_oracle(p, level, eps).scalar
    np.savetxt(path, rows, delimiter=",", header=header, comments="",
               fmt=["%d"] + ["%.17g"] * 4)
    return path
