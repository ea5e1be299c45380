"""Euler-Maruyama simulation with counter-based per-path substreams.

Every path draws its Gaussian increments from a Philox stream keyed by
(master_seed, stream_tag, path_index), so ensembles are reproducible path by
path, independent of worker count and of how many paths are requested.
Increments are retained on the path: re-running the scheme on them reproduces
the stored values bit-exactly, and the Malliavin module perturbs them
directly.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import PathBlowUpError
from .models import DiffusionModel

# stream tags namespacing the Philox key space
PATH_STREAM = 0
AUX_STREAM = 1
SCENARIO_STREAM = 2


def uniform_grid(steps: int, horizon: float) -> np.ndarray:
    """Uniform grid 0, dt, 2dt, ..., K*dt with dt = horizon/steps."""
    if steps < 1:
        raise ValueError("steps must be >= 1")
    return np.arange(steps + 1, dtype=float) * (horizon / steps)


def check_grid(grid: np.ndarray, horizon: float | None = None) -> np.ndarray:
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or grid.size < 2:
        raise ValueError("grid must be a 1-d array with at least two points")
    if grid[0] != 0.0 or np.any(np.diff(grid) <= 0):
        raise ValueError("grid must start at 0 and be strictly increasing")
    if horizon is not None and grid[-1] > horizon * (1 + 1e-12):
        raise ValueError(f"grid endpoint {grid[-1]} exceeds horizon {horizon}")
    return grid


@dataclass(frozen=True)
class SamplePath:
    """One trajectory: grid, states, and the Brownian increments that drove it."""

    grid: np.ndarray        # (K+1,)
    values: np.ndarray      # (K+1, m)
    increments: np.ndarray | None = None   # (K, m) Brownian increments, if a driver exists

    def __post_init__(self):
        if self.values.shape[0] != self.grid.shape[0]:
            raise ValueError("values and grid lengths differ")
        if self.increments is not None and self.increments.shape[0] != self.grid.shape[0] - 1:
            raise ValueError("need exactly one increment per step")

    @property
    def steps(self) -> int:
        return self.grid.shape[0] - 1

    @property
    def dimension(self) -> int:
        return self.values.shape[1]

    @property
    def scalar(self) -> np.ndarray:
        """Values as a flat array; only meaningful for m=1 paths."""
        return self.values[:, 0]


def scalar_path(grid: np.ndarray, values: np.ndarray) -> SamplePath:
    """Wrap a scalar time series as a SamplePath (no driver increments)."""
    return SamplePath(grid=np.asarray(grid, float), values=np.asarray(values, float)[:, None])


@dataclass(frozen=True)
class PathEnsemble:
    """Stacked ensemble on a shared grid; per-path views via path(i)."""

    grid: np.ndarray          # (K+1,)
    values: np.ndarray        # (P, K+1, m)
    increments: np.ndarray    # (P, K, m)
    master_seed: int
    substream_ids: tuple

    @property
    def n_paths(self) -> int:
        return self.values.shape[0]

    @property
    def dimension(self) -> int:
        return self.values.shape[2]

    def path(self, i: int) -> SamplePath:
        return SamplePath(grid=self.grid, values=self.values[i], increments=self.increments[i])

    def paths(self):
        return (self.path(i) for i in range(self.n_paths))


def substream(master_seed: int, stream: int, index: int) -> np.random.Generator:
    """Counter-based generator for one logical stream."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence((master_seed, stream, index))))


def _advance(model: DiffusionModel, grid: np.ndarray, x0: np.ndarray,
             increments: np.ndarray) -> np.ndarray:
    """Run the Euler scheme; increments (..., K, m) -> values (..., K+1, m).

    The constant-coefficient fast path and the general loop share this
    function so replaying stored increments is bit-identical to the original
    simulation.
    """
    dt = np.diff(grid)
    K = dt.shape[0]
    m = model.dimension
    lead = increments.shape[:-2]
    if model.sigma_constant and model.drift_is_constant:
        b = model.drift(0.0, x0[None, :])[0]
        sig = model.diffusion(0.0, x0[None, :])[0]
        steps = increments @ sig.T + b * dt[:, None]
        values = np.empty(lead + (K + 1, m))
        values[..., 0, :] = x0
        np.cumsum(steps, axis=-2, out=values[..., 1:, :])
        values[..., 1:, :] += x0
        if not np.all(np.isfinite(values)):
            bad = np.argwhere(~np.isfinite(values))
            raise PathBlowUpError(f"non-finite state at step {int(bad[0][-2])}")
        return values

    values = np.empty(lead + (K + 1, m))
    x = np.broadcast_to(x0, lead + (m,)).copy()
    values[..., 0, :] = x
    for k in range(K):
        t = float(grid[k])
        b = model.drift(t, x)
        sig = model.diffusion(t, x)
        step = b * dt[k] + np.einsum("...ij,...j->...i", sig, increments[..., k, :])
        x = x + step
        if not np.all(np.isfinite(x)):
            raise PathBlowUpError(f"non-finite state at step {k}")
        values[..., k + 1, :] = x
    return values


def replay(model: DiffusionModel, grid: np.ndarray, increments: np.ndarray) -> SamplePath:
    """Re-run the scheme on stored increments (bit-identical to simulate)."""
    values = _advance(model, grid, model.x0, increments)
    return SamplePath(grid=grid, values=values, increments=np.array(increments))


def _worker_count(workers: int | None) -> int:
    if workers is not None and workers > 0:
        return workers
    env = os.environ.get("ITOLAB_WORKERS", "")
    if env.strip():
        return max(1, int(env))
    return 1


def simulate(model: DiffusionModel, grid: np.ndarray, master_seed: int, n_paths: int,
             workers: int | None = None) -> PathEnsemble:
    """Simulate an ensemble of Euler-Maruyama paths.

    Deterministic given (master_seed, path index, grid); worker count only
    changes scheduling, never results.
    """
    grid = check_grid(grid, model.horizon)
    if n_paths < 1:
        raise ValueError("n_paths must be >= 1")
    K = grid.shape[0] - 1
    m = model.dimension
    dt = np.diff(grid)
    sqdt = np.sqrt(dt)

    values = np.empty((n_paths, K + 1, m))
    increments = np.empty((n_paths, K, m))

    def run_block(lo: int, hi: int) -> None:
        for i in range(lo, hi):
            g = substream(master_seed, PATH_STREAM, i)
            dW = g.standard_normal((K, m)) * sqdt[:, None]
            increments[i] = dW
            values[i] = _advance(model, grid, model.x0, dW)

    nw = _worker_count(workers)
    if nw <= 1 or n_paths == 1:
        run_block(0, n_paths)
    else:
        block = (n_paths + nw - 1) // nw
        bounds = [(lo, min(lo + block, n_paths)) for lo in range(0, n_paths, block)]
        with ThreadPoolExecutor(max_workers=nw) as pool:
            list(pool.map(lambda b: run_block(*b), bounds))

    ids = tuple((master_seed, PATH_STREAM, i) for i in range(n_paths))
    return PathEnsemble(grid=grid, values=values, increments=increments,
                        master_seed=master_seed, substream_ids=ids)


def export_ensemble_csv(ensemble: PathEnsemble, path: str) -> str:
    """Write the ensemble as CSV with columns path_id, t, x_1..x_m."""
    m = ensemble.dimension
    header = "path_id,t," + ",".join(f"x_{j+1}" for j in range(m))
    K1 = ensemble.grid.shape[0]
    rows = np.empty((ensemble.n_paths * K1, 2 + m))
    for i in range(ensemble.n_paths):
        sl = slice(i * K1, (i + 1) * K1)
        rows[sl, 0] = i
        rows[sl, 1] = ensemble.grid
        rows[sl, 2:] = ensemble.values[i]
    np.savetxt(path, rows, delimiter=",", header=header, comments="",
               fmt=["%d", "%.17g"] + ["%.17g"] * m)
    return path
